"""Sea-state spectra and time-domain wave synthesis.

A sea state is described by a one-sided spectral density S(omega) in
m^2 s/rad.  Two families are supported: the Pierson-Moskowitz form
(significant height Hs, peak period Tp) and a flat band of constant
density (used for broadband disturbance and measurement-noise signals).
A spectrum is discretized into a finite set of harmonics whose
superposition gives a stationary realization

    eta(t) = sum_n A_n cos(omega_n t + phi_n),
    A_n    = sqrt(2 S(omega_n) d_omega),

with d_omega = 2 pi / duration, nominal frequencies omega_n = n d_omega,
uniform random phases on (-pi, pi), and optional uniform frequency jitter
of +-d_omega/2 that breaks the exact periodicity of the harmonic comb.
Amplitudes are always evaluated on the nominal grid; jitter moves only
the frequency at which each component oscillates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

# Temporary working arrays in synthesize() are kept near this many bytes.
_CHUNK_BYTES = 32 * 1024 * 1024


@dataclass
class TimeSeries:
    """Uniformly sampled scalar series."""

    t0: float  # time of first sample [s]
    dt: float  # sample interval [s]
    values: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    @property
    def duration(self) -> float:
        return self.dt * (len(self.values) - 1)

    def to_csv(self, path) -> None:
        """Write the series as two-column CSV with header ``t,value``.

        Both columns use %.17g formatting so a write/read round trip
        reproduces the doubles exactly.
        """
        t = self.times
        v = np.asarray(self.values, dtype=float)
        with open(path, "w") as f:
            f.write("t,value\n")
            for k in range(v.size):
                f.write("%.17g,%.17g\n" % (t[k], v[k]))

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        """Read a series written by :meth:`to_csv`.

        The time column must be uniform; a maximum deviation of 1e-9 s
        from the inferred grid raises ValueError.
        """
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != 2:
            raise ValueError("expected two columns t,value in %s" % path)
        t = data[:, 0]
        if len(t) < 2:
            raise ValueError("series needs at least two samples")
        dt = (t[-1] - t[0]) / (len(t) - 1)
        grid = t[0] + dt * np.arange(len(t))
        if np.max(np.abs(t - grid)) > 1e-9:
            raise ValueError("time column of %s is not uniformly sampled" % path)
        return cls(t0=float(t[0]), dt=float(dt), values=data[:, 1].copy())


@dataclass
class PiersonMoskowitz:
    """Pierson-Moskowitz spectrum parameterized by (Hs, Tp).

    S(omega) = 0.31/(2 pi) * Tp * Hs^2 * x^-5 * exp(-1.25 x^-4),
    x = omega Tp / (2 pi).  The density peaks at omega_p = 2 pi / Tp
    and its zeroth moment is 0.062 Hs^2 exactly, so the significant
    height recovered as 4 sqrt(m0) is 0.996 Hs.
    """

    hs: float  # significant wave height [m]
    tp: float  # peak period [s]

    @property
    def omega_p(self) -> float:
        """Peak frequency [rad/s]."""
        return TWO_PI / self.tp

    def density(self, omega: np.ndarray) -> np.ndarray:
        """One-sided spectral density [m^2 s/rad] at omega [rad/s]."""
        omega = np.asarray(omega, dtype=float)
        x = omega * self.tp / TWO_PI
        out = np.zeros_like(x)
        pos = x > 0.0
        xp = x[pos]
        out[pos] = (0.31 / TWO_PI) * self.tp * self.hs**2 * xp**-5 * np.exp(
            -1.25 * xp**-4
        )
        return out

    def zeroth_moment(self, omega_max: float | None = None) -> float:
        """Integral of the density up to omega_max (all of it if None).

        Closed form: m0(<= w) = 0.062 Hs^2 exp(-1.25 (omega_p/w)^4).
        """
        m0 = 0.062 * self.hs**2
        if omega_max is None:
            return m0
        x = omega_max / self.omega_p
        return m0 * float(np.exp(-1.25 * x**-4))


@dataclass
class ConstantBand:
    """Flat density s0 on [omega_lo, omega_hi], zero outside.

    Total variance of an ideal realization is s0 * (omega_hi - omega_lo).
    """

    s0: float  # density [units^2 s/rad]
    omega_lo: float  # [rad/s]
    omega_hi: float  # [rad/s]

    def __post_init__(self):
        if not 0.0 <= self.omega_lo < self.omega_hi:
            raise ValueError("need 0 <= omega_lo < omega_hi")

    def density(self, omega: np.ndarray) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        out = np.zeros_like(omega)
        out[(omega >= self.omega_lo) & (omega <= self.omega_hi)] = self.s0
        return out

    def variance(self) -> float:
        return self.s0 * (self.omega_hi - self.omega_lo)


@dataclass
class HarmonicSet:
    """Finite cosine decomposition of a spectrum realization."""

    amplitudes: np.ndarray  # [signal units]
    omegas: np.ndarray  # [rad/s], jittered if requested
    phases: np.ndarray  # [rad] on (-pi, pi)
    delta_omega: float  # nominal grid spacing [rad/s]

    def __post_init__(self):
        n = len(self.amplitudes)
        if len(self.omegas) != n or len(self.phases) != n:
            raise ValueError("component arrays must share one length")

    def variance(self) -> float:
        """Variance of the infinite-duration realization, sum A^2 / 2."""
        return float(np.sum(self.amplitudes**2) / 2.0)


def default_component_count(spec, duration: float) -> int:
    """Component count covering the spectrum support on the nominal grid.

    Pierson-Moskowitz support is truncated at 4 omega_p, which keeps
    99.5 percent of the zeroth moment; a flat band is covered up to its
    upper edge.
    """
    d_omega = TWO_PI / duration
    if isinstance(spec, PiersonMoskowitz):
        omega_max = 4.0 * spec.omega_p
    elif isinstance(spec, ConstantBand):
        omega_max = spec.omega_hi
    else:
        raise TypeError("unknown spectrum type %r" % type(spec).__name__)
    return max(1, int(np.ceil(omega_max / d_omega)))


def discretize(
    spec,
    duration: float,
    seed,
    n_components: int | None = None,
    jitter: bool = True,
) -> HarmonicSet:
    """Discretize a spectrum into harmonics for a given record length.

    Args:
        spec: PiersonMoskowitz or ConstantBand.
        duration: record length [s]; fixes d_omega = 2 pi / duration.
        seed: seed or SeedSequence for phases and jitter.
        n_components: nominal grid size; default covers the support.
        jitter: move each frequency by uniform(-d_omega/2, +d_omega/2).

    Components whose nominal density is zero (outside a flat band) are
    dropped.  Random draws happen in a fixed order, frequencies first
    and phases second, so a seed pins the realization.
    """
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    d_omega = TWO_PI / duration
    if n_components is None:
        n_components = default_component_count(spec, duration)
    n = np.arange(1, n_components + 1)
    omega_nom = n * d_omega
    amp = np.sqrt(2.0 * spec.density(omega_nom) * d_omega)
    rng = np.random.default_rng(seed)
    if jitter:
        omega = omega_nom + d_omega * rng.uniform(-0.5, 0.5, size=omega_nom.size)
    else:
        omega = omega_nom
    phase = rng.uniform(-np.pi, np.pi, size=omega_nom.size)
    keep = amp > 0.0
    return HarmonicSet(
        amplitudes=amp[keep],
        omegas=omega[keep],
        phases=phase[keep],
        delta_omega=d_omega,
    )


def synthesize(harmonics: HarmonicSet, n_samples: int, dt: float) -> TimeSeries:
    """Superpose the harmonics on a uniform grid starting at t = 0.

    values[k] = sum_n A_n cos(omega_n k dt + phi_n).  The cosine table
    is evaluated in component chunks to bound temporary memory.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    t = dt * np.arange(n_samples)
    values = np.zeros(n_samples)
    n_comp = len(harmonics.amplitudes)
    chunk = max(1, int(_CHUNK_BYTES / (8 * n_samples)))
    for i in range(0, n_comp, chunk):
        sl = slice(i, min(i + chunk, n_comp))
        arg = np.outer(harmonics.omegas[sl], t)
        arg += harmonics.phases[sl][:, None]
        np.cos(arg, out=arg)
        values += harmonics.amplitudes[sl] @ arg
    return TimeSeries(t0=0.0, dt=dt, values=values)


def band_limited_series(
    s0: float,
    omega_lo: float,
    omega_hi: float,
    duration: float,
    dt: float,
    seed,
    jitter: bool = True,
) -> TimeSeries:
    """Realize a flat-band signal over [0, duration] sampled at dt.

    The band must fit under the sampling Nyquist rate pi/dt, otherwise
    components of the realization would alias.
    """
    if omega_hi > np.pi / dt:
        raise ValueError(
            "band edge %.4g rad/s exceeds Nyquist %.4g rad/s" % (omega_hi, np.pi / dt)
        )
    spec = ConstantBand(s0=s0, omega_lo=omega_lo, omega_hi=omega_hi)
    hs = discretize(spec, duration, seed, jitter=jitter)
    n = int(round(duration / dt)) + 1
    return synthesize(hs, n, dt)
