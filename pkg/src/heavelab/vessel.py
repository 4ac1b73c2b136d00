"""Vessel motion transfer and crane-tip kinematics.

Wave elevation maps to heave, roll, and pitch through response amplitude
operators (RAOs) tabulated on a frequency grid.  The mapping runs in the
frequency domain: the wave record's rfft is multiplied bin by bin with
the complex operator |H(omega)| exp(i phase) and inverted.  A positive
stored phase therefore means the response leads the wave.

The three motions combine at the winch location into a single vertical
displacement.  With crane base at (x, y) on deck, boom length l, and
slew angle beta_s, small-angle geometry gives

    z_winch = eta3 + (y + l sin beta_s) eta4 - (x + l cos beta_s) eta5

with roll eta4 and pitch eta5 in radians.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seaway import TimeSeries

DOFS = ("heave", "roll", "pitch")


@dataclass
class DofResponse:
    """Second-order response stand-in for one degree of freedom.

    |H(omega)| = gain * wn^2 / sqrt((wn^2 - w^2)^2 + (2 zeta wn w)^2)
    phase      = -atan2(2 zeta wn w, wn^2 - w^2)

    The low-frequency amplitude tends to gain and the response lags the
    wave through resonance, reaching -pi well above it.
    """

    gain: float  # low-frequency amplitude [m/m or rad/m]
    omega_n: float  # natural frequency [rad/s]
    zeta: float  # damping ratio [-]

    def evaluate(self, omega: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        omega = np.asarray(omega, dtype=float)
        wn2 = self.omega_n**2
        re = wn2 - omega**2
        im = 2.0 * self.zeta * self.omega_n * omega
        amp = self.gain * wn2 / np.sqrt(re**2 + im**2)
        phase = -np.arctan2(im, re)
        return amp, phase


@dataclass
class RaoParams:
    """Per-DOF parametric triples used when no measured table is given.

    Defaults are calibrated stand-ins for a quartering-sea workboat:
    heave keeps unit low-frequency gain and rolls off across the wave
    band, roll resonates below the band, pitch sits mid-band with heavy
    damping.  They are transfer-shape placeholders, not hull
    predictions.
    """

    heave: DofResponse = field(
        default_factory=lambda: DofResponse(gain=1.0, omega_n=0.30, zeta=0.50)
    )
    roll: DofResponse = field(
        default_factory=lambda: DofResponse(gain=0.05, omega_n=0.19, zeta=0.08)
    )
    pitch: DofResponse = field(
        default_factory=lambda: DofResponse(gain=0.025, omega_n=0.55, zeta=0.40)
    )


@dataclass
class Rao:
    """Tabulated response operators for heave, roll, and pitch.

    amplitude and phase map each DOF name to an array over omegas.
    Frequencies are strictly increasing; amplitudes are nonnegative;
    phases are stored in radians (positive = response leads the wave).
    """

    omegas: np.ndarray  # [rad/s]
    amplitude: dict  # dof -> array, [m/m] for heave, [rad/m] for roll/pitch
    phase: dict  # dof -> array [rad]
    heading_deg: float  # wave heading the table applies to

    def __post_init__(self):
        if np.any(np.diff(self.omegas) <= 0.0):
            raise ValueError("RAO frequencies must be strictly increasing")
        for dof in DOFS:
            if dof not in self.amplitude or dof not in self.phase:
                raise ValueError("RAO table is missing DOF %r" % dof)
            if len(self.amplitude[dof]) != len(self.omegas):
                raise ValueError("amplitude length mismatch for %r" % dof)
            if len(self.phase[dof]) != len(self.omegas):
                raise ValueError("phase length mismatch for %r" % dof)
            if np.any(np.asarray(self.amplitude[dof]) < 0.0):
                raise ValueError("RAO amplitudes must be nonnegative")


def parametric_rao(
    params: RaoParams | None = None,
    heading_deg: float = 135.0,
    omegas: np.ndarray | None = None,
) -> Rao:
    """Tabulate the parametric second-order operators on a grid.

    Heading scales the excitation of roll by |sin(heading)| and of pitch
    by |cos(heading)|; heave is heading independent so its low-frequency
    amplitude stays at the heave gain.  The default grid spans 0.01 to
    6.0 rad/s in 1200 points.
    """
    if params is None:
        params = RaoParams()
    if omegas is None:
        omegas = np.linspace(0.01, 6.0, 1200)
    omegas = np.asarray(omegas, dtype=float)
    beta = np.radians(heading_deg)
    factors = {"heave": 1.0, "roll": abs(np.sin(beta)), "pitch": abs(np.cos(beta))}
    amplitude = {}
    phase = {}
    for dof in DOFS:
        amp, ph = getattr(params, dof).evaluate(omegas)
        amplitude[dof] = factors[dof] * amp
        phase[dof] = ph
    return Rao(omegas=omegas, amplitude=amplitude, phase=phase, heading_deg=heading_deg)


def response_series(wave: TimeSeries, rao: Rao, dof: str) -> TimeSeries:
    """Map a wave record through one DOF's operator.

    The rfft of the wave is multiplied by |H| exp(i phase) interpolated
    onto the record's frequency bins (linear in amplitude, linear in the
    unwrapped phase, endpoint values held outside table coverage) and
    inverted back to the time domain.
    """
    if dof not in DOFS:
        raise ValueError("unknown DOF %r" % dof)
    n = len(wave.values)
    spectrum = np.fft.rfft(wave.values)
    omega_bins = 2.0 * np.pi * np.fft.rfftfreq(n, d=wave.dt)
    amp = np.interp(omega_bins, rao.omegas, rao.amplitude[dof])
    unwrapped = np.unwrap(np.asarray(rao.phase[dof], dtype=float))
    ph = np.interp(omega_bins, rao.omegas, unwrapped)
    response = np.fft.irfft(spectrum * amp * np.exp(1j * ph), n=n)
    return TimeSeries(t0=wave.t0, dt=wave.dt, values=response)


def vessel_motions(wave: TimeSeries, rao: Rao) -> dict:
    """All three DOF responses for one wave record."""
    return {dof: response_series(wave, rao, dof) for dof in DOFS}


@dataclass
class CraneGeometry:
    """Crane base position and boom layout on deck."""

    x: float = -1.5  # base longitudinal position [m], forward positive
    y: float = 2.0  # base transverse position [m], starboard positive
    boom: float = 3.0  # boom length [m]
    slew_deg: float = 30.0  # slew angle from the bow [deg]

    @property
    def roll_arm(self) -> float:
        """Coefficient multiplying roll: y + l sin(beta_s) [m]."""
        return self.y + self.boom * np.sin(np.radians(self.slew_deg))

    @property
    def pitch_arm(self) -> float:
        """Coefficient multiplying pitch: -(x + l cos(beta_s)) [m]."""
        return -(self.x + self.boom * np.cos(np.radians(self.slew_deg)))


def _require_same_grid(a: TimeSeries, b: TimeSeries) -> None:
    if len(a.values) != len(b.values) or a.dt != b.dt or a.t0 != b.t0:
        raise ValueError("motion series must share one sampling grid")


def net_winch_heave(
    heave: TimeSeries,
    roll: TimeSeries,
    pitch: TimeSeries,
    geometry: CraneGeometry | None = None,
) -> TimeSeries:
    """Vertical winch displacement from the three motions.

    Evaluation order is fixed as (heave + c_roll * roll) + c_pitch *
    pitch so results are reproducible bit for bit across runs.
    """
    if geometry is None:
        geometry = CraneGeometry()
    _require_same_grid(heave, roll)
    _require_same_grid(heave, pitch)
    values = (
        heave.values + geometry.roll_arm * roll.values
    ) + geometry.pitch_arm * pitch.values
    return TimeSeries(t0=heave.t0, dt=heave.dt, values=values)


def motion_rate(series: TimeSeries) -> TimeSeries:
    """Time derivative by second-order differences.

    Central differences in the interior, one-sided at the ends (the
    np.gradient stencil).
    """
    return TimeSeries(
        t0=series.t0,
        dt=series.dt,
        values=np.gradient(series.values, series.dt),
    )


def write_rao_csv(path, rao: Rao) -> None:
    """Write an RAO table with its heading metadata line.

    Layout: a ``# heading_deg=<value>`` line, the header
    ``dof,omega,amplitude,phase_rad``, then rows grouped by DOF in
    (heave, roll, pitch) order with ascending frequency.
    """
    with open(path, "w") as f:
        f.write("# heading_deg=%.17g\n" % rao.heading_deg)
        f.write("dof,omega,amplitude,phase_rad\n")
        for dof in DOFS:
            amp = rao.amplitude[dof]
            ph = rao.phase[dof]
            for k in range(len(rao.omegas)):
                f.write(
                    "%s,%.17g,%.17g,%.17g\n" % (dof, rao.omegas[k], amp[k], ph[k])
                )


def read_rao_csv(path) -> Rao:
    """Read a table written by :func:`write_rao_csv`.

    All three DOFs must be present on one common ascending frequency
    grid; violations raise ValueError.
    """
    heading = None
    rows = {dof: [] for dof in DOFS}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("heading_deg"):
                    heading = float(body.split("=", 1)[1])
                continue
            if line.startswith("dof,"):
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ValueError("malformed RAO row: %r" % line)
            dof = parts[0].strip()
            if dof not in DOFS:
                raise ValueError("unknown DOF %r in RAO file" % dof)
            rows[dof].append([float(p) for p in parts[1:]])
    if heading is None:
        raise ValueError("RAO file lacks the # heading_deg metadata line")
    grids = {}
    amplitude = {}
    phase = {}
    for dof in DOFS:
        if not rows[dof]:
            raise ValueError("RAO file has no rows for DOF %r" % dof)
        table = np.array(rows[dof])
        grids[dof] = table[:, 0]
        amplitude[dof] = table[:, 1]
        phase[dof] = table[:, 2]
    omegas = grids["heave"]
    for dof in ("roll", "pitch"):
        if len(grids[dof]) != len(omegas) or np.any(grids[dof] != omegas):
            raise ValueError("RAO DOFs must share one frequency grid")
    return Rao(omegas=omegas, amplitude=amplitude, phase=phase, heading_deg=heading)
