"""Four-state hydraulic winch plant and its fixed-step integrator.

State vector x = [x_p, delta_p, zdot_w, z_w]:

    x_p      normalized swash-plate position, clamped to [-1, 1]
    delta_p  pressure differential across the hydraulic circuit [Pa]
    zdot_w   vertical payout rate of the winch line [m/s]
    z_w      vertical payout displacement [m]

Dynamics are linear apart from the swash clamp:

    xdot = A x + B u_p + [0, 0, d0 + d_tilde, 0]^T

with u_p the swash command, d0 the gravity bias of the hanging load,
and d_tilde an optional acceleration disturbance.  The swash drive is a
first-order lag (time constant T_w); saturation is realized by clamping
x_p after every integrator substep while the lag keeps integrating the
clamped value.

Integration is classical fixed-step RK4.  For a linear system with a
zero-order-hold input c over one substep h, the RK4 update is exactly

    x+ = M x + N c,
    M  = sum_{j=0..4} (hA)^j / j!,
    N  = h sum_{j=0..3} (hA)^j / (j+1)!,

so M and N are precomputed once.  A full control interval of n substeps
additionally precomputes M^n and (sum_k M^k) N; that aggregate path is
taken whenever the swash cannot touch its clamp inside the interval,
which is exact because x_p moves monotonically toward its command.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


class PlantFault(Exception):
    """Raised when a plant step sees non-finite state or inputs."""


@dataclass
class WinchParams:
    """Physical winch and hydraulic circuit constants."""

    g: float = 9.8  # gravity [m/s^2]
    K_oil: float = 1.8e9  # oil bulk modulus [Pa]
    V_c: float = 2e-3  # circuit oil volume [m^3]
    D_p: float = 40e-6  # pump displacement [m^3/rad]
    D_m: float = 4e-6  # motor displacement [m^3/rad]
    omega_p: float = 45.0  # pump rotation rate, used numerically as given
    k1_p: float = 0.0  # pump leakage coefficient
    k1_m: float = 0.0  # motor leakage coefficient
    T_w: float = 1.0  # swash drive time constant [s]
    k: float = 200.0  # gearbox ratio [-]
    r: float = 0.5  # drum radius [m]
    eta_m: float = 0.65  # motor mechanical efficiency [-]
    J_w: float = 150.0  # winch inertia [kg m^2]
    b: float = 1e4  # rotational damping [N m s/rad]
    m: float = 1000.0  # payload mass [kg]


PARAM_NAMES = tuple(WinchParams.__dataclass_fields__)


@dataclass
class WinchState:
    """Plant state snapshot."""

    x_p: float = 0.0  # swash position [-1, 1]
    delta_p: float = 0.0  # pressure differential [Pa]
    zdot: float = 0.0  # line payout rate [m/s]
    z: float = 0.0  # line payout displacement [m]

    def as_array(self) -> np.ndarray:
        return np.array([self.x_p, self.delta_p, self.zdot, self.z])

    @classmethod
    def from_array(cls, x: np.ndarray) -> "WinchState":
        return cls(x_p=float(x[0]), delta_p=float(x[1]), zdot=float(x[2]), z=float(x[3]))


@dataclass
class PlantMatrices:
    """Continuous-time system matrices and the gravity bias."""

    a: np.ndarray  # (4, 4)
    b: np.ndarray  # (4,)
    c: np.ndarray  # (4,) measurement row selecting z_w
    d0: float  # gravity bias acceleration [m/s^2]


def system_matrices(params: WinchParams) -> PlantMatrices:
    """Assemble A, B, C, and d0 from the physical constants.

    With zero leakage the pressure row has no self term, and the
    rigid-body row couples only pressure and rate.  Nominal constants
    give A[1] = [-3.24e9, 0, 2.88e9, 0], A[2] = [0, -6.5e-7, -25, 0],
    and d0 = 6.125.
    """
    p = params
    j_total = p.J_w + p.m * p.r**2
    a = np.zeros((4, 4))
    a[0, 0] = -1.0 / p.T_w
    a[1, 0] = -2.0 * p.K_oil * p.D_p * p.omega_p / p.V_c
    a[1, 1] = -2.0 * p.K_oil * (p.k1_p + p.k1_m) / p.V_c
    a[1, 2] = 2.0 * p.K_oil * p.D_m * p.k / (p.r * p.V_c)
    a[2, 1] = -p.eta_m * p.D_m * p.k * p.r / j_total
    a[2, 2] = -p.b / j_total
    a[3, 2] = 1.0
    b = np.array([1.0 / p.T_w, 0.0, 0.0, 0.0])
    c = np.array([0.0, 0.0, 0.0, 1.0])
    d0 = p.r**2 * p.m * p.g / j_total
    return PlantMatrices(a=a, b=b, c=c, d0=d0)


def hanging_equilibrium(params: WinchParams) -> WinchState:
    """Rest state holding the load against gravity.

    Zero swash and zero rate require the pressure differential to
    cancel d0: delta_p = -d0 / A[2][1] (9.4231e6 Pa nominally).
    """
    mat = system_matrices(params)
    return WinchState(x_p=0.0, delta_p=-mat.d0 / mat.a[2, 1], zdot=0.0, z=0.0)


def rk4_step_matrices(a: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact classical-RK4 transition pair (M, N) for ZOH input."""
    ah = h * a
    ah2 = ah @ ah
    ah3 = ah2 @ ah
    ah4 = ah3 @ ah
    eye = np.eye(a.shape[0])
    m = eye + ah + ah2 / 2.0 + ah3 / 6.0 + ah4 / 24.0
    n = h * (eye + ah / 2.0 + ah2 / 6.0 + ah3 / 24.0)
    return m, n


class WinchPlant:
    """Stateless stepper bundling parameters with integrator caches.

    The caller owns the state; :meth:`step` maps (state, command,
    disturbance) over one control interval.  gravity=False removes the
    d0 bias (useful for symmetric experiments and clean baselines).
    """

    def __init__(
        self,
        params: WinchParams | None = None,
        substep: float = 1e-3,
        gravity: bool = True,
    ):
        self.params = params if params is not None else WinchParams()
        self.substep = float(substep)
        self.gravity = gravity
        self.matrices = system_matrices(self.params)
        self._cache: dict = {}

    def _stepper(self, dt: float):
        entry = self._cache.get(dt)
        if entry is None:
            n_sub = max(1, int(round(dt / self.substep)))
            h = dt / n_sub
            m_sub, n_mat = rk4_step_matrices(self.matrices.a, h)
            m_full = np.eye(4)
            s_full = np.zeros((4, 4))
            for _ in range(n_sub):
                s_full = m_sub @ s_full + np.eye(4)
                m_full = m_sub @ m_full
            s_full = s_full @ n_mat
            entry = (n_sub, m_sub, n_mat, m_full, s_full)
            self._cache[dt] = entry
        return entry

    def bias(self, d_tilde: float = 0.0) -> np.ndarray:
        d = np.zeros(4)
        d[2] = (self.matrices.d0 if self.gravity else 0.0) + d_tilde
        return d

    def step_array(
        self, x: np.ndarray, u: float, d_tilde: float = 0.0, dt: float = 0.1
    ) -> np.ndarray:
        """Advance a raw state array by one control interval.

        The command and disturbance are held constant over the interval
        (zero-order hold).  The swash clamp is enforced after every
        substep; the aggregate update is used when the whole interval
        provably stays clear of the clamp.
        """
        if not (np.all(np.isfinite(x)) and np.isfinite(u) and np.isfinite(d_tilde)):
            raise PlantFault("non-finite state or input")
        n_sub, m_sub, n_mat, m_full, s_full = self._stepper(dt)
        c = self.matrices.b * u + self.bias(d_tilde)
        candidate = m_full @ x + s_full @ c
        if abs(candidate[0]) <= 1.0:
            return candidate
        w = n_mat @ c
        x = x.copy()
        for _ in range(n_sub):
            x = m_sub @ x + w
            if x[0] > 1.0:
                x[0] = 1.0
            elif x[0] < -1.0:
                x[0] = -1.0
        return x

    def step(
        self, state: WinchState, u: float, d_tilde: float = 0.0, dt: float = 0.1
    ) -> WinchState:
        return WinchState.from_array(self.step_array(state.as_array(), u, d_tilde, dt))


def parse_param_overrides(path) -> dict:
    """Read a flat ``name = value`` override file for WinchParams.

    Names mirror the physical symbols (K_oil, V_c, D_p, ...).  Blank
    lines and # comments are skipped.  Unknown names raise ValueError
    listing every offender.
    """
    values = {}
    unknown = []
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError("malformed override line: %r" % raw.strip())
            name, text = [part.strip() for part in line.split("=", 1)]
            if name not in PARAM_NAMES:
                unknown.append(name)
                continue
            values[name] = float(text)
    if unknown:
        raise ValueError(
            "unknown winch parameter(s): %s" % ", ".join(sorted(unknown))
        )
    return values


def winch_params_from_file(path, base: WinchParams | None = None) -> WinchParams:
    """WinchParams with file overrides applied over base (or defaults)."""
    base = base if base is not None else WinchParams()
    return replace(base, **parse_param_overrides(path))
