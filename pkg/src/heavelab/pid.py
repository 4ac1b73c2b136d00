"""Discrete PD controller with a filtered derivative.

Continuous design:

    U(s) = (Kp + Kd s / (1 + Tf s)) E(s)

The derivative acts through a first-order filter so the controller has
finite bandwidth.  Discretization is bilinear (Tustin): substituting
s = (2/T)(z - 1)/(z + 1) into the derivative branch gives the
difference equation

    f_k = a f_{k-1} + c (e_k - e_{k-1}),
    a   = (2 Tf - T) / (2 Tf + T),
    c   = 2 Kd / (2 Tf + T),
    u_k = Kp e_k + f_k.

Forward Euler is unstable here at the 0.1 s control interval (its pole
sits at 1 - T/Tf = -2.33), which is why the bilinear map is used even
though its pole (-0.25 at T = 0.1) makes the derivative branch ring at
that rate.  The DC behaviour is exact: for a constant error the filter
state decays geometrically and u converges to Kp e.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class PdGains:
    """Proportional gain, derivative gain, derivative filter constant."""

    kp: float = 5.86
    kd: float = 5.46
    tf: float = 0.03  # derivative filter time constant [s]


class PdController:
    """Stateful discrete PD loop at a fixed sample interval."""

    def __init__(self, gains: PdGains | None = None, dt: float = 0.1):
        self.gains = gains if gains is not None else PdGains()
        self.dt = float(dt)
        denom = 2.0 * self.gains.tf + self.dt
        self._a = (2.0 * self.gains.tf - self.dt) / denom
        self._c = 2.0 * self.gains.kd / denom
        self.reset()

    def reset(self) -> None:
        """Zero the filter state and the remembered error."""
        self._f = 0.0
        self._e_prev = 0.0

    def step(self, e: float) -> float:
        """One control update for the current error sample."""
        self._f = self._a * self._f + self._c * (e - self._e_prev)
        self._e_prev = e
        return self.gains.kp * e + self._f
