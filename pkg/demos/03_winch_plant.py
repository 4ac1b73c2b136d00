"""The hydraulic winch on its own.

Four states: swash-plate position, load pressure, payout rate and
payout.  The swash command is the single input and saturates at +-1.
A constant gravity term pulls on the drum; the hanging equilibrium is
the pressure that exactly holds the load.  The demo exercises a step
command, the equilibrium hold, and saturation under an overdriven
command.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from heavelab.plant import WinchPlant, WinchParams, hanging_equilibrium

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

params = WinchParams()
plant = WinchPlant(params)
eq = hanging_equilibrium(params)
print("hanging equilibrium pressure: %.1f Pa" % eq.delta_p)

dt = 0.01
n = 800
t = dt * np.arange(n + 1)


def run(u_of_k, x0):
    x = x0.copy()
    traj = [x.copy()]
    for k in range(n):
        x = plant.step_array(x, u_of_k(k), 0.0, dt)
        traj.append(x.copy())
    return np.array(traj)


step = run(lambda k: 0.3 if k >= 100 else 0.0, eq.as_array())
hold = run(lambda k: 0.0, eq.as_array())
over = run(lambda k: 3.0 if k >= 100 else 0.0, eq.as_array())

fig, axes = plt.subplots(3, 1, figsize=(9, 9), sharex=True)
axes[0].plot(t, step[:, 0], label="u = 0.3 step")
axes[0].plot(t, np.clip(over[:, 0], -1.2, 1.2), label="u = 3.0 step (clamped)")
axes[0].axhline(1.0, color="k", lw=0.5, ls="--")
axes[0].set_ylabel("swash [-]")
axes[0].legend()
axes[1].plot(t, step[:, 2], label="rate, u = 0.3")
axes[1].plot(t, hold[:, 2], label="rate, u = 0")
axes[1].set_ylabel("payout rate [m/s]")
axes[1].legend()
axes[2].plot(t, step[:, 1] - eq.delta_p, label="pressure above equilibrium")
axes[2].set_ylabel("delta p - eq [Pa]")
axes[2].set_xlabel("t [s]")
axes[2].legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "03_winch_plant.png"), dpi=130)

print("steady rate for u = 0.3    : %.4f m/s" % step[-1, 2])
print("drift of the held load     : %.2e m/s" % np.max(np.abs(hold[:, 2])))
print("swash under 3x overdrive   : %.2f (clamped at 1)" % over[-1, 0])
print("figure -> %s" % os.path.join(OUT, "03_winch_plant.png"))
