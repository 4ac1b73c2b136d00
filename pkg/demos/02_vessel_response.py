"""From wave elevation to motion at the crane tip.

The vessel filters the sea: each degree of freedom responds like a
second order system whose gain and phase depend on frequency.  Heave,
roll and pitch are combined at the crane suspension point with lever
arms set by the crane geometry, giving the net vertical motion the
winch has to cancel.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from heavelab.seaway import PiersonMoskowitz, discretize, synthesize
from heavelab.vessel import (
    DOFS,
    CraneGeometry,
    motion_rate,
    net_winch_heave,
    parametric_rao,
    vessel_motions,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

rao = parametric_rao(heading_deg=135.0)
geometry = CraneGeometry()

fig, (ax_amp, ax_ph) = plt.subplots(2, 1, figsize=(9, 7), sharex=True)
for dof in DOFS:
    ax_amp.plot(rao.omegas, rao.amplitude[dof], label=dof)
    ax_ph.plot(rao.omegas, rao.phase[dof], label=dof)
ax_amp.set_ylabel("amplitude [-, rad/m]")
ax_amp.set_title("Parametric response operators, heading 135 deg")
ax_amp.legend()
ax_ph.set_xlabel("omega [rad/s]")
ax_ph.set_ylabel("phase [rad]")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "02_rao.png"), dpi=130)

# drive the operators with a moderate sea
duration = 600.0
dt = 0.1
wave = synthesize(
    discretize(PiersonMoskowitz(hs=4.0, tp=9.0), duration, seed=7), 6001, dt
)
motions = vessel_motions(wave, rao)
z_winch = net_winch_heave(motions["heave"], motions["roll"], motions["pitch"], geometry)
zdot_winch = motion_rate(z_winch)

window = slice(1000, 4000)
fig, ax = plt.subplots(figsize=(9, 4.5))
ax.plot(wave.times[window], wave.values[window], lw=0.7, label="wave")
ax.plot(z_winch.times[window], z_winch.values[window], lw=1.0, label="winch heave")
ax.set_xlabel("t [s]")
ax.set_ylabel("[m]")
ax.set_title("Wave elevation vs net vertical motion at the winch")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "02_winch_motion.png"), dpi=130)

print("crane arms: roll %.3f m, pitch %.3f m" % (geometry.roll_arm, geometry.pitch_arm))
for dof in DOFS:
    print("%s rms: %.4f" % (dof.ljust(6), np.std(motions[dof].values)))
print("net winch heave rms : %.4f m" % np.std(z_winch.values))
print("net winch rate rms  : %.4f m/s" % np.std(zdot_winch.values))
print("figures -> %s" % OUT)
