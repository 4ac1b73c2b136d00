"""Synthesize irregular seas from the Pierson-Moskowitz spectrum.

The spectrum fixes how much energy each wave frequency carries for a
given significant wave height Hs and peak period Tp.  Summing a few
thousand cosines with random phases (and a little frequency jitter so
the record does not repeat) turns that density into a surface
elevation time series whose statistics match the target sea.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from heavelab.seaway import PiersonMoskowitz, discretize, synthesize

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

SEA_STATES = [
    ("slight", 1.5, 6.0),
    ("moderate", 4.0, 9.0),
    ("rough", 6.0, 12.0),
    ("very rough", 8.5, 14.0),
]

omega = np.linspace(0.01, 3.0, 800)
fig, (ax_spec, ax_wave) = plt.subplots(2, 1, figsize=(9, 7))
for name, hs, tp in SEA_STATES:
    spec = PiersonMoskowitz(hs=hs, tp=tp)
    ax_spec.plot(omega, spec.density(omega), label="%s (Hs=%.1f m)" % (name, hs))
ax_spec.set_xlabel("omega [rad/s]")
ax_spec.set_ylabel("S(omega) [m^2 s]")
ax_spec.set_title("Pierson-Moskowitz density for four sea states")
ax_spec.legend()

# a 600 s moderate-sea record
duration = 600.0
dt = 0.1
spec = PiersonMoskowitz(hs=4.0, tp=9.0)
harmonics = discretize(spec, duration, seed=2024)
series = synthesize(harmonics, int(duration / dt) + 1, dt)

window = slice(0, 3000)
ax_wave.plot(series.times[window], series.values[window], lw=0.8)
ax_wave.set_xlabel("t [s]")
ax_wave.set_ylabel("elevation [m]")
ax_wave.set_title("300 s of the synthesized moderate sea")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "01_sea_synthesis.png"), dpi=130)

print("components kept: %d" % len(harmonics.amplitudes))
print("target Hs           : %.3f m" % spec.hs)
print("4*std of the record : %.3f m" % (4.0 * np.std(series.values)))
print("4*sqrt(m0) harmonics: %.3f m" % (4.0 * np.sqrt(harmonics.variance())))
print("figure -> %s" % os.path.join(OUT, "01_sea_synthesis.png"))
