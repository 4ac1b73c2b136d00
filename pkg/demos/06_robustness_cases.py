"""Stress cases: plant disturbance and sensor noise.

Three perturbations of the moderate sea state, all with the PD
baseline closing the loop:

  * a flat-band acceleration disturbance injected into the winch
    load dynamics (wind gusts, cable strum),
  * faint measurement noise on the vessel-motion feed, and
  * the same noise band a thousand times stronger.

The disturbance barely moves the compensation figure because the
stiff hydraulic loop swallows it.  Faint noise is invisible.  Strong
noise feeds through the derivative gain, rattles the swash against
its clamp, and drags the compensation down.
"""

import os
from dataclasses import replace

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from heavelab.evalkit import run_scenario, standard_scenarios
from heavelab.seaway import ConstantBand

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

moderate = replace(standard_scenarios()[1], duration=300.0)
noise_band = ConstantBand(s0=1e-6, omega_lo=3.14, omega_hi=30.0)

cases = [
    ("clean", moderate),
    ("disturbed", replace(moderate, disturbance=ConstantBand(10.0, 0.0, 0.5))),
    ("faint noise", replace(moderate, noise=noise_band)),
    ("loud noise", replace(moderate, noise=replace(noise_band, s0=1e-3))),
]

results = [(label, run_scenario(scenario)) for label, scenario in cases]

print("%-12s %8s %8s %8s" % ("case", "comp %", "sat frac", "snr dB"))
for label, result in results:
    snr = "%8.1f" % result.snr_db if result.snr_db is not None else "       -"
    print(
        "%-12s %8.2f %8.3f %s"
        % (label, result.comp_percent, result.sat_fraction, snr)
    )

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
labels = [label for label, _ in results]
ax1.bar(labels, [r.comp_percent for _, r in results], color="steelblue")
ax1.set_ylabel("compensation [%]")
ax1.set_ylim(0, 100)
ax2.bar(labels, [r.sat_fraction for _, r in results], color="indianred")
ax2.set_ylabel("saturated fraction of samples")
for ax in (ax1, ax2):
    ax.tick_params(axis="x", rotation=20)
fig.suptitle("PD baseline under disturbance and measurement noise")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "06_robustness.png"), dpi=130)
print("figure -> %s" % os.path.join(OUT, "06_robustness.png"))
