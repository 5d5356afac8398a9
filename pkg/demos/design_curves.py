# %% [markdown]
# Design curves of the lever mechanism
#
# Stiffness grows with the square of the lever ratio l_s / (l_t - l_s), so it
# starts at zero and becomes unbounded at the end of the stroke. The usable
# deflection is capped mechanically at small l_s and by spring travel beyond
# the crossover.

# %%
import math

import numpy as np

from vsa_lab import vsm
from vsa_lab.experiments import run_stiffness_curves
from vsa_lab.output import write_svg
from _common import out_dir

p = vsm.VsmParams()
curves = run_stiffness_curves()
print(f"crossover: {curves.crossover * 1e3:.2f} mm")

# %% a few landmarks
for mm in (0, 10, 20, 26, 30, 40, 45, 50, 55, 60):
    l_s = mm * 1e-3
    d = vsm.stiffness(l_s, p)
    limit = math.degrees(vsm.max_deflection(l_s, p))
    peak = d * vsm.max_deflection(l_s, p) if math.isfinite(d) else math.nan
    print(f"l_s {mm:5.1f} mm  stiffness {d * math.pi / 180:9.4f} Nm/deg  "
          f"limit {limit:6.2f} deg  peak torque {peak:7.2f} Nm")

# %% the peak torque is flat once the spring travel binds
finite = np.isfinite(curves.stiffness)
peak = curves.stiffness[finite] * curves.max_deflection[finite]
out = out_dir("design_curves")
write_svg(out / "stiffness.svg",
          [("stiffness", curves.l_s[finite] * 1e3, curves.stiffness[finite] * math.pi / 180)],
          title="stiffness", xlabel="l_s [mm]", ylabel="Nm/deg")
write_svg(out / "peak_torque.svg", [("peak torque", curves.l_s[finite] * 1e3, peak)],
          title="torque at the deflection limit", xlabel="l_s [mm]", ylabel="Nm")
print(f"plots in {out}")
