# %% [markdown]
# Load sharing between the two motors
#
# At constant stiffness the ring and sun gears carry the output torque in the
# ratio of their radii, 36 : 18. The lossless model reproduces 2 : 1 exactly
# and the two contributions add up to the output torque.

# %%
import numpy as np

from vsa_lab.experiments import run_load_sharing
from vsa_lab.output import write_svg
from _common import out_dir

r = run_load_sharing()
ratio = r.ratio[np.isfinite(r.ratio)]
print(f"ratio RG-T/SG-T over {ratio.size} samples: {ratio.min():.12f} .. {ratio.max():.12f}")
print(f"largest |RG-T + SG-T - output|: {np.max(np.abs(r.rg_t + r.sg_t - r.output_torque)):.2e} Nm")

out = out_dir("load_sharing")
write_svg(out / "torques.svg",
          [("RG-T", r.trace.t, r.rg_t), ("SG-T", r.trace.t, r.sg_t),
           ("output", r.trace.t, r.output_torque)],
          title="gear torques during a slow deflection sweep", xlabel="t [s]", ylabel="Nm")
print(f"plot in {out}")
