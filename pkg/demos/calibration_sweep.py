# %% [markdown]
# Calibration sweep with and without friction
#
# The actuator is clamped at the output and the deflection is driven slowly
# through a triangle at each pivot position. Without friction every fitted
# slope lands on the analytic stiffness. With friction the loading and
# unloading branches separate and the torque-deflection curve encloses an area.

# %%
import math

from vsa_lab.experiments import run_calibration
from vsa_lab.output import write_svg
from vsa_lab.plant import FrictionModel
from _common import out_dir

clean = run_calibration()
rough = run_calibration(friction=FrictionModel(enabled=True, coulomb=0.15, viscous=0.02))

print(" l_s [mm]   analytic    fitted     rel err     loop area (friction)")
for a, b in zip(clean.points, rough.points):
    if a.skipped:
        print(f"{a.l_s * 1e3:8.1f}   rigid, skipped")
        continue
    k = math.pi / 180
    print(f"{a.l_s * 1e3:8.1f}   {a.expected_stiffness * k:8.4f}  {a.slope * k:8.4f}  "
          f"{a.relative_error:10.2e}   {b.hysteresis_area:.4f} J")

# %% one loop, side by side
i = 6  # 30 mm
out = out_dir("calibration")
write_svg(out / "loop_30mm.svg",
          [("frictionless", clean.points[i].trace["theta_tau"], clean.points[i].trace["tau"]),
           ("with friction", rough.points[i].trace["theta_tau"], rough.points[i].trace["tau"])],
          title="torque vs deflection at 30 mm", xlabel="theta_tau [rad]", ylabel="Nm")
print(f"plot in {out}")
