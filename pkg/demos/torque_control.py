# %% [markdown]
# Torque control at two stiffness presets
#
# The same gains track a 7 Nm sine and a 7 Nm step at l_s = 30 mm and 45 mm.
# The stiffer preset needs less deflection for the same torque, so its steps
# are quicker. Releasing the step is quicker than applying it because the
# stored spring energy helps the motors on the way back.
#
# The second half repeats the run with the literal mixing law, which does not
# invert the gear kinematics and loses the torque.

# %%
from vsa_lab.config import Config
from vsa_lab.experiments import run_torque_control
from vsa_lab.output import write_svg
from _common import out_dir

cfg = Config()
out = out_dir("torque_control")
for preset in ("low", "high"):
    r = run_torque_control(cfg, preset)
    print(f"{preset:>4}: stiffness {r.stiffness:7.2f} Nm/rad  RMS {r.rms_error:.3f} Nm  "
          f"rise {r.rise_time_90 * 1e3:6.1f} ms  fall {r.fall_time_90 * 1e3:6.1f} ms")
    write_svg(out / f"step_{preset}.svg",
              [("tau", r.step.t, r.step["tau"]), ("command", r.step.t, r.step["tau_cmd"])],
              title=f"torque step, {preset} stiffness", xlabel="t [s]", ylabel="Nm")

# %% literal mixing law
bad = run_torque_control(cfg, "low", mode="paper-literal", sine_duration=2.0, step_duration=0.1)
print(f"literal mixing, low preset: RMS {bad.rms_error:.2f} Nm")
write_svg(out / "literal_mixing.svg",
          [("tau", bad.sine.t, bad.sine["tau"]), ("command", bad.sine.t, bad.sine["tau_cmd"])],
          title="literal mixing law", xlabel="t [s]", ylabel="Nm")
print(f"plots in {out}")
