import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vsa_lab import experiments as E, vsm as V
from vsa_lab.config import Config
from vsa_lab.control import AngleTarget

CFG = Config()


# ---------------------------------------------------------------- metric helpers

@given(st.floats(min_value=0.1, max_value=10), st.floats(min_value=0.05, max_value=0.95))
def test_crossing_time_on_a_ramp(slope, level):
    t = np.linspace(0, 2, 2001)
    y = np.clip(slope * (t - 0.5), 0, None)
    # closed form for the ramp
    expected = level / slope
    got = E.crossing_time(t, y, 0.5, level)
    if expected <= 1.5:
        assert got == pytest.approx(expected, abs=1e-9)
    else:
        assert math.isnan(got)


def test_rise_and_fall_helpers():
    t = np.linspace(0, 1, 1001)
    y = 1 - np.exp(-t / 0.1)
    assert E.rise_time_90(t, y, 0.0, 0.0, 1.0) == pytest.approx(0.1 * math.log(10), abs=1e-4)
    assert E.fall_time_90(t, 1 - y, 0.0, 1.0, 0.0) == pytest.approx(0.1 * math.log(10), abs=1e-4)


def test_linear_fit_matches_polyfit():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, 200)
    y = 3.2 * x - 0.4 + rng.normal(0, 0.05, 200)
    slope, intercept, r2 = E.linear_fit(x, y)
    ref = np.polyfit(x, y, 1)
    assert (slope, intercept) == pytest.approx(tuple(ref), rel=1e-10)
    assert r2 == pytest.approx(np.corrcoef(x, y)[0, 1] ** 2, rel=1e-10)
    assert E.linear_fit([0, 1, 2], [5, 5, 5])[2] == 1.0


def test_loop_area_polygons():
    assert E.loop_area([0, 1, 1, 0], [0, 0, 1, 1]) == pytest.approx(1.0)
    th = np.linspace(0, 2 * np.pi, 20001)[:-1]
    assert E.loop_area(2 * np.cos(th), np.sin(th)) == pytest.approx(2 * math.pi, rel=1e-6)
    assert E.loop_area([0, 1, 2], [0, 1, 2]) == 0.0


def test_rms():
    assert E.rms([3.0, -3.0]) == 3.0
    assert E.rms([]) == 0.0


def test_run_trials_identical_seeds_zero_spread():
    out = E.run_trials(lambda rng: {"x": float(rng.normal())}, trial_count=5, seed=3)
    assert out["x"].std == 0.0
    varied = E.run_trials(lambda rng: {"x": float(rng.normal())}, 5, 3, vary_seed=True)
    assert varied["x"].std > 0
    assert " ± " in str(varied["x"])


def test_perturbed_trials_report_mean_and_sd():
    def metric(rng):
        res = E.run_torque_control(CFG, "high", sine_duration=1.0, step_duration=1.5,
                                   perturbation=float(rng.normal(0, 0.01)))
        return {"rise": res.rise_time_90}
    out = E.run_trials(metric, 3, seed=0, vary_seed=True)
    assert out["rise"].std >= 0 and math.isfinite(out["rise"].mean)


# ---------------------------------------------------------------- simulation plumbing

def test_simulate_sampling_and_window():
    plant = CFG.build_plant()
    tr = E.simulate(plant, None, lambda t: (0.0, 0.0), 0.1, plant.state_at_pivot(0.03))
    assert len(tr) == 101
    assert tr.t[-1] == pytest.approx(0.1)
    w = tr.window(0.05, 0.06)
    assert len(w["t"]) == 11
    assert set(E.CSV_COLUMNS) <= set(tr.columns)


def test_quantized_run_differs_but_stays_close():
    plant = CFG.build_plant()
    th = V.pivot_angle_from_position(0.03, CFG.vsm)
    sched = lambda t: AngleTarget(th, 0.1)
    a = E.simulate(plant, CFG.build_controller(), sched, 1.0, plant.state_at_pivot(0.03))
    b = E.simulate(plant, CFG.build_controller(), sched, 1.0, plant.state_at_pivot(0.03),
                   quantized=True)
    assert not np.array_equal(a["theta_tau"], b["theta_tau"])
    assert abs(a["theta_tau"][-1] - b["theta_tau"][-1]) < 3 * math.radians(0.088) / 50


# ---------------------------------------------------------------- scenarios

def test_calibration_zero_pivot_has_zero_slope():
    res = E.run_calibration(CFG, positions=[0.0])
    assert res.points[0].slope == pytest.approx(0.0, abs=1e-9)


def test_calibration_rigid_point_is_skipped(caplog):
    res = E.run_calibration(CFG, positions=[0.060])
    assert res.points[0].skipped and len(res.fitted()) == 0
    assert "rigid" in caplog.text


@pytest.mark.parametrize("mm,nm_per_deg", [(30, 0.321), (45, 2.888)])
def test_calibration_published_slopes(mm, nm_per_deg):
    pt = E.run_calibration(CFG, positions=[mm * 1e-3]).points[0]
    assert pt.slope * math.pi / 180 == pytest.approx(nm_per_deg, rel=5e-3)


def test_regulation_zero_amplitude():
    res = E.run_stiffness_regulation(CFG, amplitude=0.0, offset=0.020, sine_duration=1.0,
                                     step_duration=0.2)
    assert res.rms_error == pytest.approx(0.0, abs=1e-12)


def test_regulation_flags_reversal_near_stroke_end():
    res = E.run_stiffness_regulation(CFG, sine_duration=0.5)
    assert res.reversal_flag
    assert res.step_overshoot > 0


def test_torque_zero_amplitude():
    res = E.run_torque_control(CFG, "low", amplitude=0.0, sine_duration=1.0, step_duration=1.0)
    assert res.rms_error == pytest.approx(0.0, abs=1e-12)
    assert np.max(np.abs(res.sine["tau"])) == pytest.approx(0.0, abs=1e-12)


def test_coupled_model_setpoint_law():
    m = E.CoupledVsaModel(CFG.vsm, 5000.0)
    delta = V.stiffness(0.045, CFG.vsm)
    th = m.deflection_for(delta, 7.0)
    # at the solved deflection the local stiffness equals the target
    # when the pivot is placed by the law
    l_s, th_d = m.setpoint_law(E.Command(delta, 7.0), th)
    assert th_d == pytest.approx(th)
    assert m.local_stiffness(th, l_s) == pytest.approx(delta, rel=1e-9)
    assert m.torque(th, l_s) == pytest.approx(7.0, rel=1e-9)
    with pytest.raises(ValueError):
        E.CoupledVsaModel(CFG.vsm, -1.0)


def test_coupled_energy_gradient_finite_difference():
    m = E.CoupledVsaModel(CFG.vsm, 5000.0)
    h, th, l_s = 1e-8, 0.05, 0.045
    fd = (m.energy(th, l_s + h) - m.energy(th, l_s - h)) / (2 * h)
    assert m.energy_gradient_ls(th, l_s) == pytest.approx(fd, rel=1e-5)
    fd_tau = (m.energy(th + h, l_s) - m.energy(th - h, l_s)) / (2 * h)
    assert m.torque(th, l_s) == pytest.approx(fd_tau, rel=1e-5)


def test_decoupling_beta_zero_reduces_to_decoupled():
    res = E.run_decoupling_comparison(CFG, beta=0.0, duration=1.0)
    assert res.pivot_std_coupled < 1e-9


def test_load_sharing_ratio_and_sum():
    res = E.run_load_sharing(CFG, quarter=1.0)
    valid = ~np.isnan(res.ratio)
    assert valid.any() and not valid.all()
    assert np.all(np.abs(res.ratio[valid] - 2.0) < 1e-9)
    assert np.all(np.abs(res.output_torque[~valid]) <= 0.1)
    assert np.allclose(res.rg_t + res.sg_t, res.output_torque, atol=1e-12)


def test_stiffness_curves():
    c = E.run_stiffness_curves(CFG)
    assert len(c.l_s) == 121
    assert c.crossover == pytest.approx(0.026, abs=5e-4)
    i30 = int(np.argmin(np.abs(c.l_s - 0.030)))
    assert c.stiffness[i30] * math.pi / 180 == pytest.approx(0.321, rel=5e-3)
    assert c.max_deflection[-1] == 0.0
