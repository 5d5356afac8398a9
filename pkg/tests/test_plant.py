import math
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from vsa_lab import dtm as D, vsm as V
from vsa_lab.control import AngleTarget, CascadeController
from vsa_lab.errors import ConfigError, IntegrationError
from vsa_lab.experiments import simulate
from vsa_lab.plant import (ENCODER_RESOLUTION, FrictionModel, LoadModel, MotorModel, Plant,
                           measure, quantize)

PLANT = Plant()


def test_zero_command_is_fixed_point():
    s0 = PLANT.initial_state()
    s1 = PLANT.step(s0, (0.0, 0.0))
    assert s1.vector() == s0.vector()
    assert s1.t == pytest.approx(PLANT.dt)


@pytest.mark.parametrize("dt", [0.0, -1e-3, 0.02, math.nan])
def test_bad_dt_is_config_error(dt):
    with pytest.raises(ConfigError):
        PLANT.step(PLANT.initial_state(), (0.0, 0.0), dt=dt)
    with pytest.raises(ConfigError):
        Plant(dt=dt)


def test_non_finite_input_is_integration_error():
    with pytest.raises(IntegrationError):
        PLANT.step(PLANT.initial_state(), (math.nan, 0.0))
    bad = replace(PLANT.initial_state(), theta_r=math.inf)
    with pytest.raises(IntegrationError):
        PLANT.step(bad, (0.0, 0.0))


def test_initial_state_derived_fields():
    s = PLANT.state_at_pivot(0.030)
    assert s.l_s == pytest.approx(0.030)
    assert s.theta_tau == pytest.approx(0.0, abs=1e-15)
    assert s.tau == pytest.approx(0.0, abs=1e-12)
    s = PLANT.initial_state(0.0, math.pi / 2, math.radians(5.0))
    assert s.tau == pytest.approx(V.torque(math.radians(5.0), 0.030, PLANT.vsm))


def test_common_mode_motion_hits_hard_stop():
    p = PLANT.dtm
    w = 1.0  # rad/s at both gears
    s = PLANT.state_at_pivot(0.045)
    pivot0 = s.theta_pivot
    taus = []
    while not s.stop_contact:
        s = PLANT.step(s, (p.n1 * w, p.n2 * w))
        taus.append(s.theta_tau)
        if not s.stop_contact:
            assert s.theta_pivot == pytest.approx(pivot0, abs=1e-9)
    assert s.theta_tau == pytest.approx(-PLANT.spring.max_deflection(s.l_s), rel=1e-12)
    # once the servo lag has decayed the deflection grows by w*dt per step
    d = [taus[i + 1] - taus[i] for i in range(len(taus) - 2)]
    assert all(x < 0 for x in d)
    assert d[-1] == pytest.approx(-w * PLANT.dt, rel=1e-3)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-400, max_value=400), st.floats(min_value=-200, max_value=200),
       st.sampled_from([0.005, 0.030, 0.050]))
def test_deflection_never_exceeds_limit(u1, u2, l_s):
    s = PLANT.state_at_pivot(l_s)
    for _ in range(200):
        s = PLANT.step(s, (u1, u2))
        assert abs(s.theta_tau) <= PLANT.spring.max_deflection(s.l_s) * (1 + 1e-9) + 1e-15


def test_quasi_static_ramp_torque():
    theta_pivot = math.pi / 2
    target = math.radians(10.0)
    ctrl = CascadeController()
    ramp = lambda t: AngleTarget(theta_pivot, target * min(t / 1.0, 1.0))
    tr = simulate(PLANT, ctrl, ramp, 3.0, PLANT.state_at_pivot(0.030))
    assert tr["theta_tau"][-1] == pytest.approx(target, abs=1e-9)
    assert tr["tau"][-1] == pytest.approx(3.21, rel=5e-3)
    assert tr["tau"][-1] == pytest.approx(V.torque(target, 0.030, PLANT.vsm), abs=1e-6)


def test_quantize_grid():
    deg = math.radians
    assert quantize(deg(0.1)) == pytest.approx(deg(0.088))
    assert quantize(deg(-0.05)) == pytest.approx(deg(-0.088))
    assert quantize(3 * ENCODER_RESOLUTION) == pytest.approx(3 * ENCODER_RESOLUTION)


@given(st.floats(min_value=-100, max_value=100))
def test_quantize_floor_property(x):
    q = quantize(x)
    assert q <= x + 1e-9 * ENCODER_RESOLUTION
    assert x - q < ENCODER_RESOLUTION * (1 + 1e-6)


def test_measure_without_quantization_is_exact():
    s = PLANT.initial_state(0.3, 1.1, 0.35)
    r = measure(s, PLANT.dtm)
    pos, piv, tau = r.mechanism_angles(PLANT.dtm)
    assert (pos, piv, tau) == pytest.approx((s.theta_pos, s.theta_pivot, s.theta_tau), abs=1e-14)
    q = measure(s, PLANT.dtm, quantized=True)
    assert q.theta_M1 != r.theta_M1
    assert abs(q.theta_M1 - r.theta_M1) < ENCODER_RESOLUTION


def test_motor_lag_matches_exponential():
    m = MotorModel(vel_limit=100.0, time_constant=0.02, accel_limit=1e9)
    w, dt = 0.0, 1e-3
    for _ in range(20):
        w = Plant._advance_motor(w, 50.0, 0.0, m, dt)
    assert w == pytest.approx(50.0 * (1 - math.exp(-0.02 / 0.02)), rel=1e-12)


def test_load_slows_the_motor_against_it():
    m = MotorModel(vel_limit=450.0)
    hold = 0.5 * m.torque_limit
    up = Plant._advance_motor(0.0, 450.0, hold, m, 1e-3)
    down = Plant._advance_motor(0.0, -450.0, hold, m, 1e-3)
    assert abs(down) > abs(up) > 0


def test_motor_limits_validation():
    with pytest.raises(ConfigError):
        MotorModel(vel_limit=-1.0)
    assert MotorModel.for_ratio(-100).vel_limit == pytest.approx(100 * D.NOMINAL_SPEED)


def test_friction_model():
    f = FrictionModel(enabled=True, coulomb=0.2, viscous=0.1)
    assert f.torque(2.0) == pytest.approx(0.4)
    assert f.torque(-2.0) == pytest.approx(-0.4)
    assert f.torque(0.0) == 0.0
    assert FrictionModel().torque(5.0) == 0.0


def test_inertial_output_oscillates_with_bounded_energy():
    load = LoadModel(mode="inertial", inertia=0.05, viscous=0.0)
    plant = Plant(load=load)
    s = plant.initial_state(0.0, math.pi / 2, math.radians(5.0))

    def energy(s):
        return 0.5 * load.inertia * s.omega_o**2 + V.elastic_energy(s.theta_tau, s.l_s, plant.vsm)

    e0 = energy(s)
    signs = set()
    for _ in range(1000):
        s = plant.step(s, (0.0, 0.0))
        signs.add(s.theta_tau > 0)
        assert energy(s) == pytest.approx(e0, rel=0.05)
    assert signs == {True, False}


def test_load_model_validation():
    with pytest.raises(ConfigError):
        LoadModel(mode="floating")
    with pytest.raises(ConfigError):
        LoadModel(mode="inertial", inertia=0.0)
    assert LoadModel(external_torque=lambda t: 2 * t).external(1.5) == 3.0
