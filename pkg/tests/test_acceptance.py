"""The twelve acceptance criteria, each at its stated tolerance and time budget.

Every test records a PASS/FAIL line that is printed in the pytest summary.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from vsa_lab import dtm as D, experiments as E, vsm as V
from vsa_lab.config import Config
from vsa_lab.control import AngleTarget, Command
from vsa_lab.plant import FrictionModel

CFG = Config()
PER_DEG = math.pi / 180.0


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


@pytest.fixture(scope="module")
def calibration():
    with Timer() as clean_t:
        clean = E.run_calibration(CFG)
    with Timer() as fric_t:
        rough = E.run_calibration(CFG, friction=FrictionModel(enabled=True))
    return clean, rough, clean_t.elapsed, fric_t.elapsed


@pytest.fixture(scope="module")
def torque_runs():
    with Timer() as t:
        runs = {p: E.run_torque_control(CFG, p) for p in ("low", "high")}
    return runs, t.elapsed


def test_01_stiffness_law(acceptance):
    with Timer() as t:
        low = V.stiffness(0.030, CFG.vsm) * PER_DEG
        high = V.stiffness(0.045, CFG.vsm) * PER_DEG
    err = max(abs(low / 0.321 - 1), abs(high / 2.888 - 1))
    acceptance.check(1, "stiffness law", err <= 5e-3 and t.elapsed < 1,
                     f"{low:.4f} / {high:.4f} Nm/deg, max rel err {err:.2e}, {t.elapsed:.3f} s")


def test_02_deflection_crossover(acceptance):
    with Timer() as t:
        cross = V.deflection_crossover(CFG.vsm)
        below = [V.max_deflection(x, CFG.vsm) for x in np.linspace(0, cross, 200)[:-1]]
        above = [V.max_deflection(x, CFG.vsm) for x in np.linspace(cross, 0.06, 200)[1:]]
    cap = math.radians(30.0)
    ok = (abs(cross - 0.026) <= 5e-4 and all(abs(b - cap) < 1e-12 for b in below)
          and all(a < cap for a in above) and t.elapsed < 1)
    acceptance.check(2, "deflection-limit crossover", ok,
                     f"crossover {cross * 1e3:.3f} mm, cap {math.degrees(cap):g} deg below it")


def test_03_elastic_energy(acceptance):
    with Timer() as t:
        # a spring-limited pivot at its deflection limit compresses the spring by h_s_max
        l_s = 0.045
        theta = V.max_deflection(l_s, CFG.vsm)
        h_s = V.spring_state(theta, l_s, CFG.vsm)[1]
        energy = V.elastic_energy(theta, l_s, CFG.vsm)
    ok = abs(h_s - 0.006) < 1e-12 and abs(energy / 1.47 - 1) <= 5e-3 and t.elapsed < 1
    acceptance.check(3, "elastic energy", ok, f"h_s {h_s * 1e3:.3f} mm -> {energy:.4f} J")


def test_04_dtm_identities(acceptance):
    p = CFG.dtm
    rng = np.random.default_rng(2024)
    with Timer() as t:
        pairs = rng.uniform(-10, 10, size=(10_000, 2))
        worst_rt = 0.0
        for a, b in pairs:
            fa, fb = D.forward(*D.inverse(a, b, p), p)
            worst_rt = max(worst_rt, abs(fa - a), abs(fb - b))
        taus = rng.uniform(-100, 100, 1000)
        worst_ratio = max(abs(abs(r / s) - 2.0) for r, s in (D.torque_split(x, p) for x in taus))
        worst_power = 0.0
        for (w_r, w_s), tau in zip(rng.uniform(-5, 5, size=(1000, 2)), taus):
            P_r, P_s, P_c = D.power_split(w_r, w_s, tau, p)
            worst_power = max(worst_power, abs(P_r + P_s - P_c))
    ok = worst_rt <= 1e-12 and worst_ratio <= 1e-9 and worst_power <= 1e-12 and t.elapsed < 1
    acceptance.check(4, "DTM round-trip, torque ratio, power balance", ok,
                     f"round-trip {worst_rt:.1e}, ratio {worst_ratio:.1e}, "
                     f"power {worst_power:.1e}, {t.elapsed:.2f} s")


def test_05_calibration_slopes_and_hysteresis(acceptance, calibration):
    clean, rough, t_clean, t_rough = calibration
    errs = [p.relative_error for p in clean.fitted() if p.l_s >= 0.005 - 1e-12]
    areas = [p.hysteresis_area for p in rough.fitted()]
    ok = (len(clean.points) == 13 and len(errs) == 11 and max(errs) <= 5e-3
          and min(areas) > 0 and t_clean + t_rough < 30)
    acceptance.check(5, "quasi-static calibration", ok,
                     f"max slope err {max(errs):.2e} over {len(errs)} points, "
                     f"min friction loop area {min(areas):.3e} J, {t_clean + t_rough:.1f} s")


def test_06_torque_deflection_linearity(acceptance, calibration):
    clean, _, t_clean, _ = calibration
    r2 = [p.r2 for p in clean.fitted()]
    acceptance.check(6, "torque-deflection linearity", min(r2) >= 0.9999 and t_clean < 30,
                     f"min R^2 {min(r2):.8f} over {len(r2)} points")


def test_07_torque_tracking(acceptance, torque_runs):
    runs, elapsed = torque_runs
    low, high = runs["low"].rms_error, runs["high"].rms_error
    acceptance.check(7, "closed-loop torque tracking", low <= 0.32 and high <= 0.89 and elapsed < 60,
                     f"RMS {low:.3f} Nm (low, bound 0.32), {high:.3f} Nm (high, bound 0.89)")


def test_08_step_ordering(acceptance, torque_runs):
    runs, elapsed = torque_runs
    lo, hi = runs["low"], runs["high"]
    ok = (hi.rise_time_90 < lo.rise_time_90 and lo.fall_time_90 < lo.rise_time_90
          and hi.fall_time_90 < hi.rise_time_90 and elapsed < 60)
    acceptance.check(8, "step-response ordering", ok,
                     f"rise {lo.rise_time_90:.4f}/{hi.rise_time_90:.4f} s, "
                     f"fall {lo.fall_time_90:.4f}/{hi.fall_time_90:.4f} s (low/high)")


def test_09_stiffness_regulation(acceptance):
    with Timer() as t:
        res = E.run_stiffness_regulation(CFG)
    # oracle: pivot revolution to the 90% point at the nominal rate limit
    floor = math.acos(1 - 0.9 * 2) / CFG.pivot_rate_limit
    ok = 0.6 <= res.rise_time_90 <= 1.1 and res.rise_time_90 >= floor and t.elapsed < 30
    acceptance.check(9, "stiffness regulation step", ok,
                     f"90% rise {res.rise_time_90:.3f} s (rate-limit floor {floor:.3f} s), "
                     f"sine RMS {res.rms_error * 1e3:.3f} mm")


def test_10_decoupling(acceptance):
    with Timer() as t:
        res = E.run_decoupling_comparison(CFG)
    ok = res.pivot_std_decoupled < 1e-9 and res.pivot_std_coupled > 5e-4 and t.elapsed < 60
    acceptance.check(10, "decoupling property", ok,
                     f"pivot cmd s.d. {res.pivot_std_decoupled:.1e} m vs "
                     f"{res.pivot_std_coupled * 1e3:.3f} mm (beta {res.beta:g})")


def _converging_run(dt):
    cfg = replace(CFG, dt=dt)
    plant = cfg.build_plant()
    delta = V.stiffness(0.030, cfg.vsm)
    tr = E.simulate(plant, cfg.build_controller(), lambda t: Command(delta, 5.0), 3.0,
                    plant.state_at_pivot(0.030))
    return tr, np.array([tr[k][-1] for k in ("theta_r", "theta_s", "theta_tau", "tau")])


def test_11_determinism_and_convergence(acceptance):
    with Timer() as t:
        a_tr, a = _converging_run(1e-3)
        b_tr, b = _converging_run(1e-3)
        _, h = _converging_run(5e-4)
    identical = all(np.array_equal(a_tr[k], b_tr[k]) for k in a_tr.columns)
    rel = float(np.max(np.abs(a - h)) / np.max(np.abs(a)))
    acceptance.check(11, "determinism and dt convergence", identical and rel < 1e-6 and t.elapsed < 60,
                     f"bit-identical {identical}, dt-halving change {rel:.1e}")


def _energy_balance(schedule, duration, l_s):
    plant = CFG.build_plant()
    tr = E.simulate(plant, CFG.build_controller(), schedule, duration, plant.state_at_pivot(l_s))
    energy = [V.elastic_energy(tr["theta_tau"][i], tr["l_s"][i], CFG.vsm) for i in (0, -1)]
    stored = energy[1] - energy[0]
    return tr.motor_work(), stored, bool(tr["stop_contact"].any())


def test_12_energy_accounting(acceptance):
    th30 = V.pivot_angle_from_position(0.030, CFG.vsm)
    wind = 0.8 * V.max_deflection(0.030, CFG.vsm)
    d30, d40 = V.stiffness(0.030, CFG.vsm), V.stiffness(0.040, CFG.vsm)
    maneuvers = {
        "wind-up": (lambda t: AngleTarget(th30, wind * min(t, 1.0)), 1.5, 0.030),
        "stiffen under load": (lambda t: Command(d30 if t < 1 else d40, 5.0), 2.5, 0.030),
        "torque step": (lambda t: Command(d40, 8.0 if t > 0.2 else 0.0), 1.5, 0.040),
    }
    with Timer() as t:
        results = {k: _energy_balance(*v) for k, v in maneuvers.items()}
    errs = {k: abs(w - e) / abs(e) for k, (w, e, _) in results.items()}
    contact = any(c for _, _, c in results.values())
    ok = max(errs.values()) <= 5e-3 and not contact and t.elapsed < 30
    acceptance.check(12, "energy accounting", ok,
                     ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))
