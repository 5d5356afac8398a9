"""JSON configuration.

File units: lengths in mm, angles in degrees (angular rates in deg/s),
spring stiffness in N/mm (= kN/m); everything else SI. Values are converted
to SI exactly once, here. Omitted keys take the prototype defaults and
unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .control import CascadeController, ControllerGains, MixMode
from .dtm import DtmParams, NOMINAL_SPEED
from .errors import ConfigError
from .plant import FrictionModel, LoadModel, MotorModel, Plant, default_motors
from .vsm import VsmParams

SCENARIOS = ("calibrate", "regulate", "torque", "decouple", "loadshare", "curves")
PRESETS = {"low": 0.030, "high": 0.045}  # pivot positions, m

_MM = 1e-3
_DEG = math.pi / 180.0


@dataclass(frozen=True)
class Config:
    vsm: VsmParams = field(default_factory=VsmParams)
    dtm: DtmParams = field(default_factory=DtmParams)
    motor1: MotorModel = None
    motor2: MotorModel = None
    load: LoadModel = field(default_factory=LoadModel)
    friction: FrictionModel = field(default_factory=FrictionModel)
    gains: ControllerGains = field(default_factory=ControllerGains)
    mixing_mode: MixMode = MixMode.CONSISTENT
    pivot_rate_limit: float = NOMINAL_SPEED  # rad/s
    deflection_rate_limit: float = NOMINAL_SPEED
    dt: float = 1e-3
    quantized: bool = False
    scenarios: tuple = SCENARIOS
    output_dir: str = None
    seed: int = 0
    trial_count: int = 5
    decoupling_preset: str = "high"
    load_sharing_preset: str = "low"
    coupled_beta: float = 5000.0  # Nm/rad^3

    def __post_init__(self):
        m1, m2 = default_motors(self.dtm)
        if self.motor1 is None:
            object.__setattr__(self, "motor1", m1)
        if self.motor2 is None:
            object.__setattr__(self, "motor2", m2)

    def build_plant(self, spring=None, friction=None, load=None) -> Plant:
        return Plant(self.vsm, self.dtm, (self.motor1, self.motor2),
                     load or self.load, friction or self.friction, spring, self.dt)

    def build_controller(self, setpoint_law=None, mode=None) -> CascadeController:
        return CascadeController(
            self.vsm, self.dtm, self.gains, mode or self.mixing_mode,
            (self.motor1.vel_limit, self.motor2.vel_limit),
            self.pivot_rate_limit, self.deflection_rate_limit, setpoint_law)


# key -> (field name, scale from file unit to SI)
_VSM_KEYS = {"k_s": ("k_s", 1e3), "R0": ("R0", _MM), "r_tau": ("r_tau", _MM),
             "h_s_max": ("h_s_max", _MM), "theta_tau_cap": ("theta_tau_cap", _DEG)}
_DTM_KEYS = {"R": ("R", _MM), "r": ("r", _MM), "n1": ("n1", 1.0), "n2": ("n2", 1.0)}
_MOTOR_KEYS = {"vel_limit": ("vel_limit", _DEG), "time_constant": ("time_constant", 1.0),
               "accel_limit": ("accel_limit", _DEG), "rotor_inertia": ("rotor_inertia", 1.0)}
_LOAD_KEYS = {"mode": ("mode", None), "inertia": ("inertia", 1.0),
              "viscous": ("viscous", 1.0), "external_torque": ("external_torque", 1.0)}
_FRICTION_KEYS = {"enabled": ("enabled", None), "coulomb": ("coulomb", 1.0),
                  "viscous": ("viscous", 1.0)}
_GAIN_KEYS = {name: (name, 1.0) for name in ControllerGains.__dataclass_fields__}
_TOP_KEYS = {"vsm", "dtm", "motor1", "motor2", "load", "friction", "gains", "mixing_mode",
             "pivot_rate_limit", "deflection_rate_limit", "dt", "quantized", "scenarios",
             "output_dir", "seed", "trial_count", "decoupling_preset",
             "load_sharing_preset", "coupled_beta"}


def _number(key, value, positive=False, allow_zero=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        raise ConfigError(key, f"must be {'> 0' if not allow_zero else '>= 0'}, got {value!r}")
    return value


def _section(data, name, keys):
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(name, "expected an object")
    out = {}
    for key, value in data.items():
        if key not in keys:
            raise ConfigError(f"{name}.{key}", "unknown key")
        attr, scale = keys[key]
        if scale is None:
            out[attr] = value
        else:
            out[attr] = _number(f"{name}.{key}", value) * scale
    return out


def _positive(section, name, fields):
    for attr in fields:
        if attr in section and not section[attr] > 0:
            raise ConfigError(f"{name}.{attr}", f"must be > 0, got {section[attr]!r}")


def config_from_dict(data: dict) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigError(key, "unknown key")
    raw_vsm = dict(data.get("vsm") or {})
    if "l_t" in raw_vsm:
        l_t = _number("vsm.l_t", raw_vsm.pop("l_t"))
        r0 = raw_vsm.setdefault("R0", l_t / 2.0)
        if not math.isclose(float(r0) * 2.0, l_t, rel_tol=1e-12):
            raise ConfigError("vsm.l_t", "pivot stroke must equal 2 * R0")
    vsm_kw = _section(raw_vsm, "vsm", _VSM_KEYS)
    _positive(vsm_kw, "vsm", ("k_s", "R0", "r_tau", "h_s_max"))
    if "theta_tau_cap" in vsm_kw and not 0 < vsm_kw["theta_tau_cap"] < math.pi / 2:
        raise ConfigError("vsm.theta_tau_cap", "must lie in (0, 90) degrees")
    vsm = VsmParams(**vsm_kw)

    dtm_kw = _section(data.get("dtm"), "dtm", _DTM_KEYS)
    R = dtm_kw.get("R", DtmParams.R)
    r = dtm_kw.get("r", DtmParams.r)
    if not r > 0:
        raise ConfigError("dtm.r", "must be > 0")
    if not R > r:
        raise ConfigError("dtm.R", f"require R > r, got R={R * 1e3:g} mm, r={r * 1e3:g} mm")
    for n in ("n1", "n2"):
        if dtm_kw.get(n, 1.0) == 0:
            raise ConfigError(f"dtm.{n}", "gear ratio must be non-zero")
    dtm = DtmParams(**dtm_kw)

    defaults = default_motors(dtm)
    motors = []
    for i, name in enumerate(("motor1", "motor2")):
        kw = _section(data.get(name), name, _MOTOR_KEYS)
        _positive(kw, name, ("vel_limit", "time_constant", "accel_limit", "rotor_inertia"))
        base = defaults[i]
        motors.append(MotorModel(
            vel_limit=kw.get("vel_limit", base.vel_limit),
            time_constant=kw.get("time_constant", base.time_constant),
            accel_limit=kw.get("accel_limit", 10.0 * kw.get("vel_limit", base.vel_limit)),
            rotor_inertia=kw.get("rotor_inertia", base.rotor_inertia)))

    load_kw = _section(data.get("load"), "load", _LOAD_KEYS)
    if load_kw.get("mode", "clamped") not in ("clamped", "inertial"):
        raise ConfigError("load.mode", "must be 'clamped' or 'inertial'")
    _positive(load_kw, "load", ("inertia",))
    if load_kw.get("viscous", 0.0) < 0:
        raise ConfigError("load.viscous", "must be >= 0")
    load = LoadModel(**load_kw)

    fr_kw = _section(data.get("friction"), "friction", _FRICTION_KEYS)
    if not isinstance(fr_kw.get("enabled", False), bool):
        raise ConfigError("friction.enabled", "must be true or false")
    for k in ("coulomb", "viscous"):
        if fr_kw.get(k, 0.0) < 0:
            raise ConfigError(f"friction.{k}", "must be >= 0")
    friction = FrictionModel(**fr_kw)

    gains_kw = _section(data.get("gains"), "gains", _GAIN_KEYS)
    for k, v in gains_kw.items():
        if v < 0:
            raise ConfigError(f"gains.{k}", "must be >= 0")
    gains = ControllerGains(**gains_kw)

    top = {}
    if "mixing_mode" in data:
        try:
            top["mixing_mode"] = MixMode(data["mixing_mode"])
        except ValueError:
            raise ConfigError("mixing_mode", "must be 'consistent' or 'paper-literal'") from None
    for key in ("pivot_rate_limit", "deflection_rate_limit"):
        if key in data:
            value = _number(key, data[key])
            if not value > 0:
                raise ConfigError(key, "must be > 0")
            top[key] = value * _DEG
    if "dt" in data:
        dt = _number("dt", data["dt"])
        if not 0 < dt <= 0.01:
            raise ConfigError("dt", "must lie in (0, 0.01] s")
        top["dt"] = dt
    if "quantized" in data:
        if not isinstance(data["quantized"], bool):
            raise ConfigError("quantized", "must be true or false")
        top["quantized"] = data["quantized"]
    if "scenarios" in data:
        sc = data["scenarios"]
        if not isinstance(sc, list) or any(s not in SCENARIOS for s in sc):
            raise ConfigError("scenarios", f"must be a list drawn from {list(SCENARIOS)}")
        top["scenarios"] = tuple(sc)
    if "output_dir" in data:
        if data["output_dir"] is not None and not isinstance(data["output_dir"], str):
            raise ConfigError("output_dir", "must be a string or null")
        top["output_dir"] = data["output_dir"]
    for key in ("seed", "trial_count"):
        if key in data:
            value = data[key]
            if isinstance(value, bool) or not isinstance(value, int) or value < (1 if key == "trial_count" else 0):
                raise ConfigError(key, "must be a non-negative integer" if key == "seed" else "must be >= 1")
            top[key] = value
    for key in ("decoupling_preset", "load_sharing_preset"):
        if key in data:
            if data[key] not in PRESETS:
                raise ConfigError(key, f"must be one of {sorted(PRESETS)}")
            top[key] = data[key]
    if "coupled_beta" in data:
        top["coupled_beta"] = _number("coupled_beta", data["coupled_beta"], positive=True)

    return Config(vsm=vsm, dtm=dtm, motor1=motors[0], motor2=motors[1], load=load,
                  friction=friction, gains=gains, **top)


def load_config(path) -> Config:
    """Read and validate a JSON configuration file."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
    return config_from_dict(data)


def _norm(x):
    return float(f"{x:.12g}")


def _dump_section(obj, keys):
    out = {}
    for key, (attr, scale) in keys.items():
        value = getattr(obj, attr)
        out[key] = value if scale is None else _norm(value / scale)
    return out


def config_to_dict(cfg: Config) -> dict:
    """Serialise in file units; values rounded to 12 significant digits."""
    if callable(cfg.load.external_torque):
        raise ConfigError("load.external_torque", "time-varying torque cannot be serialised")
    return {
        "vsm": _dump_section(cfg.vsm, _VSM_KEYS),
        "dtm": _dump_section(cfg.dtm, _DTM_KEYS),
        "motor1": _dump_section(cfg.motor1, _MOTOR_KEYS),
        "motor2": _dump_section(cfg.motor2, _MOTOR_KEYS),
        "load": _dump_section(cfg.load, _LOAD_KEYS),
        "friction": _dump_section(cfg.friction, _FRICTION_KEYS),
        "gains": _dump_section(cfg.gains, _GAIN_KEYS),
        "mixing_mode": cfg.mixing_mode.value,
        "pivot_rate_limit": _norm(cfg.pivot_rate_limit / _DEG),
        "deflection_rate_limit": _norm(cfg.deflection_rate_limit / _DEG),
        "dt": _norm(cfg.dt),
        "quantized": cfg.quantized,
        "scenarios": list(cfg.scenarios),
        "output_dir": cfg.output_dir,
        "seed": cfg.seed,
        "trial_count": cfg.trial_count,
        "decoupling_preset": cfg.decoupling_preset,
        "load_sharing_preset": cfg.load_sharing_preset,
        "coupled_beta": _norm(cfg.coupled_beta),
    }


def dump_config(cfg: Config, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")
