"""Two-motor actuator plant advanced by a fixed-step semi-implicit Euler scheme.

Each motor is a velocity servo: a first-order lag toward its velocity
setpoint, bounded by a velocity limit and by a torque-limited acceleration
window. The window is shifted by the torque the motor must supply to hold
the spring, so driving against the load is slower than being driven by it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

from . import dtm as _dtm
from .dtm import DtmParams, NOMINAL_SPEED
from .errors import ConfigError, IntegrationError
from .vsm import VsmParams, VsmSpring, pivot_position

ENCODER_RESOLUTION = math.radians(8.8e-2)  # rad per pulse
MAX_DT = 0.01


@dataclass(frozen=True)
class MotorModel:
    """Velocity-servo motor, all values at the motor shaft.

    ``accel_limit`` is the no-load acceleration capability; together with
    ``rotor_inertia`` it fixes the torque limit.
    """

    vel_limit: float  # rad/s
    time_constant: float = 0.02  # s
    accel_limit: float = None  # rad/s^2, default 10 * vel_limit
    rotor_inertia: float = 1e-4  # kg m^2

    def __post_init__(self):
        if self.accel_limit is None:
            object.__setattr__(self, "accel_limit", 10.0 * self.vel_limit)
        for name in ("vel_limit", "time_constant", "accel_limit", "rotor_inertia"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(name, f"must be positive and finite, got {value!r}")

    @classmethod
    def for_ratio(cls, ratio, nominal_speed=NOMINAL_SPEED, **kwargs) -> "MotorModel":
        """Motor whose velocity limit maps to ``nominal_speed`` at its gear."""
        return cls(vel_limit=abs(ratio) * nominal_speed, **kwargs)

    @property
    def torque_limit(self) -> float:
        return self.rotor_inertia * self.accel_limit


def default_motors(p: DtmParams):
    return (
        MotorModel.for_ratio(p.n1, rotor_inertia=1e-4),
        MotorModel.for_ratio(p.n2, rotor_inertia=2e-4),
    )


@dataclass(frozen=True)
class LoadModel:
    mode: str = "clamped"  # "clamped" | "inertial"
    inertia: float = 0.05  # kg m^2
    viscous: float = 0.1  # Nm s/rad
    external_torque: Union[float, Callable[[float], float]] = 0.0

    def __post_init__(self):
        if self.mode not in ("clamped", "inertial"):
            raise ConfigError("load.mode", f"unknown mode {self.mode!r}")
        if self.mode == "inertial" and not self.inertia > 0:
            raise ConfigError("load.inertia", "must be positive in inertial mode")
        if self.viscous < 0:
            raise ConfigError("load.viscous", "must be non-negative")

    def external(self, t: float) -> float:
        if callable(self.external_torque):
            return float(self.external_torque(t))
        return float(self.external_torque)


@dataclass(frozen=True)
class FrictionModel:
    """Friction on the deflection path (between mechanism and output)."""

    enabled: bool = False
    coulomb: float = 0.15  # Nm
    viscous: float = 0.02  # Nm s/rad

    def __post_init__(self):
        if self.coulomb < 0 or self.viscous < 0:
            raise ConfigError("friction", "coefficients must be non-negative")

    def torque(self, deflection_rate: float) -> float:
        if not self.enabled:
            return 0.0
        sign = (deflection_rate > 0) - (deflection_rate < 0)
        return self.coulomb * sign + self.viscous * deflection_rate


@dataclass(frozen=True)
class ActuatorState:
    """Full plant state. Primary fields first; the rest are derived by the plant."""

    theta_r: float = 0.0
    theta_s: float = 0.0
    omega_M1: float = 0.0
    omega_M2: float = 0.0
    theta_o: float = 0.0
    omega_o: float = 0.0
    t: float = 0.0
    # derived
    theta_pos: float = 0.0
    theta_pivot: float = 0.0
    l_s: float = 0.0
    theta_tau: float = 0.0
    tau_spring: float = 0.0
    tau: float = 0.0  # torque through the mechanism incl. friction (output sensor)
    torque_M1: float = 0.0  # shaft torque each motor supplies to hold the load
    torque_M2: float = 0.0
    stop_contact: bool = False

    def vector(self):
        """Primary state as a tuple, for comparisons."""
        return (self.theta_r, self.theta_s, self.omega_M1, self.omega_M2,
                self.theta_o, self.omega_o)


@dataclass(frozen=True)
class SensorReadings:
    theta_M1: float
    theta_M2: float
    omega_M1: float
    omega_M2: float
    theta_o: float
    omega_o: float = 0.0

    def mechanism_angles(self, p: DtmParams):
        """``(theta_pos, theta_pivot, theta_tau)`` reconstructed from the encoders."""
        theta_r, theta_s = _dtm.motor_to_gear(self.theta_M1, self.theta_M2, p)
        theta_pos, theta_pivot = _dtm.forward(theta_r, theta_s, p)
        return theta_pos, theta_pivot, self.theta_o - theta_pos


def quantize(angle: float, resolution: float = ENCODER_RESOLUTION) -> float:
    # floor onto the pulse grid; the epsilon keeps exact multiples on their own pulse
    return math.floor(angle / resolution + 1e-9) * resolution


def measure(state: ActuatorState, p: DtmParams, quantized: bool = False,
            resolution: float = ENCODER_RESOLUTION) -> SensorReadings:
    """Encoder readings at the motor shafts; quantised before any ratio conversion."""
    theta_M1, theta_M2 = _dtm.gear_to_motor(state.theta_r, state.theta_s, p)
    if quantized:
        theta_M1 = quantize(theta_M1, resolution)
        theta_M2 = quantize(theta_M2, resolution)
    return SensorReadings(theta_M1, theta_M2, state.omega_M1, state.omega_M2,
                          state.theta_o, state.omega_o)


def _clip(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


class Plant:
    """Actuator plant. Holds parameters only; states are immutable values."""

    def __init__(self, vsm: VsmParams = None, dtm: DtmParams = None, motors=None,
                 load: LoadModel = None, friction: FrictionModel = None,
                 spring=None, dt: float = 1e-3):
        self.vsm = vsm or VsmParams()
        self.dtm = dtm or DtmParams()
        self.motors = tuple(motors) if motors is not None else default_motors(self.dtm)
        self.load = load or LoadModel()
        self.friction = friction or FrictionModel()
        self.spring = spring if spring is not None else VsmSpring(self.vsm)
        self.dt = self._check_dt(dt)

    @staticmethod
    def _check_dt(dt):
        if not (math.isfinite(dt) and 0.0 < dt <= MAX_DT):
            raise ConfigError("dt", f"must lie in (0, {MAX_DT}] s, got {dt!r}")
        return dt

    def initial_state(self, theta_pos=0.0, theta_pivot=0.0, theta_o=None) -> ActuatorState:
        """State at rest with the given mechanism angles.

        ``theta_o`` defaults to ``theta_pos`` (zero deflection).
        """
        theta_r, theta_s = _dtm.inverse(theta_pos, theta_pivot, self.dtm)
        if theta_o is None:
            theta_o = theta_pos
        return self._derive(ActuatorState(theta_r=theta_r, theta_s=theta_s, theta_o=theta_o),
                            deflection_rate=0.0, contact=False)

    def state_at_pivot(self, l_s, theta_o=0.0) -> ActuatorState:
        from .vsm import pivot_angle_from_position

        return self.initial_state(theta_o, pivot_angle_from_position(l_s, self.vsm), theta_o)

    def _derive(self, s: ActuatorState, deflection_rate: float, contact: bool) -> ActuatorState:
        p = self.dtm
        theta_pos, theta_pivot = _dtm.forward(s.theta_r, s.theta_s, p)
        l_s = min(pivot_position(theta_pivot, self.vsm), self.vsm.l_t)
        theta_tau = s.theta_o - theta_pos
        tau_spring = self.spring.torque(theta_tau, l_s)
        tau = tau_spring + self.friction.torque(deflection_rate)
        # generalized forces the gears must supply: -tau on the carrier, dE/dtheta_pivot on the pivot
        q_pivot = self.spring.energy_gradient_ls(theta_tau, l_s) * self.vsm.R0 * math.sin(theta_pivot)
        tau_r, tau_s = _dtm.generalized_to_gear_torques(-tau, q_pivot, p)
        return replace(s, theta_pos=theta_pos, theta_pivot=theta_pivot, l_s=l_s,
                       theta_tau=theta_tau, tau_spring=tau_spring, tau=tau,
                       torque_M1=tau_r / p.n1, torque_M2=tau_s / p.n2,
                       stop_contact=contact)

    @staticmethod
    def _advance_motor(omega, u, hold_torque, motor: MotorModel, dt):
        v = motor.vel_limit
        u = _clip(u, -v, v)
        target = omega + (u - omega) * -math.expm1(-dt / motor.time_constant)
        accel = (target - omega) / dt
        # high-ratio gearheads are not back-driven: the load can at most stall the motor
        shift = _clip(hold_torque / motor.rotor_inertia, -motor.accel_limit, motor.accel_limit)
        accel = _clip(accel, -motor.accel_limit - shift, motor.accel_limit - shift)
        return _clip(omega + accel * dt, -v, v)

    def step(self, state: ActuatorState, commands, load: LoadModel = None,
             dt: float = None) -> ActuatorState:
        """Advance one step under motor velocity setpoints ``commands = (u1, u2)``."""
        dt = self.dt if dt is None else self._check_dt(dt)
        load = load or self.load
        u1, u2 = commands
        if not (math.isfinite(u1) and math.isfinite(u2)):
            raise IntegrationError(f"non-finite motor command ({u1!r}, {u2!r})")
        if not all(math.isfinite(x) for x in state.vector()):
            raise IntegrationError("non-finite plant state")
        p = self.dtm
        m1, m2 = self.motors

        omega_M1 = self._advance_motor(state.omega_M1, u1, state.torque_M1, m1, dt)
        omega_M2 = self._advance_motor(state.omega_M2, u2, state.torque_M2, m2, dt)
        omega_r, omega_s = _dtm.motor_to_gear(omega_M1, omega_M2, p)
        theta_r = state.theta_r + omega_r * dt
        theta_s = state.theta_s + omega_s * dt

        if load.mode == "inertial":
            # the mechanism pushes the output back with -tau
            acc_o = (-state.tau - load.viscous * state.omega_o + load.external(state.t)) / load.inertia
            omega_o = state.omega_o + acc_o * dt
            theta_o = state.theta_o + omega_o * dt
        else:
            omega_o, theta_o = 0.0, state.theta_o

        # deflection hard stop: inelastic clamp
        theta_pos, theta_pivot = _dtm.forward(theta_r, theta_s, p)
        pos_rate, _ = _dtm.forward(omega_r, omega_s, p)
        l_s = min(pivot_position(theta_pivot, self.vsm), self.vsm.l_t)
        limit = self.spring.max_deflection(l_s)
        theta_tau = theta_o - theta_pos
        contact = abs(theta_tau) > limit
        if contact:
            bound = math.copysign(limit, theta_tau)
            moving_in = (omega_o - pos_rate) * theta_tau > 0
            if load.mode == "clamped":
                shift = theta_tau - bound  # move carrier (common mode) onto the stop
                theta_r += shift
                theta_s += shift
                if moving_in:
                    omega_r -= pos_rate
                    omega_s -= pos_rate
                    omega_M1, omega_M2 = _dtm.gear_to_motor(omega_r, omega_s, p)
                    pos_rate = 0.0
            else:
                theta_o = theta_pos + bound
                if moving_in:
                    omega_o = pos_rate

        new = ActuatorState(theta_r=theta_r, theta_s=theta_s, omega_M1=omega_M1,
                            omega_M2=omega_M2, theta_o=theta_o, omega_o=omega_o,
                            t=state.t + dt)
        new = self._derive(new, deflection_rate=omega_o - pos_rate, contact=contact)
        if not all(math.isfinite(x) for x in new.vector()):
            raise IntegrationError("integration produced non-finite state")
        return new

    def measure(self, state: ActuatorState, quantized: bool = False) -> SensorReadings:
        return measure(state, self.dtm, quantized)
