"""Cascade PI controller for the two-motor actuator.

Outer loops act on the pivot revolution angle (stiffness) and the deflection
angle (torque); their velocity outputs are mixed through the inverse
differential kinematics into motor velocity setpoints, which inner PI loops
track. Every integrator is trapezoidal with conditional anti-windup.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from . import dtm as _dtm
from .dtm import DtmParams, NOMINAL_SPEED
from .errors import ConfigError, InfeasibleCommandError
from .vsm import (VsmParams, max_deflection, pivot_angle_from_position,
                  pivot_from_stiffness, stiffness)

RIGID_MARGIN = 1e-4  # m; pivot closer than this to l_t counts as rigid


class MixMode(str, enum.Enum):
    CONSISTENT = "consistent"
    LITERAL = "paper-literal"


class ControlMode(enum.Enum):
    COMPLIANT = "compliant"
    RIGID = "rigid"


@dataclass(frozen=True)
class ControllerGains:
    """PI gains. Position loops map rad -> rad/s; velocity loops are per motor.

    The defaults are a reference set tuned for the default plant.
    """

    k_stp: float = 40.0  # 1/s
    k_sti: float = 200.0  # 1/s^2
    k_pp: float = 40.0
    k_pi: float = 400.0
    k_vp1: float = 4.0  # dimensionless (velocity -> velocity setpoint)
    k_vi1: float = 100.0  # 1/s
    k_vp2: float = 4.0
    k_vi2: float = 100.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"gains.{name}", f"must be finite and >= 0, got {value!r}")
        for p_name, i_name in (("k_stp", "k_sti"), ("k_pp", "k_pi"),
                               ("k_vp1", "k_vi1"), ("k_vp2", "k_vi2")):
            if getattr(self, p_name) == 0 and getattr(self, i_name) == 0:
                raise ConfigError(f"gains.{p_name}", "loop has no non-zero gain")


@dataclass(frozen=True)
class Command:
    delta_d: float  # Nm/rad
    tau_d: float  # Nm


@dataclass(frozen=True)
class AngleTarget:
    """Direct setpoints for the two position loops, bypassing the stiffness law."""

    theta_pivot_d: float
    theta_tau_d: float = 0.0


@dataclass
class PIState:
    integral: float = 0.0
    prev_error: float = None
    saturated: bool = False

    def reset(self):
        self.integral = 0.0
        self.prev_error = None
        self.saturated = False


def pi_update(st: PIState, kp, ki, error, dt, limit=math.inf):
    """One trapezoidal PI step with output clamp and conditional integration.

    The integrator update is discarded whenever it would push an already
    clamped output further into saturation, and the integral itself never
    exceeds ``limit``.
    """
    prev = error if st.prev_error is None else st.prev_error
    candidate = st.integral + ki * dt * 0.5 * (error + prev)
    candidate = min(max(candidate, -limit), limit)
    out = kp * error + candidate
    if abs(out) > limit and out * error > 0:
        candidate = st.integral
        out = kp * error + candidate
    st.integral = candidate
    st.prev_error = error
    st.saturated = abs(out) > limit
    return min(max(out, -limit), limit)


@dataclass
class ControllerState:
    pivot: PIState = field(default_factory=PIState)
    deflection: PIState = field(default_factory=PIState)
    motor1: PIState = field(default_factory=PIState)
    motor2: PIState = field(default_factory=PIState)
    theta_pivot_d: float = 0.0
    theta_tau_d: float = 0.0

    def reset(self):
        for loop in (self.pivot, self.deflection, self.motor1, self.motor2):
            loop.reset()
        self.theta_pivot_d = 0.0
        self.theta_tau_d = 0.0

    @property
    def antiwindup_flags(self):
        return tuple(loop.saturated for loop in
                     (self.pivot, self.deflection, self.motor1, self.motor2))


def command_max_torque(delta_d, vsm: VsmParams):
    """Largest |torque| reachable at stiffness ``delta_d`` inside the deflection limit."""
    if delta_d == 0:
        return 0.0
    l_s = pivot_from_stiffness(delta_d, vsm)
    if l_s >= vsm.l_t:
        return math.inf
    return delta_d * max_deflection(l_s, vsm)


def setpoints(cmd: Command, vsm: VsmParams):
    """``(theta_pivot_d, theta_tau_d)`` for a stiffness/torque command."""
    max_tau = command_max_torque(cmd.delta_d, vsm)
    if abs(cmd.tau_d) > max_tau * (1.0 + 1e-12):
        raise InfeasibleCommandError(cmd.tau_d, max_tau)
    l_s = pivot_from_stiffness(cmd.delta_d, vsm)
    theta_pivot_d = pivot_angle_from_position(l_s, vsm)
    if cmd.tau_d == 0 or math.isinf(cmd.delta_d):
        return theta_pivot_d, 0.0
    return theta_pivot_d, cmd.tau_d / cmd.delta_d


def rigid_mode_guard(cmd: Command, vsm: VsmParams, margin: float = RIGID_MARGIN) -> ControlMode:
    if pivot_from_stiffness(cmd.delta_d, vsm) < vsm.l_t - margin:
        return ControlMode.COMPLIANT
    return ControlMode.RIGID


def nearest_equivalent(theta_star, theta):
    """Angle congruent to ``+-theta_star`` (mod 2 pi) closest to ``theta``.

    Both signs give the same pivot position, so the pivot loop can take the
    shorter way round.
    """
    best = None
    for base in (theta_star, -theta_star):
        k = round((theta - base) / (2.0 * math.pi))
        candidate = base + 2.0 * math.pi * k
        if best is None or abs(candidate - theta) < abs(best - theta) - 1e-12:
            best = candidate
    return best


def position_loops(theta_pivot_d, theta_pivot, theta_tau_d, theta_tau,
                   gains: ControllerGains, state: ControllerState, dt,
                   pivot_rate_limit=math.inf, deflection_rate_limit=math.inf):
    """Returns ``(dtheta_pivot_d, dtheta_tau_d)``."""
    dpivot = pi_update(state.pivot, gains.k_stp, gains.k_sti,
                       theta_pivot_d - theta_pivot, dt, pivot_rate_limit)
    dtau = pi_update(state.deflection, gains.k_pp, gains.k_pi,
                     theta_tau_d - theta_tau, dt, deflection_rate_limit)
    return dpivot, dtau


def mix(dtheta_tau_d, dtheta_pivot_d, p: DtmParams, mode=MixMode.CONSISTENT):
    """Motor velocity setpoints from deflection- and pivot-rate demands.

    The consistent mode inverts the differential kinematics with
    ``d(theta_pos)/dt = -d(theta_tau)/dt`` (output held). The literal mode
    uses ``Omega = dtau - dpivot``, ``omega = dtau + (r/R) dpivot``, which
    does not invert the kinematics under these sign conventions; it is kept
    to show what goes wrong.
    """
    if MixMode(mode) is MixMode.CONSISTENT:
        omega_r, omega_s = _dtm.inverse(-dtheta_tau_d, dtheta_pivot_d, p)
    else:
        omega_r = dtheta_tau_d - dtheta_pivot_d
        omega_s = dtheta_tau_d + (p.r / p.R) * dtheta_pivot_d
    return _dtm.gear_to_motor(omega_r, omega_s, p)


def velocity_loops(omega_d, omega_meas, gains: ControllerGains, state: ControllerState,
                   dt, limits=(math.inf, math.inf)):
    """Returns motor commands ``(u1, u2)``."""
    u1 = pi_update(state.motor1, gains.k_vp1, gains.k_vi1,
                   omega_d[0] - omega_meas[0], dt, limits[0])
    u2 = pi_update(state.motor2, gains.k_vp2, gains.k_vi2,
                   omega_d[1] - omega_meas[1], dt, limits[1])
    return u1, u2


def decoupled_setpoint_law(vsm: VsmParams):
    """Setpoint law of the decoupled mechanism: pivot fixed by stiffness alone."""

    def law(cmd: Command, theta_tau_meas: float):
        theta_pivot_d, theta_tau_d = setpoints(cmd, vsm)
        return vsm.R0 * (1.0 - math.cos(theta_pivot_d)), theta_tau_d

    return law


@dataclass
class StepInfo:
    """Diagnostics from the latest controller update."""

    mode: ControlMode = ControlMode.COMPLIANT
    theta_pivot_d: float = 0.0
    theta_tau_d: float = 0.0
    l_s_d: float = 0.0
    delta_cmd: float = 0.0
    tau_cmd: float = 0.0
    dtheta_pivot_d: float = 0.0
    dtheta_tau_d: float = 0.0
    omega_M1_d: float = 0.0
    omega_M2_d: float = 0.0


class CascadeController:
    """Stateful cascade controller; one instance per control loop.

    ``setpoint_law(cmd, theta_tau_meas) -> (l_s_d, theta_tau_d)`` converts a
    :class:`Command` into loop setpoints; it defaults to the decoupled law.
    """

    def __init__(self, vsm: VsmParams = None, dtm: DtmParams = None,
                 gains: ControllerGains = None, mode=MixMode.CONSISTENT,
                 motor_limits=None, pivot_rate_limit=NOMINAL_SPEED,
                 deflection_rate_limit=NOMINAL_SPEED, setpoint_law=None):
        self.vsm = vsm or VsmParams()
        self.dtm = dtm or DtmParams()
        self.gains = gains or ControllerGains()
        self.mode = MixMode(mode)
        if motor_limits is None:
            motor_limits = (abs(self.dtm.n1) * NOMINAL_SPEED, abs(self.dtm.n2) * NOMINAL_SPEED)
        self.motor_limits = tuple(motor_limits)
        self.pivot_rate_limit = pivot_rate_limit
        self.deflection_rate_limit = deflection_rate_limit
        self.setpoint_law = setpoint_law or decoupled_setpoint_law(self.vsm)
        self.state = ControllerState()
        self.info = StepInfo()

    def reset(self):
        self.state.reset()
        self.info = StepInfo()

    def _resolve(self, target, theta_pivot, theta_tau):
        if isinstance(target, AngleTarget):
            l_s = self.vsm.R0 * (1.0 - math.cos(target.theta_pivot_d))
            delta = stiffness(min(l_s, self.vsm.l_t), self.vsm)
            rigid = l_s >= self.vsm.l_t - RIGID_MARGIN
            tau_cmd = 0.0 if rigid or target.theta_tau_d == 0 else delta * target.theta_tau_d
            return (target.theta_pivot_d, 0.0 if rigid else target.theta_tau_d,
                    l_s, delta, tau_cmd, ControlMode.RIGID if rigid else ControlMode.COMPLIANT)
        mode = rigid_mode_guard(target, self.vsm)
        l_s_d, theta_tau_d = self.setpoint_law(target, theta_tau)
        l_s_d = min(max(l_s_d, 0.0), self.vsm.l_t)
        theta_star = pivot_angle_from_position(l_s_d, self.vsm)
        tau_cmd = target.tau_d
        if mode is ControlMode.RIGID:
            theta_tau_d = tau_cmd = 0.0
        return (nearest_equivalent(theta_star, theta_pivot), theta_tau_d, l_s_d,
                target.delta_d, tau_cmd, mode)

    def update(self, readings, target, dt):
        """One control period: sensor readings + target -> motor commands ``(u1, u2)``."""
        theta_pos, theta_pivot, theta_tau = readings.mechanism_angles(self.dtm)
        theta_pivot_d, theta_tau_d, l_s_d, delta_cmd, tau_cmd, mode = self._resolve(
            target, theta_pivot, theta_tau)
        st = self.state
        st.theta_pivot_d, st.theta_tau_d = theta_pivot_d, theta_tau_d
        dpivot, dtau = position_loops(theta_pivot_d, theta_pivot, theta_tau_d, theta_tau,
                                      self.gains, st, dt, self.pivot_rate_limit,
                                      self.deflection_rate_limit)
        w1, w2 = mix(dtau, dpivot, self.dtm, self.mode)
        u = velocity_loops((w1, w2), (readings.omega_M1, readings.omega_M2),
                           self.gains, st, dt, self.motor_limits)
        self.info = StepInfo(mode, theta_pivot_d, theta_tau_d, l_s_d, delta_cmd, tau_cmd,
                             dpivot, dtau, w1, w2)
        return u
