"""Variable stiffness mechanism: lever + hypocycloidal pivot drive.

All quantities are SI (m, rad, N, Nm). The pivot position ``l_s`` is measured
from the spring end of the lever; ``l_s = 0`` gives zero stiffness and
``l_s = l_t`` a rigid joint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DeflectionLimitError, DomainError

#: Stiffness returned for the rigid configuration ``l_s = l_t``.
RIGID = math.inf

# Relative slack used when comparing a deflection against its limit.
_LIMIT_RTOL = 1e-9


@dataclass(frozen=True)
class VsmParams:
    """Geometry and spring constants of the mechanism.

    ``R0`` is the internal gear radius; the pivot gear radius is ``R0 / 2``
    (straight-line hypocycloid) and the pivot stroke is ``2 * R0``.
    """

    k_s: float = 81.7e3  # N/m, one spring of the pair
    R0: float = 0.030  # m
    r_tau: float = 0.015  # m
    h_s_max: float = 0.006  # m
    theta_tau_cap: float = math.radians(30.0)  # rad

    def __post_init__(self):
        for name in ("k_s", "R0", "r_tau", "h_s_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
        if not 0.0 < self.theta_tau_cap < math.pi / 2:
            raise DomainError("theta_tau_cap must lie in (0, 90) degrees")

    @property
    def l_t(self) -> float:
        """Total pivot stroke, equal to the internal gear diameter."""
        return 2.0 * self.R0

    @property
    def r_g(self) -> float:
        return 0.5 * self.R0


def pivot_position(theta_pivot: float, p: VsmParams) -> float:
    return p.R0 * (1.0 - math.cos(theta_pivot))


def pivot_angle_from_position(l_s: float, p: VsmParams) -> float:
    """Inverse of :func:`pivot_position` on the branch ``[0, pi]``."""
    if not 0.0 <= l_s <= p.l_t:
        raise DomainError(f"pivot position {l_s!r} m outside [0, {p.l_t}] m")
    return math.acos(max(-1.0, 1.0 - l_s / p.R0))


def _lever_ratio(l_s: float, p: VsmParams) -> float:
    return l_s / (p.l_t - l_s)


def _check_pivot(l_s: float, p: VsmParams) -> None:
    if not 0.0 <= l_s <= p.l_t:
        raise DomainError(f"pivot position {l_s!r} m outside [0, {p.l_t}] m")


def is_rigid(l_s: float, p: VsmParams) -> bool:
    return l_s >= p.l_t


def stiffness(l_s: float, p: VsmParams) -> float:
    """Torsional stiffness d(tau)/d(theta_tau) in Nm/rad.

    Independent of the deflection. Returns :data:`RIGID` at ``l_s = l_t``.
    """
    _check_pivot(l_s, p)
    if is_rigid(l_s, p):
        return RIGID
    x = _lever_ratio(l_s, p)
    return p.r_tau**2 * p.k_s * x * x


def stiffness_gradient(l_s: float, p: VsmParams) -> float:
    """d(stiffness)/d(l_s) in Nm/rad per metre."""
    _check_pivot(l_s, p)
    if is_rigid(l_s, p):
        return RIGID
    gap = p.l_t - l_s
    return 2.0 * p.r_tau**2 * p.k_s * l_s * p.l_t / gap**3


def pivot_from_stiffness(delta_d: float, p: VsmParams) -> float:
    """Pivot position giving stiffness ``delta_d`` (Nm/rad).

    Non-finite (infinite) stiffness maps to the rigid position ``l_t``.
    """
    if delta_d < 0:
        raise DomainError(f"stiffness must be non-negative, got {delta_d!r}")
    if not math.isfinite(delta_d):
        return p.l_t
    q = math.sqrt(delta_d / (p.r_tau**2 * p.k_s))
    return p.l_t * q / (1.0 + q)


def max_deflection(l_s: float, p: VsmParams) -> float:
    """Largest admissible |theta_tau| at pivot position ``l_s``.

    The smaller of the mechanical cap and the spring-travel limit
    ``h_s_max (l_t - l_s) / (r_tau l_s)``.
    """
    _check_pivot(l_s, p)
    if l_s <= 0.0:
        return p.theta_tau_cap
    if is_rigid(l_s, p):
        return 0.0
    spring_limit = p.h_s_max * (p.l_t - l_s) / p.r_tau / l_s  # no underflow for tiny l_s
    return min(p.theta_tau_cap, spring_limit)


def deflection_crossover(p: VsmParams) -> float:
    """Pivot position where the spring-travel limit meets the mechanical cap."""
    return p.h_s_max * p.l_t / (p.r_tau * p.theta_tau_cap + p.h_s_max)


def _check_deflection(theta_tau: float, l_s: float, p: VsmParams) -> None:
    limit = max_deflection(l_s, p)
    if abs(theta_tau) > limit * (1.0 + _LIMIT_RTOL) + 1e-15:
        raise DeflectionLimitError(theta_tau, limit)


def torque(theta_tau: float, l_s: float, p: VsmParams) -> float:
    """Output torque for deflection ``theta_tau`` (rad) at pivot ``l_s``.

    In the rigid configuration the deflection is pinned at zero and the
    spring carries no load, so 0 is returned.
    """
    _check_deflection(theta_tau, l_s, p)
    if theta_tau == 0.0 or is_rigid(l_s, p):
        return 0.0
    return stiffness(l_s, p) * theta_tau


def spring_state(theta_tau: float, l_s: float, p: VsmParams):
    """Rack travel, spring compression and the two forces.

    Returns ``(h_p, h_s, F_p, F_s)``. Signs follow ``theta_tau``; the engaged
    spring of the pair is the one compressed by that direction.
    """
    _check_deflection(theta_tau, l_s, p)
    if is_rigid(l_s, p):
        return 0.0, 0.0, 0.0, 0.0
    x = _lever_ratio(l_s, p)
    h_p = theta_tau * p.r_tau
    h_s = h_p * x
    F_s = p.k_s * h_s
    F_p = F_s * x
    return h_p, h_s, F_p, F_s


def elastic_energy(theta_tau: float, l_s: float, p: VsmParams) -> float:
    """Energy stored in the engaged spring, J."""
    h_s = spring_state(theta_tau, l_s, p)[1]
    return 0.5 * p.k_s * h_s * h_s


def energy_at_spring_limit(p: VsmParams) -> float:
    return 0.5 * p.k_s * p.h_s_max**2


class VsmSpring:
    """Adapter exposing the mechanism laws through the plant's spring interface.

    The plant only needs torque, stored energy, its pivot-position gradient,
    the deflection limit and the stiffness used for setpoint generation.
    """

    def __init__(self, params: VsmParams):
        self.params = params

    def torque(self, theta_tau, l_s):
        return torque(theta_tau, l_s, self.params)

    def energy(self, theta_tau, l_s):
        return elastic_energy(theta_tau, l_s, self.params)

    def energy_gradient_ls(self, theta_tau, l_s):
        """dE/dl_s at fixed deflection (force on the pivot along its stroke)."""
        if theta_tau == 0.0 or is_rigid(l_s, self.params):
            return 0.0
        return 0.5 * stiffness_gradient(l_s, self.params) * theta_tau**2

    def max_deflection(self, l_s):
        return max_deflection(l_s, self.params)

    def stiffness(self, l_s):
        return stiffness(l_s, self.params)
