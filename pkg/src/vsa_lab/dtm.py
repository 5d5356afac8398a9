"""Planetary-gear differential transmission.

The ring gear (driven by motor 1) and sun gear (driven by motor 2) are the
inputs; the carrier angle is the mechanism position ``theta_pos`` and the
carrier angle relative to the sun is the pivot revolution ``theta_pivot``.
The model is rigid and lossless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

NOMINAL_SPEED = 43.0 * 2.0 * math.pi / 60.0  # rad/s at the output
NOMINAL_TORQUE = 55.7  # Nm


@dataclass(frozen=True)
class DtmParams:
    R: float = 0.036  # ring gear (internal teeth) radius, m
    r: float = 0.018  # sun gear radius, m
    n1: float = -100.0  # motor 1 turns per ring turn
    n2: float = 50.0  # motor 2 turns per sun turn

    def __post_init__(self):
        if not (self.r > 0 and self.R > self.r):
            raise DomainError(f"require R > r > 0, got R={self.R!r}, r={self.r!r}")
        if self.n1 == 0 or self.n2 == 0:
            raise DomainError("gear ratios n1, n2 must be non-zero")

    @property
    def alpha(self) -> float:
        return self.R / (self.R + self.r)


@dataclass(frozen=True)
class GearAngles:
    """Ring/sun input angles and the dependent planet-stage angles."""

    theta_r: float
    theta_s: float
    theta_c: float
    theta_cs: float
    theta_p: float

    @classmethod
    def from_inputs(cls, theta_r, theta_s, p: DtmParams) -> "GearAngles":
        R, r = p.R, p.r
        theta_c = (theta_r * R + theta_s * r) / (R + r)
        theta_cs = R * (theta_r - theta_s) / (R + r)
        theta_p = (theta_r * R - theta_s * r) / (R - r)
        return cls(theta_r, theta_s, theta_c, theta_cs, theta_p)


def forward(theta_r, theta_s, p: DtmParams):
    """Gear angles -> ``(theta_pos, theta_pivot)``.

    Linear, so it applies equally to velocities.
    """
    a = p.alpha
    return a * theta_r + (1.0 - a) * theta_s, a * (theta_r - theta_s)


def inverse(theta_pos, theta_pivot, p: DtmParams):
    """``(theta_pos, theta_pivot)`` -> ``(theta_r, theta_s)``."""
    return theta_pos + (p.r / p.R) * theta_pivot, theta_pos - theta_pivot


def motor_to_gear(omega_M1, omega_M2, p: DtmParams):
    return omega_M1 / p.n1, omega_M2 / p.n2


def gear_to_motor(omega_r, omega_s, p: DtmParams):
    return p.n1 * omega_r, p.n2 * omega_s


def torque_split(tau_c, p: DtmParams):
    """Ring and sun input torques balancing a carrier torque ``tau_c``.

    tau_r : tau_s : tau_c = -R : -r : (R + r)
    """
    total = p.R + p.r
    return -tau_c * p.R / total, -tau_c * p.r / total


def generalized_to_gear_torques(q_pos, q_pivot, p: DtmParams):
    """Map generalized forces on (theta_pos, theta_pivot) to ring/sun torques.

    This is the transpose of the forward Jacobian; with ``q_pivot = 0`` and
    ``q_pos = -tau_c`` it reduces to :func:`torque_split`.
    """
    a = p.alpha
    return a * (q_pos + q_pivot), (1.0 - a) * q_pos - a * q_pivot


def power_split(Omega, omega, tau_c, p: DtmParams):
    """Power delivered by ring, sun, and to the carrier: ``(P_r, P_s, P_c)``.

    ``Omega`` and ``omega`` are ring and sun angular velocities.
    """
    total = p.R + p.r
    carrier_rate = (Omega * p.R + omega * p.r) / total
    P_r = tau_c * (Omega * p.R) / total
    P_s = tau_c * (omega * p.r) / total
    return P_r, P_s, tau_c * carrier_rate


def ptr_report(motor_powers, nominal_torque=NOMINAL_TORQUE, nominal_velocity=NOMINAL_SPEED):
    """Power transmission ratio: nominal output power over summed motor power.

    Reported as computed; with the prototype's published ratings
    (55.7 Nm, 43 rpm, 150 W + 80 W) it exceeds 1.
    """
    P1, P2 = motor_powers
    if P1 < 0 or P2 < 0:
        raise DomainError("motor powers must be non-negative")
    total = P1 + P2
    if total == 0:
        raise DomainError("combined motor power is zero")
    return nominal_torque * nominal_velocity / total
