"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a model function."""


class DeflectionLimitError(ValueError):
    """Requested deflection exceeds the mechanical/spring limit."""

    def __init__(self, theta_tau, limit):
        self.theta_tau = theta_tau
        self.limit = limit
        super().__init__(
            f"deflection {theta_tau:.6g} rad exceeds limit {limit:.6g} rad"
        )


class InfeasibleCommandError(ValueError):
    """A (stiffness, torque) command cannot be realised within deflection limits."""

    def __init__(self, tau_d, max_torque):
        self.tau_d = tau_d
        self.max_torque = max_torque
        super().__init__(
            f"torque command {tau_d:.6g} Nm exceeds achievable {max_torque:.6g} Nm"
        )


class IntegrationError(RuntimeError):
    """The plant integrator received or produced non-finite values."""


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
