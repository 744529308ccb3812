"""Exception types raised by the simulation layers."""


class CavityDelayError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(CavityDelayError, ValueError):
    def __init__(self, field, value, reason="must be positive"):
        self.field = field
        self.value = value
        super().__init__(f"invalid parameter {field}={value!r}: {reason}")


class DegenerateSolutionError(CavityDelayError):
    """No stable steady-state branch is available."""


class SingularResponseError(CavityDelayError):
    def __init__(self, message, delta=None):
        self.delta = delta
        if delta is not None:
            message = f"{message} (delta={delta!r} rad/s)"
        super().__init__(message)


class DifferentiationError(CavityDelayError):
    """Finite-difference estimate failed to converge."""


class DivergenceError(CavityDelayError):
    def __init__(self, t_last):
        self.t_last = t_last
        super().__init__(f"integration diverged; last finite state at t={t_last!r} s")


class WindowError(CavityDelayError, ValueError):
    """Demodulation window does not satisfy the period constraints."""


class ConfigError(CavityDelayError, ValueError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
