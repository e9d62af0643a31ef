"""
Exception hierarchy for STA Guard.
Every failure raised by the engine derives from STAGuardError so the HTTP
surface and the CLI can map it to a status / exit code.
"""
from typing import Optional


class STAGuardError(Exception):
    """Base class for all STA Guard errors"""


class InvalidArgumentError(STAGuardError, ValueError):
    """A scheme, pulse or problem was constructed with parameters outside its domain"""


class ConfigError(STAGuardError):
    """A run configuration or scheme descriptor could not be parsed"""


class SynthesisError(STAGuardError):
    """Pulse synthesis failed (undefined phase or diverging Rabi frequency)"""

    def __init__(self, message: str, t: Optional[float] = None):
        super().__init__(message)
        self.t = t


class NumericError(STAGuardError):
    """Quadrature or propagation did not reach the requested accuracy"""

    def __init__(self, message: str, achieved_error: Optional[float] = None):
        super().__init__(message)
        self.achieved_error = achieved_error


class OptimizationError(STAGuardError):
    """No optimizer start produced a finite objective value"""


def http_status(error: Exception) -> int:
    """HTTP status code for an engine error"""
    if isinstance(error, (InvalidArgumentError, ConfigError)):
        return 400
    if isinstance(error, (SynthesisError, NumericError, OptimizationError)):
        return 422
    return 500


def exit_code(error: Exception) -> int:
    """CLI exit code for an engine error"""
    if isinstance(error, (InvalidArgumentError, ConfigError)):
        return 2
    return 3
