"""Exception hierarchy shared by the solvers and the command line."""

from __future__ import annotations


class CrowdflowError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ConfigError(CrowdflowError, ValueError):
    """Invalid or inconsistent configuration."""

    exit_code = 3
    category = "invalid"


class ConfigFileNotFound(ConfigError):
    category = "missing_file"


class ConfigSyntaxError(ConfigError):
    category = "syntax"


class UnknownConfigKey(ConfigError):
    category = "unknown_key"


class SolverError(CrowdflowError, RuntimeError):
    """A solver could not produce a valid result."""

    exit_code = 4

    def __init__(self, message: str, *, step: int | None = None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)


class StabilityError(SolverError):
    """Density went negative beyond the allowed tolerance."""


class NumericalError(SolverError):
    """NaN or Inf appeared in a field."""


class EikonalError(SolverError):
    """Fast sweeping did not reach the requested tolerance."""

    def __init__(self, message: str, *, residual: float, step: int | None = None):
        self.residual = residual
        super().__init__(message, step=step)


class OutputError(CrowdflowError, OSError):
    """Reading or writing a data file failed."""

    exit_code = 5
