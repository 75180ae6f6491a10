"""
================================================================================
EXCEPTIONS.PY - Error Hierarchy & Exit Codes
================================================================================
Every failure the tool can report belongs to one of three families, and each
family maps onto one CLI exit code:

    ConfigError     -> 1   (bad config, bad parameters, aliasing guard)
    NumericalError  -> 2   (integrator / eigensolver / invariant failures)
    OutputError     -> 3   (I/O failures, refusing to overwrite)
================================================================================
"""

from typing import Optional, Sequence


EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_OUTPUT = 3


class QuantumSonifyError(Exception):
    """Base class for every error raised by the tool."""

    exit_code = EXIT_NUMERICAL


# =============================================================================
# CONFIGURATION
# =============================================================================

class ConfigError(QuantumSonifyError):
    exit_code = EXIT_CONFIG


class ConfigSyntaxError(ConfigError):
    """The config text is not valid JSON."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ConfigValidationError(ConfigError):
    """A config value or key violates the schema."""

    def __init__(self, path: str, message: str, suggestion: Optional[str] = None):
        text = f"{path}: {message}"
        if suggestion:
            text += f" (did you mean '{suggestion}'?)"
        super().__init__(text)
        self.path = path
        self.suggestion = suggestion


class InvalidParameterError(ConfigError):
    pass


class ModelTooLargeError(InvalidParameterError):
    """Requested model does not fit the dense representation."""


class AliasingError(ConfigError):
    """Highest mapped partial is too close to Nyquist."""


# =============================================================================
# NUMERICS
# =============================================================================

class NumericalError(QuantumSonifyError):
    exit_code = EXIT_NUMERICAL


class DimensionError(NumericalError):
    def __init__(self, what: str, expected: Sequence[int], found: Sequence[int]):
        super().__init__(f"{what}: expected shape {tuple(expected)}, found {tuple(found)}")


class HermiticityError(NumericalError):
    def __init__(self, what: str, residue: float, tol: float):
        super().__init__(f"{what} is not Hermitian: max|A - A†| = {residue:.3e} > {tol:.1e}")
        self.residue = residue


class PositivityError(NumericalError):
    pass


class NormCollapseError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class FrameSpacingError(NumericalError):
    pass


class TrajectoryAbortError(NumericalError):
    """A single stochastic trajectory failed inside an ensemble."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"trajectory {index} aborted: {cause}")
        self.index = index
        self.cause = cause


# =============================================================================
# OUTPUT
# =============================================================================

class OutputError(QuantumSonifyError):
    exit_code = EXIT_OUTPUT
