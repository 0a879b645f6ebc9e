"""Typed failures raised across the library.

The three groups below map onto CLI exit codes: validation (2),
numerical failure (3) and precondition or hypothesis failure (4).
"""
from typing import List, Optional, Sequence


class ExcursionError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ExcursionError):
    exit_code = 2


class NumericalError(ExcursionError):
    exit_code = 3


class PreconditionError(ExcursionError):
    exit_code = 4

    def __init__(self, message: str, endpoint: Optional[str] = None):
        super().__init__(message)
        self.endpoint = endpoint


# Validation

class DomainError(ValidationError):
    pass


class ScaledResultError(ValidationError):
    """Result overflows; value = mantissa * exp(log_scale)."""

    def __init__(self, message: str, log_scale: float, mantissa: float):
        super().__init__(message)
        self.log_scale = log_scale
        self.mantissa = mantissa


class NotAnSFractionError(ValidationError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class InvalidHError(ValidationError):
    pass


class InconsistentBranchError(ValidationError):
    pass


# Numerical

class NumericalFailureError(NumericalError):
    def __init__(self, message: str, residual: float = float('nan')):
        super().__init__(message)
        self.residual = residual


class ClassificationUncertainError(NumericalError):
    pass


class ConvergentPoleError(NumericalError):
    def __init__(self, message: str, level: int):
        super().__init__(message)
        self.level = level


class NonConvergenceError(NumericalError):
    def __init__(self, message: str, depth: int):
        super().__init__(message)
        self.depth = depth


class SignSelectionError(NumericalError):
    def __init__(self, message: str, level: int):
        super().__init__(message)
        self.level = level


class AtomSuspectedError(NumericalError):
    def __init__(self, message: str, z: float):
        super().__init__(message)
        self.z = z


class RefineGridError(NumericalError):
    pass


class ExtendGridError(NumericalError):
    def __init__(self, message: str, deficit: float):
        super().__init__(message)
        self.deficit = deficit


class MomentDivergenceError(NumericalError):
    pass


class BlowUpError(NumericalError):
    def __init__(self, message: str, x: float):
        super().__init__(message)
        self.x = x


class HorizonTooShortError(NumericalError):
    def __init__(self, message: str, censored_fraction: float):
        super().__init__(message)
        self.censored_fraction = censored_fraction


# Preconditions

class HypothesisError(PreconditionError):
    """Ciesielski-Taylor hypotheses that failed, by number."""

    def __init__(self, message: str, failed: Sequence[int], note: str = ""):
        super().__init__(message)
        self.failed: List[int] = list(failed)
        self.note = note


# Signals

class TerminatingFraction(ExcursionError):
    """The series defines a finite fraction: only `recovered` levels exist."""

    def __init__(self, message: str, recovered: int, coefficients=None):
        super().__init__(message)
        self.recovered = recovered
        self.coefficients = coefficients


def exit_code_for(error: BaseException) -> int:
    return getattr(error, 'exit_code', 3 if isinstance(error, ExcursionError) else 1)
