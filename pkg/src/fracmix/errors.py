"""Exception hierarchy."""

from __future__ import annotations

from typing import Any


class FracmixError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(FracmixError, ValueError):
    """An argument lies outside the supported parameter range."""


class GammaPoleError(ParameterDomainError):
    pass


class ConvergenceError(FracmixError, ArithmeticError):
    """A numerical method failed to reach its accuracy target."""


class BelowThresholdError(ParameterDomainError):
    """An asymptotic expansion was requested below its certified range."""


class QuadratureError(ConvergenceError):
    pass


class DegenerateDataError(ParameterDomainError):
    """Initial datum vanishes identically (or the chosen mode is zero)."""


class BoundaryCompatibilityError(ParameterDomainError):
    pass


class AuditError(FracmixError):
    """A runtime audit (positivity, monotonicity) failed.

    ``report`` carries the machine-readable audit result.
    """

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class NonUniquenessError(AuditError):
    """Some Delta_k(T, beta) <= 0: the forward problem may have several solutions."""


class SingularSystemError(FracmixError, ArithmeticError):
    pass


class SolvabilityError(FracmixError):
    """Observation data lie outside the solvability bracket.

    ``code`` is one of ``beta_below``, ``beta_above``, ``alpha_below``,
    ``alpha_above``.
    """

    def __init__(self, message: str, code: str, report: Any = None):
        super().__init__(message)
        self.code = code
        self.report = report
