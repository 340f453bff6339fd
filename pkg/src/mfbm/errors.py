"""Exception hierarchy.

Validation errors (bad input, bad parameters) map to CLI exit code 2;
numerical failures map to exit code 3.
"""


class MfbmError(Exception):
    """Base class for all package errors."""


class ValidationError(MfbmError, ValueError):
    """Input or parameter values are not acceptable."""


class ParameterDomainError(ValidationError):
    pass


class ExistenceError(ValidationError):
    """Parameters do not define a valid (positive semi-definite) mfBm."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class DegeneratePathError(ValidationError):
    pass


class InsufficientDataError(ValidationError):
    pass


class PanelError(ValidationError):
    """Malformed panel CSV. ``code`` identifies the failure kind."""

    def __init__(self, code, message):
        super().__init__(f"{code}: {message}")
        self.code = code


class NumericalError(MfbmError, ArithmeticError):
    """A computation failed numerically (indefinite matrix, singular system)."""


class UnidentifiedError(NumericalError):
    """Estimator undefined because H_i + H_j is (numerically) one."""
