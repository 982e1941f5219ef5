from typing import Any, Dict, Optional


class LmftError(Exception):
    """Base class of every error raised by the package."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": self.__class__.__name__,
            "message": self.message,
            "details": self.details,
        }


class ValidationError(LmftError, ValueError):
    """Invalid specification, configuration or input data."""


class InsufficientSupportError(ValidationError):
    """A local fit has too few points inside the kernel support."""


class NumericalError(LmftError):
    """A covariance matrix could not be factorized, even with jitter."""


class FitError(NumericalError):
    """Every optimizer restart of a fit failed."""
