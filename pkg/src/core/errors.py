"""
Centralized error taxonomy for the imagery BCI system.

This module provides the error categories, specific codes and the custom
exception hierarchy shared by every stage: container I/O, preprocessing,
decoding, streaming, the online pipeline and the command-line surface.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, ClassVar

logger = logging.getLogger(__name__)


class ErrorType(Enum):
    """Error type categories for consistent error handling."""

    FILE = "file"
    VALIDATION = "validation"
    CONFIG = "config"
    PROTOCOL = "protocol"
    NUMERICAL = "numerical"
    PIPELINE = "pipeline"
    SYSTEM = "system"


class ErrorCode(Enum):
    """Specific error codes for common scenarios."""

    # File-related errors
    FILE_NOT_FOUND = "FILE_NOT_FOUND"
    PERMISSION_DENIED = "PERMISSION_DENIED"
    TRUNCATED_PAYLOAD = "TRUNCATED_PAYLOAD"
    BAD_MAGIC = "BAD_MAGIC"
    VERSION_MISMATCH = "VERSION_MISMATCH"
    KIND_MISMATCH = "KIND_MISMATCH"

    # Validation errors
    INVALID_INPUT = "INVALID_INPUT"
    INVALID_FORMAT = "INVALID_FORMAT"
    VALUE_OUT_OF_RANGE = "VALUE_OUT_OF_RANGE"
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    UNPAIRED_TRIGGERS = "UNPAIRED_TRIGGERS"
    MISSING_LABEL = "MISSING_LABEL"
    EMPTY_INPUT = "EMPTY_INPUT"

    # Configuration errors
    CONFIG_MISSING = "CONFIG_MISSING"
    CONFIG_INVALID = "CONFIG_INVALID"
    CONFIG_PARSE_ERROR = "CONFIG_PARSE_ERROR"

    # Stream protocol errors
    MALFORMED_FRAME = "MALFORMED_FRAME"
    SAMPLE_GAP = "SAMPLE_GAP"
    UNEXPECTED_FRAME = "UNEXPECTED_FRAME"
    TRANSPORT_FAILURE = "TRANSPORT_FAILURE"

    # Numerical errors
    NAN_LOSS = "NAN_LOSS"
    RANK_DEFICIENT = "RANK_DEFICIENT"
    EMPTY_BAND = "EMPTY_BAND"

    # Pipeline errors
    TRIAL_ABORTED = "TRIAL_ABORTED"
    PROFILE_MISMATCH = "PROFILE_MISMATCH"

    # System errors
    OPERATION_CANCELLED = "OPERATION_CANCELLED"
    TIMEOUT = "TIMEOUT"
    MEMORY_ERROR = "MEMORY_ERROR"
    OS_ERROR = "OS_ERROR"

    # Generic
    UNKNOWN = "UNKNOWN"


class ErrorSeverity(Enum):
    """Error severity levels."""

    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


# Process exit codes per error category
EXIT_CODES: dict[ErrorType, int] = {
    ErrorType.CONFIG: 2,
    ErrorType.VALIDATION: 2,
    ErrorType.FILE: 3,
    ErrorType.PROTOCOL: 4,
    ErrorType.NUMERICAL: 5,
    ErrorType.PIPELINE: 6,
    ErrorType.SYSTEM: 1,
}


@dataclass
class BaseAppError(Exception):
    """
    Base application error with comprehensive metadata.

    This is the root of all custom application errors, providing
    structured information for logging, exit codes and operator feedback.
    """

    type: ErrorType
    code: ErrorCode
    user_message: str
    technical_message: str | None = None
    severity: ErrorSeverity = ErrorSeverity.MEDIUM
    retriable: bool = False
    context: dict[str, Any] = field(default_factory=dict)

    def __str__(self) -> str:
        """Return user-friendly error message."""
        return self.user_message

    def __repr__(self) -> str:
        """Return detailed error representation for debugging."""
        return (
            f"{self.__class__.__name__}("
            f"type={self.type.value}, "
            f"code={self.code.value}, "
            f"message='{self.user_message}'"
            f")"
        )

    @property
    def exit_code(self) -> int:
        """Process exit code associated with this error's category."""
        return EXIT_CODES.get(self.type, 1)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "type": self.type.value,
            "code": self.code.value,
            "user_message": self.user_message,
            "technical_message": self.technical_message,
            "severity": self.severity.value,
            "retriable": self.retriable,
            "context": self.context,
        }


class _CategoryError(BaseAppError):
    """
    Error of one fixed category.

    Subclasses set ``category`` and, when it differs from MEDIUM, the
    ``default_severity``; constructors take keyword arguments only.
    """

    category: ClassVar[ErrorType] = ErrorType.SYSTEM
    default_severity: ClassVar[ErrorSeverity] = ErrorSeverity.MEDIUM

    def __init__(
        self,
        *,
        code: ErrorCode,
        user_message: str,
        technical_message: str | None = None,
        severity: ErrorSeverity | None = None,
        retriable: bool = False,
        context: dict[str, Any] | None = None,
    ):
        super().__init__(
            type=self.category,
            code=code,
            user_message=user_message,
            technical_message=technical_message,
            severity=severity or self.default_severity,
            retriable=retriable,
            context=context or {},
        )


class FileError(_CategoryError):
    """Container and model file errors (missing, truncated, wrong version)."""

    category = ErrorType.FILE


class ValidationError(_CategoryError):
    """Input validation errors; ``field`` names the offending argument."""

    category = ErrorType.VALIDATION

    def __init__(self, *, code: ErrorCode, user_message: str, field: str | None = None, **kwargs: Any):
        context = kwargs.pop("context", None) or {}
        if field:
            context["field"] = field
        super().__init__(code=code, user_message=user_message, context=context, **kwargs)

    @property
    def field(self) -> str | None:
        return self.context.get("field")


class ConfigError(_CategoryError):
    """Run configuration errors; ``path`` names the offending key."""

    category = ErrorType.CONFIG

    def __init__(self, *, code: ErrorCode, user_message: str, path: str | None = None, **kwargs: Any):
        context = kwargs.pop("context", None) or {}
        if path:
            context["path"] = path
        super().__init__(code=code, user_message=user_message, context=context, **kwargs)

    @property
    def path(self) -> str | None:
        return self.context.get("path")


class ProtocolError(_CategoryError):
    """Stream wire protocol errors; a session that raises one is corrupt."""

    category = ErrorType.PROTOCOL
    default_severity = ErrorSeverity.HIGH


class NumericalError(_CategoryError):
    """NaN losses, degenerate covariances, empty bands."""

    category = ErrorType.NUMERICAL
    default_severity = ErrorSeverity.HIGH


class PipelineError(_CategoryError):
    """Online pipeline errors (aborted trials, model/profile mismatches)."""

    category = ErrorType.PIPELINE
    default_severity = ErrorSeverity.HIGH


class SystemError(_CategoryError):
    """System level errors (cancellation, timeouts, OS failures)."""

    category = ErrorType.SYSTEM
    default_severity = ErrorSeverity.HIGH


class CancellationError(SystemError):
    """Raised when a cooperative cancellation token fires."""

    def __init__(self, message: str = "Operation was cancelled"):
        super().__init__(code=ErrorCode.OPERATION_CANCELLED, user_message=message, retriable=True)


_CATEGORY_CLASSES: dict[ErrorType, type[_CategoryError]] = {
    cls.category: cls for cls in (FileError, ValidationError, ConfigError, ProtocolError, NumericalError, PipelineError, SystemError)
}


# Exception mapping configuration
_EXCEPTION_MAPPING: dict[type[Exception], tuple[ErrorType, ErrorCode, str]] = {
    FileNotFoundError: (ErrorType.FILE, ErrorCode.FILE_NOT_FOUND, "File not found"),
    PermissionError: (ErrorType.FILE, ErrorCode.PERMISSION_DENIED, "Permission denied"),
    OSError: (ErrorType.FILE, ErrorCode.OS_ERROR, "I/O error occurred"),
    ValueError: (ErrorType.VALIDATION, ErrorCode.INVALID_INPUT, "Invalid input provided"),
    TimeoutError: (ErrorType.SYSTEM, ErrorCode.TIMEOUT, "Operation timed out"),
    MemoryError: (ErrorType.SYSTEM, ErrorCode.MEMORY_ERROR, "Insufficient memory"),
    FloatingPointError: (ErrorType.NUMERICAL, ErrorCode.UNKNOWN, "Floating point failure"),
}


def map_exception(exc: Exception, context: dict[str, Any] | None = None) -> BaseAppError:
    """
    Map a built-in exception to a custom application error.

    Args:
        exc: The exception to map
        context: Optional context information

    Returns:
        BaseAppError instance with appropriate type and metadata
    """
    context = context or {}

    if isinstance(exc, BaseAppError):
        return exc

    exc_type = type(exc)
    mapped = _EXCEPTION_MAPPING.get(exc_type)
    if mapped is None:
        # Subclasses (e.g. ConnectionResetError) map through their nearest known base
        mapped = next((v for k, v in _EXCEPTION_MAPPING.items() if isinstance(exc, k)), None)

    if mapped is not None:
        error_type, error_code, default_message = mapped
        return _CATEGORY_CLASSES[error_type](
            code=error_code,
            user_message=str(exc) or default_message,
            technical_message=f"{exc_type.__name__}: {exc}",
            context=context,
        )

    logger.warning(f"Unknown exception type: {exc_type.__name__}: {exc}")
    return SystemError(
        code=ErrorCode.UNKNOWN,
        user_message="An unexpected error occurred",
        technical_message=f"{exc_type.__name__}: {exc}",
        context=context,
    )


def from_exception(exc: Exception, context: dict[str, Any] | None = None) -> BaseAppError:
    """
    Convert any exception to a BaseAppError.

    This is an alias for map_exception for convenience.
    """
    return map_exception(exc, context)
