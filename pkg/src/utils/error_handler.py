"""Error types and structured error handling for MFEA-RL."""

import traceback
import zlib
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional

from .logging_setup import get_logger

logger = get_logger("mfea_rl.errors")


class ErrorSeverity(Enum):
    """Error severity levels."""

    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Error categories."""

    CONFIG = "configuration"
    USAGE = "usage"
    FILE_SYSTEM = "file_system"
    EVALUATION = "evaluation"
    UNKNOWN = "unknown"


class MfeaRlError(Exception):
    """Base class for every error raised by this package."""

    category = ErrorCategory.UNKNOWN

    def __init__(
        self,
        message: str,
        *,
        field_path: Optional[str] = None,
        suggestion: Optional[str] = None,
    ):
        self.message = message
        self.field_path = field_path
        self.suggestion = suggestion
        text = f"{field_path}: {message}" if field_path else message
        super().__init__(text)


class ConfigurationError(MfeaRlError):
    """Invalid configuration: bad parameters, unknown presets, bad partitions."""

    category = ErrorCategory.CONFIG


class UsageError(MfeaRlError, ValueError):
    """Invalid call arguments (action index, dimensions, task index...)."""

    category = ErrorCategory.USAGE


class EvaluationError(MfeaRlError):
    """A rollout produced a result that cannot be ranked."""

    category = ErrorCategory.EVALUATION


class ArtifactError(MfeaRlError, OSError):
    """Reading or writing artifacts and checkpoints failed."""

    category = ErrorCategory.FILE_SYSTEM


@dataclass
class ErrorReport:
    """Structured error information."""

    category: ErrorCategory
    severity: ErrorSeverity
    message: str
    details: Optional[str] = None
    suggestion: Optional[str] = None
    error_code: Optional[str] = None
    context: Optional[Dict[str, Any]] = None
    traceback_info: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "category": self.category.value,
            "severity": self.severity.value,
            "message": self.message,
            "details": self.details,
            "suggestion": self.suggestion,
            "error_code": self.error_code,
            "context": self.context,
            "traceback": self.traceback_info,
        }


_DEFAULT_SUGGESTIONS = {
    ErrorCategory.CONFIG: "Check the experiment config against docs/CONFIG_SCHEMA.md",
    ErrorCategory.USAGE: "Check the command arguments and the task/genome pairing",
    ErrorCategory.FILE_SYSTEM: "Check that the path exists and is writable",
    ErrorCategory.EVALUATION: "Re-run with --log-level DEBUG to see the failing rollout",
    ErrorCategory.UNKNOWN: "Please check the error details and try again",
}

_CATEGORY_CODES = {
    ErrorCategory.CONFIG: "CFG",
    ErrorCategory.USAGE: "USE",
    ErrorCategory.FILE_SYSTEM: "FS",
    ErrorCategory.EVALUATION: "EVAL",
    ErrorCategory.UNKNOWN: "UNK",
}

EXIT_CODES = {
    ErrorCategory.CONFIG: 2,
    ErrorCategory.USAGE: 3,
    ErrorCategory.FILE_SYSTEM: 4,
}


class ErrorHandler:
    """Classifies exceptions into reports, logs them and keeps a history."""

    def __init__(self):
        self.error_log: List[ErrorReport] = []

    def handle_error(
        self,
        exception: BaseException,
        context: Optional[Dict[str, Any]] = None,
    ) -> ErrorReport:
        """Handle and categorize an exception."""
        category, severity = self._classify_error(exception)
        suggestion = getattr(exception, "suggestion", None) or _DEFAULT_SUGGESTIONS[category]
        message = getattr(exception, "message", None) or str(exception) or type(exception).__name__

        error = ErrorReport(
            category=category,
            severity=severity,
            message=message,
            details=str(exception),
            suggestion=suggestion,
            error_code=self._generate_error_code(category, exception),
            context=context,
            traceback_info="".join(
                traceback.format_exception(type(exception), exception, exception.__traceback__)
            ),
        )
        self._log_error(error)
        self.error_log.append(error)
        return error

    def _classify_error(self, exception: BaseException):
        if isinstance(exception, MfeaRlError):
            category = exception.category
        elif isinstance(exception, (FileNotFoundError, PermissionError, OSError)):
            category = ErrorCategory.FILE_SYSTEM
        elif isinstance(exception, FloatingPointError):
            category = ErrorCategory.EVALUATION
        else:
            category = ErrorCategory.UNKNOWN

        severity_map = {
            ErrorCategory.CONFIG: ErrorSeverity.MEDIUM,
            ErrorCategory.USAGE: ErrorSeverity.MEDIUM,
            ErrorCategory.FILE_SYSTEM: ErrorSeverity.HIGH,
            ErrorCategory.EVALUATION: ErrorSeverity.HIGH,
            ErrorCategory.UNKNOWN: ErrorSeverity.CRITICAL,
        }
        return category, severity_map[category]

    def _generate_error_code(self, category: ErrorCategory, exception: BaseException) -> str:
        """Stable code: same category and message give the same code in every process."""
        digest = zlib.crc32(f"{type(exception).__name__}:{exception}".encode("utf-8")) % 1000
        return f"MFEA_{_CATEGORY_CODES[category]}_{digest:03d}"

    def _log_error(self, error: ErrorReport):
        log_method = {
            ErrorSeverity.LOW: logger.info,
            ErrorSeverity.MEDIUM: logger.warning,
            ErrorSeverity.HIGH: logger.error,
            ErrorSeverity.CRITICAL: logger.critical,
        }[error.severity]
        log_method(
            "error_handled",
            code=error.error_code,
            category=error.category.value,
            message=error.message,
        )

    def get_error_summary(self) -> Dict[str, Any]:
        """Get summary of recent errors."""
        by_category: Dict[str, int] = {}
        for error in self.error_log:
            by_category[error.category.value] = by_category.get(error.category.value, 0) + 1
        return {
            "total_errors": len(self.error_log),
            "by_category": by_category,
            "recent_errors": [
                {"code": e.error_code, "message": e.message, "category": e.category.value}
                for e in self.error_log[-5:]
            ],
        }

    def clear_error_log(self):
        """Clear error history."""
        self.error_log.clear()


def exit_code_for(error: ErrorReport) -> int:
    """Process exit code for a handled error."""
    return EXIT_CODES.get(error.category, 1)


_global_error_handler: Optional[ErrorHandler] = None


def get_error_handler() -> ErrorHandler:
    """Get global error handler instance."""
    global _global_error_handler
    if _global_error_handler is None:
        _global_error_handler = ErrorHandler()
    return _global_error_handler
