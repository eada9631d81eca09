"""
Custom Exceptions Module
Exception hierarchy for the equiangular-lines bound calculator.

Every domain exception carries a machine-readable error code, a details
dictionary and the CLI exit status it maps to.
"""

import logging
from typing import Any, Iterable, Optional

logger = logging.getLogger(__name__)


class EquiboundException(Exception):
    """
    Base exception class for all equibound errors.

    Subclasses set ``exit_code`` (the CLI exit status) and may lower
    ``log_level`` when the error is recoverable.
    """

    exit_code = 1
    log_level = logging.ERROR

    def __init__(self, message: str, error_code: Optional[str] = None, details: Optional[dict] = None):
        """
        Initialize base exception with enhanced error information.

        Args:
            message: Human-readable error message
            error_code: Machine-readable error code for programmatic handling
            details: Additional error context and debugging information
        """
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.__class__.__name__.upper()
        self.details = details or {}

        logger.log(self.log_level, f"Exception created: {self.error_code} - {message}")
        if self.details:
            logger.debug(f"Exception details: {self.details}")

    def __str__(self) -> str:
        return f"[{self.error_code}] {self.message}"

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(message='{self.message}', error_code='{self.error_code}')"

    def to_dict(self) -> dict:
        """Convert exception to dictionary for JSON output."""
        return {
            'exception_type': self.__class__.__name__,
            'message': self.message,
            'error_code': self.error_code,
            'exit_code': self.exit_code,
            'details': self.details
        }


class InvalidInputException(EquiboundException):
    """Raised when user-supplied text (rational, angle, range) cannot be parsed."""

    exit_code = 2

    def __init__(self, message: str, input_value: Any = None, expected_format: Optional[str] = None):
        details = {}
        if input_value is not None:
            details['input_value'] = str(input_value)
        if expected_format:
            details['expected_format'] = expected_format

        super().__init__(
            message=message,
            error_code="INVALID_INPUT",
            details=details
        )
        self.input_value = input_value
        self.expected_format = expected_format


class ConfigurationException(EquiboundException):
    """Raised for an invalid run configuration."""

    exit_code = 2

    def __init__(self, message: str, config_key: Optional[str] = None, config_value: Any = None):
        details = {}
        if config_key:
            details['config_key'] = config_key
        if config_value is not None:
            details['config_value'] = str(config_value)

        super().__init__(
            message=message,
            error_code="CONFIGURATION_ERROR",
            details=details
        )
        self.config_key = config_key
        self.config_value = config_value


class PreconditionException(EquiboundException):
    """
    Raised when an operation is called outside its mathematical domain,
    e.g. ell() at the extremal base size or a clique search on too many vectors.
    """

    exit_code = 2

    def __init__(self, message: str, operation: Optional[str] = None, parameters: Optional[dict] = None):
        details = {}
        if operation:
            details['operation'] = operation
        if parameters:
            details['parameters'] = {key: str(value) for key, value in parameters.items()}

        super().__init__(
            message=message,
            error_code="PRECONDITION_FAILED",
            details=details
        )
        self.operation = operation
        self.parameters = parameters or {}


class MissingBoundDataException(EquiboundException):
    """Raised when no sound bound exists because two-distance queries went unanswered."""

    exit_code = 3

    def __init__(self, message: str, queries: Optional[Iterable[Any]] = None):
        self.queries = list(queries or [])
        super().__init__(
            message=message,
            error_code="MISSING_BOUND_DATA",
            details={'queries': [str(query) for query in self.queries]}
        )


class CacheFormatException(EquiboundException):
    """Raised when a cache file line cannot be parsed."""

    exit_code = 2

    def __init__(self, message: str, path: Optional[str] = None, line_number: Optional[int] = None):
        details = {}
        if path:
            details['path'] = str(path)
        if line_number is not None:
            details['line_number'] = line_number

        super().__init__(
            message=message,
            error_code="CACHE_FORMAT_ERROR",
            details=details
        )
        self.path = path
        self.line_number = line_number


class SolverException(EquiboundException):
    """
    Base class for external SDP solver protocol failures.
    The bound pipeline turns these into missing results, so they log at WARNING.
    """

    exit_code = 3
    log_level = logging.WARNING

    def __init__(self, message: str, command: Optional[str] = None, query: Any = None,
                 error_code: str = "SOLVER_ERROR", extra: Optional[dict] = None):
        details = dict(extra or {})
        if command:
            details['command'] = command
        if query is not None:
            details['query'] = str(query)

        super().__init__(message=message, error_code=error_code, details=details)
        self.command = command
        self.query = query


class SolverTimeoutException(SolverException):
    """The solver did not answer within the configured timeout."""

    def __init__(self, message: str, command: Optional[str] = None, query: Any = None,
                 timeout: Optional[float] = None):
        super().__init__(message, command=command, query=query, error_code="SOLVER_TIMEOUT",
                         extra={'timeout': timeout})
        self.timeout = timeout


class SolverExitException(SolverException):
    """The solver exited with a nonzero status (or could not be started)."""

    def __init__(self, message: str, command: Optional[str] = None, query: Any = None,
                 returncode: Optional[int] = None, stderr: str = ""):
        super().__init__(message, command=command, query=query, error_code="SOLVER_EXIT",
                         extra={'returncode': returncode, 'stderr': stderr[-500:]})
        self.returncode = returncode
        self.stderr = stderr


class SolverOutputException(SolverException):
    """The solver's standard output is not a single decimal number."""

    def __init__(self, message: str, command: Optional[str] = None, query: Any = None, output: str = ""):
        super().__init__(message, command=command, query=query, error_code="SOLVER_OUTPUT",
                         extra={'output': output[:200]})
        self.output = output


class VectorSetException(EquiboundException):
    """Raised for malformed vector sets or Gramians that are not equiangular."""

    exit_code = 4

    def __init__(self, message: str, violations: Optional[list] = None):
        self.violations = list(violations or [])
        super().__init__(
            message=message,
            error_code="VECTOR_SET_ERROR",
            details={'violations': self.violations[:20], 'violation_count': len(self.violations)}
        )


class VerificationException(EquiboundException):
    """Raised when at least one identity check of the verification suite fails."""

    exit_code = 4

    def __init__(self, message: str, failed_checks: Optional[list] = None):
        self.failed_checks = list(failed_checks or [])
        super().__init__(
            message=message,
            error_code="VERIFICATION_FAILED",
            details={'failed_checks': self.failed_checks}
        )


def safe_execute(func, *args, **kwargs):
    """
    Execute a function and return (success, result_or_exception).
    """
    try:
        result = func(*args, **kwargs)
        return True, result
    except Exception as e:
        return False, e
