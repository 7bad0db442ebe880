"""Experiment exceptions."""

from typing import Any, Dict, List, Optional, Tuple


class ExperimentError(Exception):
    """Base exception for experiment runs."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigValidationError(ExperimentError):
    """Configuration document does not match the schema."""

    def __init__(
        self,
        message: str,
        errors: List[Tuple[str, str]],
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.errors = errors


class TaskExecutionError(ExperimentError):
    """A task failed; ``task`` names it and ``details`` holds the lattice it ran on."""

    def __init__(
        self,
        message: str,
        task: str,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.task = task


class ReportError(ExperimentError):
    """Report files could not be written."""
    pass
