"""Gibbs state exceptions."""

from typing import Any, Dict, Optional


class GibbsError(Exception):
    """Base exception for Gibbs state errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ExactCapacityError(GibbsError):
    """Exact enumeration grid exceeds the configured cap."""

    def __init__(
        self,
        grid_size: int,
        cap: int,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(
            f"Exact grid of {grid_size} points exceeds cap {cap}; use the Metropolis estimator",
            details,
        )
        self.grid_size = grid_size
        self.cap = cap


class PartitionFunctionError(GibbsError):
    """Partition function is not strictly positive."""

    def __init__(
        self,
        message: str,
        value: float,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.value = value


class EstimatorError(GibbsError):
    """Estimator cannot serve the request."""
    pass


class FitError(GibbsError):
    """Correlation-length fit is degenerate."""
    pass
