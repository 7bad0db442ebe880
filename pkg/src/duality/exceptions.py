"""Duality exceptions."""

from typing import Any, Dict, Optional


class DualityError(Exception):
    """Base exception for dual-lattice computations."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}


class DualModelError(DualityError):
    """Kernel or face configuration unusable for the dual representation."""
    pass


class VanishingNormalizerError(DualityError):
    """A per-cube normalizer z^(s) is not strictly positive."""

    def __init__(
        self,
        message: str,
        cube: tuple,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.cube = cube


class DualCapacityError(DualityError):
    """Face grid exceeds the exact cap and no sampling estimator was given."""

    def __init__(
        self,
        message: str,
        grid_size: int,
        cap: int,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.grid_size = grid_size
        self.cap = cap


class CorrelationQueryError(DualityError):
    """Malformed projection correlation query."""
    pass
