"""Renormalization exceptions."""

from typing import Any, Dict, Optional, Tuple


class RenormError(Exception):
    """Base exception for renormalization errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConditionalCapacityError(RenormError):
    """Conditional expectation needs an enumeration beyond the exact cap."""

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


class VanishingPartitionError(RenormError):
    """Partition function is not positive at some scale."""

    def __init__(
        self,
        message: str,
        scale: Tuple[int, int],
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.scale = scale


class KernelError(RenormError):
    """Coupling kernel violates the positivity required by the bounds."""
    pass


class FreePartError(RenormError):
    """Weight is not positive near the expansion point or the site space is discrete."""

    def __init__(
        self,
        message: str,
        value: float = 0.0,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.value = value
