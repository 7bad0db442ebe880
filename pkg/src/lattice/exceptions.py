"""Lattice geometry exceptions."""

from typing import Any, Dict, Optional, Tuple


class LatticeError(Exception):
    """Base exception for lattice geometry errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}


class LatticeSpecError(LatticeError):
    """Invalid lattice specification."""

    def __init__(
        self,
        message: str,
        field: str,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.field = field


class LatticeSizeError(LatticeError):
    """Cube count exceeds the representable integer range."""

    def __init__(
        self,
        cube_count: int,
        limit: int,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(
            f"Cube count {cube_count} exceeds the integer limit {limit}", details
        )
        self.cube_count = cube_count
        self.limit = limit


class IndexRangeError(LatticeError):
    """Cube or face index outside the lattice."""

    def __init__(
        self,
        index: Tuple[int, ...],
        size: int,
        message: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message or f"Index {index} outside [0, {size})", details)
        self.index = index
        self.size = size
