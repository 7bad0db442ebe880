"""Symmetry exceptions."""

from typing import Any, Dict, Optional


class SymmetryError(Exception):
    """Base exception for symmetry checks."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ReflectionError(SymmetryError):
    """Reflection axis or basis size unusable."""
    pass


class ReflectionSupportError(SymmetryError):
    """Basis element touches the negative half of the reflection."""

    def __init__(
        self,
        message: str,
        observable: str,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.observable = observable


class SmearingTailError(SymmetryError):
    """Test function does not decay fast enough for the truncation radius."""

    def __init__(
        self,
        message: str,
        tail: float,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.tail = tail
