"""Block-spin exceptions."""

from typing import Any, Dict, Optional, Tuple


class BlockSpinError(Exception):
    """Base exception for block-spin errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}


class UnsupportedKindError(BlockSpinError):
    """Block-spin kind is not defined on the site value space."""

    def __init__(
        self,
        message: str,
        kind: str,
        site_kind: str,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.kind = kind
        self.site_kind = site_kind


class TowerFlowError(BlockSpinError):
    """Estimation failed at one scale of a tower."""

    def __init__(
        self,
        message: str,
        scale: Tuple[int, int],
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message, details)
        self.scale = scale
