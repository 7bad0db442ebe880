"""Common type definitions shared across modules."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Union

Scalar = Union[float, complex]

# Exact enumeration grid cap (labels or nodes to the power τ)
DEFAULT_EXACT_CAP = 2**24


class Verdict(str, Enum):
    """Outcome of a property check."""

    PASS = "pass"
    FAIL = "fail"


@dataclass(frozen=True)
class Estimate:
    """A value with an optional statistical error.

    Exact evaluations carry ``stderr=None``.
    """

    value: Scalar
    stderr: Optional[float] = None
    tau_int: Optional[float] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def is_exact(self) -> bool:
        return self.stderr is None

    @property
    def real(self) -> float:
        return float(complex(self.value).real)

    def agrees_with(self, other: Scalar, sigmas: float = 3.0, atol: float = 1e-12) -> bool:
        """Whether ``other`` lies within ``sigmas`` standard errors (or ``atol``)."""
        spread = sigmas * (self.stderr or 0.0) + atol
        return abs(complex(self.value) - complex(other)) <= spread
