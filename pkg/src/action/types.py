"""Lattice action type definitions."""

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Callable, Dict, Optional, Tuple

import numpy as np

from src.lattice.types import ScalePair

from .exceptions import ActionParameterError

if TYPE_CHECKING:
    from .actions import LatticeAction


class KineticForm(str, Enum):
    """Kinetic term of the scalar model."""

    SQUARED_DIFFERENCE = "squared_difference"
    LINEAR_AS_WRITTEN = "linear_as_written"


@dataclass(frozen=True)
class ScalarActionParams:
    """Couplings of s(u) = λ₀·Σ_Γ K(*d*u(Γ)) + Σ_Δ Σ_l λ_l u(Δ)^(2l)."""

    lambda0: float = 0.0
    lambdas: Tuple[float, ...] = ()
    kinetic_form: KineticForm = KineticForm.SQUARED_DIFFERENCE

    def __post_init__(self) -> None:
        if not all(np.isfinite([self.lambda0, *self.lambdas])):
            raise ActionParameterError("Couplings must be finite", "lambdas")
        if self.lambdas and self.lambdas[-1] <= 0.0:
            raise ActionParameterError(
                f"Leading coupling must be positive, got {self.lambdas[-1]}", "lambdas"
            )

    def potential(self, values: np.ndarray) -> np.ndarray:
        """Σ_l λ_l x^(2l), elementwise."""
        values = np.asarray(values, dtype=float)
        total = np.zeros_like(values)
        for power, coupling in enumerate(self.lambdas, start=1):
            total = total + coupling * values ** (2 * power)
        return total


@dataclass(frozen=True, eq=False)
class ActionFamily:
    """A scale-indexed family n ↦ v_n; ``None`` stands for the unit weight."""

    name: str
    builder: Callable[[ScalePair], Optional["LatticeAction"]]
    metadata: Dict[str, float] = field(default_factory=dict)

    def at(self, n: ScalePair) -> Optional["LatticeAction"]:
        return self.builder(n)

    @classmethod
    def constant(cls, action: Optional["LatticeAction"]) -> "ActionFamily":
        """Same action at every scale."""
        name = "unit" if action is None else action.name
        return cls(name, lambda _n: action)
