"""Lattice type definitions."""

from dataclasses import dataclass
from typing import NamedTuple, Tuple

from .exceptions import LatticeSpecError

# Canonical representative in [0, L)^d
CubeIndex = Tuple[int, ...]


class FaceIndex(NamedTuple):
    """Shared face of cube ``base`` and cube ``base + e_axis``.

    ``axis`` runs over 1..d.
    """

    base: CubeIndex
    axis: int


@dataclass(frozen=True, order=True)
class ScalePair:
    """Scale pair n=(n⁰, n¹): lattice spacing b^(-n⁰), torus volume b^(n¹)."""

    n0: int
    n1: int

    def refine(self, k: "RefinementStep") -> "ScalePair":
        """Return the scale n+k."""
        return ScalePair(self.n0 + k.k0, self.n1 + k.k1)

    def precedes(self, other: "ScalePair") -> bool:
        """Partial order n ≺ n₁."""
        return self.n0 <= other.n0 and self.n1 <= other.n1

    @property
    def total(self) -> int:
        return self.n0 + self.n1


@dataclass(frozen=True, order=True)
class RefinementStep:
    """Refinement k=(k⁰, k¹) relating n ≺ n+k."""

    k0: int = 0
    k1: int = 0

    def __post_init__(self) -> None:
        if self.k0 < 0 or self.k1 < 0:
            raise LatticeSpecError(
                f"Refinement components must be non-negative, got ({self.k0}, {self.k1})",
                field="k",
            )

    def compose(self, other: "RefinementStep") -> "RefinementStep":
        """Refinement by ``self`` followed by ``other``."""
        return RefinementStep(self.k0 + other.k0, self.k1 + other.k1)

    @property
    def is_identity(self) -> bool:
        return self.k0 == 0 and self.k1 == 0


@dataclass(frozen=True)
class LatticeSpec:
    """Torus cube complex at scale pair ``n`` with base ``b`` in dimension ``d``."""

    b: int
    d: int
    n: ScalePair

    def __post_init__(self) -> None:
        if self.b < 3 or self.b % 2 == 0:
            raise LatticeSpecError(f"Base must be odd and >= 3, got {self.b}", "b")
        if self.d < 1:
            raise LatticeSpecError(f"Dimension must be >= 1, got {self.d}", "d")
        if self.n.total < 1:
            raise LatticeSpecError(
                f"Scale pair must satisfy n0+n1 >= 1, got {self.n}", "n"
            )

    @property
    def size(self) -> int:
        """Sites per dimension L = b^(n⁰+n¹)."""
        return int(self.b ** self.n.total)

    @property
    def tau(self) -> int:
        """Cube count τ(n) = b^(d(n⁰+n¹))."""
        return int(self.size**self.d)

    @property
    def spacing(self) -> float:
        """Physical lattice spacing b^(-n⁰)."""
        return float(self.b) ** (-self.n.n0)

    def refined(self, k: RefinementStep) -> "LatticeSpec":
        """Spec at scale n+k."""
        return LatticeSpec(self.b, self.d, self.n.refine(k))

    def at_scale(self, n: ScalePair) -> "LatticeSpec":
        return LatticeSpec(self.b, self.d, n)
