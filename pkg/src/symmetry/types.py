"""Symmetry type definitions."""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.common.types import Verdict
from src.lattice.geometry import TorusLattice
from src.lattice.types import CubeIndex, FaceIndex, LatticeSpec
from src.sitespace.types import SiteObservable

from .exceptions import ReflectionError

# f on physical points (N, d) -> (N,)
TestFunction = Callable[[np.ndarray], np.ndarray]


class Layer(str, Enum):
    """Reflection layers: the invariant layer and the two halves it separates."""

    ZERO = "0"
    PLUS = "+"
    MINUS = "-"


@dataclass(frozen=True)
class ReflectionStructure:
    """θ_μ: c ↦ (−c mod L) on component μ, with its layer partition.

    The reflection plane runs through the centres of the cubes with c_μ = 0,
    which form the invariant layer. ``axis`` runs over 1..d like face axes.
    """

    spec: LatticeSpec
    axis: int

    def __post_init__(self) -> None:
        if not 1 <= self.axis <= self.spec.d:
            raise ReflectionError(f"Axis {self.axis} not in 1..{self.spec.d}")

    @cached_property
    def lattice(self) -> TorusLattice:
        return TorusLattice(self.spec)

    def reflect_cube(self, cube: CubeIndex) -> CubeIndex:
        cube = self.lattice.check_cube(cube)
        reflected = list(cube)
        reflected[self.axis - 1] = (-cube[self.axis - 1]) % self.lattice.size
        return tuple(reflected)

    def reflect_face(self, face: FaceIndex) -> FaceIndex:
        """Image of a face; faces across the plane keep their axis and swap ends."""
        if face.axis != self.axis:
            return FaceIndex(self.reflect_cube(face.base), face.axis)
        _, head = self.lattice.face_incidence(face)
        return FaceIndex(self.reflect_cube(head), face.axis)

    @cached_property
    def permutation(self) -> np.ndarray:
        """Linear index of θ_μ(Δ) for every cube Δ."""
        return np.array([self.lattice.index_of(self.reflect_cube(c)) for c in self.lattice.cubes()])

    def layer_of(self, cube: CubeIndex) -> Layer:
        component = self.lattice.check_cube(cube)[self.axis - 1]
        if component == 0:
            return Layer.ZERO
        return Layer.PLUS if component <= (self.lattice.size - 1) // 2 else Layer.MINUS

    def layer_cubes(self, layer: Layer) -> List[CubeIndex]:
        return [c for c in self.lattice.cubes() if self.layer_of(c) is layer]

    def layer_sizes(self) -> Dict[Layer, int]:
        return {layer: len(self.layer_cubes(layer)) for layer in Layer}


@dataclass
class GramCheck:
    """M_ij = ⟨η, j_μ(a_i)·a_j⟩ with its spectrum verdict."""

    matrix: np.ndarray
    labels: List[str]
    min_eigenvalue: float
    norm: float
    hermiticity_defect: float
    verdict: Verdict

    @property
    def is_psd(self) -> bool:
        return self.verdict is Verdict.PASS

    def summary(self) -> Dict[str, float]:
        return {
            "size": float(len(self.labels)),
            "min_eigenvalue": self.min_eigenvalue,
            "norm": self.norm,
            "hermiticity_defect": self.hermiticity_defect,
        }


class InvarianceReport(BaseModel):
    """max over translations × observables of |⟨η, β_g a⟩ − ⟨η, a⟩|."""

    scale: Tuple[int, int]
    checks: int
    max_defect: float
    worst_translation: Optional[Tuple[int, ...]] = None
    worst_observable: Optional[str] = None


@dataclass(frozen=True, eq=False)
class SmearedObservable:
    """f ⊗ a, placed at a point x as b^(−dn⁰) Σ_x′ f(x′ − x) Φ(x′, a)."""

    f: TestFunction
    a: SiteObservable
    name: str = "f"


class SmearedShiftReport(BaseModel):
    """Shift defect of a smeared product against its first-order bound."""

    shift: List[float]
    before: float
    after: float
    defect: float
    bound: float
    moduli: List[float] = Field(default_factory=list)

    @property
    def within_bound(self) -> bool:
        return self.defect <= self.bound * (1 + 1e-9) + 1e-14
