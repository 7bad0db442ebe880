"""Duality type definitions."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from src.action.actions import FaceCouplingAction
from src.action.coupling import CouplingFamily, ExpCouplingFamily, GenericCoupling
from src.action.exceptions import ActionParameterError
from src.common.types import DEFAULT_EXACT_CAP
from src.lattice.geometry import TorusLattice
from src.lattice.types import CubeIndex, LatticeSpec, RefinementStep
from src.sitespace.types import SiteObservable, SiteSpace

from .exceptions import CorrelationQueryError, DualModelError

# â(s) on a batch of face configurations (N, F) -> (N,)
FaceFunction = Callable[[np.ndarray], np.ndarray]
KernelSource = Union[ExpCouplingFamily, CouplingFamily]


@dataclass(frozen=True, eq=False)
class DualModel:
    """v[w] model at one scale seen through its face variables.

    The pair weight of the primal side is w = Σ_j c_j h(·, s_j)⊗h(·, s_j) on the
    coupling's face rule, and the dual side integrates face variables with the
    same rule.
    """

    coupling: GenericCoupling
    spec: LatticeSpec
    site: SiteSpace
    cap: int = DEFAULT_EXACT_CAP

    def __post_init__(self) -> None:
        try:
            self.coupling.h_table(self.site)
        except ActionParameterError as e:
            raise DualModelError(
                f"Dual representation of {self.coupling.name} needs a positive kernel",
                {"kernel": self.coupling.name},
            ) from e

    @classmethod
    def from_family(
        cls,
        family: KernelSource,
        spec: LatticeSpec,
        site: SiteSpace,
        cap: int = DEFAULT_EXACT_CAP,
    ) -> "DualModel":
        if family.d != spec.d:
            raise DualModelError(
                f"Family {family.name} is for d={family.d}, lattice has d={spec.d}"
            )
        return cls(family.coupling(spec.n), spec, site, cap)

    @cached_property
    def lattice(self) -> TorusLattice:
        return TorusLattice(self.spec)

    @cached_property
    def h_nodes(self) -> np.ndarray:
        """h(u_a, s_j), shape (m, J)."""
        return self.coupling.h_table(self.site)

    @property
    def face_space(self) -> SiteSpace:
        return self.coupling.face_space

    @property
    def face_count(self) -> int:
        return self.lattice.face_count

    @property
    def grid_size(self) -> int:
        return self.face_space.order**self.face_count

    def primal_action(self) -> FaceCouplingAction:
        return self.coupling.action()


class DualityReport(BaseModel):
    """⟨η_n, ∏Φ(Δ_j, a_j)⟩ against ∫dη̂ ∏⟨E^(s)_Δj, a_j⟩."""

    scale: Tuple[int, int]
    cubes: List[Tuple[int, ...]] = Field(default_factory=list)
    lhs: float
    rhs: float
    defect: float
    rhs_stderr: Optional[float] = None
    face_grid_size: int


@dataclass(frozen=True, eq=False)
class CorrelationSetQuery:
    """Is |𝐜(P₁⊗P₂)| > c at the decimated cube pair of (Δ₁, Δ₂)?"""

    c: float
    first: CubeIndex
    second: CubeIndex
    p1: SiteObservable
    p2: SiteObservable
    spec: LatticeSpec
    k: RefinementStep = field(default_factory=lambda: RefinementStep(0, 0))

    def __post_init__(self) -> None:
        # The threshold lives in (0, 2); |𝐜| never exceeds 1 for projections
        if not 0.0 < self.c < 2.0:
            raise CorrelationQueryError(f"Threshold must lie in (0, 2), got {self.c}")
        for p in (self.p1, self.p2):
            if p.table is None and not p.is_projection:
                raise CorrelationQueryError(f"{p.name} is not marked as a projection")


class CorrelationReport(BaseModel):
    """𝐜(P₁⊗P₂) for η_(ω,w,n+k) with the identities it must satisfy."""

    scale: Tuple[int, int]
    k: Tuple[int, int]
    fine_cubes: List[Tuple[int, ...]]
    threshold: float
    correlation: float
    member: bool
    unit_correlation: float
    sign_defect: float
    complement_defect: float
    complement_membership_agrees: bool
    translations_checked: int
    translation_defect: float
    translation_invariant: bool

    def identities_hold(self, atol: float = 1e-12) -> bool:
        return (
            abs(self.unit_correlation) <= atol
            and self.sign_defect <= atol
            and self.complement_defect <= atol
            and self.complement_membership_agrees
            and self.translation_invariant
        )


class SweepRow(BaseModel):
    parameter: float
    correlations: List[float]
    uniform_lower_bound: float


class CorrelationSweep(BaseModel):
    """|𝐜| over a one-parameter family of pair weights, uniform over a k-range."""

    threshold: float
    k_range: List[Tuple[int, int]]
    rows: List[SweepRow] = Field(default_factory=list)
    best_parameter: Optional[float] = None
    largest_certified_c: float = 0.0

    @property
    def member_uniformly(self) -> bool:
        return self.largest_certified_c > self.threshold
