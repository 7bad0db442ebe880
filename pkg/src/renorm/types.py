"""Renormalization type definitions."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.action.actions import GaussianAction, UltraLocalAction
from src.action.types import ActionFamily
from src.gibbs.tables import ChainTable, ProductTable, WeightTable
from src.lattice.types import RefinementStep, ScalePair
from src.sitespace.types import SiteObservable

# Finite stand-in for the supremum over k ∈ ℕ²
DEFAULT_K_RANGE: Tuple[RefinementStep, ...] = tuple(
    RefinementStep(k0, k1) for k1 in range(2) for k0 in range(4)
)

DEFAULT_GRID_POINTS = 33
REFINEMENT_FACTOR = 4


def k_key(k: RefinementStep) -> Tuple[int, int]:
    return (k.k0, k.k1)


@dataclass
class EffectiveActionTable:
    """e_(ω,n,n+k)(v_(n+k)) as a function of the coarse configuration at n."""

    scale: ScalePair
    k: RefinementStep
    table: WeightTable

    @property
    def is_factorized(self) -> bool:
        return isinstance(self.table, (ProductTable, ChainTable))

    @property
    def log_sup_norm(self) -> float:
        return self.table.log_sup_norm()

    @property
    def sup_norm(self) -> float:
        return self.table.sup_norm()

    def values(self, cap: int = 1 << 20) -> np.ndarray:
        """All values on the coarse node grid."""
        return self.table.to_dense(cap)


@dataclass(frozen=True, eq=False)
class UltraLocalFamily:
    """Scale-indexed ultra-local weights n ↦ ∏_Δ Φ_n(Δ, w_n)."""

    name: str
    w: Callable[[ScalePair], SiteObservable]
    metadata: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def constant(cls, w: SiteObservable) -> "UltraLocalFamily":
        return cls(w.name, lambda _n: w)

    def action_family(self) -> ActionFamily:
        return ActionFamily(
            f"ultra_local[{self.name}]", lambda n: UltraLocalAction(self.w(n)), dict(self.metadata)
        )


class KNorm(BaseModel):
    k: Tuple[int, int]
    log_norm: float


class SeminormEstimate(BaseModel):
    """max over a finite k_range of ‖e_(ω,n,n+k)(f_(n+k))‖; a lower bound of the true supremum."""

    scale: Tuple[int, int]
    value: float
    log_value: float
    k_range: List[Tuple[int, int]]
    per_k: List[KNorm] = Field(default_factory=list)

    def series(self) -> List[float]:
        """Largest log norm per total refinement |k| = k⁰ + k¹, in increasing |k|."""
        best: Dict[int, float] = {}
        for entry in self.per_k:
            total = sum(entry.k)
            best[total] = max(best.get(total, -np.inf), entry.log_norm)
        return [best[t] for t in sorted(best)]


class BoundMethod(str, Enum):
    ANALYTIC = "analytic"
    GRID = "grid"
    ULTRA_LOCAL = "ultra_local"


class ISRBounds(BaseModel):
    """I, S over face values and R over k_range; normalized by h ↦ h/‖h‖."""

    scale: Tuple[int, int]
    method: BoundMethod
    I: float
    S: float
    normalization: float
    I_normalized: float
    S_normalized: float
    log_R: float
    R: float
    k_range: List[Tuple[int, int]]

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.log_R))


class CertificateVerdict(str, Enum):
    CERTIFIED = "certified"
    BOUND_VIOLATED = "bound_violated"
    NOT_CERTIFIED = "not_certified"


class RenormCertificate(BaseModel):
    """Outcome of 1 ≤ [[𝐫_ω v]] ≤ R on a finite k_range."""

    scale: Tuple[int, int]
    z: float
    log_z: float
    seminorm: float
    log_seminorm: float
    I: float
    S: float
    R: float
    log_R: float
    verdict: CertificateVerdict
    reason: str = ""
    growth_detected: bool = False
    k_range: List[Tuple[int, int]] = Field(default_factory=list)


class TowerDefect(BaseModel):
    """sup |e(n,n+k₀)∘e(n+k₀,n+k)(f) − e(n,n+k)(f)|."""

    scale: Tuple[int, int]
    k0: Tuple[int, int]
    k: Tuple[int, int]
    defect: float
    relative_defect: float


@dataclass
class FreePart:
    """Quadratic part ⟨φ, Aφ⟩ of s_n = −ln v_n around a constant configuration."""

    matrix: np.ndarray
    base_point: float
    fd_step: float

    def quadratic_form(self, phi: np.ndarray) -> np.ndarray:
        phi = np.atleast_2d(np.asarray(phi, dtype=float))
        return np.einsum("ni,ij,nj->n", phi, self.matrix, phi)

    def weight(self) -> GaussianAction:
        """exp(−⟨u − u_o, A(u − u_o)⟩) as a lattice action."""
        return GaussianAction(self.matrix, center=self.base_point, name="free_part")


class ExpCouplingRow(BaseModel):
    k: Tuple[int, int]
    q: float
    r: float
    gap: float
    log_ratio_power: float


class ExpCouplingDiagnostics(BaseModel):
    """q_n, r_n along k_range and the partial supremum 𝐒_n with the resulting bound."""

    scale: Tuple[int, int]
    rows: List[ExpCouplingRow] = Field(default_factory=list)
    log_S_partial: float
    c: float
    c_exceeds_one: bool
    log_bound: float
    last_gap: float
    note: Optional[str] = None
