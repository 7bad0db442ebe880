"""Gibbs state type definitions."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from src.common.types import DEFAULT_EXACT_CAP
from src.lattice.geometry import TorusLattice
from src.lattice.types import CubeIndex
from src.sitespace.types import SiteObservable, SiteSpace

from .exceptions import EstimatorError


class EstimatorKind(str, Enum):
    """Expectation estimators."""

    EXACT = "exact"
    METROPOLIS = "metropolis"


@dataclass(frozen=True)
class ExactEstimator:
    """Exact tensor sums; enumeration is bounded by ``cap`` grid points."""

    cap: int = DEFAULT_EXACT_CAP
    chunk_size: int = 1 << 16

    @property
    def kind(self) -> EstimatorKind:
        return EstimatorKind.EXACT


@dataclass(frozen=True)
class MetropolisEstimator:
    """Single-site Metropolis over independent chains seeded from ``seed``."""

    seed: int
    burn_in_sweeps: int = 200
    measure_sweeps: int = 4000
    n_chains: int = 4
    n_blocks: int = 32
    proposal_width: Optional[float] = None

    def __post_init__(self) -> None:
        if self.measure_sweeps * self.n_chains < self.n_blocks:
            raise EstimatorError(
                f"Need at least {self.n_blocks} measurements for jackknife blocking"
            )
        if self.n_blocks < 2:
            raise EstimatorError("Jackknife needs at least two blocks")

    @property
    def kind(self) -> EstimatorKind:
        return EstimatorKind.METROPOLIS


Estimator = Union[ExactEstimator, MetropolisEstimator]


@dataclass(frozen=True, eq=False)
class LatticeObservable:
    """coefficient · ∏_j Φ(Δ_j, a_j); the empty product is the unit observable."""

    factors: Tuple[Tuple[CubeIndex, SiteObservable], ...] = ()
    coefficient: complex = 1.0

    @classmethod
    def single(cls, cube: Sequence[int], a: SiteObservable) -> "LatticeObservable":
        return cls(((tuple(int(c) for c in cube), a),))

    @classmethod
    def unit(cls) -> "LatticeObservable":
        return cls()

    @property
    def name(self) -> str:
        body = "*".join(f"{a.name}@{cube}" for cube, a in self.factors) or "1"
        return body if self.coefficient == 1.0 else f"{self.coefficient}*{body}"

    @property
    def cubes(self) -> Tuple[CubeIndex, ...]:
        return tuple(cube for cube, _ in self.factors)

    def __mul__(self, other: "LatticeObservable") -> "LatticeObservable":
        return LatticeObservable(self.factors + other.factors, self.coefficient * other.coefficient)

    def scaled(self, factor: complex) -> "LatticeObservable":
        return LatticeObservable(self.factors, self.coefficient * factor)

    def insertions(self, lattice: TorusLattice, site: SiteSpace) -> np.ndarray:
        """Per-cube multipliers on the site nodes, shape (τ, m)."""
        values = [a.on_nodes(site) for _, a in self.factors]
        is_complex = complex(self.coefficient).imag != 0 or any(np.iscomplexobj(v) for v in values)
        dtype = complex if is_complex else float
        table = np.ones((lattice.tau, site.order), dtype=dtype)
        for (cube, _), nodes in zip(self.factors, values):
            table[lattice.index_of(cube)] *= nodes
        if self.coefficient != 1.0:
            coefficient = self.coefficient if is_complex else complex(self.coefficient).real
            table[0] = table[0] * coefficient
        return table

    def evaluate(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        """Values on configurations of shape (N, τ)."""
        configs = np.atleast_2d(configs)
        result: np.ndarray = np.full(configs.shape[0], self.coefficient)
        for cube, a in self.factors:
            result = result * a.evaluate(site, configs[:, lattice.index_of(cube)])
        return result if np.iscomplexobj(result) and np.any(np.imag(result)) else np.real(result)


@dataclass(frozen=True, eq=False)
class ComposedObservable:
    """A function of the configuration restricted to ``support`` (linear cube indices).

    ``fn`` receives values of shape (N, len(support)).
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    support: Tuple[int, ...]

    def evaluate(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        configs = np.atleast_2d(configs)
        return np.asarray(self.fn(configs[:, list(self.support)]))


@dataclass(frozen=True, eq=False)
class ObservableSum:
    """Finite linear combination of product observables."""

    terms: Tuple[LatticeObservable, ...]
    name: str = "sum"

    def __mul__(self, other: "ObservableSum") -> "ObservableSum":
        return ObservableSum(
            tuple(a * b for a in self.terms for b in other.terms), f"{self.name}*{other.name}"
        )

    def evaluate(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        configs = np.atleast_2d(configs)
        total = np.zeros(configs.shape[0], dtype=complex)
        for term in self.terms:
            total = total + term.evaluate(lattice, site, configs)
        return total if np.any(np.imag(total)) else np.real(total)


Observable = Union[LatticeObservable, ComposedObservable, ObservableSum]


class CorrelationFit(BaseModel):
    """Least-squares fit of log|c| = log K − distance/ℓ."""

    K_fit: float
    ell_fit: float
    residual: float
    non_decaying: bool = False
    points_used: int
    dropped: List[Tuple[float, float]] = Field(default_factory=list)


@dataclass
class ChainDiagnostics:
    """Per-run Metropolis diagnostics."""

    acceptance: List[float] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict[str, float]:
        return {f"acceptance_{i}": rate for i, rate in enumerate(self.acceptance)}
