"""Single-site state space type definitions."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from .exceptions import ObservableError, PositivityError

ArrayFn = Callable[[np.ndarray], np.ndarray]
PairFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

NODE_MATCH_TOLERANCE = 1e-12


class SiteKind(str, Enum):
    """Single-site value spaces."""

    FINITE_SPIN = "finite_spin"
    REAL_LINE = "real_line"
    UNIT_INTERVAL = "unit_interval"


class SiteSpaceDescriptor(BaseModel):
    """User-facing description of a site space."""

    kind: SiteKind
    values: Optional[List[float]] = None  # finite spin labels
    base_weights: Optional[List[float]] = None  # finite spin, uniform if omitted
    order: Optional[int] = Field(default=None, gt=0)  # quadrature order
    proposal_width: float = Field(default=0.5, gt=0.0)


@dataclass(frozen=True, eq=False)
class SiteSpace:
    """Value space A with base state ω₀ and an exact integration rule.

    ``nodes``/``weights`` are the finite-spin labels with their probabilities,
    or the quadrature rule of the base measure; weights sum to one.
    """

    kind: SiteKind
    nodes: np.ndarray
    weights: np.ndarray
    proposal_width: float = 0.5
    bounds: Optional[Tuple[float, float]] = None

    @property
    def order(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def is_discrete(self) -> bool:
        return self.kind is SiteKind.FINITE_SPIN

    @property
    def supports_averaging(self) -> bool:
        """Value space closed under block averages."""
        return self.kind in (SiteKind.REAL_LINE, SiteKind.UNIT_INTERVAL)

    def node_index(self, values: np.ndarray) -> np.ndarray:
        """Map values to the index of the matching node.

        Raises:
            ObservableError: If a value is not a node
        """
        values = np.asarray(values, dtype=float)
        distance = np.abs(values[..., None] - self.nodes)
        index = np.argmin(distance, axis=-1)
        if np.any(np.take_along_axis(distance, index[..., None], -1) > NODE_MATCH_TOLERANCE):
            raise ObservableError("Value is not a node of the site space", "node_index")
        return index


@dataclass(frozen=True, eq=False)
class SiteObservable:
    """A function a of the site value: callable, or tabulated on the site nodes."""

    name: str
    fn: Optional[ArrayFn] = None
    table: Optional[np.ndarray] = None
    is_projection: bool = False

    def __post_init__(self) -> None:
        if (self.fn is None) == (self.table is None):
            raise ObservableError("Exactly one of fn or table must be given", self.name)

    def evaluate(self, space: SiteSpace, values: np.ndarray) -> np.ndarray:
        """Evaluate at arbitrary site values."""
        values = np.asarray(values, dtype=float)
        if self.fn is not None:
            result = np.asarray(self.fn(values))
            return np.broadcast_to(result, values.shape)
        table = self._checked_table(space)
        return table[space.node_index(values)]

    def on_nodes(self, space: SiteSpace) -> np.ndarray:
        """Values on the site nodes, validated."""
        if self.table is not None:
            values = self._checked_table(space)
        else:
            values = self.evaluate(space, space.nodes)
        if not np.all(np.isfinite(values)):
            raise ObservableError("Observable has non-finite values", self.name)
        if self.is_projection and not np.all(np.isin(values, (0.0, 1.0))):
            raise ObservableError("Projection must take values in {0,1}", self.name)
        return values

    def _checked_table(self, space: SiteSpace) -> np.ndarray:
        assert self.table is not None
        if self.table.shape != (space.order,):
            raise ObservableError(
                f"Table of length {self.table.shape[0]} does not match {space.order} nodes",
                self.name,
            )
        return self.table

    def sup_norm(self, space: SiteSpace) -> float:
        return float(np.max(np.abs(self.on_nodes(space))))

    def __mul__(self, other: "SiteObservable") -> "SiteObservable":
        if self.table is not None or other.table is not None:
            raise ObservableError(
                "Products of tabulated observables need a site space; use times()",
                f"{self.name}*{other.name}",
            )
        first, second = self.fn, other.fn
        assert first is not None and second is not None
        return SiteObservable(
            name=f"{self.name}*{other.name}",
            fn=lambda x: np.asarray(first(x)) * np.asarray(second(x)),
            is_projection=self.is_projection and other.is_projection,
        )

    def times(self, other: "SiteObservable", space: SiteSpace) -> "SiteObservable":
        """Pointwise product tabulated on ``space``."""
        return SiteObservable(
            name=f"{self.name}*{other.name}",
            table=self.on_nodes(space) * other.on_nodes(space),
            is_projection=self.is_projection and other.is_projection,
        )

    def scaled(self, factor: complex) -> "SiteObservable":
        if self.table is not None:
            return SiteObservable(f"{factor}*{self.name}", table=factor * self.table)
        fn = self.fn
        assert fn is not None
        return SiteObservable(f"{factor}*{self.name}", fn=lambda x: factor * np.asarray(fn(x)))

    def conjugate(self) -> "SiteObservable":
        if self.table is not None:
            return SiteObservable(
                f"conj({self.name})", table=np.conj(self.table), is_projection=self.is_projection
            )
        fn = self.fn
        assert fn is not None
        return SiteObservable(
            f"conj({self.name})",
            fn=lambda x: np.conj(np.asarray(fn(x))),
            is_projection=self.is_projection,
        )

    def complement(self) -> "SiteObservable":
        """𝟙 - a, used for projections."""
        if self.table is not None:
            return SiteObservable(
                f"1-{self.name}", table=1.0 - self.table, is_projection=self.is_projection
            )
        fn = self.fn
        assert fn is not None
        return SiteObservable(
            f"1-{self.name}",
            fn=lambda x: 1.0 - np.asarray(fn(x)),
            is_projection=self.is_projection,
        )


@dataclass(frozen=True, eq=False)
class PairWeight:
    """Symmetric non-negative coupling w(x, y) on value pairs."""

    name: str
    fn: Optional[PairFn] = None
    table: Optional[np.ndarray] = None
    metadata: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.fn is None) == (self.table is None):
            raise PositivityError("Exactly one of fn or table must be given", self.name, 0.0)

    def evaluate(self, space: SiteSpace, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Evaluate at arbitrary value pairs."""
        if self.fn is not None:
            x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
            return np.asarray(self.fn(x, y), dtype=float)
        table = self.matrix(space)
        return table[space.node_index(x), space.node_index(y)]

    def matrix(self, space: SiteSpace) -> np.ndarray:
        """Values on the node grid, shape (m, m)."""
        if self.table is not None:
            if self.table.shape != (space.order, space.order):
                raise PositivityError(
                    f"Table shape {self.table.shape} does not match {space.order} nodes",
                    self.name,
                    0.0,
                )
            return self.table
        x, y = np.meshgrid(space.nodes, space.nodes, indexing="ij")
        return np.asarray(self.fn(x, y), dtype=float)  # type: ignore[misc]

    def checked_matrix(self, space: SiteSpace, atol: float = 1e-12) -> np.ndarray:
        """Node matrix validated for symmetry and non-negativity.

        Raises:
            PositivityError: If the weight is negative or asymmetric
        """
        matrix = self.matrix(space)
        min_value = float(np.min(matrix))
        if min_value < 0.0:
            raise PositivityError(
                f"Pair weight {self.name} takes negative value {min_value}", self.name, min_value
            )
        if not np.allclose(matrix, matrix.T, atol=atol, rtol=0.0):
            raise PositivityError(f"Pair weight {self.name} is not symmetric", self.name, min_value)
        return matrix

    @classmethod
    def rank_one(cls, h: SiteObservable) -> "PairWeight":
        """w = h⊗h."""
        if h.fn is None:
            assert h.table is not None
            return cls(f"{h.name}⊗{h.name}", table=np.outer(h.table, h.table))
        fn = h.fn
        return cls(f"{h.name}⊗{h.name}", fn=lambda x, y: np.asarray(fn(x)) * np.asarray(fn(y)))

    @classmethod
    def ising(cls, coupling: float) -> "PairWeight":
        """w(σ, σ') = exp(K σ σ')."""
        return cls(
            f"ising(K={coupling})",
            fn=lambda x, y: np.exp(coupling * x * y),
            metadata={"coupling": coupling},
        )

    @classmethod
    def tabulated(cls, matrix: np.ndarray, name: str = "tabulated") -> "PairWeight":
        return cls(name, table=np.asarray(matrix, dtype=float))

    @classmethod
    def feature_mixture(
        cls, features: np.ndarray, coefficients: Sequence[float], name: str = "mixture"
    ) -> "PairWeight":
        """w = Σ_j c_j h_j⊗h_j from node-tabulated features h_j (rows of ``features``)."""
        features = np.asarray(features, dtype=float)
        coefficients = np.asarray(coefficients, dtype=float)
        matrix = np.einsum("j,ja,jb->ab", coefficients, features, features)
        return cls(name, table=matrix)
