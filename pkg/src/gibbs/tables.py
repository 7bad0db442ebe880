"""Node-grid representations of weights and coarse functions.

A table is a function F of a node-valued configuration on τ sites with m
nodes per site. Three forms are used:

* :class:`ProductTable`: F(u) = e^c ∏_i f_i(u_i)
* :class:`ChainTable`: d=1 cyclic chain F(u) = e^c ∏_i s_i(u_i) B_i(u_i, u_{i+1})
* :class:`DenseTable`: the full (m,)*τ array

Integrals against the base product measure and sup norms are exact in every
form. Magnitudes are carried as a separate log scale.
"""

from abc import ABC, abstractmethod
from typing import NamedTuple, Optional, Union

import numpy as np

from src.action.actions import (
    FaceProductAction,
    LatticeAction,
    ScalarAction,
    UltraLocalAction,
    unwrap_scaled,
)
from src.action.types import KineticForm
from src.lattice.geometry import TorusLattice
from src.sitespace.types import SiteSpace

from .enumeration import check_capacity, iter_index_chunks
from .exceptions import GibbsError

Number = Union[float, complex]


class ScaledValue(NamedTuple):
    """value · exp(log_scale)."""

    value: Number
    log_scale: float

    def to_number(self) -> Number:
        if self.value == 0:
            return 0.0 * self.value
        with np.errstate(over="ignore"):
            return self.value * np.exp(self.log_scale)

    def log_abs(self) -> float:
        if self.value == 0:
            return -np.inf
        return float(np.log(abs(self.value)) + self.log_scale)

    def ratio(self, other: "ScaledValue") -> Number:
        """self / other."""
        if other.value == 0:
            raise GibbsError("Division by a vanishing integral")
        result = self.value / other.value * np.exp(self.log_scale - other.log_scale)
        return complex(result) if np.iscomplexobj(result) else float(result)


def _clean(value: Number) -> Number:
    if np.iscomplexobj(value) and np.imag(value) != 0:
        return complex(value)
    return float(np.real(value))


class WeightTable(ABC):
    """Function of a node configuration with exact integration."""

    tau: int
    order: int
    log_scale: float

    @abstractmethod
    def integrate(
        self, site_weights: np.ndarray, insertions: Optional[np.ndarray] = None
    ) -> ScaledValue:
        """∫ F · ∏_i ins_i(u_i) dω for base weights ``site_weights`` (m,).

        Args:
            site_weights: Base weights per node
            insertions: Optional per-site multipliers, shape (τ, m)

        Returns:
            Integral as value and log scale
        """
        pass

    @abstractmethod
    def log_sup_norm(self) -> float:
        """log max_u |F(u)|."""
        pass

    @abstractmethod
    def evaluate(self, indices: np.ndarray) -> np.ndarray:
        """F at node-index configurations of shape (N, τ)."""
        pass

    @abstractmethod
    def shifted(self, log_factor: float) -> "WeightTable":
        """e^{log_factor}·F."""
        pass

    def sup_norm(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_sup_norm()))

    def to_dense(self, cap: int = 1 << 20) -> np.ndarray:
        """All values as an (m,)*τ array."""
        check_capacity(self.order, self.tau, cap)
        chunks = [self.evaluate(idx) for idx in iter_index_chunks(self.order, self.tau)]
        return np.concatenate(chunks).reshape((self.order,) * self.tau)

    def _insertions(self, insertions: Optional[np.ndarray]) -> np.ndarray:
        if insertions is None:
            return np.ones((self.tau, self.order))
        if insertions.shape != (self.tau, self.order):
            raise GibbsError(
                f"Insertions of shape {insertions.shape} do not match ({self.tau}, {self.order})"
            )
        return insertions


class ProductTable(WeightTable):
    """F(u) = e^c ∏_i f_i(u_i)."""

    def __init__(self, factors: np.ndarray, log_scale: float = 0.0) -> None:
        self.factors = np.asarray(factors)
        self.tau, self.order = self.factors.shape
        self.log_scale = float(log_scale)

    @classmethod
    def unit(cls, tau: int, order: int) -> "ProductTable":
        return cls(np.ones((tau, order)))

    def integrate(
        self, site_weights: np.ndarray, insertions: Optional[np.ndarray] = None
    ) -> ScaledValue:
        sums = (self.factors * self._insertions(insertions)) @ site_weights
        magnitudes = np.abs(sums)
        if np.any(magnitudes == 0):
            return ScaledValue(0.0, self.log_scale)
        phase = np.prod(sums / magnitudes)
        return ScaledValue(_clean(phase), self.log_scale + float(np.sum(np.log(magnitudes))))

    def site_sums(self, site_weights: np.ndarray) -> np.ndarray:
        """Σ_a ω_a f_i(a) per site."""
        return self.factors @ site_weights

    def log_sup_norm(self) -> float:
        peaks = np.max(np.abs(self.factors), axis=1)
        if np.any(peaks == 0):
            return -np.inf
        return self.log_scale + float(np.sum(np.log(peaks)))

    def evaluate(self, indices: np.ndarray) -> np.ndarray:
        indices = np.atleast_2d(indices)
        picked = self.factors[np.arange(self.tau)[None, :], indices]
        return np.prod(picked, axis=-1) * np.exp(self.log_scale)

    def shifted(self, log_factor: float) -> "ProductTable":
        return ProductTable(self.factors, self.log_scale + log_factor)


class ChainTable(WeightTable):
    """Cyclic chain F(u) = e^c ∏_i s_i(u_i) B_i(u_i, u_{i+1 mod τ})."""

    def __init__(
        self,
        bonds: np.ndarray,
        site_factors: Optional[np.ndarray] = None,
        log_scale: float = 0.0,
    ) -> None:
        self.bonds = np.asarray(bonds)
        self.tau, self.order, _ = self.bonds.shape
        self.site_factors = (
            np.ones((self.tau, self.order)) if site_factors is None else np.asarray(site_factors)
        )
        self.log_scale = float(log_scale)

    def integrate(
        self, site_weights: np.ndarray, insertions: Optional[np.ndarray] = None
    ) -> ScaledValue:
        diagonal = self.site_factors * self._insertions(insertions) * site_weights
        product = np.eye(self.order, dtype=np.result_type(diagonal, self.bonds))
        accumulated = 0.0
        for i in range(self.tau):
            product = product @ (diagonal[i][:, None] * self.bonds[i])
            peak = float(np.max(np.abs(product)))
            if peak == 0.0:
                return ScaledValue(0.0, self.log_scale)
            product = product / peak
            accumulated += np.log(peak)
        return ScaledValue(_clean(np.trace(product)), self.log_scale + accumulated)

    def log_sup_norm(self) -> float:
        with np.errstate(divide="ignore"):
            log_sites = np.log(np.abs(self.site_factors))
            log_bonds = np.log(np.abs(self.bonds))
        path = log_sites[0][:, None] + log_bonds[0]
        for i in range(1, self.tau):
            step = log_sites[i][:, None] + log_bonds[i]
            path = np.max(path[:, :, None] + step[None, :, :], axis=1)
        return self.log_scale + float(np.max(np.diag(path)))

    def evaluate(self, indices: np.ndarray) -> np.ndarray:
        indices = np.atleast_2d(indices)
        sites = np.arange(self.tau)
        nxt = np.roll(sites, -1)
        values = np.prod(self.site_factors[sites[None, :], indices], axis=-1)
        values = values * np.prod(
            self.bonds[sites[None, :], indices, indices[:, nxt]], axis=-1
        )
        return values * np.exp(self.log_scale)

    def shifted(self, log_factor: float) -> "ChainTable":
        return ChainTable(self.bonds, self.site_factors, self.log_scale + log_factor)


class DenseTable(WeightTable):
    """Explicit values on the full node grid."""

    def __init__(self, values: np.ndarray, log_scale: float = 0.0) -> None:
        self.values = np.asarray(values)
        self.tau = self.values.ndim
        self.order = self.values.shape[0] if self.tau else 1
        self.log_scale = float(log_scale)

    def integrate(
        self, site_weights: np.ndarray, insertions: Optional[np.ndarray] = None
    ) -> ScaledValue:
        inserted = self._insertions(insertions) * site_weights
        result = self.values
        for i in range(self.tau):
            result = np.tensordot(inserted[i], result, axes=(0, 0))
        return ScaledValue(_clean(result), self.log_scale)

    def log_sup_norm(self) -> float:
        peak = float(np.max(np.abs(self.values)))
        return self.log_scale + (np.log(peak) if peak > 0 else -np.inf)

    def evaluate(self, indices: np.ndarray) -> np.ndarray:
        indices = np.atleast_2d(indices)
        return self.values[tuple(indices.T)] * np.exp(self.log_scale)

    def shifted(self, log_factor: float) -> "DenseTable":
        return DenseTable(self.values, self.log_scale + log_factor)


def structured_table(
    lattice: TorusLattice, site: SiteSpace, action: Optional[LatticeAction]
) -> Optional[WeightTable]:
    """Product or chain form of v_n when its structure allows, else ``None``.

    Unit and ultra-local weights factorise over cubes; in d=1 every
    nearest-neighbour weight (face products and the scalar model) is a chain.
    """
    base, log_factor = unwrap_scaled(action)
    table: Optional[WeightTable] = None
    if base is None:
        table = ProductTable.unit(lattice.tau, site.order)
    elif isinstance(base, UltraLocalAction):
        table = ProductTable(base.site_tables(lattice, site))
    elif lattice.d == 1 and lattice.tau > 1 and isinstance(base, FaceProductAction):
        table = ChainTable(np.array(base.face_tensor(lattice, site)))
    elif lattice.d == 1 and lattice.tau > 1 and isinstance(base, ScalarAction):
        table = _scalar_chain(lattice, site, base)
    if table is None:
        return None
    return table.shifted(log_factor) if log_factor else table


def _scalar_chain(lattice: TorusLattice, site: SiteSpace, action: ScalarAction) -> ChainTable:
    x = site.nodes
    differences = x[None, :] - x[:, None]
    params = action.params
    squared = params.kinetic_form is KineticForm.SQUARED_DIFFERENCE
    kinetic = differences**2 if squared else differences
    bond = np.exp(-params.lambda0 * kinetic)
    sites = np.exp(-params.potential(x))
    return ChainTable(
        np.broadcast_to(bond, (lattice.tau, *bond.shape)).copy(),
        np.broadcast_to(sites, (lattice.tau, x.shape[0])).copy(),
    )
