"""Action weights v_n as vectorised functions of lattice configurations.

Configurations are arrays of shape (N, τ) holding site values, with cubes in
the lattice's lexicographic order.
"""

from abc import ABC, abstractmethod
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from src.lattice.geometry import TorusLattice
from src.lattice.types import CubeIndex
from src.sitespace.types import PairWeight, SiteObservable, SiteSpace

from .exceptions import ActionParameterError, ActionPositivityError
from .types import KineticForm, ScalarActionParams

UNIT_TOLERANCE = 1e-12


class LatticeAction(ABC):
    """Positive weight v_n multiplying the base product measure."""

    name: str = "action"

    @abstractmethod
    def weight(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        """Evaluate v_n.

        Args:
            lattice: Lattice at scale n
            site: Single-site space
            configs: Configurations, shape (N, τ)

        Returns:
            Weights, shape (N,)
        """
        pass

    @abstractmethod
    def local_log_weight(
        self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray, index: int
    ) -> np.ndarray:
        """Log of the factors of v_n that depend on cube ``index``.

        Differences of this quantity give Metropolis acceptance ratios.

        Raises:
            ActionPositivityError: If a factor is negative
        """
        pass

    def log_weight(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        values = self.weight(lattice, site, configs)
        if np.any(values < 0):
            raise ActionPositivityError(f"{self.name} takes negative values")
        with np.errstate(divide="ignore"):
            return np.log(values)


class ScalarAction(LatticeAction):
    """v = exp(-s_λ(u)) for the polynomial scalar model."""

    def __init__(self, params: ScalarActionParams, name: str = "scalar") -> None:
        self.params = params
        self.name = name

    def action_value(self, lattice: TorusLattice, configs: np.ndarray) -> np.ndarray:
        """s_λ(u) per configuration."""
        configs = np.atleast_2d(np.asarray(configs, dtype=float))
        ends = lattice.face_endpoints
        differences = configs[:, ends[:, 1]] - configs[:, ends[:, 0]]
        kinetic = _kinetic(differences, self.params.kinetic_form).sum(axis=-1)
        return self.params.lambda0 * kinetic + self.params.potential(configs).sum(axis=-1)

    def weight(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        return np.exp(-self.action_value(lattice, configs))

    def log_weight(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        return -self.action_value(lattice, configs)

    def local_log_weight(
        self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray, index: int
    ) -> np.ndarray:
        configs = np.atleast_2d(configs)
        ends = lattice.face_endpoints[lattice.boundary_table[index]]
        differences = configs[:, ends[:, 1]] - configs[:, ends[:, 0]]
        kinetic = _kinetic(differences, self.params.kinetic_form).sum(axis=-1)
        return -(self.params.lambda0 * kinetic + self.params.potential(configs[:, index]))


def _kinetic(differences: np.ndarray, form: KineticForm) -> np.ndarray:
    if form is KineticForm.SQUARED_DIFFERENCE:
        return differences**2
    return differences


class FaceProductAction(LatticeAction):
    """v = ∏_Γ W_Γ(u(Δ₀(Γ)), u(Δ₁(Γ))) over all faces."""

    @abstractmethod
    def face_values(
        self,
        lattice: TorusLattice,
        site: SiteSpace,
        configs: np.ndarray,
        positions: np.ndarray,
    ) -> np.ndarray:
        """Face factors W_Γ at the given face positions, shape (N, len(positions))."""
        pass

    @abstractmethod
    def face_tensor(self, lattice: TorusLattice, site: SiteSpace) -> np.ndarray:
        """Face factors on the node grid, shape (d·τ, m, m)."""
        pass

    def weight(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        configs = np.atleast_2d(configs)
        positions = np.arange(lattice.face_count)
        return np.prod(self.face_values(lattice, site, configs, positions), axis=-1)

    def local_log_weight(
        self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray, index: int
    ) -> np.ndarray:
        configs = np.atleast_2d(configs)
        values = self.face_values(lattice, site, configs, lattice.boundary_table[index])
        if np.any(values < 0):
            raise ActionPositivityError(
                f"{self.name} has a negative face factor next to cube {index}",
                value=float(values.min()),
            )
        with np.errstate(divide="ignore"):
            return np.log(values).sum(axis=-1)


class FaceCouplingAction(FaceProductAction):
    """Nearest-neighbour coupling v[w] = ∏_Γ Φ(Γ, w) with one symmetric w ≥ 0."""

    def __init__(self, w: PairWeight, name: Optional[str] = None) -> None:
        self.w = w
        self.name = name or f"v[{w.name}]"

    def face_values(
        self,
        lattice: TorusLattice,
        site: SiteSpace,
        configs: np.ndarray,
        positions: np.ndarray,
    ) -> np.ndarray:
        ends = lattice.face_endpoints[positions]
        return self.w.evaluate(site, configs[:, ends[:, 0]], configs[:, ends[:, 1]])

    def face_tensor(self, lattice: TorusLattice, site: SiteSpace) -> np.ndarray:
        matrix = self.w.checked_matrix(site)
        return np.broadcast_to(matrix, (lattice.face_count, *matrix.shape))


class TabulatedAction(FaceProductAction):
    """Face-product weight with per-face node matrices.

    Faces without an override use ``default``. Overrides need not be positive
    or symmetric, which makes this the vehicle for inhomogeneous and signed
    counterexamples.
    """

    def __init__(
        self,
        default: PairWeight,
        overrides: Optional[Mapping[int, np.ndarray]] = None,
        name: str = "tabulated",
    ) -> None:
        self.default = default
        self.overrides: Dict[int, np.ndarray] = {
            int(k): np.asarray(v, dtype=float) for k, v in (overrides or {}).items()
        }
        self.name = name

    def face_tensor(self, lattice: TorusLattice, site: SiteSpace) -> np.ndarray:
        tensor = np.array(
            np.broadcast_to(self.default.matrix(site), (lattice.face_count, site.order, site.order))
        )
        for position, matrix in self.overrides.items():
            if not 0 <= position < lattice.face_count:
                raise ActionParameterError(f"Face position {position} out of range", "overrides")
            if matrix.shape != (site.order, site.order):
                raise ActionParameterError(
                    f"Override for face {position} has shape {matrix.shape}", "overrides"
                )
            tensor[position] = matrix
        return tensor

    def face_values(
        self,
        lattice: TorusLattice,
        site: SiteSpace,
        configs: np.ndarray,
        positions: np.ndarray,
    ) -> np.ndarray:
        tensor = self.face_tensor(lattice, site)
        ends = lattice.face_endpoints[positions]
        tails = site.node_index(configs[:, ends[:, 0]])
        heads = site.node_index(configs[:, ends[:, 1]])
        return tensor[np.asarray(positions)[None, :], tails, heads]


class UltraLocalAction(LatticeAction):
    """v = ∏_Δ Φ(Δ, w_Δ) with 0 ≤ w_Δ ≤ 1; ``overrides`` make it inhomogeneous."""

    def __init__(
        self,
        w: SiteObservable,
        overrides: Optional[Mapping[CubeIndex, SiteObservable]] = None,
        name: Optional[str] = None,
    ) -> None:
        self.w = w
        self.overrides: Dict[CubeIndex, SiteObservable] = dict(overrides or {})
        self.name = name or f"ultra_local[{w.name}]"

    @property
    def is_homogeneous(self) -> bool:
        return not self.overrides

    def site_tables(self, lattice: TorusLattice, site: SiteSpace) -> np.ndarray:
        """Per-cube weight values on the site nodes, shape (τ, m).

        Raises:
            ActionParameterError: If a weight leaves [0, 1]
        """
        base = self._checked(self.w, site)
        tables = np.tile(base, (lattice.tau, 1))
        for cube, observable in self.overrides.items():
            tables[lattice.index_of(cube)] = self._checked(observable, site)
        return tables

    @staticmethod
    def _checked(observable: SiteObservable, site: SiteSpace) -> np.ndarray:
        values = np.real(observable.on_nodes(site)).astype(float)
        if np.any(values < 0) or np.any(values > 1 + UNIT_TOLERANCE):
            raise ActionParameterError(
                f"Ultra-local weight {observable.name} must lie in [0, 1]", "w"
            )
        return values

    def _factors(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        configs = np.atleast_2d(configs)
        factors = np.real(self.w.evaluate(site, configs)).astype(float)
        for cube, observable in self.overrides.items():
            index = lattice.index_of(cube)
            factors[:, index] = np.real(observable.evaluate(site, configs[:, index]))
        return factors

    def weight(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        return np.prod(self._factors(lattice, site, configs), axis=-1)

    def local_log_weight(
        self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray, index: int
    ) -> np.ndarray:
        factors = self._factors(lattice, site, configs)[:, index]
        with np.errstate(divide="ignore"):
            return np.log(factors)


class ScaledAction(LatticeAction):
    """c·v for a positive constant c = exp(log_factor)."""

    def __init__(self, base: Optional[LatticeAction], log_factor: float) -> None:
        self.base = base
        self.log_factor = float(log_factor)
        self.name = f"{'unit' if base is None else base.name}*exp({self.log_factor:.6g})"

    def weight(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        return np.exp(self.log_weight(lattice, site, configs))

    def log_weight(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        configs = np.atleast_2d(configs)
        if self.base is None:
            return np.full(configs.shape[0], self.log_factor)
        return self.log_factor + self.base.log_weight(lattice, site, configs)

    def local_log_weight(
        self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray, index: int
    ) -> np.ndarray:
        configs = np.atleast_2d(configs)
        if self.base is None:
            return np.zeros(configs.shape[0])
        return self.base.local_log_weight(lattice, site, configs, index)


class GaussianAction(LatticeAction):
    """v = exp(−⟨φ, Aφ⟩) with φ = u − center and symmetric A of shape (τ, τ)."""

    def __init__(self, matrix: np.ndarray, center: float = 0.0, name: str = "gaussian") -> None:
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ActionParameterError(
                f"Quadratic form must be square, got {matrix.shape}", "matrix"
            )
        self.matrix = 0.5 * (matrix + matrix.T)
        self.center = float(center)
        self.name = name

    def _fields(self, lattice: TorusLattice, configs: np.ndarray) -> np.ndarray:
        configs = np.atleast_2d(np.asarray(configs, dtype=float))
        if configs.shape[-1] != self.matrix.shape[0] or lattice.tau != self.matrix.shape[0]:
            raise ActionParameterError(
                f"Quadratic form of size {self.matrix.shape[0]} does not fit τ={lattice.tau}",
                "matrix",
            )
        return configs - self.center

    def log_weight(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        phi = self._fields(lattice, configs)
        return -np.einsum("ni,ij,nj->n", phi, self.matrix, phi)

    def weight(self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray) -> np.ndarray:
        return np.exp(self.log_weight(lattice, site, configs))

    def local_log_weight(
        self, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray, index: int
    ) -> np.ndarray:
        phi = self._fields(lattice, configs)
        row = self.matrix[index]
        return -(2.0 * phi[:, index] * (phi @ row) - row[index] * phi[:, index] ** 2)


def unwrap_scaled(action: Optional[LatticeAction]) -> Tuple[Optional[LatticeAction], float]:
    """Split nested :class:`ScaledAction` wrappers into (base, total log factor)."""
    log_factor = 0.0
    while isinstance(action, ScaledAction):
        log_factor += action.log_factor
        action = action.base
    return action, log_factor
