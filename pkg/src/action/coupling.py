"""Couplings built from a face-variable kernel h(u, s).

A kernel h on value × [0,1] defines the pair weight
w(x, y) = ∫₀¹ h(x, s) h(y, s) ds, discretised once and for all by the
Gauss–Legendre rule of the coupling's face order. The same discrete rule is
used wherever face variables are integrated, so primal and dual descriptions
of a model agree as finite sums.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from src.lattice.types import ScalePair
from src.sitespace.space import unit_interval
from src.sitespace.types import PairWeight, SiteSpace

from .actions import FaceCouplingAction
from .exceptions import ActionParameterError
from .types import ActionFamily

logger = logging.getLogger(__name__)

KernelFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
ProfileFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_FACE_ORDER = 16


@dataclass(frozen=True, eq=False)
class GenericCoupling:
    """Positive kernel h(u, s) with a fixed face quadrature."""

    name: str
    kernel: KernelFn
    face_order: int = DEFAULT_FACE_ORDER

    def __post_init__(self) -> None:
        if self.face_order <= 0:
            raise ActionParameterError(
                f"Face order must be positive, got {self.face_order}", "face_order"
            )

    @cached_property
    def face_space(self) -> SiteSpace:
        """Uniform measure on [0, 1] discretised by the face rule."""
        return unit_interval(self.face_order)

    def h(self, values: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Kernel values, broadcasting ``values`` against ``s``."""
        return np.asarray(self.kernel(np.asarray(values, dtype=float), np.asarray(s, dtype=float)))

    def h_table(self, site: SiteSpace) -> np.ndarray:
        """h(u_a, s_j) on site nodes × face nodes, shape (m, J).

        Raises:
            ActionParameterError: If the kernel is not strictly positive
        """
        table = self.h(site.nodes[:, None], self.face_space.nodes[None, :])
        if not np.all(np.isfinite(table)) or np.any(table <= 0):
            raise ActionParameterError(f"Kernel {self.name} must be positive and finite", "h")
        return table

    def pair_weight(self) -> PairWeight:
        """w(x, y) = Σ_j c_j h(x, s_j) h(y, s_j) on arbitrary value pairs."""
        nodes = self.face_space.nodes
        weights = self.face_space.weights
        kernel = self.kernel

        def evaluate(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            hx = np.asarray(kernel(x[..., None], nodes))
            hy = np.asarray(kernel(y[..., None], nodes))
            return np.sum(weights * hx * hy, axis=-1)

        return PairWeight(f"∫{self.name}⊗{self.name}", fn=evaluate)

    def action(self) -> FaceCouplingAction:
        return FaceCouplingAction(self.pair_weight(), name=f"v[{self.name}]")

    def is_constant_in_s(self, site: SiteSpace, atol: float = 1e-14) -> bool:
        table = self.h_table(site)
        return bool(np.allclose(table, table[:, :1], atol=atol, rtol=0.0))


@dataclass(frozen=True, eq=False)
class ExpCouplingFamily:
    """Exponential coupling h_n(u, s) = exp(u·y_n(s)) with y_n ≥ 1.

    ``profile`` gives y_n for each scale; :meth:`affine` covers the common
    scale-independent y(s) = offset + slope·s.
    """

    name: str
    d: int
    profile: Callable[[ScalePair], ProfileFn]
    face_order: int = DEFAULT_FACE_ORDER
    monotone: bool = False
    metadata: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def affine(
        cls, offset: float, slope: float, d: int, face_order: int = DEFAULT_FACE_ORDER
    ) -> "ExpCouplingFamily":
        """y(s) = offset + slope·s at every scale."""

        def y(s: np.ndarray) -> np.ndarray:
            return offset + slope * np.asarray(s, dtype=float)

        return cls(
            name=f"exp[y={offset}+{slope}s]",
            d=d,
            profile=lambda _n: y,
            face_order=face_order,
            monotone=True,
            metadata={"offset": offset, "slope": slope},
        )

    def y(self, n: ScalePair, s: np.ndarray) -> np.ndarray:
        return np.asarray(self.profile(n)(np.asarray(s, dtype=float)), dtype=float)

    def face_nodes(self) -> np.ndarray:
        return unit_interval(self.face_order).nodes

    def checked_profile(self, n: ScalePair) -> np.ndarray:
        """y_n on the face nodes (and on the endpoints when monotone).

        Raises:
            ActionParameterError: If y_n < 1 somewhere
        """
        points = self.face_nodes()
        if self.monotone:
            points = np.concatenate([[0.0], points, [1.0]])
        values = self.y(n, points)
        if not np.all(np.isfinite(values)) or np.any(values < 1.0):
            raise ActionParameterError(
                f"Profile of {self.name} must satisfy y >= 1, min is {float(np.min(values))}",
                "y",
            )
        return values

    def q(self, n: ScalePair) -> float:
        """q_n = sup_s Σ_{Γ∈∂Δ} y_n(s(Γ)) = 2d·sup y_n."""
        return 2 * self.d * float(np.max(self.checked_profile(n)))

    def r(self, n: ScalePair) -> float:
        """r_n = 2d·inf y_n."""
        return 2 * self.d * float(np.min(self.checked_profile(n)))

    def coupling(self, n: ScalePair) -> GenericCoupling:
        self.checked_profile(n)
        y = self.profile(n)
        return GenericCoupling(
            name=f"exp(u·y_{n.n0},{n.n1})",
            kernel=lambda u, s: np.exp(u * y(s)),
            face_order=self.face_order,
        )

    def action_family(self) -> ActionFamily:
        return ActionFamily(
            f"v[{self.name}]", lambda n: self.coupling(n).action(), dict(self.metadata)
        )


def block_exponent(family: ExpCouplingFamily, n: ScalePair, s: Sequence[float]) -> float:
    """𝐲(s) = Σ_{Γ∈∂Δ} y_n(s(Γ)) for the 2d face values on ∂Δ."""
    s = np.asarray(s, dtype=float)
    if s.shape != (2 * family.d,):
        raise ActionParameterError(f"Expected {2 * family.d} face values, got {s.shape}", "s")
    if np.any((s < 0) | (s > 1)):
        raise ActionParameterError("Face values must lie in [0, 1]", "s")
    return float(np.sum(family.y(n, s)))


def exp_coupling_H(
    family: ExpCouplingFamily,
    interval: Tuple[float, float],
    s: Sequence[float],
    n: Optional[ScalePair] = None,
) -> float:
    """∫_{[u₀,u₁]} ∏_{Γ∈∂Δ} h(u, s(Γ)) du in closed form.

    Args:
        family: Exponential coupling family
        interval: (u₀, u₁) with u₀ ≤ u₁
        s: Face values on the 2d faces bounding Δ
        n: Scale (defaults to (0, 1))

    Returns:
        𝐲(s)⁻¹·[exp(u₁𝐲(s)) − exp(u₀𝐲(s))]

    Raises:
        ActionParameterError: On a reversed interval or invalid face values
    """
    lower, upper = interval
    if upper < lower:
        raise ActionParameterError(f"Interval [{lower}, {upper}] is reversed", "interval")
    exponent = block_exponent(family, n or ScalePair(0, 1), s)
    return float((np.exp(upper * exponent) - np.exp(lower * exponent)) / exponent)


@dataclass(frozen=True, eq=False)
class CouplingFamily:
    """Scale-indexed kernel couplings n ↦ h(n, ·, ·) in dimension ``d``."""

    name: str
    d: int
    builder: Callable[[ScalePair], GenericCoupling]
    metadata: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def constant(cls, coupling: GenericCoupling, d: int) -> "CouplingFamily":
        return cls(coupling.name, d, lambda _n: coupling)

    def coupling(self, n: ScalePair) -> GenericCoupling:
        return self.builder(n)

    def action_family(self) -> ActionFamily:
        return ActionFamily(
            f"v[{self.name}]", lambda n: self.coupling(n).action(), dict(self.metadata)
        )
