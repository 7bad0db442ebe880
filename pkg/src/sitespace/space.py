"""Site space construction and exact single-site integration."""

import logging
from typing import List, Optional, Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss

from src.common.types import Scalar

from .exceptions import DescriptorError, ObservableError
from .types import PairWeight, SiteKind, SiteObservable, SiteSpace, SiteSpaceDescriptor

logger = logging.getLogger(__name__)

DEFAULT_LEGENDRE_ORDER = 16
DEFAULT_HERMITE_ORDER = 32


def make_site_space(descriptor: SiteSpaceDescriptor) -> SiteSpace:
    """Build a site space with normalized base weights.

    Args:
        descriptor: Site space description

    Returns:
        Site space with deterministic node order

    Raises:
        DescriptorError: If weights cannot be normalized or the order is invalid
    """
    if descriptor.kind is SiteKind.FINITE_SPIN:
        return _finite_spin(descriptor)
    if descriptor.kind is SiteKind.UNIT_INTERVAL:
        return unit_interval(descriptor.order or DEFAULT_LEGENDRE_ORDER, descriptor.proposal_width)
    return real_line(descriptor.order or DEFAULT_HERMITE_ORDER, descriptor.proposal_width)


def _finite_spin(descriptor: SiteSpaceDescriptor) -> SiteSpace:
    if not descriptor.values:
        raise DescriptorError("Finite spin space needs at least one value", "values")
    values = np.asarray(descriptor.values, dtype=float)
    if np.unique(values).shape[0] != values.shape[0]:
        raise DescriptorError("Finite spin values must be distinct", "values")
    if descriptor.base_weights is None:
        weights = np.full(values.shape[0], 1.0 / values.shape[0])
    else:
        weights = np.asarray(descriptor.base_weights, dtype=float)
        if weights.shape != values.shape:
            raise DescriptorError("One base weight per value required", "base_weights")
        total = float(np.sum(weights))
        if np.any(weights < 0) or not np.isfinite(total) or total <= 0:
            raise DescriptorError("Base weights are not normalizable", "base_weights")
        weights = weights / total
    return SiteSpace(
        kind=SiteKind.FINITE_SPIN,
        nodes=values,
        weights=weights,
        proposal_width=descriptor.proposal_width,
    )


def finite_spin(
    values: Tuple[float, ...] = (-1.0, 1.0), base_weights: Optional[List[float]] = None
) -> SiteSpace:
    """Shorthand for a finite spin space (uniform weights by default)."""
    return _finite_spin(
        SiteSpaceDescriptor(
            kind=SiteKind.FINITE_SPIN, values=list(values), base_weights=base_weights
        )
    )


def unit_interval(
    order: int = DEFAULT_LEGENDRE_ORDER,
    proposal_width: float = 0.2,
    breakpoints: Tuple[float, ...] = (),
) -> SiteSpace:
    """Uniform measure on [0, 1] with an ``order``-point Gauss–Legendre rule.

    With ``breakpoints`` the rule is composite: one ``order``-point panel per
    subinterval, so indicators of intervals ending at a breakpoint integrate exactly.
    """
    if order <= 0:
        raise DescriptorError(f"Quadrature order must be positive, got {order}", "order")
    edges = np.array([0.0, *sorted(breakpoints), 1.0])
    if np.any(np.diff(edges) <= 0):
        raise DescriptorError(f"Breakpoints must lie inside (0, 1): {breakpoints}", "breakpoints")
    reference, reference_weights = leggauss(order)
    lower, width = edges[:-1, None], np.diff(edges)[:, None]
    nodes = lower + 0.5 * width * (reference[None, :] + 1.0)
    weights = 0.5 * width * reference_weights[None, :]
    return SiteSpace(
        kind=SiteKind.UNIT_INTERVAL,
        nodes=nodes.ravel(),
        weights=weights.ravel(),
        proposal_width=proposal_width,
        bounds=(0.0, 1.0),
    )


def real_line(order: int = DEFAULT_HERMITE_ORDER, proposal_width: float = 0.5) -> SiteSpace:
    """Standard gaussian base measure with an ``order``-point Gauss–Hermite rule."""
    if order <= 0:
        raise DescriptorError(f"Quadrature order must be positive, got {order}", "order")
    nodes, weights = hermegauss(order)
    return SiteSpace(
        kind=SiteKind.REAL_LINE,
        nodes=nodes,
        weights=weights / np.sum(weights),
        proposal_width=proposal_width,
    )


def site_expectation(space: SiteSpace, a: SiteObservable) -> Scalar:
    """⟨Ω, a Ω⟩ as an exact weighted sum over nodes.

    Raises:
        ObservableError: If ``a`` has non-finite values
    """
    values = a.on_nodes(space)
    result = np.dot(space.weights, values)
    return complex(result) if np.iscomplexobj(result) else float(result)


def site_pair_expectation(
    space: SiteSpace, w: PairWeight, a: SiteObservable, b: SiteObservable
) -> Scalar:
    """⟨Ω⊗Ω, w·(a⊗b) Ω⊗Ω⟩ as an exact double sum.

    Raises:
        PositivityError: If ``w`` is negative or asymmetric on the nodes
    """
    matrix = w.checked_matrix(space)
    left = space.weights * a.on_nodes(space)
    right = space.weights * b.on_nodes(space)
    result = left @ matrix @ right
    if not np.isfinite(result):
        raise ObservableError("Pair expectation is not finite", w.name)
    return complex(result) if np.iscomplexobj(result) else float(result)
