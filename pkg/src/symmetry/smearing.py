"""Smeared observables Φ_n(f⊗a)(x) and their translation continuity.

A test function f on ℝ^d is placed on the torus by summing over periodic
images; image shells are added until the outermost shell carries at most
``tail_tolerance`` of the accumulated ℓ¹ mass.
"""

import logging
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from src.common.types import Estimate
from src.gibbs.state import GibbsState
from src.gibbs.types import LatticeObservable, ObservableSum
from src.lattice.geometry import TorusLattice
from src.lattice.types import LatticeSpec
from src.sitespace.types import SiteSpace

from .exceptions import SmearingTailError
from .types import SmearedObservable, SmearedShiftReport, TestFunction

logger = logging.getLogger(__name__)

TAIL_TOLERANCE = 1e-12
MAX_IMAGES = 8
CELL_POINTS = 5


def _image_shell(d: int, radius: int) -> np.ndarray:
    """Integer image offsets m with max|m_i| = radius, shape (S, d)."""
    if radius == 0:
        return np.zeros((1, d), dtype=np.int64)
    grid = np.indices((2 * radius + 1,) * d).reshape(d, -1).T - radius
    return grid[np.max(np.abs(grid), axis=1) == radius]


def _periodized(
    spec: LatticeSpec,
    f: TestFunction,
    x: np.ndarray,
    tail_tolerance: float,
    max_images: int,
) -> np.ndarray:
    """Σ_m f(b^(−n⁰)(c + L·m) − x) for each cube c and each row of x, shape (P, τ)."""
    lattice = TorusLattice(spec)
    coords = np.indices(lattice.shape).reshape(spec.d, -1).T
    x = np.atleast_2d(np.asarray(x, dtype=float))
    total = np.zeros((x.shape[0], lattice.tau))
    mass = 0.0
    shell_mass = np.inf
    for radius in range(max_images + 1):
        shell = _image_shell(spec.d, radius)
        cubes = spec.spacing * (coords[None, :, :] + lattice.size * shell[:, None, :])
        points = cubes[None, :, :, :] - x[:, None, None, :]
        values = np.asarray(f(points.reshape(-1, spec.d))).reshape(x.shape[0], len(shell), -1)
        if not np.all(np.isfinite(values)):
            raise SmearingTailError("Test function has non-finite values", float("inf"))
        total = total + values.sum(axis=1)
        shell_mass = float(np.sum(np.abs(values)))
        mass += shell_mass
        if mass == 0.0 or (radius > 0 and shell_mass <= tail_tolerance * mass):
            return total
    raise SmearingTailError(
        f"Image shell {max_images} still carries {shell_mass / mass:.3g} of the ℓ¹ mass",
        shell_mass / mass,
        {"max_images": max_images, "tail_tolerance": tail_tolerance},
    )


def smearing_coefficients(
    spec: LatticeSpec,
    f: TestFunction,
    x: Sequence[float],
    tail_tolerance: float = TAIL_TOLERANCE,
    max_images: int = MAX_IMAGES,
) -> np.ndarray:
    """b^(−dn⁰) Σ_m f(x′ − x) per cube x′, shape (τ,).

    Raises:
        SmearingTailError: If the image sum does not converge within ``max_images`` shells
    """
    values = _periodized(spec, f, np.asarray(x, dtype=float), tail_tolerance, max_images)
    return spec.spacing**spec.d * values[0]


def smeared_observable(
    spec: LatticeSpec,
    smeared: SmearedObservable,
    x: Sequence[float],
    tail_tolerance: float = TAIL_TOLERANCE,
    max_images: int = MAX_IMAGES,
) -> ObservableSum:
    """Φ_n(f⊗a)(x) as a sum of single-factor observables."""
    lattice = TorusLattice(spec)
    coefficients = smearing_coefficients(spec, smeared.f, x, tail_tolerance, max_images)
    terms = tuple(
        LatticeObservable.single(lattice.cube_at(i), smeared.a).scaled(float(c))
        for i, c in enumerate(coefficients)
        if c != 0.0
    )
    return ObservableSum(terms, f"Φ({smeared.name}⊗{smeared.a.name})({[float(c) for c in x]})")


def smeared_observable_eval(
    state: GibbsState,
    smeared: Sequence[SmearedObservable],
    points: Sequence[Sequence[float]],
    tail_tolerance: float = TAIL_TOLERANCE,
    max_images: int = MAX_IMAGES,
) -> Estimate:
    """⟨η, ∏_j Φ_n(f_j⊗a_j)(x_j)⟩ in the given product order.

    Raises:
        ValueError: If observables and points differ in number
        SmearingTailError: If a test function cannot be truncated
    """
    if len(smeared) != len(points) or not smeared:
        raise ValueError(f"{len(smeared)} smeared observables for {len(points)} points")
    sums = [
        smeared_observable(state.spec, s, x, tail_tolerance, max_images)
        for s, x in zip(smeared, points)
    ]
    return state.expectation(reduce(lambda left, right: left * right, sums))


def smeared_norm_bound(
    spec: LatticeSpec, site: SiteSpace, smeared: SmearedObservable, x: Sequence[float]
) -> float:
    """b^(−dn⁰) Σ_x′ |f(x′ − x)| · sup|a|, a bound on ‖Φ_n(f⊗a)(x)‖."""

    def absolute(y: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(smeared.f(y)))

    values = _periodized(spec, absolute, np.asarray(x, dtype=float), TAIL_TOLERANCE, MAX_IMAGES)
    return float(spec.spacing**spec.d * np.sum(values) * smeared.a.sup_norm(site))


def continuity_modulus(
    spec: LatticeSpec,
    site: SiteSpace,
    smeared: SmearedObservable,
    shift: Sequence[float],
    cell_points: int = CELL_POINTS,
    at: Optional[np.ndarray] = None,
) -> float:
    """b^(−dn⁰) Σ_x′ sup_y |f(x′ − y) − f(x′ − y − x)| · ‖a‖.

    The supremum runs over a ``cell_points``^d grid of the elementary cell
    [0, b^(−n⁰))^d, or over the rows of ``at`` when given.
    """
    offset = np.asarray(shift, dtype=float)
    if not np.any(offset):
        return 0.0
    if at is None:
        axis = np.linspace(0.0, spec.spacing, cell_points, endpoint=False)
        at = np.stack(np.meshgrid(*([axis] * spec.d), indexing="ij"), axis=-1).reshape(-1, spec.d)
    f = smeared.f

    def difference(y: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(f(y)) - np.asarray(f(y - offset)))

    values = _periodized(spec, difference, np.atleast_2d(at), TAIL_TOLERANCE, MAX_IMAGES)
    sup = np.max(values, axis=0)
    return float(spec.spacing**spec.d * np.sum(sup) * smeared.a.sup_norm(site))


def smeared_shift_check(
    state: GibbsState,
    smeared: Sequence[SmearedObservable],
    points: Sequence[Sequence[float]],
    shift: Sequence[float],
) -> SmearedShiftReport:
    """Compare ⟨∏Φ(x_j)⟩ with ⟨∏Φ(x_j + x)⟩ against the telescoped first-order bound.

    The bound is Σ_j δ_j ∏_{i≠j} N_i, with δ_j the modulus of factor j at its
    own point and N_i the larger norm bound of factor i before and after the shift.
    """
    shift_array = np.asarray(shift, dtype=float)
    moved = [np.asarray(x, dtype=float) + shift_array for x in points]
    before = complex(smeared_observable_eval(state, smeared, points).value)
    after = complex(smeared_observable_eval(state, smeared, moved).value)

    spec, site = state.spec, state.site
    moduli = [
        continuity_modulus(spec, site, s, shift_array, at=np.asarray(x, dtype=float)[None, :])
        for s, x in zip(smeared, points)
    ]
    norms = [
        max(smeared_norm_bound(spec, site, s, x), smeared_norm_bound(spec, site, s, y))
        for s, x, y in zip(smeared, points, moved)
    ]
    bound = sum(
        moduli[j] * float(np.prod([n for i, n in enumerate(norms) if i != j]))
        for j in range(len(smeared))
    )
    defect = abs(after - before)
    logger.debug(f"Smeared shift by {list(shift_array)}: defect {defect:.3g}, bound {bound:.3g}")
    return SmearedShiftReport(
        shift=[float(c) for c in shift_array],
        before=before.real,
        after=after.real,
        defect=defect,
        bound=bound,
        moduli=moduli,
    )
