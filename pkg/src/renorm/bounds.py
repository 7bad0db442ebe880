"""I/S/R bounds for multiplicative renormalizability of face-coupled actions.

For a kernel h(n, s) the face integrals F(s) = ⟨Ω, h(n,s₁)⋯h(n,s_2d) Ω⟩ are
extremized over s ∈ [0,1]^(2d). Bounds are evaluated for h/‖h‖ so that the
kernel satisfies ‖h‖ ≤ 1; the normalization is reported next to the raw values.
"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.action.coupling import CouplingFamily, ExpCouplingFamily, GenericCoupling
from src.action.exceptions import ActionParameterError
from src.gibbs.enumeration import iter_index_chunks
from src.lattice.types import LatticeSpec, RefinementStep, ScalePair
from src.sitespace.space import site_expectation
from src.sitespace.types import SiteKind, SiteSpace

from .exceptions import KernelError, RenormError
from .types import (
    DEFAULT_GRID_POINTS,
    DEFAULT_K_RANGE,
    REFINEMENT_FACTOR,
    BoundMethod,
    ExpCouplingDiagnostics,
    ExpCouplingRow,
    ISRBounds,
    UltraLocalFamily,
    k_key,
)

logger = logging.getLogger(__name__)

CouplingSource = Union[ExpCouplingFamily, CouplingFamily, UltraLocalFamily]

# q_n and r_n count as converged once their gap drops below this
CONVERGENCE_GAP = 1e-6


class _ScaleBounds:
    """Raw extrema at a single scale together with the kernel normalization."""

    def __init__(self, lower: float, upper: float, normalization: float, power: int) -> None:
        self.lower = lower
        self.upper = upper
        self.normalization = normalization
        self.power = power

    @property
    def log_lower(self) -> float:
        return _log(self.lower) - self.power * np.log(self.normalization)

    @property
    def log_upper(self) -> float:
        return _log(self.upper) - self.power * np.log(self.normalization)


def _log(value: float) -> float:
    return float(np.log(value)) if value > 0 else -np.inf


def face_integrals(coupling: GenericCoupling, site: SiteSpace, points: np.ndarray) -> np.ndarray:
    """F(s) = Σ_a ω_a ∏_i h(u_a, s_i) for face-value points of shape (N, 2d)."""
    points = np.atleast_2d(points)
    h = coupling.h(site.nodes[:, None, None], points[None, :, :])
    return site.weights @ np.prod(h, axis=-1)


def _grid_extrema(
    coupling: GenericCoupling, site: SiteSpace, faces: int, grid_points: int, refine: bool
) -> Tuple[float, float]:
    grid = np.linspace(0.0, 1.0, grid_points)
    # h on nodes × grid, reused for every product over the 2d faces
    table = coupling.h(site.nodes[:, None], grid[None, :])
    if not np.all(np.isfinite(table)) or np.any(table <= 0):
        raise KernelError(f"Kernel {coupling.name} must be positive and finite on the grid")

    best_low, best_high = np.inf, -np.inf
    arg_low = arg_high = np.zeros(faces, dtype=np.int64)
    for indices in iter_index_chunks(grid_points, faces):
        values = site.weights @ np.prod(table[:, indices], axis=-1)
        low, high = int(np.argmin(values)), int(np.argmax(values))
        if values[low] < best_low:
            best_low, arg_low = float(values[low]), indices[low]
        if values[high] > best_high:
            best_high, arg_high = float(values[high]), indices[high]
    if not refine:
        return best_low, best_high

    spacing = 1.0 / (grid_points - 1)
    offsets = np.linspace(-spacing, spacing, 2 * REFINEMENT_FACTOR + 1)
    for center, is_max in ((grid[arg_low], False), (grid[arg_high], True)):
        local = np.clip(center[:, None] + offsets[None, :], 0.0, 1.0)
        for indices in iter_index_chunks(local.shape[1], faces):
            points = local[np.arange(faces)[None, :], indices]
            values = face_integrals(coupling, site, points)
            if is_max:
                best_high = max(best_high, float(np.max(values)))
            else:
                best_low = min(best_low, float(np.min(values)))
    return best_low, best_high


def _kernel_sup(coupling: GenericCoupling, site: SiteSpace, grid_points: int) -> float:
    """sup_(u,s) h over site nodes, finite site bounds and the s grid."""
    values = site.nodes
    if site.bounds is not None:
        values = np.concatenate([values, np.asarray(site.bounds, dtype=float)])
    grid = np.linspace(0.0, 1.0, grid_points)
    return float(np.max(coupling.h(values[:, None], grid[None, :])))


def _exp_integral(exponent: float) -> float:
    """∫₀¹ exp(u·y) du = y⁻¹(e^y − 1)."""
    return float(np.expm1(exponent) / exponent)


def _scale_bounds(
    source: CouplingSource, n: ScalePair, site: SiteSpace, d: int, grid_points: int, refine: bool
) -> Tuple[_ScaleBounds, BoundMethod]:
    if isinstance(source, UltraLocalFamily):
        w = source.w(n)
        gamma = float(np.real(site_expectation(site, w)))
        norm = w.sup_norm(site)
        if not norm > 0:
            raise KernelError(f"Ultra-local weight {w.name} vanishes on the site nodes")
        return _ScaleBounds(gamma, gamma, norm, 1), BoundMethod.ULTRA_LOCAL

    if source.d != d:
        raise RenormError(f"Coupling {source.name} is {source.d}-dimensional, lattice is {d}")
    faces = 2 * d
    if (
        isinstance(source, ExpCouplingFamily)
        and source.monotone
        and site.kind is SiteKind.UNIT_INTERVAL
    ):
        try:
            q, r = source.q(n), source.r(n)
        except ActionParameterError as e:
            raise KernelError(e.message, {"scale": (n.n0, n.n1)}) from e
        # sup_(u,s) exp(u·y(s)) = e^(sup y) on u ∈ [0,1]
        normalization = float(np.exp(q / faces))
        return (
            _ScaleBounds(_exp_integral(r), _exp_integral(q), normalization, faces),
            BoundMethod.ANALYTIC,
        )

    coupling = source.coupling(n)
    lower, upper = _grid_extrema(coupling, site, faces, grid_points, refine)
    normalization = _kernel_sup(coupling, site, grid_points)
    return _ScaleBounds(lower, upper, normalization, faces), BoundMethod.GRID


def isr_bounds(
    source: CouplingSource,
    spec: LatticeSpec,
    site: SiteSpace,
    k_range: Sequence[RefinementStep] = DEFAULT_K_RANGE,
    grid_points: int = DEFAULT_GRID_POINTS,
    refine: bool = True,
) -> ISRBounds:
    """I_(ω,n)(h), S_(ω,n)(h) and R_(ω,n)(h) over a finite k_range.

    R = sup_k (S/I)^τ(n+k) · S^(−τ(n)) with S and I taken at n+k for the
    normalized kernel. Ultra-local families count as kernels without face
    dependence: I = S = ⟨Ω, w_n Ω⟩.

    Args:
        source: Exponential or generic coupling family, or an ultra-local family
        spec: Lattice at scale n
        site: Single-site space carrying ω₀
        k_range: Refinements over which R is maximized
        grid_points: Grid points per face axis for the grid search
        refine: Whether to refine the grid search around the incumbent extrema

    Returns:
        Raw and normalized I and S at n, the normalization and R

    Raises:
        KernelError: If the kernel is not positive or y_n < 1
    """
    if grid_points < 2:
        raise ValueError(f"Grid search needs at least two points, got {grid_points}")
    base, method = _scale_bounds(source, spec.n, site, spec.d, grid_points, refine)
    tau_n = spec.tau
    log_R = -np.inf
    for k in k_range:
        fine = spec.refined(k)
        bounds, _ = _scale_bounds(source, fine.n, site, spec.d, grid_points, refine)
        log_s, log_i = bounds.log_upper, bounds.log_lower
        if not np.isfinite(log_i) or not np.isfinite(log_s):
            log_R = np.inf
            break
        log_R = max(log_R, fine.tau * (log_s - log_i) - tau_n * log_s)

    if not np.isfinite(log_R):
        logger.warning(f"R is not finite for {getattr(source, 'name', source)} at {spec.n}")
    with np.errstate(over="ignore"):
        R = float(np.exp(log_R))
    return ISRBounds(
        scale=(spec.n.n0, spec.n.n1),
        method=method,
        I=base.lower,
        S=base.upper,
        normalization=base.normalization,
        I_normalized=float(np.exp(base.log_lower)),
        S_normalized=float(np.exp(base.log_upper)),
        log_R=float(log_R),
        R=R,
        k_range=[k_key(k) for k in k_range],
    )


def exp_coupling_conditions(
    family: ExpCouplingFamily,
    spec: LatticeSpec,
    k_range: Sequence[RefinementStep] = DEFAULT_K_RANGE,
) -> ExpCouplingDiagnostics:
    """q_n, r_n along k_range and the resulting renormalizability bound.

    The limit c of q_(n+k) and r_(n+k) is read off the last refinement in
    ``k_range``; 𝐒_n is the partial supremum of
    [(e^q − 1)/(e^r − 1)]^τ(n+k) over the same range.

    Args:
        family: Exponential coupling family
        spec: Lattice at scale n
        k_range: Refinements in increasing order

    Returns:
        One row per refinement, log 𝐒_n and log(𝐒_n c^τ(n) (e^c − 1)^(−τ(n)))
    """
    if not k_range:
        raise ValueError("k_range must not be empty")
    rows = []
    for k in k_range:
        fine = spec.refined(k)
        q, r = family.q(fine.n), family.r(fine.n)
        power = fine.tau * (float(np.log(np.expm1(q))) - float(np.log(np.expm1(r))))
        rows.append(ExpCouplingRow(k=k_key(k), q=q, r=r, gap=abs(q - r), log_ratio_power=power))

    last = rows[-1]
    c = 0.5 * (last.q + last.r)
    log_s = max(row.log_ratio_power for row in rows)
    log_bound = log_s + spec.tau * (np.log(c) - np.log(np.expm1(c)))
    note: Optional[str] = None
    if last.gap > CONVERGENCE_GAP:
        note = f"q and r differ by {last.gap:.3g} at k={last.k}; c is not converged over k_range"
    return ExpCouplingDiagnostics(
        scale=(spec.n.n0, spec.n.n1),
        rows=rows,
        log_S_partial=log_s,
        c=c,
        c_exceeds_one=c > 1.0,
        log_bound=float(log_bound),
        last_gap=last.gap,
        note=note,
    )
