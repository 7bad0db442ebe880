"""Face-variable (dual) representation of v[w] models.

Every cube Δ sees the face values s on its 2d boundary faces through the
normalized single-site state

    ⟨E^(s)_Δ, a⟩ = ⟨Ω, ∏_{Γ∈∂Δ} h(s(Γ)) a Ω⟩ / z^(s)_Δ,

and the face variables are distributed by v̂(s) = ∏_Δ z^(s)_Δ against the
product of face quadrature rules. Correlations of the primal model are
integrals of products of these site states.
"""

import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.common.types import Estimate, Scalar
from src.gibbs.enumeration import iter_index_chunks
from src.gibbs.metropolis import chain_generators
from src.gibbs.state import GibbsState
from src.gibbs.statistics import block_means, jackknife
from src.gibbs.types import Estimator, ExactEstimator, LatticeObservable, MetropolisEstimator
from src.sitespace.types import SiteObservable

from .exceptions import DualCapacityError, DualModelError, VanishingNormalizerError
from .types import DualityReport, DualModel, FaceFunction

logger = logging.getLogger(__name__)

# Face configurations per chunk; each holds an (m, N, τ, 2d) kernel array
FACE_CHUNK = 1 << 13


def _clean(value: complex) -> Scalar:
    value = complex(value)
    return value if value.imag != 0 else value.real


def _check_face_values(model: DualModel, s: np.ndarray, width: int) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape[-1] != width:
        raise DualModelError(f"Expected {width} face values, got shape {s.shape}")
    lower, upper = model.face_space.bounds
    if np.any((s < lower) | (s > upper)):
        raise DualModelError(f"Face values must lie in [{lower}, {upper}]")
    return s


def dual_site_state(
    model: DualModel, cube: Sequence[int], s: Sequence[float], a: SiteObservable
) -> Scalar:
    """⟨E^(s)_(h,n|Δ), a⟩ for face values ``s`` on ∂Δ.

    Args:
        model: Dual model
        cube: Cube Δ
        s: 2d face values, ordered like ``boundary_table`` (upper faces first)
        a: Single-site observable

    Returns:
        Normalized expectation; 1 for the unit observable

    Raises:
        VanishingNormalizerError: If z^(s)_Δ is not strictly positive
    """
    cube = model.lattice.check_cube(cube)
    s = _check_face_values(model, s, 2 * model.spec.d)
    site = model.site
    weighted = site.weights * np.prod(model.coupling.h(site.nodes[:, None], s[None, :]), axis=-1)
    normalizer = float(np.sum(weighted))
    if not np.isfinite(normalizer) or normalizer <= 0:
        raise VanishingNormalizerError(f"z^(s) = {normalizer} at cube {cube}", cube)
    return _clean(np.dot(weighted, a.on_nodes(site)) / normalizer)


def cube_normalizers(model: DualModel, s: np.ndarray) -> np.ndarray:
    """z^(s)_Δ for every cube, shape (N, τ), from face configurations (N, F)."""
    s = _check_face_values(model, np.atleast_2d(s), model.face_count)
    site = model.site
    on_boundary = s[:, model.lattice.boundary_table]
    kernel = np.prod(model.coupling.h(site.nodes[:, None, None, None], on_boundary[None]), axis=-1)
    return np.einsum("a,ant->nt", site.weights, kernel)


def dual_action(model: DualModel, s: np.ndarray) -> np.ndarray:
    """v̂_n(s) = ∏_Δ z^(s)_Δ for one configuration (F,) or a batch (N, F).

    Raises:
        VanishingNormalizerError: If some z^(s)_Δ is not strictly positive
    """
    s = np.asarray(s, dtype=float)
    z = cube_normalizers(model, s)
    bad = np.argwhere(~(z > 0))
    if bad.size:
        cube = model.lattice.cube_at(int(bad[0, 1]))
        raise VanishingNormalizerError(f"z^(s) vanishes at cube {cube}", cube)
    values = np.prod(z, axis=-1)
    return values[0] if s.ndim == 1 else values


def _log_dual_action(model: DualModel, face_indices: np.ndarray) -> np.ndarray:
    """ln v̂ on face-node index configurations (N, F)."""
    kernel = model.h_nodes[:, face_indices[:, model.lattice.boundary_table]]
    z = np.einsum("a,ant->nt", model.site.weights, np.prod(kernel, axis=-1))
    return np.sum(np.log(z), axis=-1)


def _evaluate(a_hat: Optional[FaceFunction], s: np.ndarray) -> np.ndarray:
    if a_hat is None:
        return np.ones(s.shape[0])
    values = np.broadcast_to(np.asarray(a_hat(s)), (s.shape[0],))
    if not np.all(np.isfinite(values)):
        raise DualModelError("Face observable has non-finite values")
    return values


def _exact_face_sum(
    model: DualModel, a_hat: Optional[FaceFunction]
) -> Tuple[complex, float, float]:
    """(Σ c·v̂·â, Σ c·v̂, shift) with both sums scaled by exp(−shift)."""
    face_nodes = model.face_space.nodes
    log_c = np.log(model.face_space.weights)
    shift = -np.inf
    numerator: complex = 0.0
    denominator = 0.0
    for indices in iter_index_chunks(model.face_space.order, model.face_count, FACE_CHUNK):
        log_w = np.sum(log_c[indices], axis=-1) + _log_dual_action(model, indices)
        values = _evaluate(a_hat, face_nodes[indices])
        top = max(shift, float(np.max(log_w)))
        rescale = np.exp(shift - top) if np.isfinite(shift) else 0.0
        weights = np.exp(log_w - top)
        numerator = numerator * rescale + np.dot(weights, values)
        denominator = denominator * rescale + float(np.sum(weights))
        shift = top
    return numerator, denominator, shift


def dual_log_partition_function(model: DualModel) -> float:
    """ln ẑ = ln ∫∏ds v̂(s); equal to ln z of the primal v[w] model.

    Raises:
        DualCapacityError: If the face grid exceeds the cap
    """
    _check_cap(model, model.cap)
    _, denominator, shift = _exact_face_sum(model, None)
    return shift + float(np.log(denominator))


def _check_cap(model: DualModel, cap: int) -> None:
    size = model.grid_size
    if size > cap:
        raise DualCapacityError(
            f"Face grid {model.face_space.order}^{model.face_count} = {size} exceeds cap {cap}; "
            "pass a MetropolisEstimator to sample face variables",
            size,
            cap,
        )


def dual_expectation(
    model: DualModel,
    a_hat: Optional[FaceFunction] = None,
    estimator: Optional[Estimator] = None,
) -> Estimate:
    """⟨η̂_(h,n), â⟩ = ẑ⁻¹ ∫∏ds(Γ) v̂_n(s) â(s).

    Exact over the face quadrature grid when it fits the cap. Otherwise, with a
    :class:`MetropolisEstimator`, face configurations are drawn from the
    quadrature weights and reweighted by v̂ (self-normalized importance sampling).

    Args:
        model: Dual model
        a_hat: Function of face configurations (N, F); ``None`` is the unit
        estimator: Exact settings or sampling settings

    Returns:
        Estimate, exact or with a jackknife standard error

    Raises:
        DualCapacityError: If the grid exceeds the cap and no sampler is given
    """
    cap = estimator.cap if isinstance(estimator, ExactEstimator) else model.cap
    if model.grid_size > cap and isinstance(estimator, MetropolisEstimator):
        return _sampled_dual_expectation(model, a_hat, estimator)
    _check_cap(model, cap)
    numerator, denominator, shift = _exact_face_sum(model, a_hat)
    return Estimate(
        value=_clean(numerator / denominator),
        diagnostics={
            "face_grid_size": float(model.grid_size),
            "log_normalizer": shift + float(np.log(denominator)),
        },
    )


def _sampled_dual_expectation(
    model: DualModel, a_hat: Optional[FaceFunction], settings: MetropolisEstimator
) -> Estimate:
    rng = chain_generators(settings.seed, settings.n_chains)[-1]
    count = settings.measure_sweeps * settings.n_chains
    order = model.face_space.order
    indices = rng.choice(order, size=(count, model.face_count), p=model.face_space.weights)
    log_w = np.concatenate(
        [
            _log_dual_action(model, chunk)
            for chunk in np.array_split(indices, max(1, count // FACE_CHUNK))
        ]
    )
    weights = np.exp(log_w - np.max(log_w))
    values = _evaluate(a_hat, model.face_space.nodes[indices])
    blocks = block_means(np.stack([weights * values, weights], axis=-1), settings.n_blocks)
    value, error = jackknife(blocks, lambda mean: mean[0] / mean[1])
    effective = float(np.sum(weights) ** 2 / np.sum(weights**2))
    logger.debug(f"Sampled dual expectation: {count} draws, effective size {effective:.1f}")
    return Estimate(
        value=_clean(value),
        stderr=error,
        diagnostics={"samples": float(count), "effective_sample_size": effective},
    )


def _merge_by_cube(
    model: DualModel, cubes: Sequence[Sequence[int]], observables: Sequence[SiteObservable]
) -> Dict[int, SiteObservable]:
    if len(cubes) != len(observables):
        raise DualModelError(f"{len(cubes)} cubes for {len(observables)} observables")
    merged: Dict[int, SiteObservable] = {}
    for cube, a in zip(cubes, observables):
        index = model.lattice.index_of(cube)
        merged[index] = merged[index].times(a, model.site) if index in merged else a
    return merged


def duality_identity_check(
    model: DualModel,
    cubes: Sequence[Sequence[int]],
    observables: Sequence[SiteObservable],
    estimator: Optional[Estimator] = None,
) -> DualityReport:
    """Compare ⟨η_n, ∏Φ(Δ_j, a_j)⟩ with ∫dη̂(s) ∏_j ⟨E^(s)_Δj, a_j⟩.

    The primal side is the exact Gibbs state of the v[w] model built from the
    same face rule, so the two sides agree as finite sums. Factors on a
    repeated cube are multiplied before the site state is taken.

    Args:
        model: Dual model
        cubes: Cubes Δ₁..Δ_k
        observables: Site observables a₁..a_k
        estimator: Settings for the dual side

    Returns:
        Both sides and |lhs − rhs|
    """
    merged = _merge_by_cube(model, cubes, observables)
    lattice, site = model.lattice, model.site
    primal = LatticeObservable(tuple((lattice.cube_at(i), a) for i, a in merged.items()))
    state = GibbsState(model.spec, site, model.primal_action(), ExactEstimator(model.cap))
    lhs = state.expectation(primal)

    tables = {i: a.on_nodes(site) for i, a in merged.items()}
    boundary = lattice.boundary_table

    def site_state_product(s: np.ndarray) -> np.ndarray:
        result = np.ones(s.shape[0], dtype=complex)
        for i, values in tables.items():
            kernel = model.coupling.h(site.nodes[:, None, None], s[None, :, boundary[i]])
            weighted = site.weights[:, None] * np.prod(kernel, axis=-1)
            result *= (values @ weighted) / np.sum(weighted, axis=0)
        return result

    rhs = dual_expectation(model, site_state_product, estimator)
    defect = abs(complex(lhs.value) - complex(rhs.value))
    logger.debug(f"Duality at {model.spec.n}: lhs {lhs.real:.12g}, rhs {rhs.real:.12g}")
    return DualityReport(
        scale=(model.spec.n.n0, model.spec.n.n1),
        cubes=[lattice.cube_at(i) for i in merged],
        lhs=lhs.real,
        rhs=rhs.real,
        defect=defect,
        rhs_stderr=rhs.stderr,
        face_grid_size=model.grid_size,
    )
