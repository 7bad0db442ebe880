"""Block-spin maps p_(n,n+k), observable pullbacks ι_(n+k,n) and their axioms."""

import logging
from typing import List, Optional, Tuple

import numpy as np

from src.gibbs.types import ComposedObservable, LatticeObservable, Observable, ObservableSum
from src.lattice.geometry import TorusLattice
from src.lattice.refinement import Refinement
from src.lattice.types import LatticeSpec, RefinementStep
from src.sitespace.types import SiteSpace

from .exceptions import BlockSpinError
from .types import AxiomReport, BlockSpinFamily

logger = logging.getLogger(__name__)

# Unit-vector configurations are used when the fine lattice has at most this many cubes
BASIS_LIMIT = 4096


def block_map(
    family: BlockSpinFamily,
    coarse: LatticeSpec,
    k: RefinementStep,
    u_fine: np.ndarray,
    site: Optional[SiteSpace] = None,
) -> np.ndarray:
    """Apply p_(n,n+k) to fine configurations.

    Args:
        family: Decimation or block average
        coarse: Lattice at scale n
        k: Refinement step
        u_fine: Configurations on the lattice at n+k, shape (..., τ(n+k))
        site: Site space of the values, checked against the kind when given

    Returns:
        Coarse configurations, shape (..., τ(n))

    Raises:
        UnsupportedKindError: If block averages are not defined on ``site``
        BlockSpinError: If the configuration does not live on the fine lattice
    """
    family.check_site(site)
    refinement = Refinement(TorusLattice(coarse), k)
    u = np.asarray(u_fine)
    if u.shape[-1] != refinement.fine.tau:
        raise BlockSpinError(
            f"Configuration has {u.shape[-1]} cubes, fine lattice has {refinement.fine.tau}"
        )
    if family.is_decimation:
        return u[..., refinement.distinguished_indices]
    return u[..., refinement.cover_indices].mean(axis=-1)


def pullback_observable(
    family: BlockSpinFamily,
    coarse: LatticeSpec,
    a: Observable,
    k: RefinementStep,
    site: Optional[SiteSpace] = None,
) -> Observable:
    """ι_(n+k,n) a = a ∘ p_(n,n+k).

    Decimation keeps the product form and moves every factor to the
    distinguished subcube. Block averages become a composed observable over the
    fine covers of the cubes ``a`` depends on.

    Args:
        family: Decimation or block average
        coarse: Lattice at scale n on which ``a`` lives
        a: Coarse observable
        k: Refinement step
        site: Site space; required for block averages

    Returns:
        Observable on the lattice at n+k
    """
    if k.is_identity:
        return a
    refinement = Refinement(TorusLattice(coarse), k)
    if family.is_decimation:
        return _decimated(refinement, a)
    if site is None:
        raise BlockSpinError("Block-average pullbacks need the site space")
    family.check_site(site)
    return _averaged(refinement, a, site)


def _moved(refinement: Refinement, a: LatticeObservable) -> LatticeObservable:
    factors = tuple((refinement.distinguished(cube), obs) for cube, obs in a.factors)
    return LatticeObservable(factors, a.coefficient)


def _decimated(refinement: Refinement, a: Observable) -> Observable:
    if isinstance(a, LatticeObservable):
        return _moved(refinement, a)
    if isinstance(a, ObservableSum):
        return ObservableSum(tuple(_moved(refinement, t) for t in a.terms), a.name)
    support = tuple(int(i) for i in refinement.distinguished_indices[list(a.support)])
    return ComposedObservable(a.name, a.fn, support)


def coarse_support(lattice: TorusLattice, a: Observable) -> List[int]:
    """Sorted linear indices of the cubes ``a`` depends on."""
    if isinstance(a, LatticeObservable):
        return sorted({lattice.index_of(cube) for cube in a.cubes})
    if isinstance(a, ObservableSum):
        return sorted({i for term in a.terms for i in coarse_support(lattice, term)})
    return sorted(set(a.support))


def _averaged(refinement: Refinement, a: Observable, site: SiteSpace) -> ComposedObservable:
    coarse = refinement.coarse
    cubes = coarse_support(coarse, a)
    covers = refinement.cover_indices[cubes]
    block = covers.shape[1]

    def fn(values: np.ndarray) -> np.ndarray:
        means = values.reshape(values.shape[0], len(cubes), block).mean(axis=-1)
        configs = np.zeros((values.shape[0], coarse.tau))
        configs[:, cubes] = means
        return np.asarray(a.evaluate(coarse, site, configs))

    name = getattr(a, "name", "obs")
    return ComposedObservable(f"avg[{name}]", fn, tuple(int(i) for i in covers.ravel()))


def _probe_configs(tau: int, n_random: int, rng: np.random.Generator) -> np.ndarray:
    random = rng.standard_normal((n_random, tau))
    if tau > BASIS_LIMIT:
        return random
    return np.vstack([np.eye(tau), random])


def _check_locality(family: BlockSpinFamily, coarse: LatticeSpec, k: RefinementStep) -> bool:
    """Each coarse value may only respond to unit perturbations inside its fine cover."""
    refinement = Refinement(TorusLattice(coarse), k)
    tau = refinement.fine.tau
    allowed = np.zeros((tau, refinement.coarse.tau), dtype=bool)
    for cube, cover in enumerate(refinement.cover_indices):
        allowed[cover, cube] = True
    for start in range(0, tau, BASIS_LIMIT):
        stop = min(start + BASIS_LIMIT, tau)
        probes = np.zeros((stop - start, tau))
        probes[np.arange(stop - start), np.arange(start, stop)] = 1.0
        responses = block_map(family, coarse, k, probes)
        if np.any((responses != 0.0) & ~allowed[start:stop]):
            return False
    return True


def _check_covariance(
    family: BlockSpinFamily, coarse: LatticeSpec, k: RefinementStep, configs: np.ndarray
) -> bool:
    """p(u∘β_(g·B)) = p(u)∘β_g, restricted to non-wrapping cubes when k¹ > 0."""
    refinement = Refinement(TorusLattice(coarse), k)
    lattice = refinement.coarse
    mapped = block_map(family, coarse, k, configs)
    coords = np.indices(lattice.shape).reshape(lattice.d, -1)
    for g in lattice.translations():
        shift = np.asarray(g, dtype=np.int64)
        fine_perm = refinement.fine.translation_permutation(tuple(shift * refinement.block))
        left = block_map(family, coarse, k, configs[:, fine_perm])
        right = mapped[:, lattice.translation_permutation(g)]
        if k.k1 > 0:
            inside = np.all(coords + shift[:, None] < lattice.size, axis=0)
            left, right = left[:, inside], right[:, inside]
        if not np.allclose(left, right, rtol=0.0, atol=1e-12):
            logger.debug(f"Covariance fails for translation {g} at k={k}")
            return False
    return True


def verify_blockspin_axioms(
    family: BlockSpinFamily,
    spec: LatticeSpec,
    k1: RefinementStep,
    k2: RefinementStep,
    site: Optional[SiteSpace] = None,
    n_random: int = 32,
    seed: int = 0,
) -> AxiomReport:
    """Check the cosheaf, locality and translation-covariance axioms.

    Both maps are linear in the configuration, so unit-vector probes make the
    checks exhaustive; random configurations are added on top.

    Args:
        family: Block-spin family
        spec: Coarsest lattice at scale n
        k1: First refinement n → n+k1
        k2: Second refinement n+k1 → n+k1+k2
        site: Site space, checked against the kind when given
        n_random: Number of random probe configurations
        seed: Seed for the random probes

    Returns:
        Report with one flag per axiom; failures never raise
    """
    family.check_site(site)
    rng = np.random.default_rng(seed)
    middle = spec.refined(k1)
    total = k1.compose(k2)
    configs = _probe_configs(TorusLattice(spec.refined(total)).tau, n_random, rng)
    failures: List[str] = []

    direct = block_map(family, spec, total, configs)
    stepwise = block_map(family, spec, k1, block_map(family, middle, k2, configs))
    cosheaf = bool(np.allclose(direct, stepwise, rtol=0.0, atol=1e-12))
    if not cosheaf:
        failures.append("cosheaf: p(n,n+k1)∘p(n+k1,n+k1+k2) differs from p(n,n+k1+k2)")

    steps: List[Tuple[LatticeSpec, RefinementStep]] = [(spec, k1), (middle, k2), (spec, total)]
    locality = all(_check_locality(family, coarse, k) for coarse, k in steps)
    if not locality:
        failures.append("locality: a coarse value responds outside its fine cover")

    covariance = True
    for coarse, k in steps:
        probes = _probe_configs(TorusLattice(coarse.refined(k)).tau, n_random, rng)
        if not _check_covariance(family, coarse, k, probes):
            covariance = False
            failures.append(f"covariance: fails for k=({k.k0},{k.k1})")

    for failure in failures:
        logger.warning(f"Block-spin axiom check ({family.kind.value}): {failure}")
    return AxiomReport(
        kind=family.kind,
        k1=(k1.k0, k1.k1),
        k2=(k2.k0, k2.k1),
        cosheaf=cosheaf,
        locality=locality,
        covariance=covariance,
        configurations_checked=int(configs.shape[0]),
        failures=failures,
    )
