"""Decimation conditional expectations e_(ω,n₀,n) and effective actions.

Every fine site except the distinguished ones (exterior sites included) is
integrated against the base single-site state. Product and chain tables are
reduced in closed form; everything else is enumerated on the fine grid.
"""

import logging
from typing import Optional, Union

import numpy as np

from src.action.actions import LatticeAction, unwrap_scaled
from src.action.types import ActionFamily
from src.common.types import DEFAULT_EXACT_CAP
from src.gibbs.enumeration import check_capacity, iter_index_chunks
from src.gibbs.exceptions import ExactCapacityError
from src.gibbs.tables import ChainTable, DenseTable, ProductTable, WeightTable, structured_table
from src.gibbs.types import ComposedObservable, LatticeObservable, ObservableSum
from src.lattice.geometry import TorusLattice
from src.lattice.refinement import Refinement
from src.lattice.types import LatticeSpec, RefinementStep
from src.sitespace.types import SiteSpace

from .exceptions import ConditionalCapacityError
from .types import EffectiveActionTable, TowerDefect, k_key

logger = logging.getLogger(__name__)

FineQuantity = Union[
    None, LatticeAction, LatticeObservable, ObservableSum, ComposedObservable, WeightTable
]

# Dense coarse tables are compared and summed up to this many entries
DENSE_CAP = 1 << 20


def conditional_expectation(
    site: SiteSpace,
    coarse: LatticeSpec,
    k: RefinementStep,
    b: FineQuantity,
    cap: int = DEFAULT_EXACT_CAP,
) -> WeightTable:
    """e_(ω,n₀,n₀+k)(b) as a function of the coarse configuration.

    Satisfies ⟨ω_(n₀+k), b·ι(a)⟩ = ⟨ω_(n₀), e(b)·a⟩ for every coarse a.

    Args:
        site: Single-site space carrying the base state ω₀
        coarse: Lattice at scale n₀
        k: Refinement step to the fine scale
        b: Fine weight, product observable or node table; ``None`` is 𝟙
        cap: Largest fine grid enumerated when b has no product or chain form

    Returns:
        Coarse table, factorized whenever b is

    Raises:
        ConditionalCapacityError: If enumeration would exceed ``cap``
    """
    refinement = Refinement(TorusLattice(coarse), k)
    fine = refinement.fine
    if b is None:
        return ProductTable.unit(refinement.coarse.tau, site.order)
    if isinstance(b, LatticeObservable):
        return _decimate_table(refinement, site, ProductTable(b.insertions(fine, site)), cap)
    if isinstance(b, ObservableSum):
        total = sum(
            conditional_expectation(site, coarse, k, term, cap).to_dense(DENSE_CAP)
            for term in b.terms
        )
        return DenseTable(np.asarray(total))
    if isinstance(b, WeightTable):
        return _decimate_table(refinement, site, b, cap)
    if isinstance(b, ComposedObservable):
        return _enumerate(
            refinement, site, lambda idx: b.evaluate(fine, site, site.nodes[idx]), cap
        )

    table = structured_table(fine, site, b)
    if table is not None:
        return _decimate_table(refinement, site, table, cap)
    base, log_factor = unwrap_scaled(b)
    result = _enumerate(
        refinement, site, lambda idx: base.weight(fine, site, site.nodes[idx]), cap
    )
    return result.shifted(log_factor) if log_factor else result


def _decimate_table(
    refinement: Refinement, site: SiteSpace, table: WeightTable, cap: int
) -> WeightTable:
    if isinstance(table, ProductTable):
        return _decimate_product(refinement, site, table)
    if isinstance(table, ChainTable):
        return _decimate_chain(refinement, site, table)
    if isinstance(table, DenseTable):
        return _decimate_dense(refinement, site, table)
    return _enumerate(refinement, site, table.evaluate, cap)


def _decimate_product(
    refinement: Refinement, site: SiteSpace, table: ProductTable
) -> ProductTable:
    sums = table.site_sums(site.weights)[refinement.integrated_mask]
    factors = np.array(table.factors[refinement.distinguished_indices])
    magnitudes = np.abs(sums)
    if np.any(magnitudes == 0):
        return ProductTable(np.zeros_like(factors), table.log_scale)
    phase = np.prod(sums / magnitudes)
    if np.iscomplexobj(phase) and np.imag(phase) != 0:
        factors = factors.astype(complex)
    factors[0] = factors[0] * (phase if np.iscomplexobj(factors) else np.real(phase))
    return ProductTable(factors, table.log_scale + float(np.sum(np.log(magnitudes))))


def _decimate_chain(refinement: Refinement, site: SiteSpace, table: ChainTable) -> ChainTable:
    """Integrate each gap between consecutive distinguished sites into one coarse bond.

    The gap after the last distinguished site wraps through the exterior sites.
    """
    distinguished = refinement.distinguished_indices
    tau = table.tau
    diagonal = table.site_factors * site.weights
    log_scale = table.log_scale
    bonds = []
    for i, start in enumerate(distinguished):
        stop = distinguished[(i + 1) % len(distinguished)]
        if stop <= start:
            stop += tau
        kernel = np.array(table.bonds[start])
        for position in range(start + 1, stop):
            j = position % tau
            kernel = (kernel * diagonal[j][None, :]) @ table.bonds[j]
            peak = float(np.max(np.abs(kernel)))
            if peak == 0.0:
                break
            kernel = kernel / peak
            log_scale += np.log(peak)
        peak = float(np.max(np.abs(kernel)))
        if peak == 0.0:
            coarse_tau = len(distinguished)
            zeros = np.zeros((coarse_tau, site.order, site.order))
            return ChainTable(zeros, log_scale=table.log_scale)
        bonds.append(kernel / peak)
        log_scale += np.log(peak)
    return ChainTable(np.array(bonds), table.site_factors[distinguished], log_scale)


def _decimate_dense(refinement: Refinement, site: SiteSpace, table: DenseTable) -> DenseTable:
    values = table.values
    # Contract integrated axes from the back so earlier axis numbers stay valid
    for axis in np.flatnonzero(refinement.integrated_mask)[::-1]:
        values = np.tensordot(values, site.weights, axes=([int(axis)], [0]))
    return DenseTable(values, table.log_scale)


def _enumerate(refinement: Refinement, site: SiteSpace, evaluate, cap: int) -> DenseTable:
    fine = refinement.fine
    coarse = refinement.coarse
    try:
        check_capacity(site.order, fine.tau, cap)
        check_capacity(site.order, coarse.tau, DENSE_CAP)
    except ExactCapacityError as e:
        raise ConditionalCapacityError(
            f"Conditional expectation needs {e.grid_size} grid points (cap {e.cap}); "
            "use sampled estimation instead",
            e.grid_size,
            e.cap,
        ) from e

    integrated = refinement.integrated_mask
    distinguished = refinement.distinguished_indices
    shape = (site.order,) * coarse.tau
    flat: Optional[np.ndarray] = None
    for indices in iter_index_chunks(site.order, fine.tau):
        base = np.prod(site.weights[indices[:, integrated]], axis=-1)
        values = base * np.asarray(evaluate(indices))
        if flat is None:
            flat = np.zeros(int(np.prod(shape)), dtype=values.dtype)
        elif np.iscomplexobj(values) and not np.iscomplexobj(flat):
            flat = flat.astype(complex)
        target = np.ravel_multi_index(tuple(indices[:, distinguished].T), shape)
        np.add.at(flat, target, values)
    assert flat is not None
    logger.debug(f"Enumerated {site.order}^{fine.tau} fine configurations for {refinement!r}")
    return DenseTable(flat.reshape(shape))


def effective_action(
    site: SiteSpace,
    family: ActionFamily,
    coarse: LatticeSpec,
    k: RefinementStep,
    cap: int = DEFAULT_EXACT_CAP,
) -> EffectiveActionTable:
    """e^(k)(v)_n = e_(ω,n,n+k)(v_(n+k)).

    Args:
        site: Single-site space carrying ω₀
        family: Action family n ↦ v_n
        coarse: Lattice at scale n
        k: Refinement step
        cap: Enumeration cap for unstructured weights

    Returns:
        Coarse table of the effective action
    """
    action = family.at(coarse.n.refine(k))
    table = conditional_expectation(site, coarse, k, action, cap)
    return EffectiveActionTable(scale=coarse.n, k=k, table=table)


def _sup_difference(left: WeightTable, right: WeightTable) -> float:
    if left.tau != right.tau or left.order != right.order:
        raise ValueError("Tables live on different grids")
    return float(np.max(np.abs(left.to_dense(DENSE_CAP) - right.to_dense(DENSE_CAP))))


def tower_property_check(
    site: SiteSpace,
    family: ActionFamily,
    coarse: LatticeSpec,
    k0: RefinementStep,
    k: RefinementStep,
    cap: int = DEFAULT_EXACT_CAP,
) -> TowerDefect:
    """Defect of e_(ω,n,n+k₀)∘e_(ω,n+k₀,n+k) = e_(ω,n,n+k) on f_(n+k).

    Args:
        site: Single-site space carrying ω₀
        family: Family f; only f_(n+k) is used
        coarse: Lattice at scale n
        k0: Intermediate refinement, componentwise ≤ k
        k: Total refinement

    Returns:
        Absolute and relative sup-norm defects
    """
    if k0.k0 > k.k0 or k0.k1 > k.k1:
        raise ValueError(f"Intermediate refinement {k_key(k0)} exceeds {k_key(k)}")
    remainder = RefinementStep(k.k0 - k0.k0, k.k1 - k0.k1)
    f = family.at(coarse.n.refine(k))
    direct = conditional_expectation(site, coarse, k, f, cap)
    inner = conditional_expectation(site, coarse.refined(k0), remainder, f, cap)
    composed = conditional_expectation(site, coarse, k0, inner, cap)
    defect = _sup_difference(composed, direct)
    scale = direct.sup_norm()
    return TowerDefect(
        scale=(coarse.n.n0, coarse.n.n1),
        k0=k_key(k0),
        k=k_key(k),
        defect=defect,
        relative_defect=defect / scale if scale > 0 else defect,
    )
