"""State consistency and tower flows of pulled-back expectations."""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.action.exceptions import ActionError
from src.common.types import Estimate
from src.gibbs.exceptions import GibbsError
from src.gibbs.state import GibbsState
from src.gibbs.types import LatticeObservable, Observable
from src.lattice.geometry import TorusLattice
from src.lattice.types import CubeIndex, LatticeSpec, RefinementStep
from src.sitespace import observables
from src.sitespace.types import SiteKind, SiteObservable, SiteSpace

from .exceptions import TowerFlowError
from .transforms import pullback_observable
from .types import (
    BlockSpinFamily,
    ConsistencyEntry,
    ConsistencyReport,
    TowerClass,
    TowerClassification,
    TowerFlow,
    TowerRow,
)

logger = logging.getLogger(__name__)

# Builds η at a lattice scale
StateFamily = Callable[[LatticeSpec], GibbsState]

SAMPLED_SIGMAS = 3.0


def site_generators(site: SiteSpace) -> List[SiteObservable]:
    """Single-site observables spanning the checks: the field, its square and label projections."""
    generators = [observables.field(), observables.power(2)]
    if site.kind is SiteKind.FINITE_SPIN:
        generators.extend(observables.projection_onto([value]) for value in site.nodes)
    return generators


def generating_observables(lattice: TorusLattice, site: SiteSpace) -> List[LatticeObservable]:
    """Single factors at the first and last cube and their two-cube products."""
    first = lattice.cube_at(0)
    last = lattice.cube_at(lattice.tau - 1)
    result: List[LatticeObservable] = []
    for a in site_generators(site):
        result.append(LatticeObservable.single(first, a))
        if lattice.tau > 1:
            result.append(LatticeObservable.single(last, a))
            result.append(LatticeObservable.single(first, a) * LatticeObservable.single(last, a))
    return result


def state_consistency_check(
    family: BlockSpinFamily,
    site: SiteSpace,
    spec: LatticeSpec,
    k: RefinementStep,
    tolerance: float = 1e-12,
    observable_set: Optional[Sequence[LatticeObservable]] = None,
) -> ConsistencyReport:
    """Compare ω_(n+k)(ι a) with ω_n(a) for base product states.

    Decimation must agree to machine precision; block averages are reported
    as they are.

    Args:
        family: Block-spin family
        site: Single-site space carrying the base state
        spec: Coarse lattice at scale n
        k: Refinement step
        tolerance: Largest defect still counted as consistent
        observable_set: Coarse observables; defaults to a generating set

    Returns:
        Per-observable defects and their maximum
    """
    family.check_site(site)
    coarse_state = GibbsState(spec, site)
    fine_state = GibbsState(spec.refined(k), site)
    entries: List[ConsistencyEntry] = []
    for a in observable_set or generating_observables(coarse_state.lattice, site):
        coarse_value = complex(coarse_state.expectation(a).value)
        pulled = pullback_observable(family, spec, a, k, site)
        fine_value = complex(fine_state.expectation(pulled).value)
        entries.append(
            ConsistencyEntry(
                observable=a.name,
                coarse_value=coarse_value.real,
                fine_value=fine_value.real,
                defect=abs(fine_value - coarse_value),
            )
        )
    max_defect = max((entry.defect for entry in entries), default=0.0)
    if max_defect > tolerance:
        logger.info(f"{family.kind.value} base-state defect {max_defect:.3e} at k=({k.k0},{k.k1})")
    return ConsistencyReport(
        kind=family.kind,
        k=(k.k0, k.k1),
        tolerance=tolerance,
        max_defect=max_defect,
        consistent=max_defect <= tolerance,
        entries=entries,
    )


def _estimate_at(state: GibbsState, a: Observable, scale: LatticeSpec) -> Estimate:
    try:
        return state.expectation(a)
    except (GibbsError, ActionError) as e:
        raise TowerFlowError(
            f"Estimation failed at scale ({scale.n.n0},{scale.n.n1}): {e}",
            (scale.n.n0, scale.n.n1),
            {"observable": getattr(a, "name", "obs")},
        ) from e


def tower_flow(
    family: BlockSpinFamily,
    states: StateFamily,
    spec: LatticeSpec,
    k_list: Sequence[RefinementStep],
    observable_set: Sequence[LatticeObservable],
) -> TowerFlow:
    """⟨η_(n+k), ι_(n+k,n) a⟩ for each k in ``k_list``.

    Convergence is only reported through successive differences.

    Args:
        family: Block-spin family
        states: Map from a lattice spec to the state η at that scale
        spec: Base lattice at scale n
        k_list: Refinements in the order they are reported
        observable_set: Coarse observables at scale n

    Returns:
        One row per refinement plus successive differences per observable

    Raises:
        TowerFlowError: If estimation fails at some scale
    """
    flow = TowerFlow(kind=family.kind, base_scale=(spec.n.n0, spec.n.n1))
    for k in k_list:
        fine = spec.refined(k)
        state = states(fine)
        row = TowerRow(k=(k.k0, k.k1), values={})
        for a in observable_set:
            pulled = pullback_observable(family, spec, a, k, state.site)
            estimate = _estimate_at(state, pulled, fine)
            row.values[a.name] = estimate.real
            row.stderrs[a.name] = estimate.stderr
        logger.debug(f"Tower row k=({k.k0},{k.k1}): {row.values}")
        flow.rows.append(row)

    for a in observable_set:
        sequence = np.array(flow.sequence(a.name))
        flow.successive_differences[a.name] = np.abs(np.diff(sequence)).tolist()
    return flow


def classify_tower(
    family: BlockSpinFamily,
    states: StateFamily,
    spec: LatticeSpec,
    k: RefinementStep,
    site_observables: Optional[Sequence[SiteObservable]] = None,
    tolerance: float = 1e-9,
) -> TowerClassification:
    """Rough classification of the tower entry at n+k.

    A character has no single-cube variance; an ultra-local state has no
    connected correlation between distinct coarse cubes.

    Args:
        family: Block-spin family
        states: Map from a lattice spec to the state η at that scale
        spec: Coarse lattice at scale n
        k: Refinement of the inspected entry
        site_observables: Observables probed at every coarse cube; defaults to the field
        tolerance: Largest magnitude still counted as vanishing

    Returns:
        Classification with the largest variance and correlation found
    """
    fine = spec.refined(k)
    state = states(fine)
    coarse = TorusLattice(spec)
    probes = list(site_observables or [observables.field()])
    slack: List[float] = []

    def expect(a: LatticeObservable) -> float:
        estimate = _estimate_at(state, pullback_observable(family, spec, a, k, state.site), fine)
        slack.append(SAMPLED_SIGMAS * (estimate.stderr or 0.0))
        return estimate.real

    means: Dict[Tuple[int, CubeIndex], float] = {}
    max_variance = 0.0
    max_correlation = 0.0
    cubes = coarse.cubes()
    for index, a in enumerate(probes):
        for cube in cubes:
            single = LatticeObservable.single(cube, a)
            means[(index, cube)] = expect(single)
            variance = expect(single * single) - means[(index, cube)] ** 2
            max_variance = max(max_variance, abs(variance))
        for i, first in enumerate(cubes):
            for second in cubes[i + 1 :]:
                pair = LatticeObservable.single(first, a) * LatticeObservable.single(second, a)
                correlation = expect(pair) - means[(index, first)] * means[(index, second)]
                max_correlation = max(max_correlation, abs(correlation))

    bound = tolerance + max(slack, default=0.0)
    if max_variance <= bound:
        classification = TowerClass.CHARACTER
    elif max_correlation <= bound:
        classification = TowerClass.ULTRA_LOCAL
    else:
        classification = TowerClass.NON_ULTRA_LOCAL
    return TowerClassification(
        classification=classification,
        k=(k.k0, k.k1),
        max_variance=max_variance,
        max_correlation=max_correlation,
        tolerance=tolerance,
    )
