"""Translate configuration models into lattices, site spaces, actions and estimators."""

from typing import List, Optional

import numpy as np

from src.action.actions import FaceCouplingAction, ScalarAction, UltraLocalAction
from src.action.coupling import ExpCouplingFamily
from src.action.types import ActionFamily, ScalarActionParams
from src.gibbs.state import GibbsState
from src.gibbs.types import Estimator, EstimatorKind, ExactEstimator, MetropolisEstimator
from src.lattice.types import LatticeSpec, RefinementStep, ScalePair
from src.renorm.bounds import CouplingSource
from src.renorm.types import UltraLocalFamily
from src.sitespace.types import PairWeight, SiteObservable, SiteSpace

from .types import ActionConfig, ActionKind, EstimatorConfig, KPair, LatticeConfig


def lattice_spec(config: LatticeConfig) -> LatticeSpec:
    return LatticeSpec(config.b, config.d, ScalePair(config.n0, config.n1))


def refinement(k: KPair) -> RefinementStep:
    return RefinementStep(*k)


def refinements(k_range: List[KPair]) -> List[RefinementStep]:
    return [refinement(k) for k in k_range]


def task_seeds(master: int, count: int) -> List[int]:
    """One seed per task, spawned from the master seed in task order."""
    children = np.random.SeedSequence(master).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def estimator(config: EstimatorConfig, seed: int) -> Estimator:
    """Exact or Metropolis settings; Metropolis chains are seeded from ``seed``."""
    if config.kind is EstimatorKind.EXACT:
        return ExactEstimator(cap=config.cap)
    return MetropolisEstimator(
        seed=seed,
        burn_in_sweeps=config.burn_in_sweeps,
        measure_sweeps=config.measure_sweeps,
        n_chains=config.n_chains,
        n_blocks=config.n_blocks,
        proposal_width=config.proposal_width,
    )


def _ultra_local_weight(config: ActionConfig) -> SiteObservable:
    assert config.weights is not None
    return SiteObservable("w", table=np.asarray(config.weights, dtype=float))


def exp_coupling_family(config: ActionConfig, d: int) -> ExpCouplingFamily:
    return ExpCouplingFamily.affine(config.offset, config.slope, d, config.face_order)


def action_family(config: Optional[ActionConfig], d: int) -> ActionFamily:
    """n ↦ v_n for the configured action; no action gives the base product state."""
    if config is None:
        return ActionFamily.constant(None)
    if config.kind is ActionKind.SCALAR:
        params = ScalarActionParams(config.lambda0, tuple(config.lambdas), config.kinetic_form)
        return ActionFamily.constant(ScalarAction(params))
    if config.kind is ActionKind.FACE_COUPLING:
        if config.coupling is not None:
            w = PairWeight.ising(config.coupling)
        else:
            w = PairWeight.tabulated(np.asarray(config.matrix, dtype=float))
        return ActionFamily.constant(FaceCouplingAction(w))
    if config.kind is ActionKind.ULTRA_LOCAL:
        return ActionFamily.constant(UltraLocalAction(_ultra_local_weight(config)))
    return exp_coupling_family(config, d).action_family()


def coupling_source(config: ActionConfig, d: int) -> CouplingSource:
    """The coupling family behind an exp_coupling or ultra_local action.

    Raises:
        ValueError: For actions without a coupling family
    """
    if config.kind is ActionKind.EXP_COUPLING:
        return exp_coupling_family(config, d)
    if config.kind is ActionKind.ULTRA_LOCAL:
        return UltraLocalFamily.constant(_ultra_local_weight(config))
    raise ValueError(f"{config.kind.value} actions have no coupling family")


def state(
    spec: LatticeSpec, site: SiteSpace, family: ActionFamily, settings: Estimator
) -> GibbsState:
    return GibbsState(spec, site, family.at(spec.n), settings)
