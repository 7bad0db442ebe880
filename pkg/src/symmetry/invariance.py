"""Translation covariance β_(n,g) and invariance checks of states."""

import logging
from typing import Sequence

from src.gibbs.state import GibbsState
from src.gibbs.types import LatticeObservable
from src.lattice.geometry import TorusLattice

from .types import InvarianceReport

logger = logging.getLogger(__name__)


def translate_observable(
    lattice: TorusLattice, obs: LatticeObservable, g: Sequence[int]
) -> LatticeObservable:
    """β_g: every factor moves from Δ to Δ + g."""
    factors = tuple((lattice.translate_cube(cube, g), a) for cube, a in obs.factors)
    return LatticeObservable(factors, obs.coefficient)


def invariance_check(
    state: GibbsState,
    translations: Sequence[Sequence[int]],
    observables: Sequence[LatticeObservable],
) -> InvarianceReport:
    """max over g, a of |⟨η, β_g a⟩ − ⟨η, a⟩|.

    Args:
        state: Gibbs state, usually exact
        translations: Group elements g ∈ (ℤ_L)^d
        observables: Observables to translate

    Returns:
        Largest defect with the translation and observable attaining it
    """
    lattice = state.lattice
    report = InvarianceReport(scale=(state.spec.n.n0, state.spec.n.n1), checks=0, max_defect=0.0)
    for obs in observables:
        reference = complex(state.expectation(obs).value)
        for g in translations:
            moved = complex(state.expectation(translate_observable(lattice, obs, g)).value)
            defect = abs(moved - reference)
            report.checks += 1
            if report.worst_translation is None or defect > report.max_defect:
                report.max_defect = defect
                report.worst_translation = tuple(int(c) for c in g)
                report.worst_observable = obs.name
    logger.info(
        f"Invariance of {state!r}: {report.checks} checks, max defect {report.max_defect:.3g}"
    )
    return report
