import numpy as np
import pytest

from src.action.actions import FaceCouplingAction, UltraLocalAction
from src.gibbs.state import GibbsState
from src.gibbs.types import LatticeObservable
from src.lattice.types import LatticeSpec, ScalePair
from src.sitespace import observables
from src.sitespace.space import finite_spin
from src.sitespace.types import PairWeight, SiteObservable
from src.symmetry.invariance import invariance_check, translate_observable

SIGMA = observables.field()


@pytest.fixture
def chain():
    return LatticeSpec(3, 1, ScalePair(1, 1))


def probes():
    return [
        LatticeObservable.single((0,), SIGMA) * LatticeObservable.single((2,), SIGMA),
        LatticeObservable.single((1,), observables.projection_onto([1.0])),
    ]


def test_translation_moves_every_factor(chain):
    state = GibbsState(chain, finite_spin())
    moved = translate_observable(state.lattice, probes()[0], (8,))
    assert moved.cubes == ((8,), (1,))


def test_product_state_is_invariant(chain):
    state = GibbsState(chain, finite_spin(base_weights=[0.2, 0.8]))
    report = invariance_check(state, state.lattice.translations(), probes())
    assert report.checks == 2 * 9
    assert report.max_defect <= 1e-15


def test_face_coupling_state_is_invariant(chain):
    state = GibbsState(chain, finite_spin(), FaceCouplingAction(PairWeight.ising(0.6)))
    report = invariance_check(state, state.lattice.translations(), probes())
    assert report.max_defect <= 1e-12


def test_inhomogeneous_weight_is_detected(chain):
    w = SiteObservable("w", table=np.array([0.5, 1.0]))
    other = SiteObservable("w'", table=np.array([1.0, 0.1]))
    state = GibbsState(chain, finite_spin(), UltraLocalAction(w, overrides={(1,): other}))
    report = invariance_check(state, [(1,), (3,)], probes())
    assert report.max_defect > 0.1
    assert report.worst_translation in [(1,), (3,)]
    assert report.worst_observable is not None
