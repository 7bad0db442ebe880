import numpy as np
import pytest

from src.action.actions import FaceCouplingAction, ScalarAction, TabulatedAction, UltraLocalAction
from src.action.types import ScalarActionParams
from src.gibbs.exceptions import ExactCapacityError, PartitionFunctionError
from src.gibbs.state import GibbsState
from src.gibbs.statistics import correlation_length_fit
from src.gibbs.types import ComposedObservable, ExactEstimator, LatticeObservable, ObservableSum
from src.lattice.types import LatticeSpec, ScalePair
from src.sitespace import observables
from src.sitespace.space import finite_spin, real_line
from src.sitespace.types import PairWeight, SiteObservable
from src.tests.oracles import (
    ising_correlation_length,
    ising_insertion,
    ising_partition,
    ising_two_point,
)

SIGMA = observables.field()


@pytest.fixture
def spins():
    return finite_spin()


def chain_spec(levels=1):
    return LatticeSpec(3, 1, ScalePair(0, levels))


def ising_state(site, coupling=0.5, levels=1):
    return GibbsState(chain_spec(levels), site, FaceCouplingAction(PairWeight.ising(coupling)))


def test_base_state_has_unit_partition_function(spins):
    state = GibbsState(LatticeSpec(3, 2, ScalePair(0, 1)), spins)
    assert state.partition_function().value == pytest.approx(1.0)
    assert state.partition_function().is_exact
    assert state.expectation(LatticeObservable.unit()).value == pytest.approx(1.0)


def test_ultra_local_partition_function(spins):
    # w has ω-mean 0.7 on each of the 9 cubes
    w = SiteObservable("w", table=np.array([0.4, 1.0]))
    state = GibbsState(LatticeSpec(3, 2, ScalePair(0, 1)), spins, UltraLocalAction(w))
    assert state.partition_function().value == pytest.approx(0.7**9, rel=1e-12)


def test_ising_chain_matches_transfer_matrix(spins):
    state = ising_state(spins, 0.5)
    assert state.partition_function().value == pytest.approx(
        ising_partition(0.5, 3), rel=1e-12
    )
    assert state.correlation_at((0,), SIGMA, (1,), SIGMA).value == pytest.approx(
        ising_two_point(0.5, 3, 1), rel=1e-12
    )


def test_chain_and_enumeration_paths_agree(spins):
    # The composed observable forces full enumeration of the same state
    state = ising_state(spins, 0.8, levels=2)
    pair = LatticeObservable.single((0,), SIGMA) * LatticeObservable.single((4,), SIGMA)
    composed = ComposedObservable("s0*s4", lambda values: values[:, 0] * values[:, 1], (0, 4))
    expected = state.expectation(composed).value
    assert state.expectation(pair).value == pytest.approx(expected, rel=1e-10)
    assert state.expectation(pair).value == pytest.approx(ising_two_point(0.8, 9, 4), rel=1e-10)


def test_two_dimensional_enumeration_is_translation_invariant(spins):
    state = GibbsState(
        LatticeSpec(3, 2, ScalePair(0, 1)), spins, FaceCouplingAction(PairWeight.ising(0.3))
    )
    reference = state.correlation_at((0, 0), SIGMA, (1, 0), SIGMA).value
    for g in state.lattice.translations():
        first = state.lattice.translate_cube((0, 0), g)
        second = state.lattice.translate_cube((1, 0), g)
        assert state.correlation_at(first, SIGMA, second, SIGMA).value == pytest.approx(reference)


def test_expectation_is_positive_on_non_negative_observables(spins):
    state = ising_state(spins, -0.4)
    up = observables.spin_up()
    obs = LatticeObservable.single((0,), up) * LatticeObservable.single((2,), up)
    assert state.expectation(obs).value >= 0.0


def test_decoupled_weight_factorises():
    site = finite_spin(base_weights=[0.3, 0.7])
    bond = np.array([[1.0, 0.5], [0.5, 2.0]])
    # Only face 0 (cubes 0-1) is coupled; cube 2 is independent
    action = TabulatedAction(PairWeight.tabulated(np.ones((2, 2))), {0: bond})
    state = GibbsState(chain_spec(), site, action)
    left = LatticeObservable.single((0,), SIGMA) * LatticeObservable.single((1,), SIGMA)
    right = LatticeObservable.single((2,), observables.spin_up())
    joint = state.expectation(left * right).value
    assert joint == pytest.approx(state.expectation(left).value * state.expectation(right).value)
    assert state.expectation(right).value == pytest.approx(0.7)


def test_ultra_local_states_have_no_correlation(spins):
    w = SiteObservable("w", table=np.array([0.2, 0.9]))
    state = GibbsState(LatticeSpec(3, 2, ScalePair(0, 1)), spins, UltraLocalAction(w))
    correlation = state.correlation_at((0, 0), SIGMA, (1, 2), SIGMA).value
    assert abs(correlation) <= 1e-14


def test_correlation_with_unit_vanishes(spins):
    state = ising_state(spins, 0.5)
    correlation = state.correlation(
        LatticeObservable.single((0,), SIGMA), LatticeObservable.unit()
    )
    assert abs(correlation.value) <= 1e-12


def test_observable_sum_is_linear(spins):
    state = ising_state(spins, 0.5)
    a = LatticeObservable.single((0,), SIGMA)
    b = LatticeObservable.single((0,), SIGMA) * LatticeObservable.single((1,), SIGMA)
    total = state.expectation(ObservableSum((a, b.scaled(2.0)))).value
    assert total == pytest.approx(state.expectation(a).value + 2.0 * state.expectation(b).value)


def test_biased_base_weights_match_oracle():
    site = finite_spin(base_weights=[0.25, 0.75])
    state = GibbsState(chain_spec(), site, FaceCouplingAction(PairWeight.ising(0.4)))
    expected = ising_insertion(0.4, 3, {1: (-1.0, 1.0)}, base_weights=(0.25, 0.75))
    assert state.expectation(LatticeObservable.single((1,), SIGMA)).value == pytest.approx(expected)


def test_long_chain_correlation_length(spins):
    coupling = 0.5
    state = ising_state(spins, coupling, levels=3)
    points = [
        (
            state.lattice.cube_distance((0,), (r,)),
            state.correlation_at((0,), SIGMA, (r,), SIGMA).real,
        )
        for r in range(1, 5)
    ]
    fit = correlation_length_fit(points)
    assert fit.ell_fit == pytest.approx(ising_correlation_length(coupling), rel=0.05)
    assert not fit.non_decaying


def test_scalar_chain_uses_structured_path():
    site = real_line(order=12)
    params = ScalarActionParams(lambda0=0.5, lambdas=(0.3, 0.1))
    state = GibbsState(chain_spec(), site, ScalarAction(params))
    assert state.weight_table() is not None
    z = state.partition_function().value
    assert 0.0 < z < 1.0
    assert state.expectation(LatticeObservable.single((0,), SIGMA)).value == pytest.approx(
        0.0, abs=1e-12
    )


def test_exact_capacity_is_enforced():
    site = real_line()
    params = ScalarActionParams(lambda0=0.5, lambdas=(0.3, 0.1))
    state = GibbsState(LatticeSpec(3, 2, ScalePair(0, 1)), site, ScalarAction(params))
    with pytest.raises(ExactCapacityError) as excinfo:
        state.partition_function()
    assert excinfo.value.grid_size == 32**9


def test_small_cap_blocks_enumeration(spins):
    state = GibbsState(
        LatticeSpec(3, 2, ScalePair(0, 1)),
        spins,
        FaceCouplingAction(PairWeight.ising(0.3)),
        ExactEstimator(cap=100),
    )
    with pytest.raises(ExactCapacityError):
        state.partition_function()


def test_vanishing_partition_function_is_rejected(spins):
    action = TabulatedAction(PairWeight.tabulated(np.ones((2, 2))), {0: np.zeros((2, 2))})
    state = GibbsState(chain_spec(), spins, action)
    with pytest.raises(PartitionFunctionError):
        state.partition_function()


def test_signed_weight_with_positive_partition_function(spins):
    signed = np.array([[-0.5, 1.5], [1.5, -0.5]])
    action = TabulatedAction(PairWeight.tabulated(np.ones((2, 2))), {1: signed})
    state = GibbsState(chain_spec(), spins, action)
    assert state.partition_function().value == pytest.approx(0.5)
    pair = LatticeObservable.single((1,), SIGMA) * LatticeObservable.single((2,), SIGMA)
    assert state.expectation(pair).value == pytest.approx(-2.0)
