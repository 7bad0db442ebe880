import itertools

import numpy as np
import pytest

from src.action.actions import FaceCouplingAction, TabulatedAction, UltraLocalAction
from src.action.types import ActionFamily
from src.blockspin.transforms import pullback_observable
from src.blockspin.types import BlockSpinFamily
from src.gibbs.state import GibbsState
from src.gibbs.tables import ChainTable, ProductTable
from src.gibbs.types import ComposedObservable, LatticeObservable, ObservableSum
from src.lattice.geometry import TorusLattice
from src.lattice.types import LatticeSpec, RefinementStep, ScalePair
from src.renorm.conditional import conditional_expectation, effective_action, tower_property_check
from src.renorm.exceptions import ConditionalCapacityError
from src.sitespace import observables
from src.sitespace.space import finite_spin
from src.sitespace.types import PairWeight, SiteObservable

DECIMATION = BlockSpinFamily()
K = RefinementStep(1, 0)


@pytest.fixture
def site():
    return finite_spin(base_weights=[0.3, 0.7])


@pytest.fixture
def coarse():
    return LatticeSpec(3, 1, ScalePair(0, 1))


def brute_effective(action, fine, site, distinguished, coarse_tau):
    """Sum the fine weight over every non-distinguished site for each coarse configuration."""
    others = [i for i in range(fine.tau) if i not in distinguished]
    result = np.zeros((site.order,) * coarse_tau)
    for coarse_labels in itertools.product(range(site.order), repeat=coarse_tau):
        total = 0.0
        for labels in itertools.product(range(site.order), repeat=len(others)):
            config = np.zeros(fine.tau, dtype=int)
            config[list(distinguished)] = coarse_labels
            config[others] = labels
            base = np.prod(site.weights[list(labels)])
            total += base * action.weight(fine, site, site.nodes[config][None, :])[0]
        result[coarse_labels] = total
    return result


def test_unit_weight_maps_to_unit(site, coarse):
    table = conditional_expectation(site, coarse, K, None)
    assert isinstance(table, ProductTable)
    np.testing.assert_allclose(table.to_dense(), np.ones((2, 2, 2)))


def test_single_factors_at_and_off_the_distinguished_site(site, coarse):
    sigma = observables.field()
    at_center = conditional_expectation(site, coarse, K, LatticeObservable.single((4,), sigma))
    expected = np.broadcast_to(np.array([-1.0, 1.0])[None, :, None], (2, 2, 2))
    np.testing.assert_allclose(at_center.to_dense(), expected, atol=1e-15)

    off_center = conditional_expectation(site, coarse, K, LatticeObservable.single((5,), sigma))
    np.testing.assert_allclose(off_center.to_dense(), np.full((2, 2, 2), 0.4), atol=1e-15)


def generating_set(lattice, site):
    singles = [
        LatticeObservable.single(lattice.cube_at(i), a)
        for i in range(lattice.tau)
        for a in (observables.field(), observables.projection_onto([1.0]))
    ]
    pairs = [singles[0] * singles[3], singles[2] * singles[5], singles[1] * singles[-1]]
    return [LatticeObservable.unit(), *singles, *pairs]


def test_adjointness_against_brute_force(site, coarse):
    fine_spec = coarse.refined(K)
    coarse_lattice = TorusLattice(coarse)
    fine_lattice = TorusLattice(fine_spec)
    fine_state = GibbsState(fine_spec, site)
    fine_set = generating_set(fine_lattice, site)
    for b in fine_set[:7] + fine_set[-3:]:
        e_b = conditional_expectation(site, coarse, K, b)
        for a in generating_set(coarse_lattice, site):
            pulled = pullback_observable(DECIMATION, coarse, a, K)
            left = complex(fine_state.expectation(b * pulled).value)
            right = e_b.integrate(site.weights, a.insertions(coarse_lattice, site)).to_number()
            assert abs(left - right) <= 1e-12, (b.name, a.name)


def test_sums_and_composed_observables(site, coarse):
    a = LatticeObservable.single((1,), observables.field())
    b = LatticeObservable.single((4,), observables.field())
    total = conditional_expectation(site, coarse, K, ObservableSum((a, b)))
    separate = (
        conditional_expectation(site, coarse, K, a).to_dense()
        + conditional_expectation(site, coarse, K, b).to_dense()
    )
    np.testing.assert_allclose(total.to_dense(), separate, atol=1e-15)

    composed = ComposedObservable("sum", lambda values: values.sum(axis=-1), (1, 4))
    np.testing.assert_allclose(
        conditional_expectation(site, coarse, K, composed).to_dense(), separate, atol=1e-15
    )


def test_ultra_local_effective_action(site, coarse):
    w = SiteObservable("w", table=np.array([0.4, 1.0]))
    gamma = 0.3 * 0.4 + 0.7
    k = RefinementStep(1, 1)
    result = effective_action(site, ActionFamily.constant(UltraLocalAction(w)), coarse, k)
    assert result.is_factorized
    labels = np.array(list(itertools.product(range(2), repeat=3)))
    expected = np.prod(w.table[labels], axis=-1) * gamma ** (coarse.refined(k).tau - coarse.tau)
    np.testing.assert_allclose(result.values().ravel(), expected, rtol=1e-12)


def test_nearest_neighbour_effective_action_matches_brute_force(site, coarse):
    action = FaceCouplingAction(PairWeight.ising(0.4))
    result = effective_action(site, ActionFamily.constant(action), coarse, K)
    assert isinstance(result.table, ChainTable)
    fine = TorusLattice(coarse.refined(K))
    expected = brute_effective(action, fine, site, [1, 4, 7], 3)
    np.testing.assert_allclose(result.values(), expected, rtol=1e-12)


def test_exterior_sites_are_integrated(site, coarse):
    action = FaceCouplingAction(PairWeight.ising(0.25))
    k = RefinementStep(0, 1)
    result = effective_action(site, ActionFamily.constant(action), coarse, k)
    fine = TorusLattice(coarse.refined(k))
    expected = brute_effective(action, fine, site, [0, 1, 2], 3)
    np.testing.assert_allclose(result.values(), expected, rtol=1e-12)


def test_effective_action_is_positive_for_positive_weights(site):
    plane = LatticeSpec(3, 2, ScalePair(0, 1))
    w = SiteObservable("w", table=np.array([0.2, 0.9]))
    result = effective_action(site, ActionFamily.constant(UltraLocalAction(w)), plane, K)
    assert np.all(result.values() > 0)


def test_enumeration_beyond_cap_points_to_sampling(site, coarse):
    composed = ComposedObservable("first", lambda values: values[:, 0], (0,))
    with pytest.raises(ConditionalCapacityError) as excinfo:
        conditional_expectation(site, coarse, K, composed, cap=1 << 6)
    assert excinfo.value.grid_size == 2**9
    assert "sampled" in excinfo.value.message


def test_tower_property_for_random_tabulated_action(site, coarse):
    rng = np.random.default_rng(5)
    k = RefinementStep(2, 0)
    overrides = {i: rng.uniform(0.2, 1.5, size=(2, 2)) for i in range(27)}
    family = ActionFamily.constant(TabulatedAction(PairWeight.ising(0.3), overrides))
    defect = tower_property_check(site, family, coarse, RefinementStep(1, 0), k)
    assert defect.k0 == (1, 0)
    assert defect.relative_defect <= 1e-12


def test_tower_property_trivial_cases(site, coarse):
    k = RefinementStep(2, 1)
    unit = tower_property_check(site, ActionFamily.constant(None), coarse, RefinementStep(1, 0), k)
    assert unit.defect == 0.0
    w = SiteObservable("w", table=np.array([0.5, 1.0]))
    family = ActionFamily.constant(UltraLocalAction(w))
    ultra = tower_property_check(site, family, coarse, RefinementStep(1, 1), k)
    assert ultra.relative_defect <= 1e-13


def test_tower_property_rejects_larger_intermediate_step(site, coarse):
    with pytest.raises(ValueError):
        tower_property_check(
            site, ActionFamily.constant(None), coarse, RefinementStep(2, 0), RefinementStep(1, 0)
        )
