import numpy as np
import pytest

from src.duality.correlation import correlation_sweep, projection_correlation_test
from src.duality.exceptions import CorrelationQueryError
from src.duality.types import CorrelationSetQuery
from src.lattice.types import LatticeSpec, RefinementStep, ScalePair
from src.sitespace import observables
from src.sitespace.space import finite_spin
from src.sitespace.types import PairWeight, SiteObservable
from src.tests.oracles import ising_insertion

UP = (0.0, 1.0)


def connected_oracle(coupling, length, distance):
    """⟨P₀P_r⟩ − ⟨P₀⟩⟨P_r⟩ for P = (1+σ)/2 from the transfer matrix."""
    joint = ising_insertion(coupling, length, {0: UP, distance: UP})
    single = ising_insertion(coupling, length, {0: UP})
    return joint - single * single


@pytest.fixture
def site():
    return finite_spin()


@pytest.fixture
def chain():
    return LatticeSpec(3, 1, ScalePair(0, 1))


def query(chain, p1=None, p2=None, k=RefinementStep(0, 0), c=0.05):
    return CorrelationSetQuery(
        c=c,
        first=(0,),
        second=(1,),
        p1=p1 or observables.spin_up(),
        p2=p2 or observables.spin_up(),
        spec=chain,
        k=k,
    )


def test_ising_neighbours_are_correlated(site, chain):
    report = projection_correlation_test(query(chain), PairWeight.ising(1.0), site)
    assert report.correlation == pytest.approx(connected_oracle(1.0, 3, 1), abs=1e-12)
    assert abs(report.correlation) > 0.05
    assert report.member
    assert report.identities_hold()
    assert report.translations_checked == 3


def test_decimated_pair_on_finer_lattice(site, chain):
    report = projection_correlation_test(
        query(chain, k=RefinementStep(1, 0)), PairWeight.ising(1.0), site
    )
    assert report.fine_cubes == [(1,), (4,)]
    assert report.correlation == pytest.approx(connected_oracle(1.0, 9, 3), abs=1e-12)
    assert report.translation_invariant


def test_unit_projection_is_never_a_member(site, chain):
    report = projection_correlation_test(
        query(chain, p2=observables.unit()), PairWeight.ising(1.0), site
    )
    assert abs(report.correlation) <= 1e-14
    assert not report.member


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_identities_hold_for_random_positive_weights(site, chain, seed):
    rng = np.random.default_rng(seed)
    root = rng.uniform(0.1, 2.0, size=(2, 2))
    w = PairWeight.tabulated(root + root.T)
    p1 = observables.projection_onto([1.0])
    p2 = observables.projection_onto([-1.0])
    report = projection_correlation_test(query(chain, p1, p2, c=0.01), w, site)
    assert report.identities_hold(atol=1e-12)
    assert report.translation_defect <= 1e-12


def test_threshold_outside_range_is_rejected(chain):
    for c in (0.0, 2.0, -0.3):
        with pytest.raises(CorrelationQueryError):
            query(chain, c=c)


def test_non_projections_are_rejected(site, chain):
    with pytest.raises(CorrelationQueryError):
        query(chain, p1=observables.field())
    half = SiteObservable("half", table=np.array([0.5, 1.0]))
    with pytest.raises(CorrelationQueryError):
        projection_correlation_test(query(chain, p1=half), PairWeight.ising(0.5), site)


def test_sweep_reports_best_uniform_bound(site, chain):
    k_range = (RefinementStep(0, 0), RefinementStep(1, 0))
    sweep = correlation_sweep(query(chain), PairWeight.ising, [0.1, 0.5, 1.0], site, k_range)
    assert sweep.k_range == [(0, 0), (1, 0)]
    assert sweep.best_parameter == 1.0
    expected = min(connected_oracle(1.0, 3, 1), connected_oracle(1.0, 9, 3))
    assert sweep.largest_certified_c == pytest.approx(expected, abs=1e-12)
    assert sweep.member_uniformly
    assert sweep.rows[0].uniform_lower_bound < sweep.rows[-1].uniform_lower_bound


def test_sweep_needs_refinements(site, chain):
    with pytest.raises(ValueError):
        correlation_sweep(query(chain), PairWeight.ising, [1.0], site, ())
