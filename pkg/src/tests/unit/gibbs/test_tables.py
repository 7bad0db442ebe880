import itertools

import numpy as np
import pytest

from src.action.actions import FaceCouplingAction, ScaledAction, UltraLocalAction
from src.gibbs.enumeration import check_capacity, iter_index_chunks
from src.gibbs.exceptions import ExactCapacityError, GibbsError
from src.gibbs.tables import ChainTable, DenseTable, ProductTable, ScaledValue, structured_table
from src.lattice.geometry import TorusLattice
from src.lattice.types import LatticeSpec, ScalePair
from src.sitespace.space import finite_spin
from src.sitespace.types import PairWeight, SiteObservable


@pytest.fixture
def rng():
    return np.random.default_rng(11)


@pytest.fixture
def weights():
    return np.array([0.2, 0.5, 0.3])


def brute_integral(dense, weights, insertions=None):
    tau = dense.ndim
    total = 0.0
    for labels in itertools.product(range(dense.shape[0]), repeat=tau):
        term = dense[labels]
        for i, a in enumerate(labels):
            term *= weights[a] * (1.0 if insertions is None else insertions[i, a])
        total += term
    return total


def test_index_chunks_cover_grid_in_order():
    chunks = list(iter_index_chunks(3, 4, chunk_size=10))
    stacked = np.concatenate(chunks)
    assert stacked.shape == (81, 4)
    assert [tuple(row) for row in stacked] == list(itertools.product(range(3), repeat=4))


def test_capacity_check():
    assert check_capacity(2, 10, 1 << 10) == 1024
    with pytest.raises(ExactCapacityError) as excinfo:
        check_capacity(2, 11, 1 << 10)
    assert excinfo.value.cap == 1 << 10


def test_chain_table_matches_dense(rng, weights):
    bonds = rng.uniform(0.1, 2.0, size=(4, 3, 3))
    sites = rng.uniform(0.5, 1.5, size=(4, 3))
    chain = ChainTable(bonds, sites, log_scale=0.3)
    dense = chain.to_dense()
    insertions = rng.uniform(-1.0, 1.0, size=(4, 3))

    expected = brute_integral(dense, weights, insertions)
    assert chain.integrate(weights, insertions).to_number() == pytest.approx(expected, rel=1e-12)
    assert DenseTable(dense).integrate(weights, insertions).to_number() == pytest.approx(
        expected, rel=1e-12
    )
    assert chain.sup_norm() == pytest.approx(np.max(np.abs(dense)), rel=1e-12)


def test_product_table_matches_dense(rng, weights):
    factors = rng.uniform(0.0, 1.0, size=(3, 3))
    table = ProductTable(factors, log_scale=-1.0)
    dense = table.to_dense()
    assert table.integrate(weights).to_number() == pytest.approx(brute_integral(dense, weights))
    assert table.sup_norm() == pytest.approx(np.max(dense))


def test_chain_integration_survives_underflow():
    bonds = np.full((200, 2, 2), 1e-5)
    value = ChainTable(bonds).integrate(np.array([0.5, 0.5]))
    # Each step contributes exactly 1e-5 after averaging
    assert value.log_abs() == pytest.approx(200 * np.log(1e-5), rel=1e-12)
    assert value.to_number() == 0.0


def test_scaled_value_ratio_and_zero():
    assert ScaledValue(2.0, 5.0).ratio(ScaledValue(4.0, 5.0)) == pytest.approx(0.5)
    assert ScaledValue(0.0, 3.0).log_abs() == -np.inf
    with pytest.raises(GibbsError):
        ScaledValue(1.0, 0.0).ratio(ScaledValue(0.0, 0.0))


def test_insertion_shape_is_checked():
    with pytest.raises(GibbsError):
        ProductTable.unit(3, 2).integrate(np.array([0.5, 0.5]), np.ones((2, 2)))


def test_structured_table_dispatch():
    site = finite_spin()
    chain = TorusLattice(LatticeSpec(3, 1, ScalePair(0, 1)))
    plane = TorusLattice(LatticeSpec(3, 2, ScalePair(0, 1)))
    coupling = FaceCouplingAction(PairWeight.ising(0.2))
    ultra = UltraLocalAction(SiteObservable("w", table=np.array([0.5, 1.0])))

    assert isinstance(structured_table(chain, site, None), ProductTable)
    assert isinstance(structured_table(plane, site, ultra), ProductTable)
    assert isinstance(structured_table(chain, site, coupling), ChainTable)
    assert structured_table(plane, site, coupling) is None

    scaled = structured_table(chain, site, ScaledAction(coupling, 2.0))
    plain = structured_table(chain, site, coupling)
    assert scaled.log_scale == pytest.approx(plain.log_scale + 2.0)
