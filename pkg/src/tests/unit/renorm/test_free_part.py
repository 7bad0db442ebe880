import numpy as np
import pytest

from src.action.actions import GaussianAction, ScalarAction, UltraLocalAction
from src.action.types import ScalarActionParams
from src.lattice.geometry import TorusLattice
from src.lattice.types import LatticeSpec, ScalePair
from src.renorm.exceptions import FreePartError
from src.renorm.free_part import free_part_quadratic
from src.sitespace.space import finite_spin, real_line
from src.sitespace.types import SiteObservable


@pytest.fixture
def spec():
    return LatticeSpec(3, 1, ScalePair(0, 1))


@pytest.fixture
def site():
    return real_line()


def test_gaussian_weight_recovers_its_matrix(spec, site):
    rng = np.random.default_rng(3)
    root = rng.standard_normal((3, 3))
    m = root @ root.T + 3.0 * np.eye(3)
    free = free_part_quadratic(GaussianAction(m / 2.0), spec, site)
    np.testing.assert_allclose(free.matrix, m / 2.0, atol=1e-6)
    np.testing.assert_allclose(free.matrix, free.matrix.T)


def test_quartic_scalar_model_at_origin(spec, site):
    action = ScalarAction(ScalarActionParams(lambda0=0.0, lambdas=(0.7,)))
    free = free_part_quadratic(action, spec, site)
    np.testing.assert_allclose(free.matrix, 0.7 * np.eye(3), atol=1e-6)


def test_kinetic_term_couples_neighbours(spec, site):
    action = ScalarAction(ScalarActionParams(lambda0=0.5, lambdas=(0.2, 0.1)))
    free = free_part_quadratic(action, spec, site, base_point=1.0)
    # s = ½Σ(u_i+1 − u_i)² + Σ(0.2u² + 0.1u⁴); second derivatives at u ≡ 1
    hessian = np.full((3, 3), -1.0) + np.eye(3) * (3.0 + 0.4 + 1.2)
    np.testing.assert_allclose(free.matrix, 0.5 * hessian, atol=1e-6)
    assert free.base_point == 1.0


def test_unit_weight_has_no_free_part(spec, site):
    free = free_part_quadratic(None, spec, site)
    np.testing.assert_array_equal(free.matrix, np.zeros((3, 3)))


def test_free_part_weight_is_gaussian(spec, site):
    m = np.diag([1.0, 2.0, 3.0])
    free = free_part_quadratic(GaussianAction(m, center=0.5), spec, site, base_point=0.5)
    weight = free.weight()
    configs = np.array([[0.5, 0.5, 0.5], [1.5, 0.5, 0.0]])
    expected = np.exp(-np.array([0.0, 1.0 + 0.0 + 3.0 * 0.25]))
    values = weight.weight(TorusLattice(spec), site, configs)
    np.testing.assert_allclose(values, expected, rtol=1e-6)
    np.testing.assert_allclose(free.quadratic_form(configs - 0.5), -np.log(expected), atol=1e-6)


def test_finite_spins_are_rejected(spec):
    with pytest.raises(FreePartError):
        free_part_quadratic(None, spec, finite_spin())


def test_vanishing_weight_near_base_point_is_rejected(spec, site):
    step = SiteObservable("step", fn=lambda x: (np.asarray(x) > 0).astype(float))
    with pytest.raises(FreePartError):
        free_part_quadratic(UltraLocalAction(step), spec, site)
