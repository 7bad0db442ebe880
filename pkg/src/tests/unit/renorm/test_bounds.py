import dataclasses

import numpy as np
import pytest

from src.action.coupling import CouplingFamily, ExpCouplingFamily, GenericCoupling
from src.lattice.types import LatticeSpec, RefinementStep, ScalePair
from src.renorm.bounds import exp_coupling_conditions, face_integrals, isr_bounds
from src.renorm.exceptions import KernelError, RenormError
from src.renorm.types import BoundMethod, UltraLocalFamily
from src.sitespace.space import finite_spin, unit_interval
from src.sitespace.types import SiteObservable

K_RANGE = (RefinementStep(0, 0), RefinementStep(1, 0), RefinementStep(0, 1))


@pytest.fixture
def site():
    return unit_interval()


@pytest.fixture
def chain():
    return LatticeSpec(3, 1, ScalePair(0, 1))


def test_constant_profile_gives_closed_form(site, chain):
    bounds = isr_bounds(ExpCouplingFamily.affine(1.0, 0.0, d=1), chain, site, K_RANGE)
    expected = (np.e**2 - 1.0) / 2.0
    assert bounds.method is BoundMethod.ANALYTIC
    assert bounds.I == pytest.approx(expected, rel=1e-14)
    assert bounds.S == pytest.approx(expected, rel=1e-14)
    # sup of h(u, s) = exp(u) over u in [0, 1]
    assert bounds.normalization == pytest.approx(np.e)


def test_constant_kernel_collapses_R(site, chain):
    bounds = isr_bounds(ExpCouplingFamily.affine(1.0, 0.0, d=1), chain, site, K_RANGE)
    assert bounds.I_normalized == pytest.approx(bounds.S_normalized)
    assert bounds.log_R == pytest.approx(-chain.tau * np.log(bounds.S_normalized), rel=1e-12)
    assert bounds.R >= 1.0
    assert bounds.is_finite


def test_grid_search_matches_monotone_extrema(site, chain):
    analytic_family = ExpCouplingFamily.affine(1.0, 1.0, d=1)
    grid_family = dataclasses.replace(analytic_family, monotone=False)
    analytic = isr_bounds(analytic_family, chain, site, K_RANGE)
    grid = isr_bounds(grid_family, chain, site, K_RANGE)
    assert grid.method is BoundMethod.GRID
    assert analytic.I == pytest.approx((np.e**2 - 1.0) / 2.0, rel=1e-14)
    assert analytic.S == pytest.approx((np.e**4 - 1.0) / 4.0, rel=1e-14)
    assert grid.I == pytest.approx(analytic.I, rel=1e-6)
    assert grid.S == pytest.approx(analytic.S, rel=1e-6)
    assert grid.normalization == pytest.approx(analytic.normalization, rel=1e-12)


def test_grid_refinement_finds_interior_extremum(site, chain):
    # F is largest at s = 0.3 on every face, which is not a grid point
    coupling = GenericCoupling(
        "bump", lambda u, s: np.exp(-((s - 0.3) ** 2) * (1.0 + u)), face_order=8
    )
    family = CouplingFamily.constant(coupling, d=1)
    coarse = isr_bounds(family, chain, site, K_RANGE, grid_points=5, refine=False)
    refined = isr_bounds(family, chain, site, K_RANGE, grid_points=5, refine=True)
    exact = face_integrals(coupling, site, np.array([[0.3, 0.3]]))[0]
    assert refined.S >= coarse.S
    assert abs(refined.S - exact) < abs(coarse.S - exact)


def test_ultra_local_bounds(chain):
    site = finite_spin()
    w = SiteObservable("w", table=np.array([0.3, 0.6]))
    bounds = isr_bounds(UltraLocalFamily.constant(w), chain, site, K_RANGE)
    assert bounds.method is BoundMethod.ULTRA_LOCAL
    assert bounds.I == bounds.S == pytest.approx(0.45)
    assert bounds.S_normalized == pytest.approx(0.75)
    assert bounds.R == pytest.approx(0.75 ** (-chain.tau))


def test_profile_below_one_is_rejected(site, chain):
    with pytest.raises(KernelError):
        isr_bounds(ExpCouplingFamily.affine(0.5, 0.0, d=1), chain, site, K_RANGE)


def test_dimension_mismatch_is_rejected(site, chain):
    with pytest.raises(RenormError):
        isr_bounds(ExpCouplingFamily.affine(1.0, 0.0, d=2), chain, site, K_RANGE)


def test_conditions_for_constant_profile(chain):
    diagnostics = exp_coupling_conditions(ExpCouplingFamily.affine(1.0, 0.0, d=1), chain, K_RANGE)
    assert [row.gap for row in diagnostics.rows] == [0.0, 0.0, 0.0]
    assert diagnostics.log_S_partial == pytest.approx(0.0)
    assert diagnostics.c == pytest.approx(2.0)
    assert diagnostics.c_exceeds_one
    expected = chain.tau * (np.log(2.0) - np.log(np.expm1(2.0)))
    assert diagnostics.log_bound == pytest.approx(expected)
    assert diagnostics.note is None


def test_conditions_flag_unconverged_profiles(chain):
    diagnostics = exp_coupling_conditions(ExpCouplingFamily.affine(1.0, 1.0, d=1), chain, K_RANGE)
    assert diagnostics.last_gap == pytest.approx(2.0)
    assert diagnostics.note is not None
    fine_tau = chain.refined(RefinementStep(1, 0)).tau
    expected = fine_tau * (np.log(np.expm1(4.0)) - np.log(np.expm1(2.0)))
    assert diagnostics.log_S_partial == pytest.approx(expected)
