import numpy as np
import pytest

from src.gibbs.exceptions import FitError
from src.gibbs.statistics import (
    block_means,
    correlation_length_fit,
    integrated_autocorrelation_time,
    jackknife,
)


def test_block_means_drop_trailing_samples():
    blocks = block_means(np.arange(10.0), 3)
    assert blocks.shape == (3, 1)
    np.testing.assert_allclose(blocks[:, 0], [1.0, 4.0, 7.0])
    with pytest.raises(ValueError):
        block_means(np.arange(2.0), 3)


def test_jackknife_of_mean_matches_standard_error():
    rng = np.random.default_rng(3)
    samples = rng.standard_normal(64)
    value, error = jackknife(samples[:, None])
    assert value == pytest.approx(samples.mean())
    assert error == pytest.approx(samples.std(ddof=1) / np.sqrt(64), rel=1e-10)


def test_jackknife_of_nonlinear_statistic():
    blocks = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0]])
    value, error = jackknife(blocks, lambda mean: mean[0] * mean[1])
    assert value == pytest.approx(4.0 * 5.0)
    assert error > 0.0


def test_autocorrelation_time_of_independent_and_correlated_series():
    rng = np.random.default_rng(5)
    white = rng.standard_normal(20000)
    assert integrated_autocorrelation_time(white) == pytest.approx(0.5, abs=0.1)

    # AR(1) with φ=0.8 has τ_int = ½(1+φ)/(1-φ) = 4.5
    ar = np.empty(20000)
    ar[0] = 0.0
    for t in range(1, ar.shape[0]):
        ar[t] = 0.8 * ar[t - 1] + rng.standard_normal()
    assert integrated_autocorrelation_time(ar) == pytest.approx(4.5, rel=0.25)
    assert integrated_autocorrelation_time(np.ones(50)) == 0.5


def test_fit_recovers_exponential_decay():
    points = [(r, 2.0 * np.exp(-r / 1.7)) for r in (1.0, 2.0, 3.0, 4.0)]
    fit = correlation_length_fit(points)
    assert fit.K_fit == pytest.approx(2.0)
    assert fit.ell_fit == pytest.approx(1.7)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.points_used == 4


def test_fit_with_refinement_keeps_exact_solution():
    points = [(r, 0.5 * np.exp(-r / 0.8)) for r in (0.5, 1.0, 1.5)]
    fit = correlation_length_fit(points, refine=True)
    assert fit.ell_fit == pytest.approx(0.8, rel=1e-6)


def test_constant_correlations_are_non_decaying():
    fit = correlation_length_fit([(1.0, 0.3), (2.0, 0.3), (3.0, 0.3)])
    assert fit.non_decaying
    assert fit.ell_fit == float("inf")


def test_non_positive_points_are_dropped():
    points = [(1.0, np.exp(-1.0)), (2.0, 0.0), (3.0, np.exp(-3.0)), (4.0, -0.1)]
    fit = correlation_length_fit(points)
    assert fit.points_used == 2
    assert fit.dropped == [(2.0, 0.0), (4.0, -0.1)]
    assert fit.ell_fit == pytest.approx(1.0)


def test_degenerate_fits_raise():
    with pytest.raises(FitError):
        correlation_length_fit([(1.0, 0.5)])
    with pytest.raises(FitError):
        correlation_length_fit([(1.0, 0.5), (1.0, 0.4)])
    with pytest.raises(FitError):
        correlation_length_fit([(1.0, 0.5), (2.0, 0.0), (3.0, -1.0)])
