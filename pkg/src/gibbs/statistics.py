"""Error analysis for Monte Carlo series and correlation-length fits."""

import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

from .exceptions import FitError
from .types import CorrelationFit

logger = logging.getLogger(__name__)

SLOPE_TOLERANCE = 1e-12
WINDOW_FACTOR = 6.0


def block_means(samples: np.ndarray, n_blocks: int) -> np.ndarray:
    """Means over ``n_blocks`` contiguous blocks; trailing samples are dropped.

    Args:
        samples: Series of shape (S,) or (S, k)

    Returns:
        Array of shape (n_blocks, k)
    """
    samples = np.asarray(samples)
    if samples.ndim == 1:
        samples = samples[:, None]
    size = samples.shape[0] // n_blocks
    if size == 0:
        raise ValueError(f"{samples.shape[0]} samples cannot fill {n_blocks} blocks")
    trimmed = samples[: size * n_blocks]
    return trimmed.reshape(n_blocks, size, -1).mean(axis=1)


def jackknife(
    blocks: np.ndarray, statistic: Optional[Callable[[np.ndarray], complex]] = None
) -> Tuple[complex, float]:
    """Jackknife estimate and standard error of ``statistic`` of block means.

    Args:
        blocks: Block means, shape (B, k)
        statistic: Function of a mean vector (k,); defaults to its first entry

    Returns:
        (estimate on the full mean, jackknife standard error)
    """
    blocks = np.asarray(blocks)
    if blocks.ndim == 1:
        blocks = blocks[:, None]
    count = blocks.shape[0]
    fn = statistic or (lambda mean: mean[0])
    total = blocks.sum(axis=0)
    leave_one_out = np.array([fn((total - blocks[i]) / (count - 1)) for i in range(count)])
    centre = leave_one_out.mean()
    error = np.sqrt((count - 1) / count * np.sum(np.abs(leave_one_out - centre) ** 2))
    return fn(total / count), float(error)


def integrated_autocorrelation_time(series: np.ndarray) -> float:
    """Windowed τ_int = ½ + Σ_{t≤W} ρ(t) with the self-consistent window W ≥ 6τ_int."""
    series = np.asarray(series, dtype=float)
    n = series.shape[0]
    centred = series - series.mean()
    variance = float(np.dot(centred, centred)) / n
    if n < 2 or variance == 0.0:
        return 0.5
    size = 1 << int(np.ceil(np.log2(2 * n)))
    spectrum = np.fft.rfft(centred, size)
    autocovariance = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n] / n
    rho = autocovariance / autocovariance[0]
    tau = 0.5
    for window in range(1, n):
        tau += rho[window]
        if window >= WINDOW_FACTOR * tau:
            break
    return float(max(tau, 0.5))


def correlation_length_fit(
    points: Sequence[Tuple[float, float]], refine: bool = False
) -> CorrelationFit:
    """Fit |c(r)| = K·exp(−r/ℓ) to (distance, |correlation|) points.

    Args:
        points: (distance, correlation) pairs
        refine: Polish the log-linear fit by nonlinear least squares on |c|

    Returns:
        Fitted constants with RMS residual of the log fit

    Raises:
        FitError: If fewer than two usable points or a single distance remain
    """
    kept = [(float(r), float(c)) for r, c in points if c > 0 and np.isfinite(c)]
    dropped = [(float(r), float(c)) for r, c in points if not (c > 0 and np.isfinite(c))]
    if dropped:
        logger.info(f"Dropped {len(dropped)} non-positive correlation points")
    if len(kept) < 2:
        raise FitError("Correlation-length fit needs at least two positive points")
    distances = np.array([r for r, _ in kept])
    logs = np.log([c for _, c in kept])
    if np.unique(distances).shape[0] < 2:
        raise FitError("Correlation-length fit needs at least two distinct distances")

    slope, intercept = np.polyfit(distances, logs, 1)
    residual = float(np.sqrt(np.mean((logs - (intercept + slope * distances)) ** 2)))
    amplitude = float(np.exp(intercept))
    if slope > -SLOPE_TOLERANCE:
        return CorrelationFit(
            K_fit=amplitude,
            ell_fit=float("inf"),
            residual=residual,
            non_decaying=True,
            points_used=len(kept),
            dropped=dropped,
        )
    length = float(-1.0 / slope)
    if refine:
        try:
            (amplitude, length), _ = curve_fit(
                lambda r, k, ell: k * np.exp(-r / ell),
                distances,
                np.exp(logs),
                p0=(amplitude, length),
            )
        except RuntimeError as e:
            logger.warning(f"Nonlinear refinement failed, keeping log fit: {e}")
    return CorrelationFit(
        K_fit=float(amplitude),
        ell_fit=float(length),
        residual=residual,
        points_used=len(kept),
        dropped=dropped,
    )
