"""Stock site observables."""

from typing import Sequence

import numpy as np

from .types import SiteObservable


def unit() -> SiteObservable:
    """The identity-one observable a ≡ 1."""
    return SiteObservable("1", fn=lambda x: np.ones_like(x, dtype=float), is_projection=True)


def field() -> SiteObservable:
    """a(x) = x (the spin / field value itself)."""
    return SiteObservable("x", fn=lambda x: np.asarray(x, dtype=float))


def power(exponent: int) -> SiteObservable:
    return SiteObservable(f"x^{exponent}", fn=lambda x: np.asarray(x, dtype=float) ** exponent)


def exponential(rate: float = 1.0) -> SiteObservable:
    return SiteObservable(f"exp({rate}x)", fn=lambda x: np.exp(rate * np.asarray(x, dtype=float)))


def indicator(lower: float, upper: float) -> SiteObservable:
    """Projection onto values in [lower, upper]."""
    return SiteObservable(
        f"1[{lower},{upper}]",
        fn=lambda x: ((x >= lower) & (x <= upper)).astype(float),
        is_projection=True,
    )


def projection_onto(labels: Sequence[float]) -> SiteObservable:
    """Projection onto a set of finite-spin labels."""
    chosen = np.asarray(labels, dtype=float)
    return SiteObservable(
        f"P{sorted(chosen.tolist())}",
        fn=lambda x: np.isin(np.asarray(x, dtype=float), chosen).astype(float),
        is_projection=True,
    )


def spin_up() -> SiteObservable:
    """P = (1 + σ)/2 on ±1 spins."""
    return SiteObservable(
        "(1+s)/2", fn=lambda x: (1.0 + np.asarray(x, dtype=float)) / 2.0, is_projection=True
    )
