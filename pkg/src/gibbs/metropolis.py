"""Single-site Metropolis sampling of v_n · (base product measure)."""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from src.action.actions import LatticeAction
from src.lattice.geometry import TorusLattice
from src.sitespace.types import SiteKind, SiteSpace

from .types import ChainDiagnostics, MetropolisEstimator

logger = logging.getLogger(__name__)

ACCEPTANCE_BOUNDS = (0.05, 0.95)


@dataclass
class MetropolisRun:
    """Measured configurations of all chains, shape (C, S, τ)."""

    samples: np.ndarray
    diagnostics: ChainDiagnostics


def chain_generators(seed: int, n_chains: int) -> List[np.random.Generator]:
    """Per-chain generators derived from the master seed; the extra last one feeds base sampling."""
    children = np.random.SeedSequence(seed).spawn(n_chains + 1)
    return [np.random.default_rng(child) for child in children]


def sample_base(site: SiteSpace, rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    """Independent draws from the base single-site measure."""
    if site.kind is SiteKind.FINITE_SPIN:
        return rng.choice(site.nodes, size=shape, p=site.weights)
    if site.kind is SiteKind.REAL_LINE:
        return rng.standard_normal(size=shape)
    return rng.random(size=shape)


class MetropolisSampler:
    """Vectorised single-site Metropolis across independent chains."""

    def __init__(
        self,
        lattice: TorusLattice,
        site: SiteSpace,
        action: Optional[LatticeAction],
        settings: MetropolisEstimator,
    ) -> None:
        """Initialize sampler.

        Args:
            lattice: Lattice at scale n
            site: Single-site space
            action: Weight v_n, ``None`` for the base state
            settings: Chain counts, sweeps and seed
        """
        self.lattice = lattice
        self.site = site
        self.action = action
        self.settings = settings
        width = settings.proposal_width or site.proposal_width
        self.width = min(width, 1.0) if site.kind is SiteKind.UNIT_INTERVAL else width
        with np.errstate(divide="ignore"):
            self._log_site_weights = np.log(site.weights)

    def _log_base(self, values: np.ndarray) -> np.ndarray:
        if self.site.kind is SiteKind.FINITE_SPIN:
            return self._log_site_weights[self.site.node_index(values)]
        if self.site.kind is SiteKind.REAL_LINE:
            return -0.5 * values**2
        return np.zeros_like(values)

    def _local(self, configs: np.ndarray, index: int) -> np.ndarray:
        base = self._log_base(configs[:, index])
        if self.action is None:
            return base
        return base + self.action.local_log_weight(self.lattice, self.site, configs, index)

    def _propose(self, current: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
        if self.site.kind is SiteKind.FINITE_SPIN:
            labels = np.minimum((uniforms * self.site.order).astype(int), self.site.order - 1)
            return self.site.nodes[labels]
        step = current + self.width * (2.0 * uniforms - 1.0)
        if self.site.kind is SiteKind.UNIT_INTERVAL:
            step = np.where(step < 0.0, -step, step)
            step = np.where(step > 1.0, 2.0 - step, step)
        return step

    def sweep(self, configs: np.ndarray, rngs: List[np.random.Generator]) -> np.ndarray:
        """One sweep over all sites in lexicographic order; returns accepted counts per chain."""
        draws = np.stack([rng.random((2, self.lattice.tau)) for rng in rngs], axis=0)
        accepted = np.zeros(configs.shape[0])
        for index in range(self.lattice.tau):
            old = configs[:, index].copy()
            before = self._local(configs, index)
            configs[:, index] = self._propose(old, draws[:, 0, index])
            with np.errstate(invalid="ignore"):
                delta = np.nan_to_num(self._local(configs, index) - before, nan=0.0)
            keep = np.log(draws[:, 1, index]) < delta
            configs[~keep, index] = old[~keep]
            accepted += keep
        return accepted

    def run(self) -> MetropolisRun:
        """Burn in, then record one configuration per sweep per chain."""
        settings = self.settings
        rngs = chain_generators(settings.seed, settings.n_chains)[: settings.n_chains]
        configs = np.stack([sample_base(self.site, rng, (self.lattice.tau,)) for rng in rngs])
        for _ in range(settings.burn_in_sweeps):
            self.sweep(configs, rngs)

        samples = np.empty((settings.n_chains, settings.measure_sweeps, self.lattice.tau))
        accepted = np.zeros(settings.n_chains)
        for step in range(settings.measure_sweeps):
            accepted += self.sweep(configs, rngs)
            samples[:, step] = configs

        diagnostics = ChainDiagnostics()
        for chain, count in enumerate(accepted):
            rate = float(count / (settings.measure_sweeps * self.lattice.tau))
            diagnostics.acceptance.append(rate)
            if not ACCEPTANCE_BOUNDS[0] <= rate <= ACCEPTANCE_BOUNDS[1]:
                message = f"Chain {chain} acceptance {rate:.3f} outside {ACCEPTANCE_BOUNDS}"
                logger.warning(message)
                diagnostics.warnings.append(message)
        return MetropolisRun(samples, diagnostics)


def metropolis_sample(
    lattice: TorusLattice,
    site: SiteSpace,
    action: Optional[LatticeAction],
    n_sweeps: int,
    seed: int,
    burn_in_sweeps: int = 0,
    proposal_width: Optional[float] = None,
) -> Iterator[np.ndarray]:
    """Stream configurations of a single chain, one per sweep.

    Deterministic given ``seed``.
    """
    settings = MetropolisEstimator(
        seed=seed,
        burn_in_sweeps=burn_in_sweeps,
        measure_sweeps=max(n_sweeps, 2),
        n_chains=1,
        n_blocks=2,
        proposal_width=proposal_width,
    )
    sampler = MetropolisSampler(lattice, site, action, settings)
    rngs = chain_generators(seed, 1)[:1]
    configs = sample_base(site, rngs[0], (1, lattice.tau))
    for _ in range(burn_in_sweeps):
        sampler.sweep(configs, rngs)
    for _ in range(n_sweeps):
        sampler.sweep(configs, rngs)
        yield configs[0].copy()
