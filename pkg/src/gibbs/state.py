"""Gibbs states η = z⁻¹⟨ω_n, v_n ·⟩ with exact and Monte Carlo estimators."""

import logging
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

from src.action.actions import LatticeAction
from src.common.types import Estimate
from src.lattice.geometry import TorusLattice
from src.lattice.types import LatticeSpec
from src.sitespace.types import SiteObservable, SiteSpace

from .enumeration import check_capacity, iter_index_chunks
from .exceptions import EstimatorError, PartitionFunctionError
from .metropolis import MetropolisRun, MetropolisSampler, chain_generators, sample_base
from .statistics import block_means, integrated_autocorrelation_time, jackknife
from .tables import ProductTable, ScaledValue, WeightTable, structured_table
from .types import (
    ComposedObservable,
    Estimator,
    EstimatorKind,
    ExactEstimator,
    LatticeObservable,
    MetropolisEstimator,
    Observable,
    ObservableSum,
)

logger = logging.getLogger(__name__)


class GibbsState:
    """State η_(ω,v,n) on a torus lattice.

    Exact evaluation uses the product or chain form of v_n when available and
    streams the full node grid otherwise. Monte Carlo evaluation runs the
    configured Metropolis chains once and reuses them for every observable.
    """

    def __init__(
        self,
        spec: LatticeSpec,
        site: SiteSpace,
        action: Optional[LatticeAction] = None,
        estimator: Optional[Estimator] = None,
    ) -> None:
        """Initialize state.

        Args:
            spec: Lattice at scale n
            site: Single-site space with base state ω₀
            action: Weight v_n; ``None`` gives the base product state ω_n
            estimator: Exact (default) or Metropolis
        """
        self.spec = spec
        self.lattice = TorusLattice(spec)
        self.site = site
        self.action = action
        self.estimator: Estimator = estimator or ExactEstimator()
        self._table: Optional[WeightTable] = None
        self._table_built = False
        self._run: Optional[MetropolisRun] = None
        self._normalizer: Optional[ScaledValue] = None

    def __repr__(self) -> str:
        name = "unit" if self.action is None else self.action.name
        return f"GibbsState({self.lattice!r}, action={name}, {self.estimator.kind.value})"

    @property
    def is_exact(self) -> bool:
        return self.estimator.kind is EstimatorKind.EXACT

    def weight_table(self) -> Optional[WeightTable]:
        """Structured node table of v_n, or ``None`` when only enumeration applies."""
        if not self._table_built:
            self._table = structured_table(self.lattice, self.site, self.action)
            self._table_built = True
        return self._table

    # Partition function

    def partition_function(self) -> Estimate:
        """z = ⟨ω_n, v_n⟩.

        Returns:
            Exact value, or the base-sampled Monte Carlo mean with its error

        Raises:
            PartitionFunctionError: If z is not strictly positive
            ExactCapacityError: If exact enumeration exceeds the cap
        """
        if not self.is_exact:
            return self._sampled_partition_function()
        return Estimate(value=float(np.real(self._exact_normalizer().to_number())))

    def log_partition_function(self) -> float:
        """log z, exact estimator only; finite even when z itself overflows."""
        if not self.is_exact:
            estimate = self._sampled_partition_function()
            return float(np.log(estimate.real))
        return self._exact_normalizer().log_abs()

    def _exact_normalizer(self) -> ScaledValue:
        if self._normalizer is None:
            table = self.weight_table()
            if table is not None:
                normalizer = table.integrate(self.site.weights)
            else:
                normalizer = ScaledValue(self._enumerate(None)[1], 0.0)
            if np.iscomplexobj(normalizer.value) or not normalizer.value > 0:
                raise PartitionFunctionError(
                    f"Partition function of {self!r} is not positive: {normalizer.to_number()}",
                    float(np.real(normalizer.to_number())),
                )
            self._normalizer = normalizer
        return self._normalizer

    def _sampled_partition_function(self) -> Estimate:
        settings = self._mc_settings()
        rng = chain_generators(settings.seed, settings.n_chains)[-1]
        count = settings.measure_sweeps * settings.n_chains
        configs = sample_base(self.site, rng, (count, self.lattice.tau))
        weights = (
            np.ones(count)
            if self.action is None
            else self.action.weight(self.lattice, self.site, configs)
        )
        value, error = jackknife(block_means(weights, settings.n_blocks))
        if not np.real(value) > 0:
            raise PartitionFunctionError(
                f"Sampled partition function is {value}", float(np.real(value))
            )
        return Estimate(value=float(np.real(value)), stderr=error)

    # Expectations

    def expectation(self, obs: Observable) -> Estimate:
        """z⁻¹⟨ω_n, v_n·obs⟩.

        Raises:
            PartitionFunctionError: If z is not strictly positive
            ExactCapacityError: If exact enumeration exceeds the cap
        """
        if not self.is_exact:
            return self._sampled_expectation(obs)
        return Estimate(value=self._exact_expectation(obs))

    def correlation(self, a: LatticeObservable, b: LatticeObservable) -> Estimate:
        """⟨ab⟩ − ⟨a⟩⟨b⟩."""
        if self.is_exact:
            value = (
                self._exact_expectation(a * b)
                - self._exact_expectation(a) * self._exact_expectation(b)
            )
            return Estimate(value=value)
        return self._sampled_statistic(
            [a * b, a, b], lambda mean: mean[0] - mean[1] * mean[2]
        )

    def correlation_at(
        self,
        first: Tuple[int, ...],
        a: SiteObservable,
        second: Tuple[int, ...],
        b: SiteObservable,
    ) -> Estimate:
        """Connected correlation of a at ``first`` with b at ``second``."""
        return self.correlation(
            LatticeObservable.single(first, a), LatticeObservable.single(second, b)
        )

    def _exact_expectation(self, obs: Observable) -> complex:
        table = self.weight_table()
        if isinstance(obs, ObservableSum):
            return _clean(sum(self._exact_expectation(term) for term in obs.terms))
        if isinstance(obs, LatticeObservable) and table is not None:
            numerator = table.integrate(self.site.weights, obs.insertions(self.lattice, self.site))
            return numerator.ratio(self._exact_normalizer())
        if isinstance(obs, ComposedObservable) and isinstance(table, ProductTable):
            return self._product_support_expectation(table, obs)
        numerator, normalizer = self._enumerate(obs)
        if not normalizer > 0:
            raise PartitionFunctionError(
                f"Partition function of {self!r} is not positive: {normalizer}", float(normalizer)
            )
        return _clean(numerator / normalizer)

    def _product_support_expectation(self, table: ProductTable, obs: ComposedObservable) -> complex:
        support = np.asarray(obs.support, dtype=int)
        cap = self._exact_settings().cap
        check_capacity(self.site.order, support.size, cap)
        local = table.factors[support] * self.site.weights
        numerator = 0.0 + 0.0j
        normalizer = 0.0
        for indices in iter_index_chunks(self.site.order, support.size):
            weights = np.prod(local[np.arange(support.size)[None, :], indices], axis=-1)
            values = np.asarray(obs.fn(self.site.nodes[indices]))
            numerator += np.sum(weights * values)
            normalizer += float(np.sum(weights))
        if not normalizer > 0:
            raise PartitionFunctionError("Vanishing local normalizer", normalizer)
        return _clean(numerator / normalizer)

    def _enumerate(self, obs: Optional[Observable]) -> Tuple[complex, float]:
        """Stream the full node grid; returns (Σ base·v·obs, Σ base·v)."""
        settings = self._exact_settings()
        check_capacity(self.site.order, self.lattice.tau, settings.cap)
        table = self.weight_table()
        numerator = 0.0 + 0.0j
        normalizer = 0.0
        for indices in iter_index_chunks(self.site.order, self.lattice.tau, settings.chunk_size):
            configs = self.site.nodes[indices]
            base = np.prod(self.site.weights[indices], axis=-1)
            if table is not None:
                weights = base * table.evaluate(indices)
            elif self.action is None:
                weights = base
            else:
                weights = base * self.action.weight(self.lattice, self.site, configs)
            normalizer += float(np.sum(np.real(weights)))
            if obs is not None:
                numerator += np.sum(weights * obs.evaluate(self.lattice, self.site, configs))
        return numerator, normalizer

    # Monte Carlo

    def samples(self) -> MetropolisRun:
        """Metropolis run shared by all sampled estimates of this state."""
        if self._run is None:
            settings = self._mc_settings()
            logger.debug(f"Running {settings.n_chains} Metropolis chains for {self!r}")
            self._run = MetropolisSampler(self.lattice, self.site, self.action, settings).run()
        return self._run

    def _sampled_expectation(self, obs: Observable) -> Estimate:
        return self._sampled_statistic([obs], lambda mean: mean[0])

    def _sampled_statistic(
        self, observables: Iterable[Observable], statistic: Callable[[np.ndarray], complex]
    ) -> Estimate:
        settings = self._mc_settings()
        run = self.samples()
        chains, sweeps, tau = run.samples.shape
        flat = run.samples.reshape(chains * sweeps, tau)
        series = np.stack(
            [np.asarray(o.evaluate(self.lattice, self.site, flat)) for o in observables], axis=-1
        )
        value, error = jackknife(block_means(series, settings.n_blocks), statistic)
        per_chain = series[:, 0].reshape(chains, sweeps)
        tau_int = float(
            np.mean([integrated_autocorrelation_time(np.real(chain)) for chain in per_chain])
        )
        diagnostics = run.diagnostics.as_dict()
        diagnostics["tau_int"] = tau_int
        return Estimate(value=_clean(value), stderr=error, tau_int=tau_int, diagnostics=diagnostics)

    def _mc_settings(self) -> MetropolisEstimator:
        if not isinstance(self.estimator, MetropolisEstimator):
            raise EstimatorError("State is not configured for Monte Carlo estimation")
        return self.estimator

    def _exact_settings(self) -> ExactEstimator:
        if isinstance(self.estimator, ExactEstimator):
            return self.estimator
        return ExactEstimator()


def _clean(value: complex) -> complex:
    value = complex(value)
    return value if value.imag != 0 else value.real  # type: ignore[return-value]
