"""Multiplicative renormalization 𝐫_ω, seminorm estimates and certificates."""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.action.actions import LatticeAction, ScaledAction
from src.action.exceptions import ActionError
from src.action.types import ActionFamily
from src.common.types import DEFAULT_EXACT_CAP
from src.gibbs.exceptions import PartitionFunctionError
from src.gibbs.state import GibbsState
from src.gibbs.types import Estimator
from src.lattice.types import LatticeSpec, RefinementStep, ScalePair
from src.sitespace.types import SiteSpace

from .bounds import CouplingSource, isr_bounds
from .conditional import conditional_expectation
from .exceptions import VanishingPartitionError
from .types import (
    DEFAULT_K_RANGE,
    CertificateVerdict,
    ISRBounds,
    KNorm,
    RenormCertificate,
    SeminormEstimate,
    k_key,
)

logger = logging.getLogger(__name__)

# A seminorm series whose last increment keeps this share of the first counts as growing
GROWTH_RATIO = 0.5
# Log increments at or below this count as flat
GROWTH_FLOOR = 1e-9


def log_partition(
    site: SiteSpace,
    spec: LatticeSpec,
    action: Optional[LatticeAction],
    estimator: Optional[Estimator] = None,
) -> float:
    """log z_(ω,v,n).

    Raises:
        VanishingPartitionError: If z is not strictly positive
    """
    try:
        return GibbsState(spec, site, action, estimator).log_partition_function()
    except PartitionFunctionError as e:
        raise VanishingPartitionError(
            f"Partition function vanishes at scale ({spec.n.n0},{spec.n.n1}): {e.message}",
            (spec.n.n0, spec.n.n1),
        ) from e


def multiplicative_renormalize(
    site: SiteSpace,
    family: ActionFamily,
    b: int,
    d: int,
    estimator: Optional[Estimator] = None,
) -> ActionFamily:
    """(𝐫_ω v)_n = z_(ω,v,n)⁻¹ · v_n.

    Partition functions are computed lazily per scale and cached. The unit
    weight is returned unchanged.

    Args:
        site: Single-site space carrying ω₀
        family: Action family v
        b: Lattice base
        d: Lattice dimension
        estimator: Estimator for z; exact by default

    Returns:
        Renormalized family; its builder raises :class:`VanishingPartitionError`
        at scales where z is not positive
    """
    log_z: Dict[ScalePair, float] = {}

    def build(n: ScalePair) -> Optional[LatticeAction]:
        action = family.at(n)
        if action is None:
            return None
        if n not in log_z:
            log_z[n] = log_partition(site, LatticeSpec(b, d, n), action, estimator)
            logger.debug(f"log z of {family.name} at ({n.n0},{n.n1}) = {log_z[n]:.6g}")
        return ScaledAction(action, -log_z[n])

    return ActionFamily(f"r[{family.name}]", build, dict(family.metadata))


def seminorm_estimate(
    site: SiteSpace,
    family: ActionFamily,
    spec: LatticeSpec,
    k_range: Sequence[RefinementStep] = DEFAULT_K_RANGE,
    cap: int = DEFAULT_EXACT_CAP,
) -> SeminormEstimate:
    """[[f]]_(ω,n) ≈ max over k_range of ‖e_(ω,n,n+k)(f_(n+k))‖.

    The result is a lower bound of the supremum over all k.

    Args:
        site: Single-site space carrying ω₀
        family: Family f
        spec: Lattice at scale n
        k_range: Refinements searched
        cap: Enumeration cap for weights without product or chain form

    Returns:
        Estimate with the per-k log norms
    """
    per_k: List[KNorm] = []
    for k in k_range:
        table = conditional_expectation(site, spec, k, family.at(spec.n.refine(k)), cap)
        per_k.append(KNorm(k=k_key(k), log_norm=table.log_sup_norm()))
    log_value = max((entry.log_norm for entry in per_k), default=-np.inf)
    with np.errstate(over="ignore"):
        value = float(np.exp(log_value))
    return SeminormEstimate(
        scale=(spec.n.n0, spec.n.n1),
        value=value,
        log_value=log_value,
        k_range=[k_key(k) for k in k_range],
        per_k=per_k,
    )


def _grows(series: List[float]) -> bool:
    """Strictly increasing with increments that do not die out."""
    if len(series) < 3:
        return False
    increments = np.diff(series)
    if np.any(increments <= GROWTH_FLOOR):
        return False
    return bool(increments[-1] >= GROWTH_RATIO * increments[0])


def renormalizability_check(
    site: SiteSpace,
    source: CouplingSource,
    spec: LatticeSpec,
    k_range: Sequence[RefinementStep] = DEFAULT_K_RANGE,
    tolerance: float = 1e-9,
    cap: int = DEFAULT_EXACT_CAP,
) -> RenormCertificate:
    """Check 1 ≤ [[𝐫_ω v]]_(ω,n) ≤ R_(ω,n)(h) on a finite k_range.

    Comparisons are made in log space with relative ``tolerance``. A seminorm
    series that keeps growing along k_range is not certified even when the
    bound holds on the range searched.

    Args:
        site: Single-site space carrying ω₀
        source: Coupling or ultra-local family defining v
        spec: Lattice at scale n
        k_range: Refinements searched for both the seminorm and R
        tolerance: Relative slack on both inequalities
        cap: Enumeration cap for conditional expectations

    Returns:
        Certificate; failures are verdicts, never exceptions
    """
    bounds = isr_bounds(source, spec, site, k_range)
    family = source.action_family()
    log_z = log_partition(site, spec, family.at(spec.n))
    try:
        renormalized = multiplicative_renormalize(site, family, spec.b, spec.d)
        seminorm = seminorm_estimate(site, renormalized, spec, k_range, cap)
    except (VanishingPartitionError, ActionError) as e:
        reason = f"renormalization failed: {e}"
        return _certificate(
            spec, log_z, -np.inf, bounds, k_range, CertificateVerdict.NOT_CERTIFIED, reason
        )

    log_seminorm = seminorm.log_value
    slack = np.log1p(tolerance)
    growth = _grows(seminorm.series())
    if not bounds.is_finite:
        verdict, reason = CertificateVerdict.NOT_CERTIFIED, "R infinite, not certified"
    elif growth:
        verdict = CertificateVerdict.NOT_CERTIFIED
        reason = "not certified: seminorm grows without bound over k_range"
    elif log_seminorm < -slack:
        verdict, reason = CertificateVerdict.BOUND_VIOLATED, "seminorm below 1"
    elif log_seminorm > bounds.log_R + slack:
        verdict, reason = CertificateVerdict.BOUND_VIOLATED, "seminorm exceeds R"
    else:
        verdict, reason = CertificateVerdict.CERTIFIED, ""
    if verdict is not CertificateVerdict.CERTIFIED:
        logger.info(f"Renormalizability of {family.name} at {spec.n}: {reason}")

    return _certificate(spec, log_z, log_seminorm, bounds, k_range, verdict, reason, growth)


def _certificate(
    spec: LatticeSpec,
    log_z: float,
    log_seminorm: float,
    bounds: ISRBounds,
    k_range: Sequence[RefinementStep],
    verdict: CertificateVerdict,
    reason: str,
    growth: bool = False,
) -> RenormCertificate:
    with np.errstate(over="ignore"):
        return RenormCertificate(
            scale=(spec.n.n0, spec.n.n1),
            z=float(np.exp(log_z)),
            log_z=log_z,
            seminorm=float(np.exp(log_seminorm)),
            log_seminorm=log_seminorm,
            I=bounds.I,
            S=bounds.S,
            R=bounds.R,
            log_R=bounds.log_R,
            verdict=verdict,
            reason=reason,
            growth_detected=growth,
            k_range=[k_key(k) for k in k_range],
        )
