"""Experiment tasks: each maps one configured task onto module operations.

Every task takes a :class:`TaskContext` and returns a :class:`TaskResult`
whose table has a fixed column order. Property checks set a verdict;
measurement tasks (rgflow, correlate) leave it unset.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.action.coupling import ExpCouplingFamily
from src.action.types import ActionFamily
from src.blockspin.towers import (
    classify_tower,
    generating_observables,
    state_consistency_check,
    tower_flow,
)
from src.blockspin.transforms import verify_blockspin_axioms
from src.blockspin.types import BlockSpinFamily
from src.common.types import Verdict
from src.duality.dual import duality_identity_check
from src.duality.types import DualModel
from src.gibbs.state import GibbsState
from src.gibbs.statistics import correlation_length_fit
from src.gibbs.types import Estimator, MetropolisEstimator
from src.lattice.geometry import TorusLattice
from src.lattice.types import CubeIndex, LatticeSpec, RefinementStep
from src.renorm.bounds import exp_coupling_conditions
from src.renorm.conditional import effective_action
from src.renorm.multiplicative import (
    multiplicative_renormalize,
    renormalizability_check,
    seminorm_estimate,
)
from src.renorm.types import CertificateVerdict, k_key
from src.sitespace import observables
from src.sitespace.types import SiteObservable, SiteSpace
from src.symmetry.invariance import invariance_check
from src.symmetry.reflection import rp_gram_check
from src.symmetry.types import ReflectionStructure

from . import builders
from .types import ActionConfig, ResultTable, TaskConfig, TaskName, TaskResult

logger = logging.getLogger(__name__)

# Dual-side agreement allows this many standard errors when face variables are sampled
DUAL_SIGMAS = 5.0
# Distances are grouped after rounding to this many decimals
DISTANCE_DECIMALS = 9


@dataclass(frozen=True)
class TaskContext:
    """Everything a task needs for one lattice."""

    task: TaskConfig
    spec: LatticeSpec
    site: SiteSpace
    action: Optional[ActionConfig]
    family: ActionFamily
    blockspin: BlockSpinFamily
    k_range: List[RefinementStep]
    settings: Estimator
    cap: int
    seed: int
    inputs: Dict[str, Any] = field(default_factory=dict)

    def state(self, spec: Optional[LatticeSpec] = None) -> GibbsState:
        return builders.state(spec or self.spec, self.site, self.family, self.settings)

    @property
    def scale(self) -> Tuple[int, int]:
        return (self.spec.n.n0, self.spec.n.n1)

    def result(
        self,
        table: ResultTable,
        verdict: Optional[Verdict] = None,
        summary: Optional[Dict[str, Any]] = None,
        diagnostics: Optional[Dict[str, float]] = None,
    ) -> TaskResult:
        return TaskResult(
            task=self.task.name,
            scale=self.scale,
            inputs=self.inputs,
            verdict=verdict,
            summary=summary or {},
            diagnostics=diagnostics or {},
            table=table,
        )


def _verdict(passed: bool) -> Verdict:
    return Verdict.PASS if passed else Verdict.FAIL


def run_rgflow(ctx: TaskContext) -> TaskResult:
    """Tower flow of generating observables, effective-action norms and the seminorm series."""
    spec, site = ctx.spec, ctx.site
    probes = generating_observables(TorusLattice(spec), site)
    flow = tower_flow(ctx.blockspin, ctx.state, spec, ctx.k_range, probes)
    table = ResultTable(columns=["k0", "k1", "observable_id", "value", "stderr"])
    for row in flow.rows:
        for name, value in row.values.items():
            table.rows.append([row.k[0], row.k[1], name, value, row.stderrs.get(name)])

    effective = {
        f"{k.k0},{k.k1}": effective_action(site, ctx.family, spec, k, ctx.cap).log_sup_norm
        for k in ctx.k_range
    }
    renormalized = multiplicative_renormalize(site, ctx.family, spec.b, spec.d)
    seminorm = seminorm_estimate(site, renormalized, spec, ctx.k_range, ctx.cap)
    classification = classify_tower(ctx.blockspin, ctx.state, spec, ctx.k_range[-1])
    return ctx.result(
        table,
        summary={
            "successive_differences": flow.successive_differences,
            "effective_action_log_sup_norm": effective,
            "seminorm": seminorm.model_dump(mode="json"),
            "classification": classification.model_dump(mode="json"),
        },
        diagnostics={"log_seminorm": seminorm.log_value},
    )


def run_rp_check(ctx: TaskContext) -> TaskResult:
    """Reflexion-positivity Gram test on every requested axis."""
    state = ctx.state()
    axes = ctx.task.axes or list(range(1, ctx.spec.d + 1))
    table = ResultTable(
        columns=["axis", "basis_size", "min_eigenvalue", "norm", "hermiticity_defect", "verdict"]
    )
    verdicts = []
    for axis in axes:
        check = rp_gram_check(state, ReflectionStructure(ctx.spec, axis))
        verdicts.append(check.verdict)
        table.rows.append(
            [
                axis,
                len(check.labels),
                check.min_eigenvalue,
                check.norm,
                check.hermiticity_defect,
                check.verdict.value,
            ]
        )
    return ctx.result(table, _verdict(all(v is Verdict.PASS for v in verdicts)))


def run_invariance_check(ctx: TaskContext) -> TaskResult:
    """Translation invariance of the state over all of (ℤ_L)^d."""
    state = ctx.state()
    lattice = state.lattice
    report = invariance_check(
        state, lattice.translations(), generating_observables(lattice, ctx.site)
    )
    table = ResultTable(
        columns=["checks", "max_defect", "worst_translation", "worst_observable"],
        rows=[
            [
                report.checks,
                report.max_defect,
                " ".join(str(c) for c in report.worst_translation or ()),
                report.worst_observable,
            ]
        ],
    )
    return ctx.result(table, _verdict(report.max_defect <= ctx.task.tolerance))


def run_renorm_check(ctx: TaskContext) -> TaskResult:
    """Renormalizability certificate; exponential couplings add their q/r diagnostics."""
    assert ctx.action is not None
    source = builders.coupling_source(ctx.action, ctx.spec.d)
    certificate = renormalizability_check(ctx.site, source, ctx.spec, ctx.k_range, cap=ctx.cap)
    table = ResultTable(
        columns=["n0", "n1", "I", "S", "R", "seminorm", "verdict"],
        rows=[
            [
                ctx.spec.n.n0,
                ctx.spec.n.n1,
                certificate.I,
                certificate.S,
                certificate.R,
                certificate.seminorm,
                certificate.verdict.value,
            ]
        ],
    )
    summary: Dict[str, Any] = {"certificate": certificate.model_dump(mode="json")}
    if isinstance(source, ExpCouplingFamily):
        conditions = exp_coupling_conditions(source, ctx.spec, ctx.k_range)
        summary["exp_coupling_conditions"] = conditions.model_dump(mode="json")
    passed = certificate.verdict is CertificateVerdict.CERTIFIED
    return ctx.result(
        table, _verdict(passed), summary, diagnostics={"log_R": certificate.log_R}
    )


def _duality_cases(
    lattice: TorusLattice,
) -> List[Tuple[List[CubeIndex], List[SiteObservable]]]:
    first = lattice.cube_at(0)
    last = lattice.cube_at(lattice.tau - 1)
    field = observables.field()
    return [
        ([first], [field]),
        ([first, last], [field, field]),
        ([first, first], [field, observables.power(2)]),
    ]


def run_duality_check(ctx: TaskContext) -> TaskResult:
    """Primal expectations against the face-variable representation."""
    assert ctx.action is not None
    family = builders.exp_coupling_family(ctx.action, ctx.spec.d)
    model = DualModel.from_family(family, ctx.spec, ctx.site, ctx.cap)
    sampler = ctx.settings if isinstance(ctx.settings, MetropolisEstimator) else None
    table = ResultTable(columns=["cubes", "lhs", "rhs", "defect", "rhs_stderr"])
    passed = True
    for cubes, site_observables in _duality_cases(model.lattice):
        report = duality_identity_check(model, cubes, site_observables, sampler)
        slack = ctx.task.tolerance + DUAL_SIGMAS * (report.rhs_stderr or 0.0)
        passed = passed and report.defect <= slack
        label = " ".join("-".join(str(c) for c in cube) for cube in report.cubes)
        table.rows.append([label, report.lhs, report.rhs, report.defect, report.rhs_stderr])
    return ctx.result(table, _verdict(passed), diagnostics={"face_grid_size": model.grid_size})


def _lattice_distance(lattice: TorusLattice, first: CubeIndex, second: CubeIndex) -> float:
    return round(lattice.cube_distance(first, second) / lattice.spec.spacing, DISTANCE_DECIMALS)


def correlations_by_distance(
    state: GibbsState, a: SiteObservable, b: Optional[SiteObservable] = None
) -> Dict[float, List[float]]:
    """Connected correlations over all distinct cube pairs, grouped by lattice distance."""
    lattice = state.lattice
    b = b or a
    cubes = lattice.cubes()
    groups: Dict[float, List[float]] = defaultdict(list)
    for i, first in enumerate(cubes):
        for second in cubes[i + 1 :]:
            value = state.correlation_at(first, a, second, b).real
            groups[_lattice_distance(lattice, first, second)].append(value)
    return dict(sorted(groups.items()))


def run_correlate(ctx: TaskContext) -> TaskResult:
    """Mean |connected correlation| per distance class and its exponential fit."""
    groups = correlations_by_distance(ctx.state(), observables.field())
    means = {r: float(np.mean(np.abs(values))) for r, values in groups.items()}
    fit = correlation_length_fit(list(means.items()))
    table = ResultTable(columns=["distance", "mean_abs_corr", "K_fit", "ell_fit"])
    for r, mean in means.items():
        table.rows.append([r, mean, fit.K_fit, fit.ell_fit])
    return ctx.result(
        table,
        summary={"fit": fit.model_dump(mode="json"), "pairs": sum(map(len, groups.values()))},
        diagnostics={"residual": fit.residual},
    )


def run_axioms_check(ctx: TaskContext) -> TaskResult:
    """Block-spin axioms for (k1, k2) and base-state consistency for k1."""
    k1, k2 = builders.refinement(ctx.task.k1), builders.refinement(ctx.task.k2)
    axioms = verify_blockspin_axioms(ctx.blockspin, ctx.spec, k1, k2, ctx.site, seed=ctx.seed)
    consistency = state_consistency_check(ctx.blockspin, ctx.site, ctx.spec, k1)
    table = ResultTable(
        columns=["check", "passed", "value"],
        rows=[
            ["cosheaf", axioms.cosheaf, None],
            ["locality", axioms.locality, None],
            ["covariance", axioms.covariance, None],
            ["state_consistency", consistency.consistent, consistency.max_defect],
        ],
    )
    # Block averages need not preserve base states; only decimation is held to it
    consistent = consistency.consistent or not ctx.blockspin.is_decimation
    return ctx.result(
        table,
        _verdict(axioms.passed and consistent),
        summary={"failures": axioms.failures, "k": [k_key(k1), k_key(k2)]},
    )


TaskFn = Callable[[TaskContext], TaskResult]

TASKS: Dict[TaskName, TaskFn] = {
    TaskName.RGFLOW: run_rgflow,
    TaskName.RP_CHECK: run_rp_check,
    TaskName.INVARIANCE_CHECK: run_invariance_check,
    TaskName.RENORM_CHECK: run_renorm_check,
    TaskName.DUALITY_CHECK: run_duality_check,
    TaskName.CORRELATE: run_correlate,
    TaskName.AXIOMS_CHECK: run_axioms_check,
}


def run_task(ctx: TaskContext) -> TaskResult:
    """Dispatch to the task implementation."""
    logger.debug(f"Running {ctx.task.name.value} at scale {ctx.scale}")
    return TASKS[ctx.task.name](ctx)


def table_names(results: Sequence[TaskResult]) -> List[str]:
    """File stems per result: the task name, suffixed from the second occurrence on."""
    seen: Dict[str, int] = defaultdict(int)
    names = []
    for result in results:
        stem = result.task.value
        names.append(stem if seen[stem] == 0 else f"{stem}_{seen[stem]}")
        seen[stem] += 1
    return names
