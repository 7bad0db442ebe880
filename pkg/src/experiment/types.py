"""Experiment configuration and report models."""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from src.action.types import KineticForm
from src.blockspin.types import BlockSpinKind
from src.common.types import DEFAULT_EXACT_CAP, Verdict
from src.gibbs.types import EstimatorKind
from src.sitespace.types import SiteSpaceDescriptor

KPair = Tuple[int, int]
Cell = Union[bool, int, float, str, None]


class TaskName(str, Enum):
    """Tasks a configuration may request."""

    RGFLOW = "rgflow"
    RP_CHECK = "rp-check"
    INVARIANCE_CHECK = "invariance-check"
    RENORM_CHECK = "renorm-check"
    DUALITY_CHECK = "duality-check"
    CORRELATE = "correlate"
    AXIOMS_CHECK = "axioms-check"


class ActionKind(str, Enum):
    SCALAR = "scalar"
    FACE_COUPLING = "face_coupling"
    ULTRA_LOCAL = "ultra_local"
    EXP_COUPLING = "exp_coupling"


class LatticeConfig(BaseModel):
    """One lattice at scale n=(n0, n1)."""

    d: int = Field(ge=1)
    b: int = Field(default=3, ge=3)
    n0: int = Field(default=0, ge=0)
    n1: int = Field(default=1, ge=0)

    @model_validator(mode="after")
    def check_lattice(self) -> "LatticeConfig":
        if self.b % 2 == 0:
            raise ValueError(f"b must be odd, got {self.b}")
        if self.n0 + self.n1 < 1:
            raise ValueError("n0 + n1 must be at least 1")
        return self


class ActionConfig(BaseModel):
    """Action descriptor; the fields read depend on ``kind``.

    - scalar: ``lambda0``, ``lambdas``, ``kinetic_form``
    - face_coupling: ``coupling`` for w = exp(K·σσ′), or a node ``matrix``
    - ultra_local: ``weights``, the values of w on the site nodes in [0, 1]
    - exp_coupling: h(u, s) = exp(u·(``offset`` + ``slope``·s)), ``face_order``
    """

    kind: ActionKind
    lambda0: float = 0.0
    lambdas: List[float] = Field(default_factory=list)
    kinetic_form: KineticForm = KineticForm.SQUARED_DIFFERENCE
    coupling: Optional[float] = None
    matrix: Optional[List[List[float]]] = None
    weights: Optional[List[float]] = None
    offset: float = 1.0
    slope: float = 0.0
    face_order: int = Field(default=8, gt=0)

    @model_validator(mode="after")
    def check_kind_fields(self) -> "ActionConfig":
        if self.kind is ActionKind.FACE_COUPLING and (self.coupling is None) == (
            self.matrix is None
        ):
            raise ValueError("face_coupling needs exactly one of coupling or matrix")
        if self.kind is ActionKind.ULTRA_LOCAL:
            if not self.weights:
                raise ValueError("ultra_local needs weights on the site nodes")
            if any(w < 0.0 or w > 1.0 for w in self.weights):
                raise ValueError("ultra_local weights must lie in [0, 1]")
        if self.kind is ActionKind.EXP_COUPLING and min(self.offset, self.offset + self.slope) < 1:
            raise ValueError("exp_coupling needs offset + slope·s >= 1 on [0, 1]")
        return self


class EstimatorConfig(BaseModel):
    """Estimator settings; ``seed`` is the master seed and has no default."""

    kind: EstimatorKind = EstimatorKind.EXACT
    seed: int = Field(ge=0)
    cap: int = Field(default=DEFAULT_EXACT_CAP, gt=0)
    burn_in_sweeps: int = Field(default=200, ge=0)
    measure_sweeps: int = Field(default=4000, gt=0)
    n_chains: int = Field(default=4, gt=0)
    n_blocks: int = Field(default=32, ge=2)
    proposal_width: Optional[float] = Field(default=None, gt=0.0)


class TaskConfig(BaseModel):
    """A task with its options; a bare task name uses the defaults."""

    name: TaskName
    tolerance: float = Field(default=1e-10, ge=0.0)
    axes: Optional[List[int]] = None
    k1: KPair = (1, 0)
    k2: KPair = (1, 0)


class ExperimentConfig(BaseModel):
    """A single JSON document describing one batch of tasks."""

    name: str = "experiment"
    lattices: List[LatticeConfig] = Field(min_length=1)
    site: SiteSpaceDescriptor
    action: Optional[ActionConfig] = None
    blockspin: BlockSpinKind = BlockSpinKind.DECIMATION
    k_range: List[KPair] = Field(default_factory=lambda: [(0, 0), (1, 0), (2, 0)], min_length=1)
    estimator: EstimatorConfig
    tasks: List[Union[TaskName, TaskConfig]] = Field(default_factory=list)
    output_dir: str = "reports"
    formats: List[str] = Field(default_factory=lambda: ["json", "csv"])

    @field_validator("tasks")
    @classmethod
    def normalize_tasks(cls, tasks: List[Union[TaskName, TaskConfig]]) -> List[TaskConfig]:
        return [task if isinstance(task, TaskConfig) else TaskConfig(name=task) for task in tasks]

    @field_validator("k_range")
    @classmethod
    def check_k_range(cls, k_range: List[KPair]) -> List[KPair]:
        if any(k0 < 0 or k1 < 0 for k0, k1 in k_range):
            raise ValueError("Refinement components must be non-negative")
        return k_range

    @field_validator("formats")
    @classmethod
    def check_formats(cls, formats: List[str]) -> List[str]:
        unknown = set(formats) - {"json", "csv"}
        if unknown:
            raise ValueError(f"Unknown report formats {sorted(unknown)}")
        return formats

    @model_validator(mode="after")
    def check_task_actions(self) -> "ExperimentConfig":
        kind = self.action.kind if self.action else None
        for task in self.task_configs:
            if task.name is TaskName.RENORM_CHECK and kind not in (
                ActionKind.EXP_COUPLING,
                ActionKind.ULTRA_LOCAL,
            ):
                raise ValueError("renorm-check needs an exp_coupling or ultra_local action")
            if task.name is TaskName.DUALITY_CHECK and kind is not ActionKind.EXP_COUPLING:
                raise ValueError("duality-check needs an exp_coupling action")
        return self

    @property
    def task_configs(self) -> List[TaskConfig]:
        return [task for task in self.tasks if isinstance(task, TaskConfig)]


class ResultTable(BaseModel):
    """Rows in a fixed column order, written as one CSV file."""

    columns: List[str]
    rows: List[List[Cell]] = Field(default_factory=list)


class TaskResult(BaseModel):
    """One task on one lattice, with its inputs echoed."""

    task: TaskName
    scale: KPair
    inputs: Dict[str, Any]
    verdict: Optional[Verdict] = None
    summary: Dict[str, Any] = Field(default_factory=dict)
    diagnostics: Dict[str, float] = Field(default_factory=dict)
    table: ResultTable


class ExperimentReport(BaseModel):
    name: str
    config_hash: str
    versions: Dict[str, str]
    results: List[TaskResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        """No task verdict failed; measurement tasks carry no verdict."""
        return all(result.verdict is not Verdict.FAIL for result in self.results)
