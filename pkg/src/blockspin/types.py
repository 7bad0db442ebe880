"""Block-spin type definitions."""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from src.sitespace.types import SiteSpace

from .exceptions import UnsupportedKindError


class BlockSpinKind(str, Enum):
    """Block-spin transformations p_(n,n+k)."""

    DECIMATION = "decimation"
    BLOCK_AVERAGE = "block_average"


@dataclass(frozen=True)
class BlockSpinFamily:
    """The family p_(n,n+k) of one kind, for every valid (n, k)."""

    kind: BlockSpinKind = BlockSpinKind.DECIMATION

    @property
    def is_decimation(self) -> bool:
        return self.kind is BlockSpinKind.DECIMATION

    def supports(self, site: SiteSpace) -> bool:
        return self.is_decimation or site.supports_averaging

    def check_site(self, site: Optional[SiteSpace]) -> None:
        """Reject site spaces the kind is not defined on.

        Raises:
            UnsupportedKindError: If block averages leave the site value space
        """
        if site is not None and not self.supports(site):
            raise UnsupportedKindError(
                f"{self.kind.value} is not defined on {site.kind.value} sites",
                self.kind.value,
                site.kind.value,
            )


class AxiomReport(BaseModel):
    """Outcome of the cosheaf, locality and covariance checks."""

    kind: BlockSpinKind
    k1: Tuple[int, int]
    k2: Tuple[int, int]
    cosheaf: bool
    locality: bool
    covariance: bool
    configurations_checked: int = 0
    failures: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.cosheaf and self.locality and self.covariance


class ConsistencyEntry(BaseModel):
    observable: str
    coarse_value: float
    fine_value: float
    defect: float


class ConsistencyReport(BaseModel):
    """|ω_(n+k)(ι a) − ω_n(a)| over a generating observable set."""

    kind: BlockSpinKind
    k: Tuple[int, int]
    tolerance: float
    max_defect: float
    consistent: bool
    entries: List[ConsistencyEntry] = Field(default_factory=list)


class TowerRow(BaseModel):
    """Pulled-back expectations at one refinement k."""

    k: Tuple[int, int]
    values: Dict[str, float]
    stderrs: Dict[str, Optional[float]] = Field(default_factory=dict)


class TowerFlow(BaseModel):
    """⟨η_(n+k), ι_(n+k,n) a⟩ along a list of refinements."""

    kind: BlockSpinKind
    base_scale: Tuple[int, int]
    rows: List[TowerRow] = Field(default_factory=list)
    successive_differences: Dict[str, List[float]] = Field(default_factory=dict)

    def sequence(self, name: str) -> List[float]:
        return [row.values[name] for row in self.rows]

    def last_difference(self, name: str) -> Optional[float]:
        differences = self.successive_differences.get(name, [])
        return differences[-1] if differences else None


class TowerClass(str, Enum):
    """Rough kinds of limit points of a tower."""

    CHARACTER = "character"
    ULTRA_LOCAL = "ultra_local"
    NON_ULTRA_LOCAL = "non_ultra_local"


class TowerClassification(BaseModel):
    classification: TowerClass
    k: Tuple[int, int]
    max_variance: float
    max_correlation: float
    tolerance: float
