from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from qsc.core.consts import EXIT_INCONCLUSIVE, EXIT_OK
from qsc.schemas.verdict import Verdict


class Provenance(str, Enum):
    CERTIFIED = "certified"
    TRIVIAL = "trivial"
    ORACLE = "oracle"
    STATISTICAL = "statistical"


class DegreeRow(BaseModel):
    """Bounds attained at one template degree."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    degree: int
    lower: Fraction
    upper: Fraction
    seconds: float = 0.0


class SweepRow(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    start: int
    lower: Fraction
    upper: Fraction
    exact: Optional[Fraction] = None


class Report(BaseModel):
    """Everything a run produced, with the origin of every number."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    job: str
    mode: str
    lower: Optional[Fraction] = None
    upper: Optional[Fraction] = None
    lower_source: Provenance = Provenance.TRIVIAL
    upper_source: Provenance = Provenance.TRIVIAL
    kappa: Dict[str, Fraction] = Field(default_factory=dict)
    certificates: Dict[str, str] = Field(
        default_factory=dict, description="Direction to certificate path"
    )
    degree_rows: List[DegreeRow] = Field(default_factory=list)
    sweep: List[SweepRow] = Field(default_factory=list)
    oracle: Dict[str, str] = Field(default_factory=dict)
    statistics: Dict[str, float] = Field(default_factory=dict)
    verdict: Optional[Verdict] = None
    timings: Dict[str, float] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)
    inconclusive: bool = False

    @property
    def interval(self) -> Optional[tuple]:
        if self.lower is None or self.upper is None:
            return None
        return self.lower, self.upper

    @property
    def exit_code(self) -> int:
        return EXIT_INCONCLUSIVE if self.inconclusive else EXIT_OK

    def to_key_values(self) -> str:
        """Machine-readable ``key = value`` rendering."""
        lines = [f"job = {self.job}", f"mode = {self.mode}"]
        if self.lower is not None:
            lines.append(f"lower = {self.lower}")
            lines.append(f"lower.source = {self.lower_source.value}")
        if self.upper is not None:
            lines.append(f"upper = {self.upper}")
            lines.append(f"upper.source = {self.upper_source.value}")
        lines.extend(f"kappa.{k} = {v}" for k, v in self.kappa.items())
        lines.extend(
            f"certificate.{k} = {v}" for k, v in self.certificates.items()
        )
        for row in self.degree_rows:
            lines.append(f"degree.{row.degree} = {row.lower} {row.upper}")
        lines.extend(f"oracle.{k} = {v}" for k, v in self.oracle.items())
        lines.extend(
            f"statistics.{k} = {v:.6g}" for k, v in self.statistics.items()
        )
        if self.verdict is not None:
            lines.append(f"verdict = {self.verdict.status.value}")
            if self.verdict.point:
                lines.append(f"verdict.point = {self.verdict.point_text()}")
        lines.extend(f"time.{k} = {v:.3f}" for k, v in self.timings.items())
        lines.append(f"inconclusive = {str(self.inconclusive).lower()}")
        return "\n".join(lines) + "\n"
