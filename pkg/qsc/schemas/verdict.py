from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class VerdictStatus(str, Enum):
    VALID = "Valid"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


class Verdict(BaseModel):
    """Result of checking a concrete certificate."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: VerdictStatus
    message: str = ""
    implication: Optional[str] = None
    point: Optional[Dict[str, Fraction]] = None
    value: Optional[Fraction] = None
    exact: int = 0
    grid: int = 0
    warnings: List[str] = Field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return self.status == VerdictStatus.VALID

    def point_text(self) -> str:
        if not self.point:
            return ""
        return ", ".join(f"{k}={v}" for k, v in self.point.items())

    def describe(self) -> str:
        if self.status == VerdictStatus.VALID:
            return (
                f"Valid ({self.exact} implication(s) by Handelman LP, "
                f"{self.grid} by grid)"
            )
        if self.status == VerdictStatus.VIOLATED:
            where = f" at {self.point_text()}" if self.point else ""
            return f"Violated: {self.implication}{where} ({self.message})"
        return f"Inconclusive: {self.message}"
