from enum import Enum
from fractions import Fraction
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field


class SolveStatus(str, Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


class SolveResult(BaseModel):
    """Outcome of one solver query."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: SolveStatus
    assignment: Dict[str, Fraction] = Field(default_factory=dict)
    reason: Optional[str] = None
    wall_time: float = 0.0

    @property
    def is_sat(self) -> bool:
        return self.status == SolveStatus.SAT

    @classmethod
    def unknown(cls, reason: str, wall_time: float = 0.0) -> "SolveResult":
        return cls(
            status=SolveStatus.UNKNOWN, reason=reason, wall_time=wall_time
        )
