from typing import Optional

from pydantic import BaseModel


class StageTiming(BaseModel):
    """Wall time spent in one pipeline stage."""

    stage: str
    seconds: float = 0.0
    solver_queries: int = 0
    direction: Optional[str] = None

    def __add__(self, other: "StageTiming") -> "StageTiming":
        if not isinstance(other, StageTiming):
            return NotImplemented
        return StageTiming(
            stage=self.stage,
            seconds=self.seconds + other.seconds,
            solver_queries=self.solver_queries + other.solver_queries,
            direction=self.direction,
        )
