import threading
import time
from contextlib import contextmanager
from typing import Dict, Iterator, List, Optional

from qsc.schemas.stage_timing import StageTiming


class StageTimer:
    """Utility class to track and aggregate wall time per pipeline stage."""

    def __init__(self):
        self.stages: Dict[str, StageTiming] = {}
        self.records: List[StageTiming] = []
        self._lock = threading.Lock()

    def add(self, timing: StageTiming) -> None:
        """Record one measured stage."""
        if isinstance(timing, dict):
            timing = StageTiming(**timing)
        key = self._key(timing.stage, timing.direction)
        with self._lock:
            self.records.append(timing)
            if key in self.stages:
                self.stages[key] = self.stages[key] + timing
            else:
                self.stages[key] = timing

    @contextmanager
    def measure(
        self, stage: str, direction: Optional[str] = None
    ) -> Iterator[StageTiming]:
        """Time the enclosed block; callers may set ``solver_queries``."""
        timing = StageTiming(stage=stage, direction=direction)
        start = time.perf_counter()
        try:
            yield timing
        finally:
            timing.seconds = time.perf_counter() - start
            self.add(timing)

    def total(self) -> float:
        return sum(timing.seconds for timing in self.records)

    def reset(self) -> None:
        with self._lock:
            self.stages = {}
            self.records = []

    def to_dict(self) -> dict:
        return {
            key: round(timing.seconds, 3)
            for key, timing in self.stages.items()
        }

    @staticmethod
    def _key(stage: str, direction: Optional[str]) -> str:
        return f"{direction}.{stage}" if direction else stage
