import shutil
from abc import ABC, abstractmethod
from typing import List, Optional

from qsc.core.exceptions import SolverError


class SolverAdapter(ABC):
    """Command line of one external SMT solver reading a script on stdin."""

    name: str = ""
    binary: str = ""

    def __init__(
        self, path: Optional[str] = None, flags: Optional[List[str]] = None
    ):
        self.path = path or None
        self.flags = list(flags or [])

    def executable(self) -> str:
        candidate = self.path or self.binary
        found = shutil.which(candidate)
        if found is None:
            raise SolverError(
                f"solver executable '{candidate}' not found; "
                "set QSC_SOLVER_PATH or pass --solver"
            )
        return found

    @abstractmethod
    def command(self, timeout: int) -> List[str]:
        """Argument vector for a run limited to ``timeout`` seconds."""
