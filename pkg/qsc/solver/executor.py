import logging
import subprocess
import time
from typing import Dict, List, Optional, Type

from qsc.core.config import settings
from qsc.core.exceptions import ConfigurationError, SolverError
from qsc.schemas.solve_result import SolveResult
from qsc.solver.adapters.base import SolverAdapter
from qsc.solver.adapters.cvc5 import Cvc5Adapter
from qsc.solver.adapters.z3 import Z3Adapter
from qsc.solver.model_parser import parse_output
from qsc.solver.smtlib import SmtScript

logger = logging.getLogger(__name__)

# Extra wall-clock allowance over the solver's own limit.
_GRACE_SECONDS = 5


class SolverExecutor:
    def __init__(
        self,
        provider: Optional[str] = None,
        path: Optional[str] = None,
        flags: Optional[List[str]] = None,
        timeout: Optional[int] = None,
    ) -> None:
        self.adapters: Dict[str, Type[SolverAdapter]] = {
            "z3": Z3Adapter,
            "cvc5": Cvc5Adapter,
        }
        self.provider = provider or settings.solver
        self.path = path if path is not None else settings.solver_path
        self.flags = (
            flags if flags is not None else settings.solver_flag_list()
        )
        self.timeout = (
            timeout if timeout is not None else settings.solver_timeout
        )
        self.queries = 0

    def _adapter(self) -> SolverAdapter:
        provider = self.provider
        if provider not in self.adapters and self.path:
            # a bare path like /opt/bin/cvc5 names its provider
            provider = next(
                (name for name in self.adapters if name in self.path), provider
            )
        if provider in self.adapters:
            return self.adapters[provider](path=self.path, flags=self.flags)

        raise ConfigurationError(f"Unknown solver provider: {provider}")

    def run(
        self, script: SmtScript, timeout: Optional[int] = None
    ) -> SolveResult:
        timeout = self.timeout if timeout is None else timeout
        if timeout <= 0:
            return SolveResult.unknown("timeout")
        adapter = self._adapter()
        command = adapter.command(timeout)
        self.queries += 1
        start = time.perf_counter()
        try:
            completed = subprocess.run(
                command,
                input=script.text,
                capture_output=True,
                text=True,
                timeout=timeout + _GRACE_SECONDS,
                check=False,
            )
        except subprocess.TimeoutExpired:
            elapsed = time.perf_counter() - start
            logger.info(
                f"[SOLVER] {adapter.name} timed out after {elapsed:.1f}s"
            )
            return SolveResult.unknown("timeout", elapsed)
        except OSError as err:
            elapsed = time.perf_counter() - start
            logger.error(f"[SOLVER] {adapter.name} failed to start: {err}")
            return SolveResult.unknown(f"process failure: {err}", elapsed)
        elapsed = time.perf_counter() - start
        if completed.returncode != 0 and not completed.stdout.strip():
            reason = completed.stderr.strip().splitlines()
            return SolveResult.unknown(
                f"exit {completed.returncode}: "
                + (reason[-1] if reason else "no output"),
                elapsed,
            )
        try:
            result = parse_output(completed.stdout, elapsed, script.unknowns)
        except SolverError as err:
            result = SolveResult.unknown(err.detail, elapsed)
        logger.info(
            f"[SOLVER] {adapter.name}: {result.status.value}"
            + (f" ({result.reason})" if result.reason else "")
            + f" in {elapsed:.2f}s"
        )
        return result


def run_solver(
    script: SmtScript,
    solver_path: Optional[str] = None,
    timeout: Optional[int] = None,
) -> SolveResult:
    """One-shot query with the configured provider."""
    return SolverExecutor(path=solver_path).run(script, timeout)
