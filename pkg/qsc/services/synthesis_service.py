import logging
from pathlib import Path
from typing import Optional

from qsc.core.exceptions import ConfigurationError
from qsc.schemas.job import JobConfig
from qsc.schemas.report import DegreeRow, Provenance, Report
from qsc.schemas.solve_result import SolveStatus
from qsc.services.oracle_service import OracleService
from qsc.services.pipeline import (
    LOWER,
    UPPER,
    build_direction,
    executor_for,
    job_frame,
    load_automata,
    load_model,
    parse_truncation_box,
)
from qsc.solver.executor import SolverExecutor
from qsc.solver.optimize import ControlResult, synthesize_control
from qsc.utils.stage_timer import StageTimer

logger = logging.getLogger(__name__)


class SynthesisService:
    """Control-parameter synthesis for a target probability interval."""

    def __init__(
        self,
        executor: Optional[SolverExecutor] = None,
        timer: Optional[StageTimer] = None,
        oracle: Optional[OracleService] = None,
    ):
        self.executor = executor or SolverExecutor()
        self.timer = timer or StageTimer()
        self.oracle = oracle or OracleService(self.timer)

    def run(self, job: JobConfig) -> Report:
        executor = executor_for(job, self.executor)
        with self.timer.measure("parse"):
            model = load_model(job.model)
            if not model.params:
                raise ConfigurationError(
                    "synthesize needs a model with 'param' declarations"
                )
            automaton, negated = load_automata(job, model)
            frame = job_frame(job, model)
        lo, hi = job.targets

        report = Report(job=job.name, mode=job.mode.value)
        top = job.degree_max
        steps = top - job.template.degree if top is not None else 0
        result: Optional[ControlResult] = None
        for offset in range(steps + 1):
            degree = job.template.degree + offset
            with self.timer.measure("templates"):
                lower = build_direction(
                    LOWER, model, automaton, job.template, degree, frame
                )
                upper = build_direction(
                    UPPER,
                    model,
                    negated,
                    job.negated,
                    job.negated.degree + offset,
                    frame,
                )
            with self.timer.measure("synthesize") as timing:
                before = executor.queries
                result = synthesize_control(
                    lower.product,
                    lower.templates,
                    upper.product,
                    upper.templates,
                    (lo, hi),
                    executor=executor,
                    D=job.handelman_degree,
                )
                timing.solver_queries = executor.queries - before
            logger.info(
                f"[SYNTH] degree {degree}: {result.status.value}"
                + (f" ({result.reason})" if result.reason else "")
            )
            if result.status == SolveStatus.SAT:
                report.degree_rows.append(
                    DegreeRow(
                        degree=degree,
                        lower=result.lower.bound,
                        upper=1 - result.upper.bound,
                        seconds=timing.seconds,
                    )
                )
                break

        if result is None or result.status != SolveStatus.SAT:
            report.inconclusive = True
            report.lower, report.upper = lo, hi
            hint = (
                "no parameters found at the tried degrees; raise "
                "'degree_max', widen the targets or add an exponential atom"
            )
            if result is not None and result.status == SolveStatus.UNKNOWN:
                hint = f"solver gave up ({result.reason}); " + hint
            report.warnings.append(hint)
            logger.warning(f"[SYNTH] {hint}")
            report.timings = self.timer.to_dict()
            return report

        report.kappa = result.kappa
        report.lower = result.lower.bound
        report.upper = 1 - result.upper.bound
        report.lower_source = Provenance.CERTIFIED
        report.upper_source = Provenance.CERTIFIED
        if job.certificate_dir is not None:
            directory = Path(job.certificate_dir)
            directory.mkdir(parents=True, exist_ok=True)
            pairs = ((LOWER, result.lower), (UPPER, result.upper))
            for name, instance in pairs:
                path = directory / f"{job.name}.{name}.cert"
                path.write_text(instance.serialize(), encoding="utf-8")
                report.certificates[name] = str(path)
        if job.box:
            box = parse_truncation_box(job.box, model)
            low, high, _ = self.oracle.bracket(
                lower.product, box, result.kappa
            )
            report.oracle["pessimistic"] = str(low)
            report.oracle["optimistic"] = str(high)
            if high < lo or low > hi:
                message = (
                    f"parameters {result.kappa} give the truncation bracket "
                    f"[{low}, {high}] outside the targets [{lo}, {hi}]"
                )
                logger.error(f"[ORACLE] {message}")
                report.warnings.append(message)
        report.timings = self.timer.to_dict()
        return report
