import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from qsc.certificate.instance import CertificateInstance
from qsc.core.exceptions import ConfigurationError
from qsc.model.model import Model
from qsc.oracle import state_probabilities, truncate
from qsc.schemas.job import JobConfig
from qsc.schemas.report import DegreeRow, Provenance, Report, SweepRow
from qsc.services.oracle_service import OracleService
from qsc.services.pipeline import (
    LOWER,
    UPPER,
    Direction,
    build_direction,
    executor_for,
    job_frame,
    load_automata,
    load_model,
    parse_truncation_box,
)
from qsc.solver.executor import SolverExecutor
from qsc.solver.optimize import BoundResult, optimize_bound
from qsc.utils.stage_timer import StageTimer

logger = logging.getLogger(__name__)


def _fixed_model(job: JobConfig, model: Model) -> Model:
    if not model.params:
        return model
    missing = [name for name in model.param_names if name not in job.kappa]
    if missing:
        raise ConfigurationError(
            f"verifying a parametric model needs kappa.<name> for {missing}"
        )
    return model.with_parameters(job.kappa)


def _covers(
    result: BoundResult, q: str, point: Dict[str, Fraction]
) -> bool:
    """Whether the certificate's invariant holds at ``(point, q)``."""
    if not result.certified:
        return False
    piece = result.certificate.invariant[q]
    return piece.region(tuple(point)).contains(point)


class VerifyService:
    """Two-sided interval verification with degree escalation."""

    def __init__(
        self,
        executor: Optional[SolverExecutor] = None,
        timer: Optional[StageTimer] = None,
        oracle: Optional[OracleService] = None,
    ):
        self.executor = executor or SolverExecutor()
        self.timer = timer or StageTimer()
        self.oracle = oracle or OracleService(self.timer)

    def _optimize(
        self,
        direction: Direction,
        job: JobConfig,
        executor: SolverExecutor,
    ) -> BoundResult:
        with self.timer.measure("optimize", direction.name) as timing:
            before = executor.queries
            result = optimize_bound(
                direction.product,
                direction.templates,
                tol=job.tol,
                executor=executor,
                D=job.handelman_degree,
            )
            timing.solver_queries = executor.queries - before
        logger.info(
            f"[SYNTH] {direction.name} direction certified "
            f"{result.bound} at degree {direction.templates.degree}"
        )
        return result

    def _solve_pair(
        self,
        directions: Tuple[Direction, Direction],
        job: JobConfig,
        executor: SolverExecutor,
    ) -> Tuple[BoundResult, BoundResult]:
        # one executor per thread keeps the query counters apart
        executors = [
            SolverExecutor(
                executor.provider,
                executor.path,
                executor.flags,
                executor.timeout,
            )
            for _ in directions
        ]
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = [
                pool.submit(self._optimize, direction, job, runner)
                for direction, runner in zip(directions, executors)
            ]
            lower, upper = (future.result() for future in futures)
        executor.queries += sum(runner.queries for runner in executors)
        return lower, upper

    def run(self, job: JobConfig) -> Report:
        executor = executor_for(job, self.executor)
        with self.timer.measure("parse"):
            model = _fixed_model(job, load_model(job.model))
            automaton, negated = load_automata(job, model)
            frame = job_frame(job, model)

        report = Report(job=job.name, mode=job.mode.value)
        top = job.degree_max
        steps = top - job.template.degree if top is not None else 0
        best: Dict[str, Optional[BoundResult]] = {LOWER: None, UPPER: None}
        kept: Dict[str, Direction] = {}
        outcomes: List[BoundResult] = []

        for offset in range(steps + 1):
            degree = job.template.degree + offset
            negated_degree = job.negated.degree + offset
            with self.timer.measure("templates"):
                directions = (
                    build_direction(
                        LOWER, model, automaton, job.template, degree, frame
                    ),
                    build_direction(
                        UPPER,
                        model,
                        negated,
                        job.negated,
                        negated_degree,
                        frame,
                    ),
                )
            with self.timer.measure("round") as timing:
                results = self._solve_pair(directions, job, executor)
            outcomes.extend(results)
            for direction, result in zip(directions, results):
                previous = best[direction.name]
                if previous is None or result.bound > previous.bound:
                    best[direction.name] = result
                    kept[direction.name] = direction
            lower = best[LOWER].bound
            upper = 1 - best[UPPER].bound
            report.degree_rows.append(
                DegreeRow(
                    degree=degree,
                    lower=results[0].bound,
                    upper=1 - results[1].bound,
                    seconds=timing.seconds,
                )
            )
            logger.info(
                f"[SYNTH] degree {degree}: interval "
                f"[{float(lower):.4f}, {float(upper):.4f}]"
            )
            if upper - lower <= job.gap_target:
                break

        lower_result, upper_result = best[LOWER], best[UPPER]
        report.lower = lower_result.bound
        report.upper = 1 - upper_result.bound
        report.lower_source = (
            Provenance.CERTIFIED
            if lower_result.certified
            else Provenance.TRIVIAL
        )
        report.upper_source = (
            Provenance.CERTIFIED
            if upper_result.certified
            else Provenance.TRIVIAL
        )
        report.inconclusive = all(r.inconclusive for r in outcomes)
        if report.inconclusive:
            report.warnings.append(
                "every solver query was inconclusive; raise the timeout "
                "or the template degree"
            )
        if report.lower > report.upper:
            message = (
                f"certified bounds cross: {report.lower} > {report.upper}"
            )
            logger.error(f"[SYNTH] {message}")
            report.warnings.append(message)

        if job.certificate_dir is not None:
            report.certificates = self._write_certificates(
                job, lower_result.certificate, upper_result.certificate
            )
        if job.box:
            self._cross_check(job, kept[LOWER], report)
        if job.sweep is not None:
            report.sweep = self._sweep(
                job, model, kept, lower_result, upper_result
            )
            if job.csv is not None:
                write_sweep_csv(report.sweep, job.csv)
        report.timings = self.timer.to_dict()
        return report

    def _write_certificates(
        self,
        job: JobConfig,
        lower: CertificateInstance,
        upper: CertificateInstance,
    ) -> Dict[str, str]:
        directory = Path(job.certificate_dir)
        directory.mkdir(parents=True, exist_ok=True)
        written = {}
        for name, instance in ((LOWER, lower), (UPPER, upper)):
            path = directory / f"{job.name}.{name}.cert"
            path.write_text(instance.serialize(), encoding="utf-8")
            written[name] = str(path)
            logger.info(f"[CERT] {name} certificate written to {path}")
        return written

    def _cross_check(
        self, job: JobConfig, direction: Direction, report: Report
    ) -> None:
        box = parse_truncation_box(job.box, direction.product.base)
        low, high, _ = self.oracle.bracket(direction.product, box)
        report.oracle["pessimistic"] = str(low)
        report.oracle["optimistic"] = str(high)
        if report.lower > high or report.upper < low:
            message = (
                f"certified interval [{report.lower}, {report.upper}] "
                f"misses the truncation bracket [{low}, {high}]"
            )
            logger.error(f"[ORACLE] {message}")
            report.warnings.append(message)

    def _sweep(
        self,
        job: JobConfig,
        model: Model,
        kept: Dict[str, Direction],
        lower_result: BoundResult,
        upper_result: BoundResult,
    ) -> List[SweepRow]:
        """Bounds from the two certificates over a range of start values."""
        names = model.space.names
        if len(names) != 1:
            raise ConfigurationError("sweep needs a single-variable model")
        name = names[0]
        lower_q = kept[LOWER].product.automaton.initial
        upper_q = kept[UPPER].product.automaton.initial

        exact: Dict[int, Fraction] = {}
        if job.box:
            product = kept[LOWER].product
            box = parse_truncation_box(job.box, model)
            with self.timer.measure("sweep.exact"):
                chain = truncate(product, box)
                probabilities = state_probabilities(chain)
            for x in range(job.sweep[0], job.sweep[1] + 1):
                index = chain.find(chain.state_key({name: x}, lower_q))
                if index is not None:
                    exact[x] = probabilities[index]

        rows = []
        for x in range(job.sweep[0], job.sweep[1] + 1):
            point = {name: Fraction(x)}
            lower = Fraction(0)
            if _covers(lower_result, lower_q, point):
                value = lower_result.certificate.value(0, lower_q, point)
                lower = max(Fraction(0), 1 - value)
            upper = Fraction(1)
            if _covers(upper_result, upper_q, point):
                value = upper_result.certificate.value(0, upper_q, point)
                upper = min(Fraction(1), value)
            rows.append(
                SweepRow(start=x, lower=lower, upper=upper, exact=exact.get(x))
            )
        logger.info(f"[SYNTH] swept {len(rows)} start values of {name}")
        return rows


def write_sweep_csv(rows: List[SweepRow], path: Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "lower", "upper", "exact"])
        for row in rows:
            writer.writerow(
                [
                    row.start,
                    f"{float(row.lower):.6f}",
                    f"{float(row.upper):.6f}",
                    "" if row.exact is None else f"{float(row.exact):.6f}",
                ]
            )
