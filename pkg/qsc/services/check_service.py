import logging
from typing import Optional

from qsc.certificate.instance import parse_certificate
from qsc.oracle import check_certificate
from qsc.product.product import compose
from qsc.schemas.job import JobConfig
from qsc.schemas.report import Provenance, Report
from qsc.services.pipeline import (
    LOWER,
    load_automata,
    load_model,
    read_text,
)
from qsc.utils.stage_timer import StageTimer

logger = logging.getLogger(__name__)


class CheckService:
    """Exact validation of a stored certificate."""

    def __init__(self, timer: Optional[StageTimer] = None):
        self.timer = timer or StageTimer()

    def run(self, job: JobConfig) -> Report:
        with self.timer.measure("parse"):
            model = load_model(job.model)
            automaton, negated = load_automata(job, model)
            chosen = automaton if job.direction == LOWER else negated
            p = compose(model, chosen)
            instance = parse_certificate(
                read_text(job.certificate, "certificate"),
                p,
                str(job.certificate),
            )
        with self.timer.measure("check"):
            verdict = check_certificate(instance, p, job.handelman_degree)
        logger.info(f"[CHECK] {job.certificate}: {verdict.describe()}")

        report = Report(
            job=job.name,
            mode=job.mode.value,
            kappa=instance.kappa,
            verdict=verdict,
            certificates={job.direction: str(job.certificate)},
            warnings=list(verdict.warnings),
        )
        report.inconclusive = not verdict.is_valid
        if verdict.is_valid:
            if job.direction == LOWER:
                report.lower = instance.bound
                report.lower_source = Provenance.CERTIFIED
            else:
                report.upper = 1 - instance.bound
                report.upper_source = Provenance.CERTIFIED
        report.timings = self.timer.to_dict()
        return report
