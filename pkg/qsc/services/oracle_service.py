import logging
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from qsc.core.consts import BoundaryMode
from qsc.core.exceptions import ConfigurationError
from qsc.model.model import Model
from qsc.oracle import (
    FiniteChain,
    exact_invariant,
    exact_probability,
    simulate,
    state_probabilities,
    stay_probability,
    truncate,
    write_process_csv,
)
from qsc.product.product import ProductModel, compose
from qsc.schemas.job import JobConfig
from qsc.schemas.report import Provenance, Report
from qsc.services.pipeline import (
    load_automata,
    load_model,
    parse_truncation_box,
)
from qsc.utils.stage_timer import StageTimer

logger = logging.getLogger(__name__)

Box = Dict[str, Tuple[int, int]]


def _fixed_kappa(job: JobConfig, model: Model) -> Optional[Dict]:
    if not model.params:
        return None
    missing = [name for name in model.param_names if name not in job.kappa]
    if missing:
        raise ConfigurationError(
            f"parametric model needs kappa.<name> values for {missing}"
        )
    return dict(job.kappa)


class OracleService:
    """Exact truncation solving and Monte-Carlo simulation."""

    def __init__(self, timer: Optional[StageTimer] = None):
        self.timer = timer or StageTimer()

    def bracket(
        self,
        p: ProductModel,
        box: Box,
        kappa: Optional[Mapping[str, Fraction]] = None,
    ) -> Tuple[Fraction, Fraction, FiniteChain]:
        """Pessimistic and optimistic truncation values with the chain.

        The pessimistic value bounds the true probability from below and
        the optimistic one from above.
        """
        with self.timer.measure("truncate"):
            pessimistic = truncate(p, box, kappa, BoundaryMode.PESSIMISTIC)
            optimistic = truncate(p, box, kappa, BoundaryMode.OPTIMISTIC)
        with self.timer.measure("exact"):
            low = exact_probability(pessimistic)
            high = exact_probability(optimistic)
        logger.info(f"[ORACLE] truncation bracket [{low}, {high}]")
        return low, high, pessimistic

    def exact(self, job: JobConfig) -> Report:
        model = load_model(job.model)
        automaton, _ = load_automata(job, model)
        p = compose(model, automaton)
        kappa = _fixed_kappa(job, model)
        box = parse_truncation_box(job.box, model)
        low, high, chain = self.bracket(p, box, kappa)

        report = Report(
            job=job.name,
            mode=job.mode.value,
            lower=low,
            upper=high,
            lower_source=Provenance.ORACLE,
            upper_source=Provenance.ORACLE,
            kappa=kappa or {},
        )
        report.oracle["pessimistic"] = str(low)
        report.oracle["optimistic"] = str(high)
        report.oracle["states"] = str(len(chain))
        report.oracle["resolved_exits"] = str(chain.resolved_exits)
        report.oracle["boundary_exits"] = str(chain.boundary_exits)

        with self.timer.measure("invariant"):
            invariant = exact_invariant(chain)
            stay = stay_probability(chain, invariant)
        report.oracle["invariant_states"] = str(len(invariant))
        report.oracle["stay_probability"] = str(stay)
        if stay != low:
            message = (
                f"staying in the exact invariant has probability {stay}, "
                f"acceptance has {low}"
            )
            logger.warning(f"[ORACLE] {message}")
            report.warnings.append(message)
        if chain.boundary_exits:
            report.warnings.append(
                f"{chain.boundary_exits} exit(s) left unresolved by the box"
            )
        report.timings = self.timer.to_dict()
        return report

    def simulate(self, job: JobConfig) -> Report:
        model = load_model(job.model)
        automaton, _ = load_automata(job, model)
        p = compose(model, automaton)
        kappa = _fixed_kappa(job, model)
        box = parse_truncation_box(job.box, model)
        with self.timer.measure("truncate"):
            chain = truncate(p, box, kappa, BoundaryMode.PESSIMISTIC)
        with self.timer.measure("exact"):
            probabilities = state_probabilities(chain)
        with self.timer.measure("simulate"):
            result = simulate(
                p,
                kappa,
                job.trajectories,
                job.horizon,
                job.seed,
                chain=chain,
                probabilities=probabilities,
            )
        if job.csv is not None:
            write_process_csv(result, job.csv, job.columns)
            logger.info(f"[SIMULATE] process written to {job.csv}")

        value = probabilities[chain.initial]
        report = Report(
            job=job.name,
            mode=job.mode.value,
            lower=value,
            upper=value,
            lower_source=Provenance.ORACLE,
            upper_source=Provenance.ORACLE,
            kappa=kappa or {},
            statistics=result.summary,
        )
        if result.summary.get("max_deviation", 0.0) > 4.0:
            message = (
                "sample mean drifts more than 4 standard errors from the "
                "initial value"
            )
            logger.warning(f"[SIMULATE] {message}")
            report.warnings.append(message)
        report.timings = self.timer.to_dict()
        return report
