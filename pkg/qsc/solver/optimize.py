"""Bound search by bisection and joint control-synthesis queries."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from qsc.certificate.instance import (
    CertificateInstance,
    instantiate,
    trivial_instance,
)
from qsc.certificate.templates import TemplateSet
from qsc.constraints.system import (
    ConstraintSystem,
    RelaxedSystem,
    generate_system,
)
from qsc.core.config import settings
from qsc.core.consts import BOUND_SYMBOL
from qsc.core.exceptions import InvalidInputError
from qsc.oracle.checker import check_certificate
from qsc.product.product import ProductModel
from qsc.schemas.solve_result import SolveResult, SolveStatus
from qsc.solver.executor import SolverExecutor
from qsc.solver.model_parser import IRRATIONAL
from qsc.solver.smtlib import emit_smtlib

logger = logging.getLogger(__name__)

NEGATION_PREFIX = "neg."


@dataclass
class Query:
    bound: Fraction
    status: SolveStatus
    reason: Optional[str] = None
    certified: Optional[Fraction] = None
    wall_time: float = 0.0


@dataclass
class BoundResult:
    bound: Fraction
    certificate: CertificateInstance
    queries: List[Query] = field(default_factory=list)
    bracket: Tuple[Fraction, Fraction] = (Fraction(0), Fraction(1))

    @property
    def inconclusive(self) -> bool:
        return bool(self.queries) and all(
            query.status == SolveStatus.UNKNOWN for query in self.queries
        )

    @property
    def certified(self) -> bool:
        return self.bound > 0


@dataclass
class ControlResult:
    status: SolveStatus
    kappa: Dict[str, Fraction] = field(default_factory=dict)
    lower: Optional[CertificateInstance] = None
    upper: Optional[CertificateInstance] = None
    reason: Optional[str] = None


def fix_bound(system: RelaxedSystem, value: Fraction) -> RelaxedSystem:
    """Substitute a candidate value for the bound unknown."""
    binding = {BOUND_SYMBOL: value}
    return RelaxedSystem(
        unknowns=tuple(
            (name, kind)
            for name, kind in system.unknowns
            if name != BOUND_SYMBOL
        ),
        equations=system.equations,
        multipliers=system.multipliers,
        side=tuple(
            replace(side, expr=side.expr.partial_evaluate(binding))
            for side in system.side
        ),
    )


def solve_with_retry(
    relaxed: RelaxedSystem,
    executor: SolverExecutor,
    grid_bits: Optional[int] = None,
) -> SolveResult:
    """Query once; on an irrational model query again on a rational grid."""
    result = executor.run(emit_smtlib(relaxed))
    if result.status == SolveStatus.UNKNOWN and result.reason == IRRATIONAL:
        bits = grid_bits or settings.rational_grid_bits
        logger.warning(
            f"[SOLVER] irrational model; retrying on the 2^-{bits} grid"
        )
        retry = executor.run(emit_smtlib(relaxed, grid_bits=bits))
        retry.wall_time += result.wall_time
        return retry
    return result


def _certify(
    p: ProductModel,
    templates: TemplateSet,
    assignment: Dict[str, Fraction],
    bound: Fraction,
    D: int,
) -> Optional[CertificateInstance]:
    completed = {
        name: Fraction(0)
        for name in templates.symbol_table().names("coefficient")
    }
    # unknowns a solver leaves out of its model are unconstrained
    completed.update(assignment)
    try:
        instance = instantiate(templates, completed, p=bound)
    except InvalidInputError as err:
        logger.warning(f"[BISECT] solver model unusable: {err.detail}")
        return None
    # the solution may certify more than the query asked for
    instance.bound = max(bound, 1 - instance.initial_value(p))
    verdict = check_certificate(instance, p, D)
    if not verdict.is_valid:
        logger.warning(
            f"[BISECT] certificate at {bound} rejected: {verdict.describe()}"
        )
        return None
    return instance


def optimize_bound(
    p: ProductModel,
    templates: TemplateSet,
    tol: Optional[Fraction] = None,
    executor: Optional[SolverExecutor] = None,
    D: Optional[int] = None,
    system: Optional[ConstraintSystem] = None,
) -> BoundResult:
    """Largest certified lower bound on the acceptance probability."""
    tol = tol if tol is not None else settings.tol_value
    if tol <= 0:
        raise InvalidInputError("tolerance must be positive")
    executor = executor or SolverExecutor()
    D = D if D is not None else max(templates.degree, 2)
    system = system or generate_system(p, templates)
    relaxed = system.relax(D)

    best = trivial_instance(
        p, {name: lower for name, (lower, _) in p.base.control_box.items()}
    )
    lower, upper = Fraction(0), Fraction(1)
    queries: List[Query] = []
    lowest_failure: Optional[Fraction] = None
    candidate = upper
    while upper - lower > tol:
        result = solve_with_retry(fix_bound(relaxed, candidate), executor)
        query = Query(
            candidate, result.status, result.reason, None, result.wall_time
        )
        queries.append(query)
        certificate = None
        if result.is_sat:
            certificate = _certify(
                p, templates, result.assignment, candidate, D
            )
        if certificate is not None:
            query.certified = certificate.bound
            if lowest_failure is not None and candidate > lowest_failure:
                logger.warning(
                    f"[BISECT] sat at {candidate} above failed query "
                    f"{lowest_failure}; solver incompleteness"
                )
            if certificate.bound > best.bound:
                best = certificate
            lower = max(lower, certificate.bound)
            if lower >= upper:
                break
        else:
            upper = candidate
            if lowest_failure is None or candidate < lowest_failure:
                lowest_failure = candidate
        logger.info(
            f"[BISECT] query {float(candidate):.4f}: {result.status.value}"
            f" -> bracket [{float(lower):.4f}, {float(upper):.4f}]"
        )
        candidate = (lower + upper) / 2
    outcome = BoundResult(best.bound, best, queries, (lower, upper))
    if outcome.inconclusive:
        logger.warning(
            f"[BISECT] every query was inconclusive; bracket {lower}..{upper}"
        )
    return outcome


def synthesize_control(
    p_lower: ProductModel,
    templates_lower: TemplateSet,
    p_upper: ProductModel,
    templates_upper: TemplateSet,
    targets: Tuple[Fraction, Fraction],
    executor: Optional[SolverExecutor] = None,
    D: Optional[int] = None,
) -> ControlResult:
    """One query for parameters meeting ``lo <= P(phi) <= hi``.

    The upper target is certified as a lower bound ``1 - hi`` on the
    negated specification; the two systems share only the parameters.
    """
    lo, hi = targets
    if not 0 <= lo <= hi <= 1:
        raise InvalidInputError(
            f"targets [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1"
        )
    if not p_lower.base.params:
        raise InvalidInputError("control synthesis needs model parameters")
    executor = executor or SolverExecutor()
    D = D if D is not None else max(templates_lower.degree, 2)
    kappa_names = p_lower.base.param_names
    lower_system = fix_bound(
        generate_system(p_lower, templates_lower).relax(D), lo
    )
    upper_system = fix_bound(
        generate_system(p_upper, templates_upper).relax(D), 1 - hi
    ).renamed(NEGATION_PREFIX, keep=kappa_names)
    joint = lower_system.merged(upper_system)
    result = solve_with_retry(joint, executor)
    if not result.is_sat:
        return ControlResult(result.status, reason=result.reason)

    assignment = result.assignment
    kappa = {name: assignment[name] for name in kappa_names}
    upper_assignment = {
        name[len(NEGATION_PREFIX):]: value
        for name, value in assignment.items()
        if name.startswith(NEGATION_PREFIX)
    }
    upper_assignment.update(kappa)
    certificates = []
    for product, templates, values, bound in (
        (p_lower, templates_lower, assignment, lo),
        (p_upper, templates_upper, upper_assignment, 1 - hi),
    ):
        instance = _certify(product, templates, values, bound, D)
        if instance is None:
            return ControlResult(
                SolveStatus.UNKNOWN, kappa, reason="certificate rejected"
            )
        certificates.append(instance)
    logger.info(f"[SYNTH] parameters {kappa} meet [{lo}, {hi}]")
    return ControlResult(
        SolveStatus.SAT, kappa, certificates[0], certificates[1]
    )
