"""Independent validation of concrete certificates.

Every implication is first proved by an exact Handelman linear program in
the multipliers. Implications the relaxation cannot prove are enumerated
on their integer points, which either finds an exact counterexample or,
for integer domains, proves the claim pointwise.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Mapping, Optional

from qsc.algebra.linear import is_feasible
from qsc.algebra.polyhedron import Polyhedron
from qsc.algebra.polynomial import Polynomial
from qsc.certificate.instance import CertificateInstance
from qsc.constraints.relaxation import (
    Implication,
    multiplier_names,
    relax_handelman,
)
from qsc.constraints.system import generate_system
from qsc.core.config import settings
from qsc.core.consts import EXP_T_SYMBOL
from qsc.core.exceptions import (
    ConfigurationError,
    FrameEscapeError,
    NonCompactDomainError,
)
from qsc.product.product import ProductModel
from qsc.schemas.verdict import Verdict, VerdictStatus

logger = logging.getLogger(__name__)


def _violated(
    what: str,
    message: str,
    point: Optional[Dict[str, Fraction]] = None,
    value: Optional[Fraction] = None,
) -> Verdict:
    return Verdict(
        status=VerdictStatus.VIOLATED,
        implication=what,
        message=message,
        point=point,
        value=value,
    )


def _parameter_violation(
    inst: CertificateInstance, p: ProductModel
) -> Optional[Verdict]:
    model = p.base
    missing = [name for name in model.param_names if name not in inst.kappa]
    if missing:
        return _violated("kappa-box", f"no value for {', '.join(missing)}")
    for name, (lower, upper) in model.control_box.items():
        value = inst.kappa[name]
        if not lower <= value <= upper:
            return _violated(
                "kappa-box",
                f"{name} = {value} outside [{lower}, {upper}]",
                value=value,
            )
    for command in model.commands:
        for branch in command.branches:
            weight = branch.weight.evaluate(inst.kappa)
            if not 0 <= weight <= 1:
                return _violated(
                    "weight-range",
                    f"weight {branch.weight} is {weight}",
                    value=weight,
                )
    return None


def _lp_proves(imp: Implication, D: int) -> bool:
    relaxed = relax_handelman(imp, D, multiplier_names("chk"))
    nonnegative = [Polynomial.var(name) for name in relaxed.multipliers]
    return is_feasible(nonnegative, list(relaxed.equations))


def _state_domain(imp: Implication, names) -> Polyhedron:
    return Polyhedron(
        tuple(
            c
            for c in imp.domain.constraints
            if EXP_T_SYMBOL not in c.variables
        ),
        tuple(names),
    )


def _grid_value(
    imp: Implication,
    inst: CertificateInstance,
    point: Mapping[str, Fraction],
) -> Fraction:
    values = dict(point)
    if EXP_T_SYMBOL in imp.claim.variables:
        exponent = point[inst.exp_variable] - inst.exp_offset
        values[EXP_T_SYMBOL] = inst.exp_base ** int(exponent)
    return imp.claim.evaluate(values)


def check_certificate(
    inst: CertificateInstance,
    p: ProductModel,
    D: Optional[int] = None,
    grid_cap: Optional[int] = None,
) -> Verdict:
    """Exact verdict on ``inst`` for product ``p``."""
    grid_cap = grid_cap if grid_cap is not None else settings.grid_cap
    degree = D if D is not None else max(inst.degree, 2)
    problem = inst.invalid_constant()
    if problem is not None:
        return _violated(*problem)
    violation = _parameter_violation(inst, p)
    if violation is not None:
        return violation
    templates = inst.to_templates(p)
    fixed = templates.product
    try:
        system = generate_system(
            fixed, templates, eps_min=Fraction(0), m_max=inst.M
        )
    except FrameEscapeError as err:
        return _violated("frame", err.detail, err.point)
    except ConfigurationError as err:
        return Verdict(status=VerdictStatus.INCONCLUSIVE, message=err.detail)

    for side in system.side:
        if not side.holds({}):
            return _violated(
                side.tag,
                f"{side.expr} {side.relation.value} 0 fails",
                value=side.expr.evaluate({}),
            )

    names = fixed.variables
    all_integer = fixed.base.space.all_integer
    verdict = Verdict(status=VerdictStatus.VALID)
    undecided: List[str] = []
    for imp in system.implications:
        try:
            if _lp_proves(imp, degree) or _lp_proves(imp, degree + 1):
                verdict.exact += 1
                continue
        except NonCompactDomainError as err:
            logger.debug(f"[CHECK] {imp.tag}: {err.detail}")
        domain = _state_domain(imp, names)
        try:
            points = list(domain.integer_points(grid_cap))
        except ValueError as err:
            undecided.append(f"{imp.describe()}: {err}")
            continue
        for point in points:
            value = _grid_value(imp, inst, point)
            if value < 0:
                logger.info(
                    f"[CHECK] violated {imp.tag} at {point}: {value}"
                )
                return _violated(
                    f"[{imp.tag}] {imp.where}",
                    f"claim {imp.claim} evaluates to {value}",
                    point,
                    value,
                )
        if not all_integer:
            undecided.append(
                f"{imp.describe()}: real-valued domain not covered by grid"
            )
            continue
        verdict.grid += 1
        message = f"{imp.tag} at {imp.where} proved on the grid only"
        verdict.warnings.append(message)
        logger.warning(f"[CHECK] {message}")

    if undecided:
        return Verdict(
            status=VerdictStatus.INCONCLUSIVE,
            message=f"{len(undecided)} implication(s) undecided; "
            + undecided[0],
            exact=verdict.exact,
            grid=verdict.grid,
            warnings=verdict.warnings,
        )
    logger.info(f"[CHECK] {verdict.describe()}")
    return verdict
