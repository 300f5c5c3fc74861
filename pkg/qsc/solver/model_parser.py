"""Reading solver answers: a status line plus a ``(get-value ...)`` list.

The value list is read with pysmt's SMT-LIB parser against the declared
unknowns; algebraic numbers are rejected before parsing.
"""

import io
import logging
import re
from fractions import Fraction
from typing import Any, Dict, Iterable

from pysmt.environment import Environment
from pysmt.exceptions import PysmtException
from pysmt.fnode import FNode
from pysmt.smtlib.parser import SmtLibParser

from qsc.core.exceptions import SolverError
from qsc.schemas.solve_result import SolveResult, SolveStatus
from qsc.solver.smtlib import symbol

logger = logging.getLogger(__name__)

IRRATIONAL = "irrational model"

# z3 prints root-obj terms, and approximations ending in '?'
_ALGEBRAIC = re.compile(r"root-obj|\d\?")
_ERROR = re.compile(r'^\(error\s+"?(?P<reason>.*?)"?\)$', re.DOTALL)


class IrrationalValue(Exception):
    """A model value that is not a rational number."""


def _constant(value: Any) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def exact_value(node: FNode) -> Fraction:
    """Exact value of a numeric model term."""
    if node.is_constant():
        return _constant(node.constant_value())
    args = [exact_value(arg) for arg in node.args()]
    if node.is_toreal():
        return args[0]
    if node.is_plus():
        return sum(args, Fraction(0))
    if node.is_minus():
        return args[0] - args[1]
    if node.is_times():
        result = Fraction(1)
        for arg in args:
            result *= arg
        return result
    if node.is_div():
        return args[0] / args[1]
    raise IrrationalValue(str(node))


def parse_values(text: str, unknowns: Iterable[str]) -> Dict[str, Fraction]:
    """Pairs of a ``get-value`` response over real ``unknowns``."""
    parser = SmtLibParser(environment=Environment())
    declarations = "".join(
        f"(declare-fun {symbol(name)} () Real)\n" for name in unknowns
    )
    try:
        parser.get_script(io.StringIO(declarations))
        pairs = parser.get_assignment_list(io.StringIO(text))
    except PysmtException as err:
        raise SolverError(f"unreadable solver values: {err}")
    return {name.symbol_name(): exact_value(value) for name, value in pairs}


def parse_output(
    text: str, wall_time: float = 0.0, unknowns: Iterable[str] = ()
) -> SolveResult:
    """Parse solver stdout into a :class:`SolveResult`."""
    stripped = text.strip()
    if not stripped:
        return SolveResult.unknown("empty solver output", wall_time)
    status, _, rest = stripped.partition("\n")
    status = status.strip()
    if status == SolveStatus.UNSAT.value:
        return SolveResult(status=SolveStatus.UNSAT, wall_time=wall_time)
    if status != SolveStatus.SAT.value:
        match = _ERROR.match(status)
        reason = match["reason"] if match else status
        return SolveResult.unknown(reason, wall_time)
    if _ALGEBRAIC.search(rest):
        logger.warning("[SOLVER] non-rational model value")
        return SolveResult.unknown(IRRATIONAL, wall_time)
    try:
        assignment = parse_values(rest, unknowns) if rest.strip() else {}
    except IrrationalValue as err:
        logger.warning(f"[SOLVER] non-rational model value {err}")
        return SolveResult.unknown(IRRATIONAL, wall_time)
    return SolveResult(
        status=SolveStatus.SAT, assignment=assignment, wall_time=wall_time
    )
