"""SMT-LIB 2 rendering of relaxed constraint systems."""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from qsc.algebra.polynomial import Polynomial
from qsc.constraints.system import Relation, RelaxedSystem

QF_NRA = "QF_NRA"
QF_NIRA = "QF_NIRA"

# Powers above this exponent go through auxiliary unknowns.
INLINE_POWER = 4

_SYMBOL_CHARS = r"A-Za-z~!@$%^&*_+=<>.?/\-"
_SIMPLE_SYMBOL = re.compile(rf"^[{_SYMBOL_CHARS}][0-9{_SYMBOL_CHARS}]*$")


def symbol(name: str) -> str:
    return name if _SIMPLE_SYMBOL.match(name) else f"|{name}|"


def rational(value: Fraction) -> str:
    magnitude = abs(value)
    if magnitude.denominator == 1:
        text = f"{magnitude.numerator}.0"
    else:
        text = f"(/ {magnitude.numerator}.0 {magnitude.denominator}.0)"
    return f"(- {text})" if value < 0 else text


@dataclass
class SmtScript:
    logic: str = QF_NRA
    declarations: List[str] = field(default_factory=list)
    assertions: List[str] = field(default_factory=list)
    comments: List[str] = field(default_factory=list)
    unknowns: List[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        lines = [f"; {comment}" for comment in self.comments]
        lines.append("(set-option :produce-models true)")
        lines.append(f"(set-logic {self.logic})")
        lines.extend(self.declarations)
        lines.extend(self.assertions)
        lines.append("(check-sat)")
        if self.unknowns:
            names = " ".join(symbol(name) for name in self.unknowns)
            lines.append(f"(get-value ({names}))")
        return "\n".join(lines) + "\n"


class _Renderer:
    def __init__(self) -> None:
        self.powers: Dict[Tuple[str, int], str] = {}

    def power(self, name: str, exponent: int) -> str:
        if exponent == 1:
            return symbol(name)
        if exponent <= INLINE_POWER:
            return "(* " + " ".join([symbol(name)] * exponent) + ")"
        key = (name, exponent)
        if key not in self.powers:
            self.powers[key] = f"pow.{name}.{exponent}"
            if exponent % 2:
                self.power(name, exponent - 1)
            else:
                self.power(name, exponent // 2)
        return symbol(self.powers[key])

    def definition(self, name: str, exponent: int) -> str:
        half = exponent // 2
        if exponent % 2:
            body = f"(* {self.power(name, exponent - 1)} {symbol(name)})"
        else:
            body = f"(* {self.power(name, half)} {self.power(name, half)})"
        return f"(= {symbol(self.powers[(name, exponent)])} {body})"

    def term(
        self, names: Tuple[str, ...], monomial, coefficient: Fraction
    ) -> str:
        factors = [
            self.power(name, power)
            for name, power in zip(names, monomial)
            if power
        ]
        if not factors:
            return rational(coefficient)
        if coefficient != 1:
            factors.insert(0, rational(coefficient))
        return factors[0] if len(factors) == 1 else f"(* {' '.join(factors)})"

    def polynomial(self, poly: Polynomial) -> str:
        terms = [
            self.term(poly.variables, monomial, coefficient)
            for monomial, coefficient in poly.items()
        ]
        if not terms:
            return "0.0"
        return terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"


def emit_smtlib(
    system: RelaxedSystem, grid_bits: Optional[int] = None
) -> SmtScript:
    """Render ``system``; byte-identical for identical inputs.

    With ``grid_bits`` every template unknown is pinned to a multiple of
    ``2^-grid_bits`` through an integer numerator.
    """
    renderer = _Renderer()
    script = SmtScript(logic=QF_NIRA if grid_bits else QF_NRA)
    script.comments.append(
        f"{len(system.unknowns)} unknown(s), {len(system.multipliers)} "
        f"multiplier(s), {len(system.equations)} equation(s)"
    )
    declared: Set[str] = set()

    def declare(name: str, sort: str = "Real") -> None:
        if name not in declared:
            declared.add(name)
            script.declarations.append(
                f"(declare-const {symbol(name)} {sort})"
            )

    for name, _ in system.unknowns:
        declare(name)
        script.unknowns.append(name)
    for name in system.multipliers:
        declare(name)

    body: List[str] = []
    tag = None
    for equation_tag, equation in system.equations:
        if equation_tag != tag:
            body.append(f"; {equation_tag}")
            tag = equation_tag
        body.append(f"(assert (= {renderer.polynomial(equation)} 0.0))")
    if system.multipliers:
        body.append("; multipliers")
        body.extend(
            f"(assert (>= {symbol(name)} 0.0))" for name in system.multipliers
        )
    tag = None
    for side in system.side:
        if side.tag != tag:
            body.append(f"; {side.tag}")
            tag = side.tag
        operator = "=" if side.relation == Relation.EQ else side.relation.value
        body.append(
            f"(assert ({operator} {renderer.polynomial(side.expr)} 0.0))"
        )
    if grid_bits:
        scale = 2**grid_bits
        body.append(f"; rational grid 2^-{grid_bits}")
        for name, _ in system.unknowns:
            numerator = f"grid.{name}"
            declare(numerator, "Int")
            body.append(
                f"(assert (= (* {scale}.0 {symbol(name)}) "
                f"(to_real {symbol(numerator)})))"
            )

    if renderer.powers:
        definitions = ["; powers"]
        for name, exponent in sorted(renderer.powers):
            declare(renderer.powers[(name, exponent)])
            definitions.append(
                f"(assert {renderer.definition(name, exponent)})"
            )
        body = definitions + body
    script.assertions.extend(body)
    return script
