"""Text to polynomial and guard conversion.

Arithmetic text is parsed with sympy and converted exactly: decimal
literals are rationalized, ``^`` is exponentiation and every name must be
declared by the caller.
"""

import re
from fractions import Fraction
from typing import AbstractSet, Iterable, List, Optional, Sequence

import sympy
from sympy.polys.polyerrors import CoercionFailed, PolynomialError
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    rationalize,
    standard_transformations,
)

from qsc.algebra.polyhedron import LinearConstraint, Polyhedron
from qsc.algebra.polynomial import Polynomial
from qsc.core.exceptions import InvalidInputError

_TRANSFORMATIONS = standard_transformations + (convert_xor, rationalize)

_COMPARISON = re.compile(r"(<=|>=|==|=|<|>)")
_CONJUNCTION = re.compile(r"\s*(?:&&|\band\b|∧|&|,)\s*")
_INFINITY = {"inf", "+inf", "infinity", "oo"}


def parse_polynomial(text: str, names: Iterable[str]) -> Polynomial:
    """Parse arithmetic text over ``names`` into an exact polynomial."""
    allowed = sorted(set(names))
    symbols = {name: sympy.Symbol(name) for name in allowed}
    try:
        expr = parse_expr(
            text.strip(),
            local_dict=dict(symbols),
            transformations=_TRANSFORMATIONS,
            evaluate=True,
        )
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as err:
        raise InvalidInputError(f"cannot parse expression '{text}': {err}")
    return sympy_to_polynomial(expr, allowed, text)


def sympy_to_polynomial(
    expr: sympy.Expr, names: Sequence[str], text: str = ""
) -> Polynomial:
    if not isinstance(expr, sympy.Expr):
        raise InvalidInputError(f"'{text}' is not an arithmetic expression")
    unknown = sorted(
        str(s) for s in expr.free_symbols if str(s) not in set(names)
    )
    if unknown:
        raise InvalidInputError(
            f"unknown symbol(s) {', '.join(unknown)} in '{text}'"
        )
    gens = sorted(expr.free_symbols, key=str)
    if not gens:
        try:
            value = sympy.Rational(sympy.nsimplify(expr, rational=True))
        except (TypeError, ValueError):
            raise InvalidInputError(f"'{text}' is not a rational constant")
        if not value.is_Rational:
            raise InvalidInputError(f"'{text}' is not a rational constant")
        return Polynomial.constant(Fraction(int(value.p), int(value.q)))
    try:
        poly = sympy.Poly(expr, *gens, domain="QQ")
    except (PolynomialError, CoercionFailed) as err:
        raise InvalidInputError(f"'{text}' is not a polynomial: {err}")
    variables = tuple(str(g) for g in gens)
    terms = {
        tuple(monomial): Fraction(
            int(coefficient.numerator), int(coefficient.denominator)
        )
        for monomial, coefficient in poly.terms()
    }
    return Polynomial(variables, terms)


def parse_number(text: str) -> Fraction:
    return parse_polynomial(text, ()).constant_value


def parse_bound(text: str) -> Optional[Fraction]:
    """A rational bound, or ``None`` for an infinite one."""
    cleaned = text.strip().lower()
    if cleaned in _INFINITY or cleaned in {f"-{i}" for i in _INFINITY}:
        return None
    return parse_number(text)


def parse_constraints(
    text: str,
    names: Iterable[str],
    integer_vars: AbstractSet[str],
) -> List[LinearConstraint]:
    """Parse a conjunction of (possibly chained) comparisons.

    Strict comparisons become ``c - 1 >= 0`` over integer-valued forms
    and fall back to the closure otherwise. ``true`` is the empty
    conjunction.
    """
    names = list(names)
    stripped = text.strip()
    if stripped.lower() in {"", "true"}:
        return []
    if stripped.lower() == "false":
        return [LinearConstraint(Polynomial.constant(-1))]
    constraints: List[LinearConstraint] = []
    for atom in _CONJUNCTION.split(stripped):
        if not atom:
            continue
        parts = _COMPARISON.split(atom)
        if len(parts) < 3:
            raise InvalidInputError(f"'{atom}' is not a comparison")
        operands = [parse_polynomial(part, names) for part in parts[0::2]]
        for left, operator, right in zip(
            operands, parts[1::2], operands[1:]
        ):
            constraints.extend(
                _comparison(left, operator, right, integer_vars, atom)
            )
    for constraint in constraints:
        if constraint.form.degree > 1:
            raise InvalidInputError(f"'{text}' is not a linear guard")
    return constraints


def _comparison(
    left: Polynomial,
    operator: str,
    right: Polynomial,
    integer_vars: AbstractSet[str],
    text: str,
) -> List[LinearConstraint]:
    if operator in ("=", "=="):
        return [LinearConstraint(left - right), LinearConstraint(right - left)]
    if operator == ">=":
        return [LinearConstraint(left - right)]
    if operator == "<=":
        return [LinearConstraint(right - left)]
    if operator == ">":
        return [LinearConstraint.strict(left - right, integer_vars)]
    if operator == "<":
        return [LinearConstraint.strict(right - left, integer_vars)]
    raise InvalidInputError(f"unknown comparison '{operator}' in '{text}'")


def parse_guard(
    text: str,
    coordinates: Sequence[str],
    integer_vars: AbstractSet[str],
) -> Polyhedron:
    return Polyhedron(
        tuple(parse_constraints(text, coordinates, integer_vars)),
        tuple(coordinates),
    )
