"""Exact linear programming over polynomials of degree one."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence

import sympy
from sympy.solvers.simplex import (
    InfeasibleLPError,
    UnboundedLPError,
    lpmin,
)

from qsc.algebra.polynomial import Polynomial

logger = logging.getLogger(__name__)

_FEASIBILITY_SLACK = "lp.slack"


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    value: Optional[Fraction] = None
    point: Dict[str, Fraction] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status != LpStatus.INFEASIBLE


def to_rational(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def from_rational(value: sympy.Expr) -> Fraction:
    rational = sympy.Rational(value)
    return Fraction(int(rational.p), int(rational.q))


def to_sympy(
    poly: Polynomial, symbols: Mapping[str, sympy.Symbol]
) -> sympy.Expr:
    expr = sympy.Integer(0)
    for monomial, coefficient in poly.items():
        term = to_rational(coefficient)
        for name, power in zip(poly.variables, monomial):
            if power:
                term = term * symbols[name] ** power
        expr = expr + term
    return expr


def _symbols_for(polys: Iterable[Polynomial]) -> Dict[str, sympy.Symbol]:
    names = set()
    for poly in polys:
        names.update(poly.variables)
    return {name: sympy.Symbol(name, real=True) for name in sorted(names)}


def minimize(
    objective: Polynomial,
    nonnegative: Sequence[Polynomial] = (),
    zero: Sequence[Polynomial] = (),
) -> LpResult:
    """Minimize an affine objective subject to ``p >= 0`` and ``q == 0``.

    Variables are free unless constrained. Constant constraints are decided
    directly and never reach the simplex routine.
    """
    for poly in list(nonnegative) + list(zero):
        if poly.degree > 1:
            raise ValueError(f"constraint {poly} is not affine")
    if objective.degree > 1:
        raise ValueError(f"objective {objective} is not affine")
    for poly in nonnegative:
        if poly.is_constant and poly.constant_value < 0:
            return LpResult(LpStatus.INFEASIBLE)
    for poly in zero:
        if poly.is_constant and poly.constant_value != 0:
            return LpResult(LpStatus.INFEASIBLE)

    symbols = _symbols_for([objective, *nonnegative, *zero])
    constraints = [
        to_sympy(poly, symbols) >= 0
        for poly in nonnegative
        if not poly.is_constant
    ]
    constraints += [
        sympy.Eq(to_sympy(poly, symbols), 0)
        for poly in zero
        if not poly.is_constant
    ]
    if objective.is_constant:
        # lpmin needs a symbol to optimize; a bounded slack keeps the
        # optimum finite whenever the constraints are feasible.
        slack = sympy.Symbol(_FEASIBILITY_SLACK, real=True)
        target = slack
        constraints.append(slack >= 0)
    else:
        target = to_sympy(objective, symbols)
    if not constraints:
        if objective.is_constant:
            return LpResult(LpStatus.OPTIMAL, objective.constant_value)
        return LpResult(LpStatus.UNBOUNDED)
    try:
        value, solution = lpmin(target, constraints)
    except InfeasibleLPError:
        return LpResult(LpStatus.INFEASIBLE)
    except UnboundedLPError:
        return LpResult(LpStatus.UNBOUNDED)
    point = {
        str(symbol): from_rational(solved)
        for symbol, solved in solution.items()
        if str(symbol) != _FEASIBILITY_SLACK
    }
    if objective.is_constant:
        return LpResult(
            LpStatus.OPTIMAL, objective.constant_value, point
        )
    return LpResult(LpStatus.OPTIMAL, from_rational(value), point)


def maximize(
    objective: Polynomial,
    nonnegative: Sequence[Polynomial] = (),
    zero: Sequence[Polynomial] = (),
) -> LpResult:
    result = minimize(-objective, nonnegative, zero)
    if result.value is None:
        return result
    return LpResult(result.status, -result.value, result.point)


def is_feasible(
    nonnegative: Sequence[Polynomial], zero: Sequence[Polynomial] = ()
) -> bool:
    return minimize(Polynomial.zero(), nonnegative, zero).feasible
