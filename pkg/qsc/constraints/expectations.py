"""Closed-form post- and init-expectations of value templates.

The exponential atom ``c * a^(x - o)`` is carried by the coordinate
``exp.t`` standing for ``a^(x - o)``; a step ``x + s`` turns it into
``t * a^s``. With an unknown base every claim is scaled by ``a^k`` so that
negative steps leave a polynomial.
"""

import math
from typing import List, Optional

from qsc.algebra.polyhedron import Polyhedron
from qsc.algebra.polynomial import Polynomial
from qsc.certificate.templates import ExponentialAtom, ValueTemplate
from qsc.core.consts import EXP_T_SYMBOL
from qsc.core.exceptions import UnsupportedTemplateError
from qsc.model.model import Model, ProbBranch
from qsc.product.product import ProductModel, RefinedCommand

T = Polynomial.var(EXP_T_SYMBOL)


def clearing_power(p: ProductModel, atom: Optional[ExponentialAtom]) -> int:
    """Smallest ``k`` making every ``a^(k + step)`` a polynomial."""
    if atom is None or atom.base.is_constant:
        return 0
    steps = [
        branch.step(atom.variable, rc.cell)
        for q in p.states
        for rc in p.refined(q)
        for branch in rc.branches
        if not branch.weight.is_zero
    ]
    return max(0, -int(min((s for s in steps if s is not None), default=0)))


def base_power(atom: ExponentialAtom, exponent: int) -> Polynomial:
    if atom.base.is_constant:
        return Polynomial.constant(atom.base.constant_value**exponent)
    if exponent < 0:
        raise UnsupportedTemplateError(
            "negative power of an unknown exponential base"
        )
    return atom.base**exponent


def scaled_value(
    V: ValueTemplate,
    q: str,
    atom: Optional[ExponentialAtom] = None,
    clearing: int = 0,
) -> Polynomial:
    """``a^k * V(s, q)`` with the exponential part written over ``exp.t``."""
    value = V.poly(q)
    coefficient = V.exp_coefficient(q)
    if atom is not None and not coefficient.is_zero:
        value = value + coefficient * T
    if atom is not None and clearing:
        value = value * base_power(atom, clearing)
    return value


def branch_value(
    p: ProductModel,
    V: ValueTemplate,
    refined_command: RefinedCommand,
    branch: ProbBranch,
    atom: Optional[ExponentialAtom] = None,
    clearing: int = 0,
) -> Polynomial:
    """``a^k * V(u_b(s), q')`` for one branch of the refined command."""
    target = refined_command.target
    scale = (
        base_power(atom, clearing)
        if atom is not None and clearing
        else Polynomial.one()
    )
    value = V.poly(target).substitute(branch.update_map(p.variables)) * scale
    coefficient = V.exp_coefficient(target)
    if atom is not None and not coefficient.is_zero:
        step = branch.step(atom.variable, refined_command.cell)
        if step is None or step.denominator != 1:
            raise UnsupportedTemplateError(
                f"exponential atom needs integer steps of {atom.variable}"
            )
        value = value + coefficient * T * base_power(
            atom, clearing + int(step)
        )
    return value


def post_expectation(
    p: ProductModel,
    V: ValueTemplate,
    q: str,
    refined_command: RefinedCommand,
    atom: Optional[ExponentialAtom] = None,
    clearing: int = 0,
) -> Polynomial:
    """``a^k * sum_b w_b * V(u_b(s), q')`` for the refined command at ``q``."""
    if refined_command.q != q:
        raise ValueError(
            f"refined command {refined_command.describe()} is not at {q}"
        )
    total = Polynomial.zero()
    for branch in refined_command.branches:
        if branch.weight.is_zero:
            continue
        total = total + branch.weight * branch_value(
            p, V, refined_command, branch, atom, clearing
        )
    return total


def successor_values(
    p: ProductModel, V: ValueTemplate, refined_command: RefinedCommand
) -> List[Polynomial]:
    """``V(u_b(s), q')`` for every branch with non-zero weight."""
    poly = V.poly(refined_command.target)
    return [
        poly.substitute(branch.update_map(p.variables))
        for branch in refined_command.branches
        if not branch.weight.is_zero
    ]


def init_expectation(
    V0: ValueTemplate,
    m: Model,
    q0: str,
    atom: Optional[ExponentialAtom] = None,
) -> Polynomial:
    """``V0`` at the Dirac initial state, a polynomial in the unknowns."""
    state = m.initial_state
    value = V0.poly(q0).partial_evaluate(state)
    coefficient = V0.exp_coefficient(q0)
    if atom is not None and not coefficient.is_zero:
        exponent = state[atom.variable] - atom.offset
        if exponent.denominator != 1:
            raise UnsupportedTemplateError(
                f"initial {atom.variable} is not an integer"
            )
        value = value + coefficient * base_power(atom, int(exponent))
    return value


def exp_range(atom: ExponentialAtom, domain: Polyhedron) -> List[Polynomial]:
    """Facets bounding ``exp.t`` over the ``x``-range of ``domain``.

    Only the fixed constraints of ``domain`` are used, so the range may be
    looser than the domain itself. An open upper end of ``x`` leaves
    ``exp.t >= 0``; an open lower end leaves ``exp.t`` unbounded above.
    """
    fixed = Polyhedron(
        tuple(
            c
            for c in domain.constraints
            if set(c.variables) <= set(domain.coordinates)
        ),
        domain.coordinates,
    )
    try:
        lower, upper = fixed.bounds(atom.variable)
    except ValueError:
        return [Polynomial.constant(-1)]
    # a < 1, so a^(x - o) decreases in x
    forms = []
    if upper is None:
        forms.append(T)
    else:
        forms.append(
            T - base_power(atom, int(math.floor(upper) - atom.offset))
        )
    if lower is not None:
        low = math.ceil(lower) - atom.offset
        if low < 0 and not atom.base.is_constant:
            raise UnsupportedTemplateError(
                f"{atom.variable} drops below the exponential offset "
                f"{atom.offset}"
            )
        forms.append(base_power(atom, int(low)) - T)
    return forms

