"""Synchronous product of a model with a Streett automaton.

The automaton reads the label of the current model state, so the product
successor of ``(s, q)`` is ``(u, T(q, label(s)))`` with ``u`` drawn from
the model kernel at ``s``. Each automaton state gets refined commands:
convex cells on which one model command and one automaton edge fire.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import (
    AbstractSet,
    FrozenSet,
    List,
    Mapping,
    Sequence,
    Tuple,
)

import numpy as np

from qsc.algebra.polyhedron import Polyhedron, disjoint_cells, subtract_all
from qsc.algebra.polynomial import Number
from qsc.core.exceptions import InvalidInputError, TotalityError
from qsc.model.model import Model, ProbBranch, State, sample_step
from qsc.spec.dsa import DSA, StreettPair
from qsc.spec.ltl import (
    And,
    Atom,
    AtomicProposition,
    Const,
    Formula,
    Not,
    Or,
    label_of,
    nnf,
)

logger = logging.getLogger(__name__)

ProductState = Tuple[State, str]


@dataclass(frozen=True)
class RefinedCommand:
    q: str
    command_index: int
    cell: Polyhedron
    target: str
    branches: Tuple[ProbBranch, ...]

    def describe(self) -> str:
        return (
            f"{self.q}/cmd{self.command_index + 1} on [{self.cell}] "
            f"-> {self.target}"
        )


@dataclass(frozen=True)
class ProductModel:
    base: Model
    automaton: DSA
    pairs_lifted: Tuple[StreettPair, ...]
    product_commands: Tuple[Tuple[str, Tuple[RefinedCommand, ...]], ...]
    props: Tuple[AtomicProposition, ...]

    @property
    def states(self) -> Tuple[str, ...]:
        return self.automaton.states

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.base.space.names

    @property
    def integer_vars(self) -> FrozenSet[str]:
        return self.base.space.integer_names

    def refined(self, q: str) -> Tuple[RefinedCommand, ...]:
        return dict(self.product_commands)[q]

    @property
    def initial(self) -> ProductState:
        return self.base.initial_state, self.automaton.initial

    def label(self, state: Mapping[str, Fraction]) -> FrozenSet:
        return label_of(self.props, state)

    def firing(
        self, state: Mapping[str, Fraction], q: str
    ) -> RefinedCommand:
        for command in self.refined(q):
            if command.cell.contains(state):
                return command
        raise TotalityError(
            f"no refined command fires at ({dict(state)}, {q})"
        )

    def successors(
        self, state: Mapping[str, Fraction], q: str
    ) -> List[Tuple[Fraction, State, str]]:
        """Exact successor distribution; requires fixed parameters."""
        command = self.firing(state, q)
        result = []
        for branch in command.branches:
            if branch.weight.is_zero:
                continue
            weight = branch.weight.constant_value
            result.append((weight, branch.apply(state), command.target))
        return result

    def sample(
        self,
        state: Mapping[str, Fraction],
        q: str,
        kappa: Mapping[str, Number],
        rng: np.random.Generator,
    ) -> ProductState:
        successor = sample_step(self.base, state, kappa, rng)
        return successor, self.automaton.step(q, self.label(state))

    def with_parameters(self, kappa: Mapping[str, Number]) -> "ProductModel":
        base = self.base.with_parameters(kappa)
        commands = tuple(
            (
                q,
                tuple(
                    replace(
                        rc,
                        branches=base.commands[rc.command_index].branches,
                    )
                    for rc in refined
                ),
            )
            for q, refined in self.product_commands
        )
        return replace(self, base=base, product_commands=commands)


def guard_cells(
    guard: Formula, domain: Polyhedron, integer_vars: AbstractSet[str]
) -> List[Polyhedron]:
    """Convex cells, possibly overlapping, whose union is the guard region."""
    guard = nnf(guard)
    if isinstance(guard, Const):
        return [domain] if guard.value else []
    if isinstance(guard, Atom):
        cell = domain.intersect(guard.prop.predicate)
        return [] if cell.is_empty() else [cell]
    if isinstance(guard, Not) and isinstance(guard.operand, Atom):
        return domain.subtract(guard.operand.prop.predicate, integer_vars)
    if isinstance(guard, And):
        cells = []
        for left in guard_cells(guard.left, domain, integer_vars):
            cells.extend(guard_cells(guard.right, left, integer_vars))
        return cells
    if isinstance(guard, Or):
        return guard_cells(guard.left, domain, integer_vars) + guard_cells(
            guard.right, domain, integer_vars
        )
    raise InvalidInputError(f"edge guard {guard} is not propositional")


def edge_cells(
    automaton: DSA,
    q: str,
    domain: Polyhedron,
    integer_vars: AbstractSet[str],
) -> List[Tuple[str, List[Polyhedron]]]:
    """First-match firing cells of each edge leaving ``q``."""
    result = []
    earlier: List[Polyhedron] = []
    for edge in automaton.outgoing(q):
        cells = guard_cells(edge.guard, domain, integer_vars)
        firing = subtract_all(
            disjoint_cells(cells, integer_vars), earlier, integer_vars
        )
        result.append((edge.target, firing))
        earlier.extend(cells)
    return result


def compose(m: Model, a: DSA) -> ProductModel:
    names = set(m.space.names)
    for prop in a.atoms:
        used = {v for c in prop.predicate.constraints for v in c.variables}
        stray = used - names
        if stray:
            raise InvalidInputError(
                f"atom {prop.name} uses undeclared variable(s) {sorted(stray)}"
            )
    integer = m.space.integer_names
    domain = m.space.domain
    command_cells = m.command_cells()
    product_commands = []
    for q in a.states:
        refined: List[RefinedCommand] = []
        edges = edge_cells(a, q, domain, integer)
        for index, cells in enumerate(command_cells):
            for cell in cells:
                for target, firing in edges:
                    for edge_cell in firing:
                        region = cell.intersect(edge_cell)
                        if region.is_empty():
                            continue
                        refined.append(
                            RefinedCommand(
                                q,
                                index,
                                region,
                                target,
                                m.commands[index].branches,
                            )
                        )
        product_commands.append((q, tuple(refined)))
        logger.debug(f"[PRODUCT] {q}: {len(refined)} refined command(s)")
    product = ProductModel(
        base=m,
        automaton=a,
        pairs_lifted=a.pairs,
        product_commands=tuple(product_commands),
        props=tuple(a.atoms),
    )
    logger.info(
        f"[PRODUCT] {m.name} x {a.name}: {len(a.states)} automaton state(s), "
        f"{sum(len(r) for _, r in product_commands)} refined command(s)"
    )
    return product


def project(trajectory: Sequence[ProductState]) -> List[State]:
    return [state for state, _ in trajectory]

