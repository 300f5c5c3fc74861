"""Finite truncations of integer product chains.

States inside a box are enumerated exactly; a transition that leaves the
box is first resolved against the exterior ray it lands on, and only when
that fails is it sent to one of two absorbing boundary states.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import (
    Dict,
    FrozenSet,
    Hashable,
    List,
    Mapping,
    Optional,
    Tuple,
)

import networkx as nx

from qsc.algebra.polyhedron import Polyhedron
from qsc.algebra.polynomial import Polynomial
from qsc.core.config import settings
from qsc.core.consts import BoundaryMode
from qsc.core.exceptions import InvalidInputError
from qsc.product.product import ProductModel

logger = logging.getLogger(__name__)

BOUNDARY_ACCEPT = "BoundaryAccept"
BOUNDARY_REJECT = "BoundaryReject"

Box = Mapping[str, Tuple[int, int]]
ChainState = Hashable


@dataclass
class FiniteChain:
    """Exact sparse Markov chain with Streett pairs over state indices."""

    states: Tuple[ChainState, ...]
    transitions: Tuple[Dict[int, Fraction], ...]
    pairs: Tuple[Tuple[FrozenSet[int], FrozenSet[int]], ...]
    initial: int
    variables: Tuple[str, ...] = ()
    resolved_exits: int = 0
    boundary_exits: int = 0
    _index: Dict[ChainState, int] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        self._index = {state: i for i, state in enumerate(self.states)}
        for i, row in enumerate(self.transitions):
            total = sum(row.values(), Fraction(0))
            if total != 1:
                raise ValueError(
                    f"row of {self.states[i]} sums to {total}, not 1"
                )

    def __len__(self) -> int:
        return len(self.states)

    def index(self, state: ChainState) -> int:
        return self._index[state]

    def find(self, state: ChainState) -> Optional[int]:
        return self._index.get(state)

    @property
    def accept(self) -> int:
        return self._index[BOUNDARY_ACCEPT]

    @property
    def reject(self) -> int:
        return self._index[BOUNDARY_REJECT]

    @property
    def product_size(self) -> int:
        return len(self.states) - 2

    def graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(len(self.states)))
        for source, row in enumerate(self.transitions):
            graph.add_edges_from(
                (source, target) for target, weight in row.items() if weight
            )
        return graph

    def state_key(
        self, values: Mapping[str, Fraction], q: str
    ) -> ChainState:
        return tuple(values[name] for name in self.variables), q


def _box_polyhedron(p: ProductModel, box: Box) -> Polyhedron:
    unknown = sorted(set(box) - set(p.variables))
    if unknown:
        raise InvalidInputError(f"box names unknown variable(s) {unknown}")
    bounds = {
        name: (Polynomial.constant(lo), Polynomial.constant(hi))
        for name, (lo, hi) in box.items()
    }
    region = Polyhedron.box(bounds, p.variables).intersect(
        p.base.space.domain
    )
    for name in p.variables:
        if not region.is_bounded_in(name):
            raise InvalidInputError(
                f"truncation box leaves variable '{name}' unbounded"
            )
    return region


def suggest_box(p: ProductModel, cap: int) -> Dict[str, Tuple[int, int]]:
    """A box around the initial state small enough for ``cap`` states."""
    start = p.base.initial_state
    per_state = max(1, cap // max(1, len(p.states)))
    radius = max(1, int(per_state ** (1 / max(1, len(p.variables)))) // 2)
    return {
        name: (int(start[name]) - radius, int(start[name]) + radius)
        for name in p.variables
    }


def _box_text(box: Box) -> str:
    return ", ".join(f"{name}:[{lo},{hi}]" for name, (lo, hi) in box.items())


class _ExitResolver:
    """Exact verdicts for runs that leave the box along a ray.

    A single-variable model whose exterior ray is covered by one command,
    mapped into itself by every branch and label-constant for every atom
    drives the automaton through a deterministic lasso.
    """

    def __init__(self, p: ProductModel, region: Polyhedron) -> None:
        self.p = p
        self.region = region
        self.cache: Dict[Tuple[int, str], Optional[bool]] = {}
        self.enabled = len(p.variables) == 1
        self.bounds = region.bounds(p.variables[0]) if self.enabled else None

    def verdict(
        self, successor: Mapping[str, Fraction], q: str
    ) -> Optional[bool]:
        if not self.enabled:
            return None
        name = self.p.variables[0]
        lower, upper = self.bounds
        if upper is not None and successor[name] > upper:
            direction = 1
        elif lower is not None and successor[name] < lower:
            direction = -1
        else:
            return None
        key = (direction, q)
        if key not in self.cache:
            self.cache[key] = self._resolve(name, direction, q)
        return self.cache[key]

    def _ray(self, name: str, direction: int) -> Polyhedron:
        lower, upper = self.bounds
        variable = Polynomial.var(name)
        form = (
            variable - (upper + 1) if direction > 0 else (lower - 1) - variable
        )
        return self.p.base.space.domain.intersect(
            Polyhedron.from_forms([form], self.p.variables)
        )

    def _resolve(self, name: str, direction: int, q: str) -> Optional[bool]:
        integer = self.p.integer_vars
        ray = self._ray(name, direction)
        if ray.is_empty():
            return None
        command = next(
            (
                c
                for c in self.p.base.commands
                if not ray.intersect(c.guard).is_empty()
            ),
            None,
        )
        if command is None or not ray.is_subset_of(command.guard, integer):
            return None
        for branch in command.branches:
            if branch.weight.is_zero:
                continue
            step = branch.offset(name)
            if step is None or step * direction < 0:
                return None
        label = set()
        for prop in self.p.props:
            if ray.is_subset_of(prop.predicate, integer):
                label.add(prop)
            elif not ray.intersect(prop.predicate).is_empty():
                return None
        label = frozenset(label)
        automaton = self.p.automaton
        seen: Dict[str, int] = {}
        trace: List[str] = []
        state = q
        while state not in seen:
            seen[state] = len(trace)
            trace.append(state)
            state = automaton.step(state, label)
        recurring = set(trace[seen[state]:])
        accepted = all(pair.accepts(recurring) for pair in self.p.pairs_lifted)
        logger.debug(
            f"[ORACLE] exit {'above' if direction > 0 else 'below'} in {q}: "
            f"{'accepting' if accepted else 'rejecting'} lasso"
        )
        return accepted


def truncate(
    p: ProductModel,
    box: Box,
    kappa: Optional[Mapping[str, Fraction]] = None,
    boundary_mode: BoundaryMode = BoundaryMode.PESSIMISTIC,
    memory_cap: Optional[int] = None,
) -> FiniteChain:
    """Exact finite chain of ``p`` restricted to ``box``."""
    memory_cap = memory_cap or settings.memory_cap_states
    if not p.base.space.all_integer:
        raise InvalidInputError(
            "truncation needs integer-valued state variables"
        )
    if p.base.params:
        if kappa is None:
            raise InvalidInputError(
                "truncating a parametric model needs kappa"
            )
        p = p.with_parameters(kappa)
    region = _box_polyhedron(p, box)
    start = p.base.initial_state
    if not region.contains(start):
        raise InvalidInputError(
            f"initial state {start} lies outside the box {_box_text(box)}"
        )

    q_states = p.states
    per_state_cap = max(1, memory_cap // len(q_states))
    try:
        points = list(region.integer_points(per_state_cap))
    except ValueError:
        raise InvalidInputError(
            f"box {_box_text(box)} exceeds the memory cap of {memory_cap} "
            f"states; try {_box_text(suggest_box(p, memory_cap))}"
        )

    names = p.variables
    states: List[ChainState] = [
        (tuple(point[name] for name in names), q)
        for point in points
        for q in q_states
    ]
    states += [BOUNDARY_ACCEPT, BOUNDARY_REJECT]
    index = {state: i for i, state in enumerate(states)}
    accept, reject = index[BOUNDARY_ACCEPT], index[BOUNDARY_REJECT]
    fallback = accept if boundary_mode == BoundaryMode.OPTIMISTIC else reject
    resolver = _ExitResolver(p, region)

    resolved = redirected = 0
    transitions: List[Dict[int, Fraction]] = []
    for state in states[:-2]:
        values, q = state
        point = dict(zip(names, values))
        row: Dict[int, Fraction] = {}
        for weight, successor, target in p.successors(point, q):
            key = (tuple(successor[name] for name in names), target)
            if key in index:
                destination = index[key]
            else:
                verdict = resolver.verdict(successor, target)
                if verdict is None:
                    destination = fallback
                    redirected += 1
                else:
                    destination = accept if verdict else reject
                    resolved += 1
            row[destination] = row.get(destination, Fraction(0)) + weight
        transitions.append(row)
    transitions.append({accept: Fraction(1)})
    transitions.append({reject: Fraction(1)})

    pairs = []
    for pair in p.pairs_lifted:
        F = frozenset(
            i for i, s in enumerate(states[:-2]) if s[1] in pair.F
        )
        G = frozenset(
            i for i, s in enumerate(states[:-2]) if s[1] in pair.G
        ) | {accept}
        pairs.append((F, G))
    # the rejecting boundary violates a pair of its own
    pairs.append((frozenset({reject}), frozenset()))

    chain = FiniteChain(
        states=tuple(states),
        transitions=tuple(transitions),
        pairs=tuple(pairs),
        initial=index[(tuple(start[n] for n in names), p.automaton.initial)],
        variables=names,
        resolved_exits=resolved,
        boundary_exits=redirected,
    )
    logger.info(
        f"[ORACLE] truncated to {chain.product_size} product states "
        f"({boundary_mode.value}); {resolved} exit(s) resolved exactly, "
        f"{redirected} redirected"
    )
    return chain
