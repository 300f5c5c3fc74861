"""Deterministic Streett automata with predicate-guarded edges.

Edges out of a state are tried in order and the first satisfied guard
wins; the last edge of every state must be guarded by ``true``. A run is
accepting if for every pair ``(F, G)`` it visits ``G`` infinitely often
whenever it visits ``F`` infinitely often.

File format::

    atom low = x <= 10;
    states q0 q1;
    initial q0;
    from q0: [low] -> q1; [true] -> q0;
    from q1: [true] -> q1;
    pair F = {q0, q1} G = {q1};
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import (
    Any,
    Dict,
    FrozenSet,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
)

from textx import TextXSyntaxError, get_location, metamodel_from_str

from qsc.core.exceptions import InvalidInputError, QscSyntaxError
from qsc.model.expressions import parse_guard
from qsc.model.model import StateSpace
from qsc.spec.ltl import (
    TRUE,
    And,
    Atom,
    AtomicProposition,
    Const,
    Not,
    Or,
    Formula,
    Label,
    atoms_of,
    evaluate_guard,
    parse_proposition,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Edge:
    guard: Formula
    target: str

    def __str__(self) -> str:
        return f"[{self.guard}] -> {self.target}"


@dataclass(frozen=True)
class StreettPair:
    F: FrozenSet[str]
    G: FrozenSet[str]

    def accepts(self, infinitely_often: Set[str]) -> bool:
        return not (self.F & infinitely_often) or bool(
            self.G & infinitely_often
        )


@dataclass(frozen=True)
class DSA:
    states: Tuple[str, ...]
    initial: str
    edges: Tuple[Tuple[str, Tuple[Edge, ...]], ...]
    pairs: Tuple[StreettPair, ...]
    name: str = field(default="dsa", compare=False)

    def __post_init__(self) -> None:
        problems = _structural_problems(self)
        if problems:
            raise InvalidInputError("; ".join(problems))

    @property
    def edge_map(self) -> Dict[str, Tuple[Edge, ...]]:
        return dict(self.edges)

    def outgoing(self, state: str) -> Tuple[Edge, ...]:
        return self.edge_map[state]

    @property
    def atoms(self) -> List[AtomicProposition]:
        found: Dict[AtomicProposition, None] = {}
        for _, edges in self.edges:
            for edge in edges:
                for prop in atoms_of(edge.guard):
                    found.setdefault(prop, None)
        return list(found)

    def step(self, state: str, label: Label) -> str:
        for edge in self.outgoing(state):
            if evaluate_guard(edge.guard, label):
                return edge.target
        raise InvalidInputError(f"state {state} has no enabled edge")

    def run(self, labels: Sequence[Label]) -> List[str]:
        states = [self.initial]
        for label in labels:
            states.append(self.step(states[-1], label))
        return states

    def accepts_lasso(
        self, prefix: Sequence[Label], loop: Sequence[Label]
    ) -> bool:
        """Acceptance of the ultimately periodic word ``prefix.loop^w``.

        The automaton reads the label of the current position, so the state
        after position ``i`` is the state visited at position ``i + 1``.
        """
        state = self.initial
        for label in prefix:
            state = self.step(state, label)
        seen: Dict[Tuple[str, int], int] = {}
        trace: List[str] = []
        position = 0
        while (state, position) not in seen:
            seen[(state, position)] = len(trace)
            trace.append(state)
            state = self.step(state, loop[position])
            position = (position + 1) % len(loop)
        recurring = set(trace[seen[(state, position)]:])
        return all(pair.accepts(recurring) for pair in self.pairs)

    def complemented(self) -> "DSA":
        """Complement of a single-pair Buchi or co-Buchi acceptance."""
        if len(self.pairs) != 1:
            raise InvalidInputError("only single-pair automata complement")
        pair = self.pairs[0]
        everything = frozenset(self.states)
        if pair.F == everything:
            flipped = StreettPair(pair.G, frozenset())
        elif not pair.G:
            flipped = StreettPair(everything, pair.F)
        else:
            raise InvalidInputError(
                "complement of a general Streett pair is not Streett"
            )
        return DSA(
            self.states, self.initial, self.edges, (flipped,), self.name
        )

    def reachable_states(self) -> Set[str]:
        seen = {self.initial}
        frontier = [self.initial]
        while frontier:
            state = frontier.pop()
            for edge in self.outgoing(state):
                if edge.target not in seen:
                    seen.add(edge.target)
                    frontier.append(edge.target)
        return seen

    def to_text(self) -> str:
        lines = []
        for prop in self.atoms:
            lines.append(f"atom {_atom_name(prop)} = {prop.predicate};")
        lines.append(f"states {' '.join(self.states)};")
        lines.append(f"initial {self.initial};")
        for state, edges in self.edges:
            body = " ".join(
                f"[{_guard_text(e.guard)}] -> {e.target};" for e in edges
            )
            lines.append(f"from {state}: {body}")
        for pair in self.pairs:
            lines.append(
                "pair F = {%s} G = {%s};"
                % (", ".join(sorted(pair.F)), ", ".join(sorted(pair.G)))
            )
        return "\n".join(lines) + "\n"


def _atom_name(prop: AtomicProposition) -> str:
    cleaned = "".join(c if c.isalnum() else "_" for c in prop.name)
    return f"a_{cleaned}".rstrip("_")


def _guard_text(guard: Formula) -> str:
    if isinstance(guard, Const):
        return "true" if guard.value else "false"
    if isinstance(guard, Atom):
        return _atom_name(guard.prop)
    if isinstance(guard, Not):
        return f"!{_guard_text(guard.operand)}"
    if isinstance(guard, And):
        return f"({_guard_text(guard.left)} & {_guard_text(guard.right)})"
    if isinstance(guard, Or):
        return f"({_guard_text(guard.left)} | {_guard_text(guard.right)})"
    raise InvalidInputError(f"guard {guard} is not propositional")


def _structural_problems(automaton: DSA) -> List[str]:
    problems = []
    states = set(automaton.states)
    if len(states) != len(automaton.states):
        problems.append("duplicate state names")
    if automaton.initial not in states:
        problems.append(f"initial state {automaton.initial} is undeclared")
    declared = dict(automaton.edges)
    for state in automaton.states:
        edges = declared.get(state)
        if not edges:
            problems.append(f"state {state} has no outgoing edges")
            continue
        if edges[-1].guard != TRUE:
            problems.append(f"last edge of {state} must be guarded by true")
        for edge in edges:
            if edge.target not in states:
                problems.append(f"edge {state} -> {edge.target}: undeclared")
    for state in declared:
        if state not in states:
            problems.append(f"edges declared for unknown state {state}")
    for pair in automaton.pairs:
        unknown = (pair.F | pair.G) - states
        if unknown:
            problems.append(f"pair mentions unknown states {sorted(unknown)}")
    return problems


DSA_GRAMMAR = r"""
DsaFile:
    atoms*=AtomDecl
    'states' states+=ID ';'
    'initial' initial=ID ';'
    blocks+=FromBlock
    pairs*=PairDecl
;

AtomDecl:
    'atom' name=ID '=' predicate=/[^;]+/ ';'
;

FromBlock:
    'from' state=ID ':' edges+=EdgeDecl
;

EdgeDecl:
    '[' guard=/[^\]]+/ ']' '->' target=ID ';'
;

PairDecl:
    'pair' 'F' '=' '{' f*=ID[','] '}' 'G' '=' '{' g*=ID[','] '}' ';'
;

Comment:
    /#.*$/
;
"""

_METAMODEL = metamodel_from_str(DSA_GRAMMAR)


def parse_dsa(
    text: str,
    atoms: Optional[Mapping[str, AtomicProposition]] = None,
    space: Optional[StateSpace] = None,
    source: str = "<dsa>",
) -> DSA:
    """Parse the textual automaton format.

    Atoms can be declared in the file or passed in; inline guards are
    resolved against ``space``.
    """
    try:
        tree = _METAMODEL.model_from_str(text)
    except TextXSyntaxError as err:
        raise QscSyntaxError(err.message, err.line, err.col, source)

    def fail(node: Any, message: str) -> QscSyntaxError:
        location = get_location(node)
        return QscSyntaxError(
            message, location.get("line"), location.get("col"), source
        )

    known: Dict[str, AtomicProposition] = dict(atoms or {})
    for decl in tree.atoms:
        if space is None:
            raise fail(decl, "atom declarations need a state space")
        try:
            region = parse_guard(
                decl.predicate, space.names, space.integer_names
            )
        except InvalidInputError as err:
            raise fail(decl, err.detail)
        known[decl.name] = AtomicProposition(decl.name, region)

    edges: Dict[str, Tuple[Edge, ...]] = {}
    for block in tree.blocks:
        if block.state in edges:
            raise fail(block, f"duplicate edge block for {block.state}")
        parsed = []
        for edge in block.edges:
            try:
                guard = parse_proposition(edge.guard, known, space)
            except QscSyntaxError as err:
                raise fail(edge, err.detail)
            parsed.append(Edge(guard, edge.target))
        edges[block.state] = tuple(parsed)

    pairs = tuple(
        StreettPair(frozenset(pair.f), frozenset(pair.g))
        for pair in tree.pairs
    )
    ordered = tuple((state, edges.get(state, ())) for state in tree.states)
    extra = [state for state in edges if state not in tree.states]
    if extra:
        raise QscSyntaxError(
            f"edges declared for unknown state(s) {extra}", None, None, source
        )
    try:
        automaton = DSA(
            tuple(tree.states), tree.initial, ordered, pairs, source
        )
    except InvalidInputError as err:
        raise QscSyntaxError(err.detail, None, None, source)
    unreachable = set(automaton.states) - automaton.reachable_states()
    if unreachable:
        logger.warning(
            f"[DSA] {source}: unreachable state(s) {sorted(unreachable)}"
        )
    return automaton
