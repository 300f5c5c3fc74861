"""Exact acceptance probabilities of finite Streett chains."""

import logging
from fractions import Fraction
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Set

import networkx as nx

from qsc.oracle.truncation import FiniteChain

logger = logging.getLogger(__name__)


def bottom_components(chain: FiniteChain) -> List[FrozenSet[int]]:
    """Bottom strongly connected components of the transition graph."""
    condensed = nx.condensation(chain.graph())
    return [
        frozenset(condensed.nodes[node]["members"])
        for node in condensed.nodes
        if condensed.out_degree(node) == 0
    ]


def is_accepting(chain: FiniteChain, component: AbstractSet[int]) -> bool:
    return all(
        not (F & component) or bool(G & component) for F, G in chain.pairs
    )


def accepting_states(chain: FiniteChain) -> FrozenSet[int]:
    accepted: Set[int] = set()
    for component in bottom_components(chain):
        if is_accepting(chain, component):
            accepted |= component
    return frozenset(accepted)


def _backward_closure(
    chain: FiniteChain, targets: Iterable[int], allowed: AbstractSet[int]
) -> Set[int]:
    graph = chain.graph()
    found = set(targets)
    frontier = list(found)
    while frontier:
        node = frontier.pop()
        for source in graph.predecessors(node):
            if source not in found and source in allowed:
                found.add(source)
                frontier.append(source)
    return found


def solve_sparse(
    rows: Dict[int, Dict[int, Fraction]],
    rhs: Dict[int, Fraction],
    order: List[int],
) -> Dict[int, Fraction]:
    """Exact Gaussian elimination on a sparse nonsingular M-matrix system.

    Row ``k`` is the equation whose diagonal entry is variable ``k``;
    pivots are taken on the diagonal in ``order``.
    """
    position = {k: i for i, k in enumerate(order)}
    users: Dict[int, Set[int]] = {k: set() for k in order}
    for r, row in rows.items():
        for k in row:
            users[k].add(r)
    for k in order:
        pivot = rows[k]
        diagonal = pivot[k]
        for r in sorted(users[k], key=position.__getitem__):
            if position[r] <= position[k]:
                continue
            row = rows[r]
            entry = row.pop(k, None)
            if entry is None:
                continue
            factor = entry / diagonal
            for j, value in pivot.items():
                if j == k:
                    continue
                updated = row.get(j, Fraction(0)) - factor * value
                if updated:
                    row[j] = updated
                    users[j].add(r)
                else:
                    row.pop(j, None)
            rhs[r] = rhs.get(r, Fraction(0)) - factor * rhs.get(k, 0)
        users[k].clear()
    solution: Dict[int, Fraction] = {}
    for k in reversed(order):
        row = rows[k]
        total = rhs.get(k, Fraction(0))
        for j, value in row.items():
            if j != k:
                total -= value * solution[j]
        solution[k] = total / row[k]
    return solution


def reach_probabilities(
    chain: FiniteChain,
    targets: AbstractSet[int],
    allowed: AbstractSet[int],
) -> Dict[int, Fraction]:
    """Probability of reaching ``targets`` through ``allowed`` states."""
    live = _backward_closure(chain, targets, allowed) - set(targets)
    order = sorted(live)
    rows: Dict[int, Dict[int, Fraction]] = {}
    rhs: Dict[int, Fraction] = {}
    for s in order:
        row = {s: Fraction(1)}
        constant = Fraction(0)
        for t, weight in chain.transitions[s].items():
            if t in targets:
                constant += weight
            elif t in live:
                row[t] = row.get(t, Fraction(0)) - weight
        rows[s] = row
        rhs[s] = constant
    solved = solve_sparse(rows, rhs, order)
    result = {s: Fraction(0) for s in range(len(chain))}
    result.update(solved)
    result.update({t: Fraction(1) for t in targets})
    return result


def state_probabilities(chain: FiniteChain) -> Dict[int, Fraction]:
    """Per-state probability of satisfying the Streett condition."""
    accepted = accepting_states(chain)
    return reach_probabilities(chain, accepted, set(range(len(chain))))


def exact_probability(chain: FiniteChain) -> Fraction:
    value = state_probabilities(chain)[chain.initial]
    logger.info(f"[ORACLE] exact acceptance probability {value}")
    return value


def exact_invariant(chain: FiniteChain) -> FrozenSet[int]:
    """States whose acceptance probability is at least the least positive.

    Trajectories that stay inside forever satisfy the condition almost
    surely, and those that satisfy it stay inside almost surely.
    """
    probabilities = state_probabilities(chain)
    positive = [value for value in probabilities.values() if value > 0]
    if not positive:
        return frozenset()
    floor = min(positive)
    return frozenset(s for s, value in probabilities.items() if value >= floor)


def stay_probability(chain: FiniteChain, region: AbstractSet[int]) -> Fraction:
    """Probability of never leaving ``region`` from the initial state."""
    if chain.initial not in region:
        return Fraction(0)
    closed: Set[int] = set()
    for component in bottom_components(chain):
        if component <= region:
            closed |= component
    return reach_probabilities(chain, closed, region)[chain.initial]
