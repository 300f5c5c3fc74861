"""Per-pair drift modes and automaton sink analysis."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, Tuple

from qsc.product.product import ProductModel

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    DEC = "Dec"
    INC = "Inc"
    NONINC = "NonInc"


class SinkKind(str, Enum):
    SURELY_ACCEPTING = "SurelyAccepting"
    SURELY_REJECTING = "SurelyRejecting"
    NEITHER = "Neither"


@dataclass(frozen=True)
class ModeTable:
    entries: Tuple[Tuple[Tuple[int, str], Mode], ...]

    def mode(self, pair: int, q: str) -> Mode:
        return dict(self.entries)[(pair, q)]

    def __iter__(self) -> Iterator[Tuple[Tuple[int, str], Mode]]:
        return iter(self.entries)

    def states_with(self, pair: int, mode: Mode) -> Tuple[str, ...]:
        return tuple(
            q for (i, q), value in self.entries if i == pair and value == mode
        )


def classify_modes(p: ProductModel) -> ModeTable:
    """Dec on ``F - G``, Inc on ``G``, NonInc elsewhere, for every pair."""
    entries = []
    for index, pair in enumerate(p.pairs_lifted):
        for q in p.states:
            if q in pair.G:
                mode = Mode.INC
            elif q in pair.F:
                mode = Mode.DEC
            else:
                mode = Mode.NONINC
            entries.append(((index, q), mode))
    return ModeTable(tuple(entries))


def analyze_sinks(p: ProductModel) -> Dict[str, SinkKind]:
    result: Dict[str, SinkKind] = {}
    for q in p.states:
        edges = p.automaton.outgoing(q)
        if any(edge.target != q for edge in edges):
            result[q] = SinkKind.NEITHER
            continue
        rejecting = any(
            q in pair.F and q not in pair.G for pair in p.pairs_lifted
        )
        result[q] = (
            SinkKind.SURELY_REJECTING
            if rejecting
            else SinkKind.SURELY_ACCEPTING
        )
    sinks = {
        q: kind.value
        for q, kind in result.items()
        if kind != SinkKind.NEITHER
    }
    if sinks:
        logger.info(f"[PRODUCT] sink states: {sinks}")
    return result
