from qsc.spec.dsa import DSA, Edge, StreettPair, parse_dsa
from qsc.spec.ltl import (
    AtomicProposition,
    Formula,
    negate_ltl,
    parse_ltl,
)
from qsc.spec.patterns import ltl_to_dsa

__all__ = [
    "DSA",
    "AtomicProposition",
    "Edge",
    "Formula",
    "StreettPair",
    "ltl_to_dsa",
    "negate_ltl",
    "parse_dsa",
    "parse_ltl",
]
