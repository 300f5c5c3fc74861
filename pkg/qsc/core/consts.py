from enum import Enum


class SolverProvider(str, Enum):
    Z3 = "z3"
    CVC5 = "cvc5"


class BoundaryMode(str, Enum):
    PESSIMISTIC = "pessimistic"
    OPTIMISTIC = "optimistic"


class RunMode(str, Enum):
    VERIFY = "verify"
    SYNTHESIZE = "synthesize"
    CHECK = "check"
    EXACT = "exact"
    SIMULATE = "simulate"


EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_INVALID_INPUT = 2
EXIT_INTERNAL = 3

# Reserved names for unknowns; model identifiers never contain dots.
EPS_SYMBOL = "drift.eps"
M_SYMBOL = "drift.M"
BOUND_SYMBOL = "bound.p"
EXP_BASE_SYMBOL = "exp.a"
EXP_T_SYMBOL = "exp.t"
