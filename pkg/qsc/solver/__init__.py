from .executor import SolverExecutor, run_solver
from .model_parser import IRRATIONAL, parse_output
from .optimize import (
    NEGATION_PREFIX,
    BoundResult,
    ControlResult,
    Query,
    fix_bound,
    optimize_bound,
    solve_with_retry,
    synthesize_control,
)
from .smtlib import QF_NIRA, QF_NRA, SmtScript, emit_smtlib
