from qsc.model.model import (
    Command,
    Diagnostic,
    Model,
    ParamDecl,
    ProbBranch,
    StateSpace,
    VarDecl,
    VarKind,
    ensure_valid,
    sample_step,
    validate_model,
)
from qsc.model.parser import parse_model

__all__ = [
    "Command",
    "Diagnostic",
    "Model",
    "ParamDecl",
    "ProbBranch",
    "StateSpace",
    "VarDecl",
    "VarKind",
    "ensure_valid",
    "parse_model",
    "sample_step",
    "validate_model",
]
