from qsc.constraints.expectations import (
    init_expectation,
    post_expectation,
)
from qsc.constraints.relaxation import Implication, relax_handelman
from qsc.constraints.system import (
    ConstraintSystem,
    RelaxedSystem,
    Relation,
    SideConstraint,
    check_frame_containment,
    generate_system,
)

__all__ = [
    "ConstraintSystem",
    "Implication",
    "RelaxedSystem",
    "Relation",
    "SideConstraint",
    "check_frame_containment",
    "generate_system",
    "init_expectation",
    "post_expectation",
    "relax_handelman",
]
