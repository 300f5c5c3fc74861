from qsc.algebra.handelman import handelman_basis
from qsc.algebra.polyhedron import (
    LinearConstraint,
    Polyhedron,
    disjoint_cells,
    subtract_all,
)
from qsc.algebra.polynomial import Polynomial, monomials_up_to

__all__ = [
    "LinearConstraint",
    "Polyhedron",
    "Polynomial",
    "disjoint_cells",
    "handelman_basis",
    "monomials_up_to",
    "subtract_all",
]
