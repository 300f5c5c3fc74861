"""Linear constraints, convex polyhedra and their disjoint differences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as cartesian
from typing import (
    AbstractSet,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

from qsc.algebra.linear import LpStatus, is_feasible, maximize, minimize
from qsc.algebra.polynomial import Number, Polynomial

Interval = Tuple[Optional[Fraction], Optional[Fraction]]


def _normalize_form(form: Polynomial) -> Polynomial:
    """Scale by a positive rational to coprime integer coefficients."""
    terms = form.terms
    if not terms:
        return form
    denominators = 1
    for value in terms.values():
        denominators = denominators * value.denominator // math.gcd(
            denominators, value.denominator
        )
    numerators = 0
    for value in terms.values():
        scaled = value * denominators
        numerators = math.gcd(numerators, abs(scaled.numerator))
    return form * Fraction(denominators, numerators)


@dataclass(frozen=True)
class LinearConstraint:
    """``form >= 0`` with ``form`` affine in the coordinates."""

    form: Polynomial

    def __post_init__(self) -> None:
        object.__setattr__(self, "form", _normalize_form(self.form))

    @classmethod
    def strict(
        cls, form: Polynomial, integer_vars: AbstractSet[str]
    ) -> "LinearConstraint":
        """``form > 0``, tightened on integers and closed otherwise."""
        constraint = cls(form)
        if _is_integral(constraint.form, integer_vars):
            return cls(constraint.form - 1)
        return constraint

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.form.variables

    @property
    def is_trivial(self) -> bool:
        return self.form.is_constant and self.form.constant_value >= 0

    @property
    def is_contradiction(self) -> bool:
        return self.form.is_constant and self.form.constant_value < 0

    def holds(self, point: Mapping[str, Number]) -> bool:
        return self.form.evaluate(point) >= 0

    def negated(self, integer_vars: AbstractSet[str]) -> "LinearConstraint":
        return LinearConstraint.strict(-self.form, integer_vars)

    def substitute(
        self, bindings: Mapping[str, Polynomial]
    ) -> Polynomial:
        return self.form.substitute(bindings)

    def __str__(self) -> str:
        return f"{self.form.to_text()} >= 0"


def _constraint_order(constraint: LinearConstraint) -> Tuple:
    form = constraint.form
    slopes = tuple(-form.coefficient({name: 1}) for name in form.variables)
    return (form.variables, slopes, form.to_text())


def _is_integral(form: Polynomial, integer_vars: AbstractSet[str]) -> bool:
    if not set(form.variables) <= set(integer_vars):
        return False
    return all(value.denominator == 1 for value in form.terms.values())


@dataclass(frozen=True)
class Polyhedron:
    """Conjunction of linear constraints over named coordinates.

    Symbols in the constraint forms that are not coordinates are treated
    as parameters; a parametric polyhedron is never pruned as empty.
    """

    constraints: Tuple[LinearConstraint, ...] = ()
    coordinates: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        unique: Dict[Polynomial, LinearConstraint] = {}
        for constraint in self.constraints:
            if constraint.is_trivial:
                continue
            unique.setdefault(constraint.form, constraint)
        ordered = tuple(sorted(unique.values(), key=_constraint_order))
        object.__setattr__(self, "constraints", ordered)
        object.__setattr__(
            self, "coordinates", tuple(sorted(set(self.coordinates)))
        )
        for constraint in ordered:
            if constraint.form.degree_in(self.coordinates) > 1:
                raise ValueError(f"constraint {constraint} is not linear")

    # Construction

    @classmethod
    def full(cls, coordinates: Sequence[str] = ()) -> "Polyhedron":
        return cls((), tuple(coordinates))

    @classmethod
    def empty(cls, coordinates: Sequence[str] = ()) -> "Polyhedron":
        return cls(
            (LinearConstraint(Polynomial.constant(-1)),), tuple(coordinates)
        )

    @classmethod
    def from_forms(
        cls, forms: Iterable[Polynomial], coordinates: Sequence[str]
    ) -> "Polyhedron":
        return cls(
            tuple(LinearConstraint(form) for form in forms),
            tuple(coordinates),
        )

    @classmethod
    def box(
        cls,
        bounds: Mapping[
            str, Tuple[Optional[Polynomial], Optional[Polynomial]]
        ],
        coordinates: Optional[Sequence[str]] = None,
    ) -> "Polyhedron":
        forms = []
        for name, (lower, upper) in bounds.items():
            variable = Polynomial.var(name)
            if lower is not None:
                forms.append(variable - lower)
            if upper is not None:
                forms.append(Polynomial.coerce(upper) - variable)
        return cls.from_forms(
            forms, coordinates if coordinates is not None else bounds
        )

    # Inspection

    @property
    def forms(self) -> List[Polynomial]:
        return [constraint.form for constraint in self.constraints]

    @property
    def parameters(self) -> Tuple[str, ...]:
        names = set()
        for constraint in self.constraints:
            names.update(constraint.variables)
        return tuple(sorted(names - set(self.coordinates)))

    @property
    def is_parametric(self) -> bool:
        return bool(self.parameters)

    @property
    def is_universe(self) -> bool:
        return not self.constraints

    def is_empty(self) -> bool:
        if any(c.is_contradiction for c in self.constraints):
            return True
        if self.is_parametric or not self.constraints:
            return False
        return not is_feasible(self.forms)

    def contains(self, point: Mapping[str, Number]) -> bool:
        return all(constraint.holds(point) for constraint in self.constraints)

    def with_coordinates(self, coordinates: Sequence[str]) -> "Polyhedron":
        return Polyhedron(self.constraints, tuple(coordinates))

    # Set operations

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        return Polyhedron(
            self.constraints + other.constraints,
            self.coordinates + other.coordinates,
        )

    def add(self, constraint: LinearConstraint) -> "Polyhedron":
        return Polyhedron(self.constraints + (constraint,), self.coordinates)

    def implies(
        self, constraint: LinearConstraint, integer_vars: AbstractSet[str]
    ) -> bool:
        if constraint.is_trivial:
            return True
        return self.add(constraint.negated(integer_vars)).is_empty()

    def is_subset_of(
        self, other: "Polyhedron", integer_vars: AbstractSet[str]
    ) -> bool:
        if self.is_empty():
            return True
        return all(self.implies(c, integer_vars) for c in other.constraints)

    def subtract(
        self, other: "Polyhedron", integer_vars: AbstractSet[str]
    ) -> List["Polyhedron"]:
        """Disjoint convex cells covering ``self`` minus ``other``.

        Cell ``j`` negates the ``j``-th constraint of ``other`` and keeps
        the earlier ones, so the cells never overlap.
        """
        if other.is_universe:
            return []
        if any(c.is_contradiction for c in other.constraints):
            return [] if self.is_empty() else [self]
        cells = []
        prefix = self
        for constraint in other.constraints:
            cell = prefix.add(constraint.negated(integer_vars))
            if not cell.is_empty():
                cells.append(cell)
            prefix = prefix.add(constraint)
            if prefix.is_empty():
                break
        return cells

    # Bounds and enumeration

    def bounds(self, name: str) -> Interval:
        """Exact minimum and maximum of a coordinate, ``None`` if unbounded."""
        if self.is_parametric:
            return self.syntactic_bounds(name)
        variable = Polynomial.var(name)
        low = minimize(variable, self.forms)
        if low.status == LpStatus.INFEASIBLE:
            raise ValueError("bounds of an empty polyhedron")
        high = maximize(variable, self.forms)
        lower = low.value if low.status == LpStatus.OPTIMAL else None
        upper = high.value if high.status == LpStatus.OPTIMAL else None
        return lower, upper

    def syntactic_bounds(self, name: str) -> Interval:
        """Bounds read off single-coordinate facets, parameters allowed."""
        lower: Optional[Fraction] = None
        upper: Optional[Fraction] = None
        for form in self.forms:
            coefficients, constant = self._split(form)
            if set(coefficients) != {name}:
                continue
            slope = coefficients[name]
            if not constant.is_constant:
                continue
            value = -constant.constant_value / slope
            if slope > 0:
                lower = value if lower is None else max(lower, value)
            else:
                upper = value if upper is None else min(upper, value)
        return lower, upper

    def is_bounded_in(self, name: str) -> bool:
        if self.is_parametric:
            return self._syntactically_bounded(name)
        lower, upper = self.bounds(name)
        return lower is not None and upper is not None

    def _syntactically_bounded(self, name: str) -> bool:
        below = above = False
        for form in self.forms:
            coefficients, _ = self._split(form)
            if set(coefficients) != {name}:
                continue
            below = below or coefficients[name] > 0
            above = above or coefficients[name] < 0
        return below and above

    def unbounded_coordinates(self) -> List[str]:
        return [
            name for name in self.coordinates if not self.is_bounded_in(name)
        ]

    def _split(
        self, form: Polynomial
    ) -> Tuple[Dict[str, Fraction], Polynomial]:
        grouped = form.collect(self.coordinates)
        coefficients: Dict[str, Fraction] = {}
        constant = Polynomial.zero()
        for monomial, coefficient in grouped.items():
            if not any(monomial):
                constant = coefficient
                continue
            name = self.coordinates[monomial.index(1)]
            if not coefficient.is_constant:
                coefficients[name] = Fraction(0)
                continue
            coefficients[name] = coefficient.constant_value
        return coefficients, constant

    def integer_points(self, cap: int) -> Iterator[Dict[str, Fraction]]:
        """Enumerate the integer points; ``ValueError`` past ``cap``."""
        ranges = []
        count = 1
        for name in self.coordinates:
            lower, upper = self.bounds(name)
            if lower is None or upper is None:
                raise ValueError(f"coordinate {name} is unbounded")
            low, high = math.ceil(lower), math.floor(upper)
            if high < low:
                return
            ranges.append(range(low, high + 1))
            count *= high - low + 1
            if count > cap:
                raise ValueError(
                    f"{count} grid points exceed the cap of {cap}"
                )
        for values in cartesian(*ranges):
            point = {
                name: Fraction(value)
                for name, value in zip(self.coordinates, values)
            }
            if self.contains(point):
                yield point

    def __str__(self) -> str:
        if not self.constraints:
            return "true"
        return " and ".join(str(c) for c in self.constraints)


def subtract_all(
    cells: Sequence[Polyhedron],
    removed: Sequence[Polyhedron],
    integer_vars: AbstractSet[str],
) -> List[Polyhedron]:
    """Cells covering the union of ``cells`` minus the union of ``removed``."""
    current = list(cells)
    for region in removed:
        current = [
            piece
            for cell in current
            for piece in cell.subtract(region, integer_vars)
        ]
    return current


def disjoint_cells(
    cells: Sequence[Polyhedron], integer_vars: AbstractSet[str]
) -> List[Polyhedron]:
    """Pairwise disjoint cells with the same union as ``cells``."""
    result: List[Polyhedron] = []
    for index, cell in enumerate(cells):
        if cell.is_empty():
            continue
        result.extend(subtract_all([cell], cells[:index], integer_vars))
    return result
