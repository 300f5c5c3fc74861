"""Guarded-command probabilistic transition systems."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from itertools import product as cartesian
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from qsc.algebra.polyhedron import Polyhedron, subtract_all
from qsc.algebra.polynomial import Number, Polynomial
from qsc.core.exceptions import ArityError, InvalidInputError, TotalityError

logger = logging.getLogger(__name__)

State = Dict[str, Fraction]


class VarKind(str, Enum):
    INT = "int"
    REAL = "real"


@dataclass(frozen=True)
class VarDecl:
    name: str
    kind: VarKind = VarKind.INT
    lower: Optional[Fraction] = None
    upper: Optional[Fraction] = None

    @property
    def is_integer(self) -> bool:
        return self.kind == VarKind.INT


@dataclass(frozen=True)
class StateSpace:
    variables: Tuple[VarDecl, ...]

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(decl.name for decl in self.variables)

    @property
    def integer_names(self) -> FrozenSet[str]:
        return frozenset(d.name for d in self.variables if d.is_integer)

    @property
    def all_integer(self) -> bool:
        return all(decl.is_integer for decl in self.variables)

    def decl(self, name: str) -> VarDecl:
        for decl in self.variables:
            if decl.name == name:
                return decl
        raise ArityError(f"unknown state variable '{name}'")

    @property
    def domain(self) -> Polyhedron:
        bounds = {
            d.name: (
                None if d.lower is None else Polynomial.constant(d.lower),
                None if d.upper is None else Polynomial.constant(d.upper),
            )
            for d in self.variables
        }
        return Polyhedron.box(bounds, self.names)

    def check_point(self, point: Mapping[str, Number]) -> None:
        missing = [name for name in self.names if name not in point]
        if missing:
            raise ArityError(f"state is missing {', '.join(missing)}")

    def key(self, point: Mapping[str, Number]) -> Tuple[Fraction, ...]:
        return tuple(Fraction(point[name]) for name in self.names)


@dataclass(frozen=True)
class ParamDecl:
    name: str
    lower: Fraction
    upper: Fraction


@dataclass(frozen=True)
class ProbBranch:
    """One probabilistic outcome: a weight over the parameters and an update.

    Variables without an explicit update keep their value.
    """

    weight: Polynomial
    updates: Tuple[Tuple[str, Polynomial], ...] = ()

    def update_map(self, names: Sequence[str]) -> Dict[str, Polynomial]:
        explicit = dict(self.updates)
        return {
            name: explicit.get(name, Polynomial.var(name)) for name in names
        }

    def apply(self, state: Mapping[str, Fraction]) -> State:
        result = dict(state)
        for name, update in self.updates:
            result[name] = update.evaluate(state)
        return result

    def offset(self, name: str) -> Optional[Fraction]:
        """``c`` if the update of ``name`` is ``name + c``, else ``None``."""
        update = dict(self.updates).get(name, Polynomial.var(name))
        difference = update - Polynomial.var(name)
        if difference.is_constant:
            return difference.constant_value
        return None

    def step(self, name: str, region: Polyhedron) -> Optional[Fraction]:
        """Constant change of ``name`` over ``region``, else ``None``.

        Coordinates pinned to a single value by ``region`` are substituted
        first, so ``x' = 0`` under ``x = 0`` is a step of ``0``.
        """
        offset = self.offset(name)
        if offset is not None or region.is_empty():
            return offset
        pinned: Dict[str, Fraction] = {}
        for var in region.coordinates:
            lower, upper = region.bounds(var)
            if lower is not None and lower == upper:
                pinned[var] = lower
        update = dict(self.updates).get(name, Polynomial.var(name))
        difference = (update - Polynomial.var(name)).partial_evaluate(pinned)
        if difference.is_constant:
            return difference.constant_value
        return None

    @property
    def is_affine(self) -> bool:
        return all(update.degree <= 1 for _, update in self.updates)


@dataclass(frozen=True)
class Command:
    guard: Polyhedron
    branches: Tuple[ProbBranch, ...]
    line: Optional[int] = None
    text: str = ""


@dataclass(frozen=True)
class Model:
    space: StateSpace
    commands: Tuple[Command, ...]
    initial: Tuple[Tuple[str, Fraction], ...]
    params: Tuple[ParamDecl, ...] = ()
    frame: Optional[Polyhedron] = None
    name: str = "model"
    _cells: Tuple[Tuple[Polyhedron, ...], ...] = field(
        init=False, compare=False, hash=False, repr=False
    )

    def __post_init__(self) -> None:
        # first-match cells, fixed at construction
        domain = self.space.domain
        integer = self.space.integer_names
        earlier: List[Polyhedron] = []
        cells = []
        for command in self.commands:
            region = domain.intersect(command.guard)
            cells.append(
                ()
                if region.is_empty()
                else tuple(subtract_all([region], earlier, integer))
            )
            earlier.append(command.guard)
        object.__setattr__(self, "_cells", tuple(cells))

    @property
    def initial_state(self) -> State:
        return dict(self.initial)

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(param.name for param in self.params)

    @property
    def control_box(self) -> Dict[str, Tuple[Fraction, Fraction]]:
        return {p.name: (p.lower, p.upper) for p in self.params}

    def firing_command(self, state: Mapping[str, Fraction]) -> int:
        """Index of the first command whose guard holds at ``state``."""
        self.space.check_point(state)
        for index, command in enumerate(self.commands):
            if command.guard.contains(state):
                return index
        raise TotalityError(f"no command fires at {dict(state)}")

    def command_cells(self) -> List[List[Polyhedron]]:
        """First-match firing regions of each command within the domain."""
        return [list(cells) for cells in self._cells]

    def with_parameters(self, kappa: Mapping[str, Number]) -> "Model":
        """Substitute fixed parameter values into every branch weight."""
        missing = [n for n in self.param_names if n not in kappa]
        if missing:
            raise ArityError(f"no value for parameter(s) {missing}")
        values = {name: Fraction(kappa[name]) for name in self.param_names}
        commands = tuple(
            replace(
                command,
                branches=tuple(
                    replace(
                        branch,
                        weight=branch.weight.partial_evaluate(values),
                    )
                    for branch in command.branches
                ),
            )
            for command in self.commands
        )
        return replace(self, commands=commands, params=())

    def branch_distribution(
        self, state: Mapping[str, Fraction]
    ) -> List[Tuple[Fraction, State]]:
        """Exact successor distribution of a parameter-free model."""
        command = self.commands[self.firing_command(state)]
        return [
            (branch.weight.constant_value, branch.apply(state))
            for branch in command.branches
            if not branch.weight.is_zero
        ]


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == "error"


def validate_model(m: Model) -> List[Diagnostic]:
    diagnostics: List[Diagnostic] = []

    def error(code: str, message: str) -> None:
        diagnostics.append(Diagnostic("error", code, message))

    def warning(code: str, message: str) -> None:
        diagnostics.append(Diagnostic("warning", code, message))

    names = set(m.space.names)
    params = set(m.param_names)
    integer = m.space.integer_names
    for param in m.params:
        if param.lower > param.upper:
            error("param-box", f"empty box for parameter {param.name}")
    corners = _box_corners(m.params)

    for index, command in enumerate(m.commands):
        where = f"command {index + 1}" + (
            f" (line {command.line})" if command.line else ""
        )
        total = sum(
            (b.weight for b in command.branches), Polynomial.zero()
        )
        if total != Polynomial.one():
            error("weight-sum", f"{where}: weights sum to {total}, not 1")
        for branch in command.branches:
            stray = set(branch.weight.variables) - params
            if stray:
                error(
                    "weight-vars",
                    f"{where}: weight {branch.weight} uses {sorted(stray)}",
                )
                continue
            if branch.weight.degree <= 1:
                for corner in corners:
                    value = branch.weight.evaluate(corner)
                    if not 0 <= value <= 1:
                        error(
                            "weight-range",
                            f"{where}: weight {branch.weight} is {value} "
                            f"at {corner}",
                        )
                        break
            else:
                warning(
                    "weight-range-deferred",
                    f"{where}: nonlinear weight {branch.weight} is "
                    "range-checked by side constraints",
                )
            for name, update in branch.updates:
                if name not in names:
                    error("update-target", f"{where}: unknown '{name}'")
                    continue
                stray = set(update.variables) - names
                if stray:
                    error(
                        "update-vars",
                        f"{where}: update of {name} uses {sorted(stray)}",
                    )
                elif name in integer and not _integer_valued(
                    update, integer
                ):
                    error(
                        "update-kind",
                        f"{where}: update {name}' = {update} leaves the "
                        "integers",
                    )

    initial = m.initial_state
    if set(initial) != names:
        error(
            "initial",
            f"initial state assigns {sorted(initial)}, expected "
            f"{sorted(names)}",
        )
    elif not m.space.domain.contains(initial):
        error("initial", f"initial state {initial} is outside the domain")
    else:
        for decl in m.space.variables:
            if decl.is_integer and initial[decl.name].denominator != 1:
                error("initial", f"initial {decl.name} is not an integer")

    uncovered = subtract_all(
        [m.space.domain], [c.guard for c in m.commands], integer
    )
    if uncovered:
        error(
            "not-total",
            f"no command fires on {uncovered[0]}; add a catch-all command",
        )
    for diagnostic in diagnostics:
        log = logger.error if diagnostic.is_error else logger.warning
        log(f"[MODEL] {m.name}: {diagnostic.code}: {diagnostic.message}")
    return diagnostics


def ensure_valid(m: Model) -> Model:
    errors = [d for d in validate_model(m) if d.is_error]
    if errors:
        raise InvalidInputError(
            "; ".join(f"{d.code}: {d.message}" for d in errors)
        )
    return m


def _box_corners(params: Sequence[ParamDecl]) -> List[Dict[str, Fraction]]:
    if not params:
        return [{}]
    return [
        dict(zip((p.name for p in params), values))
        for values in cartesian(*((p.lower, p.upper) for p in params))
    ]


def _integer_valued(update: Polynomial, integer: FrozenSet[str]) -> bool:
    if not set(update.variables) <= integer:
        return False
    return all(value.denominator == 1 for value in update.terms.values())


def sample_step(
    m: Model,
    state: Mapping[str, Fraction],
    kappa: Mapping[str, Number],
    rng: np.random.Generator,
) -> State:
    """Draw one successor of ``state`` under parameter values ``kappa``."""
    command = m.commands[m.firing_command(state)]
    weights = [
        float(branch.weight.evaluate(kappa)) for branch in command.branches
    ]
    choice = rng.choice(len(weights), p=np.asarray(weights) / sum(weights))
    return command.branches[int(choice)].apply(state)
