"""Parser for the guarded-command model language.

Example::

    # gambler's ruin
    var x : int in [0, inf);
    param kappa in [-1/4, 1/4];
    init x = 10;
    frame x in [0, 300];
    when x = 0 -> { 1 : x' = 0; }
    when x >= 1 -> { 1/2 + kappa : x' = x + 1; 1/2 - kappa : x' = x - 1; }

Guards are conjunctions of linear comparisons, weights are polynomials
over the declared parameters and updates are polynomials over the state
variables. Commands fire first-match in source order.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from textx import TextXSyntaxError, get_location, metamodel_from_str

from qsc.algebra.polyhedron import Polyhedron
from qsc.algebra.polynomial import Polynomial
from qsc.core.exceptions import InvalidInputError, QscSyntaxError
from qsc.model.expressions import (
    parse_bound,
    parse_constraints,
    parse_number,
    parse_polynomial,
)
from qsc.model.model import (
    Command,
    Model,
    ParamDecl,
    ProbBranch,
    StateSpace,
    VarDecl,
    VarKind,
)

logger = logging.getLogger(__name__)

MODEL_GRAMMAR = r"""
ModelFile:
    statements*=Statement
;

Statement:
    VarStatement | ParamStatement | InitStatement | FrameStatement
    | CommandStatement
;

VarStatement:
    'var' name=ID ':' kind=VarKind ('in' domain=Interval)? ';'
;

VarKind:
    'int' | 'real'
;

ParamStatement:
    'param' name=ID 'in' domain=Interval ';'
;

InitStatement:
    'init' assignments+=Assignment[','] ';'
;

Assignment:
    name=ID '=' value=/[^,;]+/
;

FrameStatement:
    'frame' ranges+=Range[','] ';'
;

Range:
    name=ID 'in' domain=Interval
;

Interval:
    left=/[\[\(]/ lower=/[^,\]\)]+/ ',' upper=/[^,\]\)]+/ right=/[\]\)]/
;

CommandStatement:
    'when' guard=/[^{};]*?(?=->)/ '->' '{' branches+=Branch '}'
;

Branch:
    weight=/[^:;{}]+/ ':' updates+=Update['&'] ';'
;

Update:
    name=ID "'" '=' expr=/[^;&}]+/
;

Comment:
    /#.*$/
;
"""

_METAMODEL = metamodel_from_str(MODEL_GRAMMAR)


def parse_model(text: str, source: str = "<model>") -> Model:
    """Parse model source text into a :class:`Model`.

    Raises :class:`QscSyntaxError` with a line and column for syntax and
    semantic errors alike.
    """
    try:
        tree = _METAMODEL.model_from_str(text)
    except TextXSyntaxError as err:
        raise QscSyntaxError(err.message, err.line, err.col, source)
    return _ModelBuilder(source).build(tree)


class _ModelBuilder:
    def __init__(self, source: str):
        self.source = source
        self.variables: List[VarDecl] = []
        self.params: List[ParamDecl] = []
        self.initial: Dict[str, Fraction] = {}
        self.frame: Dict[
            str, Tuple[Optional[Fraction], Optional[Fraction]]
        ] = {}
        self.commands: List[Any] = []

    def fail(self, node: Any, message: str) -> QscSyntaxError:
        location = get_location(node)
        return QscSyntaxError(
            message, location.get("line"), location.get("col"), self.source
        )

    def build(self, tree: Any) -> Model:
        for statement in tree.statements:
            kind = statement.__class__.__name__
            try:
                getattr(self, f"_on_{kind}")(statement)
            except InvalidInputError as err:
                if isinstance(err, QscSyntaxError):
                    raise
                raise self.fail(statement, err.detail)
        if not self.variables:
            raise QscSyntaxError(
                "model declares no variables", 1, 1, self.source
            )
        if not self.commands:
            raise QscSyntaxError(
                "model declares no commands", 1, 1, self.source
            )
        space = StateSpace(tuple(self.variables))
        commands = tuple(self._command(node, space) for node in self.commands)
        frame = None
        if self.frame:
            bounds = {
                name: (
                    None if lo is None else Polynomial.constant(lo),
                    None if hi is None else Polynomial.constant(hi),
                )
                for name, (lo, hi) in self.frame.items()
            }
            frame = Polyhedron.box(bounds, space.names)
        model = Model(
            space=space,
            commands=commands,
            initial=tuple(sorted(self.initial.items())),
            params=tuple(self.params),
            frame=frame,
            name=self.source,
        )
        logger.info(
            f"[MODEL] parsed {self.source}: {len(space.names)} variable(s), "
            f"{len(self.params)} parameter(s), {len(commands)} command(s)"
        )
        return model

    def _declared(self) -> set:
        return {d.name for d in self.variables} | {p.name for p in self.params}

    def _on_VarStatement(self, node: Any) -> None:
        if node.name in self._declared():
            raise self.fail(node, f"duplicate declaration of '{node.name}'")
        lower = upper = None
        if node.domain is not None:
            lower, upper = self._interval(node.domain, node.kind == "int")
        self.variables.append(
            VarDecl(node.name, VarKind(node.kind), lower, upper)
        )

    def _on_ParamStatement(self, node: Any) -> None:
        if node.name in self._declared():
            raise self.fail(node, f"duplicate declaration of '{node.name}'")
        lower, upper = self._interval(node.domain, False)
        if lower is None or upper is None:
            raise self.fail(
                node, f"parameter '{node.name}' needs a finite box"
            )
        self.params.append(ParamDecl(node.name, lower, upper))

    def _on_InitStatement(self, node: Any) -> None:
        for assignment in node.assignments:
            if assignment.name in self.initial:
                raise self.fail(
                    assignment,
                    f"duplicate initial value for {assignment.name}",
                )
            self.initial[assignment.name] = parse_number(assignment.value)

    def _on_FrameStatement(self, node: Any) -> None:
        for item in node.ranges:
            integral = any(
                d.name == item.name and d.is_integer for d in self.variables
            )
            self.frame[item.name] = self._interval(item.domain, integral)

    def _on_CommandStatement(self, node: Any) -> None:
        self.commands.append(node)

    def _interval(
        self, node: Any, integral: bool
    ) -> Tuple[Optional[Fraction], Optional[Fraction]]:
        lower = parse_bound(node.lower)
        upper = parse_bound(node.upper)
        if lower is not None and node.left == "(":
            lower = lower + 1 if integral else lower
        if upper is not None and node.right == ")":
            upper = upper - 1 if integral else upper
        if lower is not None and upper is not None and lower > upper:
            raise self.fail(node, f"empty interval [{lower}, {upper}]")
        return lower, upper

    def _command(self, node: Any, space: StateSpace) -> Command:
        location = get_location(node)
        param_names = [p.name for p in self.params]
        try:
            guard = Polyhedron(
                tuple(
                    parse_constraints(
                        node.guard, space.names, space.integer_names
                    )
                ),
                space.names,
            )
            branches = []
            for branch in node.branches:
                weight = parse_polynomial(branch.weight, param_names)
                updates: Dict[str, Polynomial] = {}
                for update in branch.updates:
                    if update.name not in space.names:
                        raise self.fail(
                            update, f"update of undeclared '{update.name}'"
                        )
                    if update.name in updates:
                        raise self.fail(
                            update, f"'{update.name}' updated twice"
                        )
                    updates[update.name] = parse_polynomial(
                        update.expr, space.names
                    )
                branches.append(
                    ProbBranch(weight, tuple(sorted(updates.items())))
                )
        except QscSyntaxError:
            raise
        except InvalidInputError as err:
            raise self.fail(node, err.detail)
        return Command(
            guard=guard,
            branches=tuple(branches),
            line=location.get("line"),
            text=node.guard.strip(),
        )
