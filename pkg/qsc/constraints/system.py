"""Generation of the quantified certificate conditions.

For every automaton state ``q`` and refined command the system asks for

* ``V0 - PV0 >= 0`` on ``I_q`` (``invariant-drift``),
* per Streett pair, by mode: ``Vi - PVi - eps``, ``Vi + M - PVi`` or
  ``Vi - PVi`` non-negative on ``I_q`` (``streett-dec[i]`` and so on),
* ``Vi(u(s), q') >= 0`` for the successors of ``I_q`` (``nonneg-successor``),

plus ``Vi >= 0`` on ``I_q`` (``nonneg``), ``V0(u(s), q') >= 1`` wherever a
successor of ``I_q`` falls outside ``I_q'`` (``exterior``), containment of
those successors in the frame (``frame``), the initial state in ``I_q0``
(``initial``) and the target ``1 - p - V0(init) >= 0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from qsc.algebra.linear import LpStatus, minimize
from qsc.algebra.polyhedron import Polyhedron
from qsc.algebra.polynomial import Polynomial
from qsc.certificate.templates import PieceKind, TemplateSet
from qsc.constraints.expectations import (
    base_power,
    branch_value,
    clearing_power,
    exp_range,
    init_expectation,
    post_expectation,
    scaled_value,
    successor_values,
)
from qsc.constraints.relaxation import (
    Implication,
    multiplier_names,
    relax_handelman,
)
from qsc.core.config import settings
from qsc.core.consts import EXP_T_SYMBOL
from qsc.core.exceptions import ConfigurationError, FrameEscapeError
from qsc.model.model import ProbBranch
from qsc.product.modes import Mode, ModeTable, classify_modes
from qsc.product.product import ProductModel, RefinedCommand

logger = logging.getLogger(__name__)


class Relation(str, Enum):
    GE = ">="
    GT = ">"
    EQ = "="


@dataclass(frozen=True)
class SideConstraint:
    """``expr <relation> 0`` over the unknowns."""

    expr: Polynomial
    relation: Relation
    tag: str

    def holds(self, assignment: Mapping[str, Fraction]) -> bool:
        value = self.expr.evaluate(assignment)
        if self.relation == Relation.GE:
            return value >= 0
        if self.relation == Relation.GT:
            return value > 0
        return value == 0

    def renamed(self, mapping: Mapping[str, str]) -> "SideConstraint":
        return replace(self, expr=self.expr.rename(mapping))


@dataclass(frozen=True)
class RelaxedSystem:
    """Existential system: equations ``= 0``, multipliers ``>= 0``, sides."""

    unknowns: Tuple[Tuple[str, str], ...]
    equations: Tuple[Tuple[str, Polynomial], ...]
    multipliers: Tuple[str, ...]
    side: Tuple[SideConstraint, ...]

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.unknowns] + list(self.multipliers)

    def renamed(
        self, prefix: str, keep: Iterable[str] = ()
    ) -> "RelaxedSystem":
        """Prefix every unknown except ``keep`` (shared parameters)."""
        kept = set(keep)
        mapping = {
            name: f"{prefix}{name}" for name in self.names if name not in kept
        }
        return RelaxedSystem(
            unknowns=tuple(
                (mapping.get(name, name), kind) for name, kind in self.unknowns
            ),
            equations=tuple(
                (tag, poly.rename(mapping)) for tag, poly in self.equations
            ),
            multipliers=tuple(mapping[name] for name in self.multipliers),
            side=tuple(side.renamed(mapping) for side in self.side),
        )

    def merged(self, other: "RelaxedSystem") -> "RelaxedSystem":
        seen = dict(self.unknowns)
        extra = tuple(
            (name, kind) for name, kind in other.unknowns if name not in seen
        )
        return RelaxedSystem(
            unknowns=self.unknowns + extra,
            equations=self.equations + other.equations,
            multipliers=self.multipliers + other.multipliers,
            side=self.side
            + tuple(s for s in other.side if s not in self.side),
        )


@dataclass
class ConstraintSystem:
    templates: TemplateSet
    implications: List[Implication]
    side: List[SideConstraint]
    modes: ModeTable
    clearing: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def product(self) -> ProductModel:
        return self.templates.product

    def relax(self, D: int) -> RelaxedSystem:
        names = multiplier_names()
        equations: List[Tuple[str, Polynomial]] = []
        multipliers: List[str] = []
        for imp in self.implications:
            relaxed = relax_handelman(imp, D, names)
            equations.extend((relaxed.tag, eq) for eq in relaxed.equations)
            multipliers.extend(relaxed.multipliers)
        table = self.templates.symbol_table()
        system = RelaxedSystem(
            unknowns=tuple(table.entries.items()),
            equations=tuple(equations),
            multipliers=tuple(multipliers),
            side=tuple(self.side),
        )
        logger.info(
            f"[CONSTRAINTS] relaxed at D={D}: {len(table)} unknown(s), "
            f"{len(multipliers)} multiplier(s), {len(equations)} equation(s)"
        )
        return system

    def dump(self) -> str:
        """Human-readable listing of every condition."""
        lines = [f"# {len(self.implications)} implication(s)"]
        lines.extend(imp.describe() for imp in self.implications)
        lines.append(f"# {len(self.side)} side constraint(s)")
        lines.extend(
            f"[{s.tag}] {s.expr} {s.relation.value} 0" for s in self.side
        )
        lines.extend(f"# {note}" for note in self.notes)
        return "\n".join(lines) + "\n"


def _coordinates(p: ProductModel, claim: Polynomial) -> Tuple[str, ...]:
    names = tuple(p.variables)
    if EXP_T_SYMBOL in claim.variables:
        names += (EXP_T_SYMBOL,)
    return names


def _prunable(domain: Polyhedron) -> bool:
    return not domain.is_parametric and domain.is_empty()


def _trivial(claim: Polynomial) -> bool:
    return claim.is_constant and claim.constant_value >= 0


class _Collector:
    def __init__(self, templates: TemplateSet):
        self.templates = templates
        self.product = templates.product
        self.atom = templates.exponential
        self.implications: List[Implication] = []

    def add(
        self,
        domain: Polyhedron,
        claim: Polynomial,
        tag: str,
        where: str,
        half_open: bool = False,
    ) -> None:
        if _trivial(claim):
            return
        coordinates = _coordinates(self.product, claim)
        domain = domain.with_coordinates(coordinates)
        if EXP_T_SYMBOL in coordinates:
            forms = exp_range(self.atom, domain)
            domain = domain.intersect(
                Polyhedron.from_forms(forms, coordinates)
            )
        self.implications.append(
            Implication(domain, claim, tag, where, half_open)
        )


@dataclass(frozen=True)
class InvariantExit:
    """Pre-states of a refined command whose branch leaves the invariant.

    ``exact`` exits are preimages of the complement of ``I_q'`` under an
    affine update; otherwise ``domain`` is the whole cell.
    """

    domain: Polyhedron
    branch: ProbBranch
    exact: bool = True


def invariant_exits(
    p: ProductModel,
    templates: TemplateSet,
    rc: RefinedCommand,
    cell: Polyhedron,
) -> List[InvariantExit]:
    """First-exit pre-states of ``cell``, a part of ``I_q`` under ``rc``."""
    target = templates.piece(rc.target)
    if target.kind == PieceKind.FULL:
        return []
    names = p.variables
    outside = target.exterior(p.base.space.domain, p.integer_vars)
    exits: List[InvariantExit] = []
    for branch in rc.branches:
        if branch.weight.is_zero:
            continue
        if not branch.is_affine:
            exits.append(InvariantExit(cell, branch, exact=False))
            continue
        updates = branch.update_map(names)
        for piece in outside:
            preimage = Polyhedron.from_forms(
                (form.substitute(updates) for form in piece.forms), names
            )
            domain = cell.intersect(preimage)
            if not _prunable(domain):
                exits.append(InvariantExit(domain, branch))
    return exits


def _preimage(
    frame: Polyhedron, branch: ProbBranch, names: Tuple[str, ...]
) -> Polyhedron:
    updates = branch.update_map(names)
    return Polyhedron.from_forms(
        (form.substitute(updates) for form in frame.forms), names
    )


def generate_system(
    p: ProductModel,
    templates: TemplateSet,
    modes: Optional[ModeTable] = None,
    eps_min: Optional[Fraction] = None,
    m_max: Optional[Fraction] = None,
) -> ConstraintSystem:
    """All implications and side constraints for a lower bound ``bound``.

    ``V0 >= 1`` is required at first-exit states: successors of ``I_q``
    outside ``I_q'``. A frame, when declared, must contain them.
    """
    modes = modes or classify_modes(p)
    eps_min = eps_min if eps_min is not None else settings.eps_min_value
    m_max = m_max if m_max is not None else settings.m_max_value
    atom = templates.exponential
    k = clearing_power(p, atom)
    one = base_power(atom, k) if atom is not None and k else 1
    names = p.variables
    integer = p.integer_vars
    domain = p.base.space.domain
    frame = (
        domain.intersect(templates.frame.with_coordinates(names))
        if templates.frame is not None
        else None
    )
    collect = _Collector(templates)
    V = templates.values
    notes: List[str] = []
    inexact_targets: List[str] = []

    for q in p.states:
        piece = templates.piece(q)
        if piece.kind == PieceKind.EMPTY:
            continue
        region = piece.region(names).intersect(domain)
        half_open = piece.is_half_open
        for rc in p.refined(q):
            cell = rc.cell.intersect(region)
            if _prunable(cell):
                continue
            where = rc.describe()
            collect.add(
                cell,
                scaled_value(V[0], q, atom, k)
                - post_expectation(p, V[0], q, rc, atom, k),
                "invariant-drift",
                where,
                half_open,
            )
            for i in range(1, len(V)):
                mode = modes.mode(i - 1, q)
                post = post_expectation(p, V[i], q, rc)
                current = V[i].poly(q)
                if mode == Mode.DEC:
                    claim = current - post - templates.eps
                elif mode == Mode.INC:
                    claim = current + templates.M - post
                else:
                    claim = current - post
                tag = f"streett-{mode.value.lower()}[{i}]"
                collect.add(cell, claim, tag, where, half_open)
                for successor in successor_values(p, V[i], rc):
                    collect.add(
                        cell, successor, "nonneg-successor", where, half_open
                    )
            for leave in invariant_exits(p, templates, rc, cell):
                if not leave.exact:
                    if rc.target not in inexact_targets:
                        inexact_targets.append(rc.target)
                    continue
                exit_domain = leave.domain
                if frame is not None:
                    exit_domain = exit_domain.intersect(
                        _preimage(frame, leave.branch, names)
                    )
                    if _prunable(exit_domain):
                        continue
                claim = (
                    branch_value(p, V[0], rc, leave.branch, atom, k) - one
                )
                if frame is None and not half_open and not _trivial(claim):
                    unbounded = exit_domain.unbounded_coordinates()
                    if unbounded:
                        raise ConfigurationError(
                            f"exits of the invariant at {q} are unbounded "
                            f"in {unbounded[0]}; declare a frame"
                        )
                collect.add(
                    exit_domain,
                    claim,
                    "exterior",
                    f"{where} leaving the invariant",
                    half_open,
                )
        if not _prunable(region):
            for i in range(len(V)):
                collect.add(
                    region,
                    scaled_value(V[i], q, atom if i == 0 else None),
                    "nonneg",
                    f"V{i} at {q}",
                    half_open,
                )

    for q in inexact_targets:
        # nonlinear updates: V0 >= 1 on the whole frame outside I_q
        if frame is None:
            raise ConfigurationError(
                f"nonlinear updates into {q} need a frame; declare a frame"
            )
        exterior_claim = scaled_value(V[0], q, atom) - 1
        for exterior in templates.piece(q).exterior(frame, integer):
            collect.add(
                exterior,
                exterior_claim,
                "exterior",
                f"{q} outside the invariant",
            )

    implications = collect.implications
    if frame is not None:
        implications.extend(check_frame_containment(p, templates, frame))
    else:
        notes.append("no frame: first exits of invariants are not confined")

    side = side_constraints(p, templates, eps_min, m_max)
    side.extend(initial_conditions(p, templates))
    q0 = p.automaton.initial
    initial = init_expectation(V[0], p.base, q0, atom)
    side.append(
        SideConstraint(
            1 - templates.bound - initial, Relation.GE, "target"
        )
    )
    counts: Dict[str, int] = {}
    for imp in implications:
        tag = imp.tag.split("[")[0]
        counts[tag] = counts.get(tag, 0) + 1
    logger.info(
        f"[CONSTRAINTS] {len(implications)} implication(s) {counts}, "
        f"{len(side)} side constraint(s)"
    )
    return ConstraintSystem(templates, implications, side, modes, k, notes)


def side_constraints(
    p: ProductModel,
    templates: TemplateSet,
    eps_min: Fraction,
    m_max: Fraction,
) -> List[SideConstraint]:
    side: List[SideConstraint] = []

    def add(expr: Polynomial, relation: Relation, tag: str) -> None:
        if expr.is_constant:
            return
        side.append(SideConstraint(expr, relation, tag))

    add(templates.eps - eps_min, Relation.GE, "eps")
    add(templates.M, Relation.GT, "M")
    add(m_max - templates.M, Relation.GE, "M")
    for name, (lower, upper) in p.base.control_box.items():
        add(Polynomial.var(name) - lower, Relation.GE, "kappa-box")
        add(upper - Polynomial.var(name), Relation.GE, "kappa-box")
    if p.base.params:
        seen = set()
        for command in p.base.commands:
            for branch in command.branches:
                if branch.weight.is_constant or branch.weight in seen:
                    continue
                seen.add(branch.weight)
                add(branch.weight, Relation.GE, "weight-range")
                add(1 - branch.weight, Relation.GE, "weight-range")
    atom = templates.exponential
    if atom is not None:
        add(atom.base, Relation.GT, "exp-base")
        add(1 - atom.base, Relation.GT, "exp-base")
        if templates.exp_coeff_nonnegative:
            for q, coefficient in templates.values[0].exp_coefficients:
                add(coefficient, Relation.GE, "exp-coefficient")
    for q, piece in templates.invariant:
        for name, lower, upper in piece.bounds:
            if lower is not None and upper is not None:
                add(upper - lower, Relation.GE, "invariant-box")
    add(templates.bound, Relation.GE, "bound")
    add(1 - templates.bound, Relation.GE, "bound")
    return side




def initial_conditions(
    p: ProductModel, templates: TemplateSet
) -> List[SideConstraint]:
    """The initial state lies in ``I_q0``, or else ``V0`` is at least 1 there.

    Unknown bounds are constrained to contain the initial state; a fixed
    piece missing it makes the initial state a first-exit state.
    """
    q0 = p.automaton.initial
    piece = templates.piece(q0)
    if piece.kind == PieceKind.FULL:
        return []
    initial = init_expectation(
        templates.values[0], p.base, q0, templates.exponential
    )
    leaves = [SideConstraint(initial - 1, Relation.GE, "initial")]
    if piece.kind == PieceKind.EMPTY:
        return [] if _trivial(initial - 1) else leaves
    state = p.base.initial_state
    sides: List[SideConstraint] = []
    for form in piece.region(p.variables).forms:
        at = form.partial_evaluate(state)
        if not at.is_constant:
            sides.append(SideConstraint(at, Relation.GE, "initial"))
        elif at.constant_value < 0:
            return leaves
    return sides


def check_frame_containment(
    p: ProductModel, templates: TemplateSet, frame: Polyhedron
) -> List[Implication]:
    """Conditions keeping the first exits of every ``I_q`` in the frame.

    Only first-exit pre-states are constrained. Fixed invariants with affine
    updates are decided here by linear programming; a failure raises
    :class:`FrameEscapeError`. Otherwise the condition is returned as
    implications for the relaxation.
    """
    names = p.variables
    domain = p.base.space.domain
    implications: List[Implication] = []
    for q in p.states:
        piece = templates.piece(q)
        if piece.kind == PieceKind.EMPTY:
            continue
        region = piece.region(names).intersect(domain)
        for rc in p.refined(q):
            cell = rc.cell.intersect(region)
            if _prunable(cell):
                continue
            for leave in invariant_exits(p, templates, rc, cell):
                updates = leave.branch.update_map(names)
                for form in frame.forms:
                    image = form.substitute(updates)
                    if not leave.domain.is_parametric and image.degree <= 1:
                        _require_contained(
                            leave.domain, image, q, rc.describe()
                        )
                    elif not _trivial(image):
                        implications.append(
                            Implication(
                                leave.domain.with_coordinates(names),
                                image,
                                "frame",
                                rc.describe(),
                                piece.is_half_open,
                            )
                        )
    return implications


def _require_contained(
    cell: Polyhedron, image: Polynomial, q: str, where: str
) -> None:
    result = minimize(image, cell.forms)
    if result.status == LpStatus.UNBOUNDED or (
        result.status == LpStatus.OPTIMAL and result.value < 0
    ):
        raise FrameEscapeError(
            f"one-step image of the invariant at {q} leaves the frame "
            f"({where}: {image} >= 0 fails); enlarge the frame",
            result.point or None,
        )
