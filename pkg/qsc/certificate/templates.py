"""Parametrized value-function and invariant templates.

Unknown names are dotted (``V0.q0.c2``, ``I.q0.x.hi``) so they can never
clash with model identifiers.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import (
    AbstractSet,
    Dict,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from qsc.algebra.polyhedron import Polyhedron
from qsc.algebra.polynomial import (
    Polynomial,
    monomial_polynomial,
    monomials_up_to,
)
from qsc.core.consts import BOUND_SYMBOL, EPS_SYMBOL, EXP_BASE_SYMBOL, M_SYMBOL
from qsc.core.exceptions import (
    ConfigurationError,
    InvalidInputError,
    UnsupportedTemplateError,
)
from qsc.model.expressions import parse_bound
from qsc.product.modes import SinkKind
from qsc.product.product import ProductModel

logger = logging.getLogger(__name__)

UNKNOWN = "?"
BoundSpec = Union[Fraction, None, str]


class PieceKind(str, Enum):
    EMPTY = "empty"
    FULL = "full"
    BOX = "box"


@dataclass(frozen=True)
class InvariantPiece:
    """Invariant region of one automaton state.

    Box bounds are polynomials in the unknowns (constants once fixed);
    ``None`` marks an infinite side.
    """

    kind: PieceKind
    bounds: Tuple[
        Tuple[str, Optional[Polynomial], Optional[Polynomial]], ...
    ] = ()

    @classmethod
    def empty(cls) -> "InvariantPiece":
        return cls(PieceKind.EMPTY)

    @classmethod
    def full(cls) -> "InvariantPiece":
        return cls(PieceKind.FULL)

    def region(self, coordinates: Sequence[str]) -> Polyhedron:
        if self.kind == PieceKind.EMPTY:
            return Polyhedron.empty(coordinates)
        if self.kind == PieceKind.FULL:
            return Polyhedron.full(coordinates)
        return Polyhedron.box(
            {name: (lo, hi) for name, lo, hi in self.bounds}, coordinates
        )

    def exterior(
        self, frame: Polyhedron, integer_vars: AbstractSet[str]
    ) -> List[Polyhedron]:
        """Disjoint convex pieces of ``frame`` outside this region."""
        if self.kind == PieceKind.FULL:
            return []
        if self.kind == PieceKind.EMPTY:
            return [] if frame.is_empty() else [frame]
        return frame.subtract(self.region(frame.coordinates), integer_vars)

    @property
    def unknowns(self) -> List[str]:
        names: List[str] = []
        for _, lo, hi in self.bounds:
            for bound in (lo, hi):
                if bound is not None:
                    names.extend(
                        n for n in bound.variables if n not in names
                    )
        return names

    @property
    def is_fixed(self) -> bool:
        return not self.unknowns

    @property
    def is_half_open(self) -> bool:
        """A box with at least one side declared infinite."""
        return self.kind == PieceKind.BOX and any(
            lo is None or hi is None for _, lo, hi in self.bounds
        )

    def interval(
        self, name: str
    ) -> Tuple[Optional[Fraction], Optional[Fraction]]:
        """Rational bounds of a fixed box along ``name``."""
        for variable, lo, hi in self.bounds:
            if variable == name:
                return (
                    None if lo is None else lo.constant_value,
                    None if hi is None else hi.constant_value,
                )
        return None, None

    def substitute(
        self, assignment: Mapping[str, Fraction]
    ) -> "InvariantPiece":
        return replace(
            self,
            bounds=tuple(
                (
                    name,
                    None if lo is None else lo.partial_evaluate(assignment),
                    None if hi is None else hi.partial_evaluate(assignment),
                )
                for name, lo, hi in self.bounds
            ),
        )

    def to_text(self) -> str:
        if self.kind != PieceKind.BOX:
            return self.kind.value
        parts = []
        for name, lo, hi in self.bounds:
            low = "-inf" if lo is None else lo.to_text()
            high = "inf" if hi is None else hi.to_text()
            parts.append(f"{name}:[{low},{high}]")
        return ";".join(parts)


_BOX_ITEM = re.compile(
    r"^\s*(?P<name>[A-Za-z_]\w*)\s*:\s*\[(?P<lo>[^,\]]+),(?P<hi>[^\]]+)\]\s*$"
)


@dataclass(frozen=True)
class InvariantSpec:
    """User-facing invariant choice: ``empty``, ``full`` or a box spec."""

    kind: PieceKind
    bounds: Tuple[Tuple[str, BoundSpec, BoundSpec], ...] = ()

    @classmethod
    def parse(cls, text: str) -> "InvariantSpec":
        cleaned = text.strip().lower()
        if cleaned in (PieceKind.EMPTY.value, PieceKind.FULL.value):
            return cls(PieceKind(cleaned))
        bounds = []
        for item in text.split(";"):
            if not item.strip():
                continue
            match = _BOX_ITEM.match(item)
            if match is None:
                raise ConfigurationError(f"malformed invariant box '{item}'")
            bounds.append(
                (
                    match["name"],
                    _bound_spec(match["lo"]),
                    _bound_spec(match["hi"]),
                )
            )
        if not bounds:
            raise ConfigurationError(f"empty invariant specification '{text}'")
        return cls(PieceKind.BOX, tuple(bounds))


def _bound_spec(text: str) -> BoundSpec:
    if text.strip() == UNKNOWN:
        return UNKNOWN
    return parse_bound(text)


@dataclass(frozen=True)
class ValueTemplate:
    index: int
    polys: Tuple[Tuple[str, Polynomial], ...]
    exp_coefficients: Tuple[Tuple[str, Polynomial], ...] = ()

    def poly(self, q: str) -> Polynomial:
        return dict(self.polys)[q]

    def exp_coefficient(self, q: str) -> Polynomial:
        return dict(self.exp_coefficients).get(q, Polynomial.zero())

    def fixed(self, q: str, value: int) -> "ValueTemplate":
        polys = tuple(
            (s, Polynomial.constant(value) if s == q else p)
            for s, p in self.polys
        )
        exps = tuple(
            (s, Polynomial.zero() if s == q else c)
            for s, c in self.exp_coefficients
        )
        return ValueTemplate(self.index, polys, exps)


@dataclass(frozen=True)
class ExponentialAtom:
    """``c_q * a^(x - offset)``, added to ``V0`` at every automaton state."""

    variable: str
    base: Polynomial
    offset: Fraction

    def power(self, exponent: int) -> Polynomial:
        if exponent < 0:
            raise ValueError("negative power of the exponential base")
        return self.base**exponent


@dataclass
class SymbolTable:
    entries: Dict[str, str] = field(default_factory=dict)

    def declare(self, name: str, kind: str) -> None:
        if name in self.entries and self.entries[name] != kind:
            raise InvalidInputError(f"symbol {name} declared twice")
        self.entries[name] = kind

    def names(self, kind: Optional[str] = None) -> List[str]:
        return [n for n, k in self.entries.items() if kind in (None, k)]

    def __contains__(self, name: object) -> bool:
        return name in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)


@dataclass(frozen=True)
class TemplateOptions:
    degree: int = 2
    exponential: bool = False
    exp_variable: Optional[str] = None
    exp_base: Optional[Fraction] = None
    exp_offset: Optional[Fraction] = None
    exp_coeff_nonnegative: bool = True
    invariant: Tuple[Tuple[str, InvariantSpec], ...] = ()
    frame: Optional[Polyhedron] = None
    eps: Optional[Fraction] = None
    M: Optional[Fraction] = None


@dataclass(frozen=True)
class TemplateSet:
    product: ProductModel
    degree: int
    values: Tuple[ValueTemplate, ...]
    invariant: Tuple[Tuple[str, InvariantPiece], ...]
    eps: Polynomial
    M: Polynomial
    bound: Polynomial
    exponential: Optional[ExponentialAtom] = None
    frame: Optional[Polyhedron] = None
    exp_coeff_nonnegative: bool = True

    def piece(self, q: str) -> InvariantPiece:
        return dict(self.invariant)[q]

    @property
    def kappa(self) -> Tuple[str, ...]:
        return self.product.base.param_names

    def value_at(self, i: int, q: str) -> Polynomial:
        return self.values[i].poly(q)

    def symbol_table(self) -> SymbolTable:
        """Every unknown the templates mention, in declaration order."""
        table = SymbolTable()
        states = set(self.product.variables)
        for template in self.values:
            for q, poly in template.polys:
                for name in poly.variables:
                    if name not in states:
                        table.declare(name, "coefficient")
            for q, coefficient in template.exp_coefficients:
                for name in coefficient.variables:
                    table.declare(name, "exp-coefficient")
        for q, piece in self.invariant:
            for name in piece.unknowns:
                table.declare(name, "bound")
        for name in self.eps.variables:
            table.declare(name, "eps")
        for name in self.M.variables:
            table.declare(name, "M")
        if self.exponential is not None:
            for name in self.exponential.base.variables:
                table.declare(name, "exp-base")
        for name in self.kappa:
            table.declare(name, "kappa")
        for name in self.bound.variables:
            table.declare(name, "target")
        return table

    def with_bound(self, bound: Polynomial) -> "TemplateSet":
        return replace(self, bound=bound)


def _coefficient_name(i: int, q: str, j: int) -> str:
    return f"V{i}.{q}.c{j}"


def build_templates(
    p: ProductModel, degree: int, options: Optional[TemplateOptions] = None
) -> TemplateSet:
    options = options or TemplateOptions(degree=degree)
    if degree < 0:
        raise UnsupportedTemplateError("template degree must be >= 0")
    names = p.variables
    monomials = list(monomials_up_to(len(names), degree))
    basis = [monomial_polynomial(names, m) for m in monomials]
    values = []
    for i in range(len(p.pairs_lifted) + 1):
        polys = []
        for q in p.states:
            poly = Polynomial.zero()
            for j, term in enumerate(basis):
                poly = poly + Polynomial.var(_coefficient_name(i, q, j)) * term
            polys.append((q, poly))
        values.append(ValueTemplate(i, tuple(polys)))

    exponential = None
    if options.exponential:
        exponential = _exponential_atom(p, options)
        values[0] = replace(
            values[0],
            exp_coefficients=tuple(
                (q, Polynomial.var(f"E.{q}")) for q in p.states
            ),
        )

    specs = dict(options.invariant)
    unknown_specs = [name for name in specs if name not in p.states]
    if unknown_specs:
        raise ConfigurationError(
            f"invariant given for unknown automaton state(s) {unknown_specs}"
        )
    invariant = tuple(
        (q, piece_from_spec(q, specs.get(q), names)) for q in p.states
    )
    eps = (
        Polynomial.constant(options.eps)
        if options.eps is not None
        else Polynomial.var(EPS_SYMBOL)
    )
    m_bound = (
        Polynomial.constant(options.M)
        if options.M is not None
        else Polynomial.var(M_SYMBOL)
    )
    templates = TemplateSet(
        product=p,
        degree=degree,
        values=tuple(values),
        invariant=invariant,
        eps=eps,
        M=m_bound,
        bound=Polynomial.var(BOUND_SYMBOL),
        exponential=exponential,
        frame=options.frame,
        exp_coeff_nonnegative=options.exp_coeff_nonnegative,
    )
    logger.info(
        f"[TEMPLATE] degree {degree}, {len(values)} value function(s), "
        f"{len(templates.symbol_table())} unknown(s)"
        + (" with exponential atom" if exponential else "")
    )
    return templates


def piece_from_spec(
    q: str, spec: Optional[InvariantSpec], names: Sequence[str]
) -> InvariantPiece:
    if spec is None:
        spec = InvariantSpec(
            PieceKind.BOX, tuple((n, UNKNOWN, UNKNOWN) for n in names)
        )
    if spec.kind != PieceKind.BOX:
        return InvariantPiece(spec.kind)
    bounds = []
    for name, lo, hi in spec.bounds:
        if name not in names:
            raise ConfigurationError(
                f"invariant of {q} bounds unknown variable '{name}'"
            )
        bounds.append(
            (
                name,
                _bound_poly(lo, f"I.{q}.{name}.lo"),
                _bound_poly(hi, f"I.{q}.{name}.hi"),
            )
        )
    for name, lo, hi in bounds:
        if (
            lo is not None
            and hi is not None
            and lo.is_constant
            and hi.is_constant
            and lo.constant_value > hi.constant_value
        ):
            raise ConfigurationError(f"inverted invariant box for {q}.{name}")
    return InvariantPiece(PieceKind.BOX, tuple(bounds))


def _bound_poly(spec: BoundSpec, symbol: str) -> Optional[Polynomial]:
    if spec == UNKNOWN:
        return Polynomial.var(symbol)
    if spec is None:
        return None
    return Polynomial.constant(spec)


def _exponential_atom(
    p: ProductModel, options: TemplateOptions
) -> ExponentialAtom:
    names = p.variables
    variable = options.exp_variable or (names[0] if len(names) == 1 else None)
    if variable is None or variable not in names:
        raise UnsupportedTemplateError(
            "exponential atom needs exp_variable naming a state variable"
        )
    if variable not in p.integer_vars:
        raise UnsupportedTemplateError(
            f"exponential atom variable {variable} must be an integer"
        )
    if options.exp_base is not None and not 0 < options.exp_base < 1:
        raise UnsupportedTemplateError("exponential base must be in (0,1)")
    domain = p.base.space.domain
    for command in p.base.commands:
        region = domain.intersect(command.guard)
        if region.is_empty():
            continue
        for branch in command.branches:
            step = branch.step(variable, region)
            if step is None or step.denominator != 1:
                raise UnsupportedTemplateError(
                    f"exponential atom needs integer steps of {variable}; "
                    f"line {command.line} updates it non-uniformly"
                )
    offset = options.exp_offset
    if offset is None:
        sources = []
        if options.frame is not None:
            sources.append(options.frame)
        sources.append(p.base.space.domain)
        for region in sources:
            lower, _ = region.syntactic_bounds(variable)
            if lower is not None:
                offset = lower
                break
    if offset is None or offset.denominator != 1:
        raise UnsupportedTemplateError(
            f"exponential atom needs an integer lower bound for {variable}"
        )
    if options.exp_base is not None:
        base = Polynomial.constant(options.exp_base)
    else:
        base = Polynomial.var(EXP_BASE_SYMBOL)
    return ExponentialAtom(variable, base, offset)


def apply_sink_heuristics(
    templates: TemplateSet, sinks: Mapping[str, SinkKind]
) -> TemplateSet:
    """Fix values and invariant pieces on automaton sinks.

    Accepting sinks get ``V0 = 0`` and a full invariant, rejecting sinks
    ``V0 = 1`` and an empty one. The remaining value functions are fixed
    to ``0`` on every sink, a valid non-negative choice.
    """
    values = list(templates.values)
    invariant = dict(templates.invariant)
    for q, kind in sinks.items():
        if kind == SinkKind.NEITHER:
            continue
        accepting = kind == SinkKind.SURELY_ACCEPTING
        values[0] = values[0].fixed(q, 0 if accepting else 1)
        for i in range(1, len(values)):
            values[i] = values[i].fixed(q, 0)
        invariant[q] = (
            InvariantPiece.full() if accepting else InvariantPiece.empty()
        )
        logger.debug(f"[TEMPLATE] sink {q} fixed as {kind.value}")
    return replace(
        templates,
        values=tuple(values),
        invariant=tuple((q, invariant[q]) for q in templates.product.states),
    )
