"""Concrete certificates and their key/value file format."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from qsc.algebra.polyhedron import Polyhedron
from qsc.algebra.polynomial import Polynomial
from qsc.certificate.templates import (
    ExponentialAtom,
    InvariantPiece,
    InvariantSpec,
    PieceKind,
    TemplateSet,
    ValueTemplate,
    piece_from_spec,
)
from qsc.core.exceptions import InvalidInputError, QscSyntaxError
from qsc.model.expressions import parse_number, parse_polynomial
from qsc.product.product import ProductModel

logger = logging.getLogger(__name__)

_VALUE_KEY = re.compile(r"^V(?P<index>\d+)\.(?P<q>\w+)$")
_EXP_KEY = re.compile(r"^E0\.(?P<q>\w+)$")
_CONSTANT_KEYS = {
    "eps": "eps",
    "M": "M",
    "exp-base": "exp_base",
    "bound": "bound",
}


@dataclass
class CertificateInstance:
    degree: int
    values: Dict[Tuple[int, str], Polynomial]
    invariant: Dict[str, InvariantPiece]
    eps: Fraction
    M: Fraction
    bound: Fraction
    kappa: Dict[str, Fraction] = field(default_factory=dict)
    exp_coefficients: Dict[str, Fraction] = field(default_factory=dict)
    exp_variable: Optional[str] = None
    exp_base: Optional[Fraction] = None
    exp_offset: Optional[Fraction] = None
    frame: Optional[Polyhedron] = None

    @property
    def pair_count(self) -> int:
        return max(i for i, _ in self.values)

    @property
    def states(self) -> List[str]:
        return list(self.invariant)

    def value(self, i: int, q: str, state: Mapping[str, Fraction]) -> Fraction:
        result = self.values[(i, q)].evaluate(state)
        if i == 0 and self.exp_variable is not None:
            coefficient = self.exp_coefficients.get(q, Fraction(0))
            if coefficient:
                exponent = Fraction(state[self.exp_variable]) - self.exp_offset
                if exponent.denominator != 1:
                    raise InvalidInputError(
                        f"exponential atom at non-integer {self.exp_variable}"
                    )
                result += coefficient * self.exp_base ** int(exponent)
        return result

    def invalid_constant(self) -> Optional[Tuple[str, str]]:
        """Tag and message of the first out-of-range constant, if any."""
        if self.eps <= 0:
            return "eps", f"eps = {self.eps} is not positive"
        if self.M <= 0:
            return "M", f"M = {self.M} is not positive"
        if self.exp_variable is not None and not 0 < self.exp_base < 1:
            return "exp-base", f"exp_base = {self.exp_base} is not in (0,1)"
        if not 0 <= self.bound <= 1:
            return "bound", f"bound = {self.bound} is not in [0,1]"
        return None

    def initial_value(self, p: ProductModel) -> Fraction:
        state, q = p.initial
        return self.value(0, q, state)

    def to_templates(self, p: ProductModel) -> TemplateSet:
        """Constant templates over ``p`` with the parameters fixed."""
        fixed = p.with_parameters(self.kappa) if p.base.params else p
        values = []
        for i in range(self.pair_count + 1):
            polys = tuple((q, self.values[(i, q)]) for q in fixed.states)
            exps = ()
            if i == 0 and self.exp_variable is not None:
                exps = tuple(
                    (q, Polynomial.constant(self.exp_coefficients.get(q, 0)))
                    for q in fixed.states
                )
            values.append(ValueTemplate(i, polys, exps))
        exponential = None
        if self.exp_variable is not None:
            exponential = ExponentialAtom(
                self.exp_variable,
                Polynomial.constant(self.exp_base),
                self.exp_offset,
            )
        return TemplateSet(
            product=fixed,
            degree=self.degree,
            values=tuple(values),
            invariant=tuple((q, self.invariant[q]) for q in fixed.states),
            eps=Polynomial.constant(self.eps),
            M=Polynomial.constant(self.M),
            bound=Polynomial.constant(self.bound),
            exponential=exponential,
            frame=self.frame,
            exp_coeff_nonnegative=False,
        )

    def serialize(self) -> str:
        lines = [
            "# qsc certificate",
            f"degree = {self.degree}",
            f"eps = {self.eps}",
            f"M = {self.M}",
            f"bound = {self.bound}",
        ]
        for name, value in sorted(self.kappa.items()):
            lines.append(f"kappa.{name} = {value}")
        if self.exp_variable is not None:
            lines.append(f"exp_variable = {self.exp_variable}")
            lines.append(f"exp_base = {self.exp_base}")
            lines.append(f"exp_offset = {self.exp_offset}")
        if self.frame is not None:
            lines.append(f"frame = {box_text(self.frame)}")
        for q, piece in self.invariant.items():
            lines.append(f"inv.{q} = {piece.to_text()}")
        for (i, q), poly in sorted(self.values.items()):
            lines.append(f"V{i}.{q} = {poly.to_text()}")
        for q, coefficient in self.exp_coefficients.items():
            lines.append(f"E0.{q} = {coefficient}")
        return "\n".join(lines) + "\n"

    def summary_rows(self) -> List[Tuple[str, str]]:
        rows = [("bound", str(self.bound)), ("eps", str(self.eps))]
        rows.append(("M", str(self.M)))
        rows.extend((f"kappa {k}", str(v)) for k, v in self.kappa.items())
        for q, piece in self.invariant.items():
            rows.append((f"I({q})", piece.to_text()))
        for (i, q), poly in sorted(self.values.items()):
            text = poly.to_text()
            coefficient = self.exp_coefficients.get(q) if i == 0 else None
            if coefficient:
                text += (
                    f" + {coefficient}*({self.exp_base})^"
                    f"({self.exp_variable} - {self.exp_offset})"
                )
            rows.append((f"V{i}({q})", text))
        return rows


def box_text(region: Polyhedron) -> str:
    """``x:[lo,hi];...`` for a box over its coordinates."""
    parts = []
    for name in region.coordinates:
        lower, upper = region.syntactic_bounds(name)
        low = "-inf" if lower is None else str(lower)
        high = "inf" if upper is None else str(upper)
        parts.append(f"{name}:[{low},{high}]")
    return ";".join(parts)


def parse_box(text: str, names: Sequence[str]) -> Polyhedron:
    spec = InvariantSpec.parse(text)
    if spec.kind != PieceKind.BOX:
        raise InvalidInputError(f"expected a box, got '{text}'")
    piece = piece_from_spec("frame", spec, names)
    if not piece.is_fixed:
        raise InvalidInputError(f"box '{text}' has unknown bounds")
    return piece.region(names)


def _resolve(
    poly: Polynomial, assignment: Mapping[str, Fraction]
) -> Polynomial:
    return poly.partial_evaluate(assignment)


def instantiate(
    templates: TemplateSet,
    assignment: Mapping[str, Fraction],
    eps: Optional[Fraction] = None,
    M: Optional[Fraction] = None,
    kappa: Optional[Mapping[str, Fraction]] = None,
    p: Optional[Fraction] = None,
) -> CertificateInstance:
    """Substitute solved unknowns into the templates."""
    merged: Dict[str, Fraction] = dict(assignment)
    for poly, value in ((templates.eps, eps), (templates.M, M)):
        if value is not None:
            merged.update({name: value for name in poly.variables})
    if p is not None:
        merged.update({name: p for name in templates.bound.variables})
    merged.update(kappa or {})
    states = set(templates.product.variables)
    unresolved: List[str] = []

    def constant(poly: Polynomial) -> Fraction:
        resolved = _resolve(poly, merged)
        if not resolved.is_constant:
            unresolved.extend(
                n for n in resolved.variables if n not in unresolved
            )
            return Fraction(0)
        return resolved.constant_value

    values: Dict[Tuple[int, str], Polynomial] = {}
    exp_coefficients: Dict[str, Fraction] = {}
    for template in templates.values:
        for q, poly in template.polys:
            resolved = _resolve(poly, merged)
            stray = [n for n in resolved.variables if n not in states]
            unresolved.extend(n for n in stray if n not in unresolved)
            values[(template.index, q)] = resolved
        for q, coefficient in template.exp_coefficients:
            exp_coefficients[q] = constant(coefficient)

    invariant: Dict[str, InvariantPiece] = {}
    for q, piece in templates.invariant:
        resolved = piece.substitute(merged)
        unresolved.extend(n for n in resolved.unknowns if n not in unresolved)
        invariant[q] = resolved

    values_eps = constant(templates.eps)
    values_m = constant(templates.M)
    bound = constant(templates.bound)
    resolved_kappa = {}
    for name in templates.kappa:
        if name in merged:
            resolved_kappa[name] = Fraction(merged[name])
        elif name not in unresolved:
            unresolved.append(name)
    exp_base = exp_offset = exp_variable = None
    if templates.exponential is not None:
        exp_variable = templates.exponential.variable
        exp_base = constant(templates.exponential.base)
        exp_offset = templates.exponential.offset

    if unresolved:
        raise InvalidInputError(
            f"unresolved symbol(s) in certificate: {', '.join(unresolved)}"
        )
    if values_eps <= 0 or values_m <= 0:
        raise InvalidInputError("eps and M must be positive")
    for q, piece in invariant.items():
        for name, _, _ in piece.bounds:
            lower, upper = piece.interval(name)
            if lower is not None and upper is not None and lower > upper:
                raise InvalidInputError(
                    f"inverted invariant box for {q}: {name} in "
                    f"[{lower}, {upper}]"
                )
    return CertificateInstance(
        degree=templates.degree,
        values=values,
        invariant=invariant,
        eps=values_eps,
        M=values_m,
        bound=bound,
        kappa=resolved_kappa,
        exp_coefficients=exp_coefficients,
        exp_variable=exp_variable,
        exp_base=exp_base,
        exp_offset=exp_offset,
        frame=templates.frame,
    )


def trivial_instance(
    p: ProductModel, kappa: Optional[Mapping[str, Fraction]] = None
) -> CertificateInstance:
    """The always-valid certificate of bound 0: ``V0 = 1``, empty invariant."""
    values = {(0, q): Polynomial.one() for q in p.states}
    for i in range(1, len(p.pairs_lifted) + 1):
        values.update({(i, q): Polynomial.zero() for q in p.states})
    return CertificateInstance(
        degree=0,
        values=values,
        invariant={q: InvariantPiece.empty() for q in p.states},
        eps=Fraction(1),
        M=Fraction(1),
        bound=Fraction(0),
        kappa=dict(kappa or {}),
    )


def parse_certificate(
    text: str, p: ProductModel, source: str = "<certificate>"
) -> CertificateInstance:
    """Read the key/value certificate format against product ``p``."""
    entries: Dict[str, Tuple[str, int]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise QscSyntaxError("expected 'key = value'", number, 1, source)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in entries:
            raise QscSyntaxError(f"duplicate key '{key}'", number, 1, source)
        entries[key] = (value, number)

    def fail(key: str, message: str) -> QscSyntaxError:
        return QscSyntaxError(message, entries[key][1], 1, source)

    def number(key: str, default: Optional[str] = None) -> Fraction:
        if key not in entries:
            if default is None:
                raise QscSyntaxError(
                    f"missing key '{key}'", None, None, source
                )
            return parse_number(default)
        try:
            return parse_number(entries[key][0])
        except InvalidInputError as err:
            raise fail(key, err.detail)

    names = p.variables
    values: Dict[Tuple[int, str], Polynomial] = {}
    invariant: Dict[str, InvariantPiece] = {}
    exp_coefficients: Dict[str, Fraction] = {}
    kappa: Dict[str, Fraction] = {}
    for key, (value, _) in entries.items():
        match = _VALUE_KEY.match(key)
        try:
            if match:
                values[(int(match["index"]), match["q"])] = parse_polynomial(
                    value, names
                )
            elif _EXP_KEY.match(key):
                q = _EXP_KEY.match(key)["q"]
                exp_coefficients[q] = parse_number(value)
            elif key.startswith("inv."):
                q = key[len("inv."):]
                piece = piece_from_spec(q, InvariantSpec.parse(value), names)
                if not piece.is_fixed:
                    raise InvalidInputError("invariant bounds must be numbers")
                invariant[q] = piece
            elif key.startswith("kappa."):
                kappa[key[len("kappa."):]] = parse_number(value)
        except InvalidInputError as err:
            raise fail(key, err.detail)

    missing = [q for q in p.states if q not in invariant]
    pair_count = len(p.pairs_lifted)
    for i in range(pair_count + 1):
        missing.extend(
            f"V{i}.{q}" for q in p.states if (i, q) not in values
        )
    if missing:
        raise QscSyntaxError(
            f"certificate does not cover {', '.join(missing)}",
            None,
            None,
            source,
        )
    extra = [
        f"V{i}.{q}"
        for i, q in values
        if q not in p.states or i > pair_count
    ]
    if extra:
        raise QscSyntaxError(
            f"certificate mentions unknown entries {', '.join(extra)}",
            None,
            None,
            source,
        )

    exp_variable = entries.get("exp_variable", (None, 0))[0]
    instance = CertificateInstance(
        degree=int(number("degree", "0")),
        values=values,
        invariant={q: invariant[q] for q in p.states},
        eps=number("eps"),
        M=number("M", "1"),
        bound=number("bound"),
        kappa=kappa,
        exp_coefficients=exp_coefficients,
        exp_variable=exp_variable,
        exp_base=number("exp_base") if exp_variable else None,
        exp_offset=number("exp_offset", "0") if exp_variable else None,
        frame=(
            parse_box(entries["frame"][0], names)
            if "frame" in entries
            else None
        ),
    )
    problem = instance.invalid_constant()
    if problem is not None:
        tag, message = problem
        key = _CONSTANT_KEYS[tag]
        if key in entries:
            raise fail(key, message)
        raise QscSyntaxError(message, None, None, source)
    logger.info(
        f"[CERT] {source}: bound {instance.bound} over "
        f"{len(p.states)} automaton state(s)"
    )
    return instance
