"""Exact multivariate polynomials over the rationals.

A polynomial stores its variables in sorted order and maps exponent
vectors to non-zero ``Fraction`` coefficients. Variables that no term uses
are dropped, so two equal polynomials always compare and hash equal.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as cartesian
from typing import (
    Dict,
    Iterable,
    Iterator,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from qsc.core.exceptions import ArityError

Monomial = Tuple[int, ...]
Number = Union[int, Fraction]
Coercible = Union["Polynomial", int, Fraction]


def _as_fraction(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not polynomial coefficients")
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"unsupported coefficient type {type(value).__name__}")


class Polynomial:
    __slots__ = ("_variables", "_terms", "_hash")

    def __init__(
        self,
        variables: Sequence[str] = (),
        terms: Optional[Mapping[Monomial, Number]] = None,
    ):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ArityError(f"duplicate variables in {variables}")
        collected: Dict[str, int] = {}
        raw: Dict[Tuple[Tuple[str, int], ...], Fraction] = {}
        for monomial, coefficient in (terms or {}).items():
            if len(monomial) != len(variables):
                raise ArityError(
                    f"monomial {monomial} does not match {variables}"
                )
            value = _as_fraction(coefficient)
            if value == 0:
                continue
            key = tuple(
                (name, power)
                for name, power in zip(variables, monomial)
                if power
            )
            for name, power in key:
                if power < 0:
                    raise ValueError("negative exponent in polynomial")
                collected[name] = 1
            raw[key] = raw.get(key, Fraction(0)) + value
        ordered = tuple(sorted(collected))
        index = {name: i for i, name in enumerate(ordered)}
        normalized: Dict[Monomial, Fraction] = {}
        for key, value in raw.items():
            if value == 0:
                continue
            exponents = [0] * len(ordered)
            for name, power in key:
                exponents[index[name]] = power
            normalized[tuple(exponents)] = value
        used = set()
        for monomial in normalized:
            used.update(i for i, power in enumerate(monomial) if power)
        if len(used) != len(ordered):
            keep = sorted(used)
            ordered = tuple(ordered[i] for i in keep)
            normalized = {
                tuple(monomial[i] for i in keep): value
                for monomial, value in normalized.items()
            }
        self._variables = ordered
        self._terms = normalized
        self._hash: Optional[int] = None

    # Construction helpers

    @classmethod
    def constant(cls, value: Number) -> "Polynomial":
        return cls((), {(): value})

    @classmethod
    def var(cls, name: str) -> "Polynomial":
        return cls((name,), {(1,): 1})

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls()

    @classmethod
    def one(cls) -> "Polynomial":
        return cls.constant(1)

    @classmethod
    def coerce(cls, value: Coercible) -> "Polynomial":
        if isinstance(value, Polynomial):
            return value
        return cls.constant(value)

    @classmethod
    def linear(
        cls, coefficients: Mapping[str, Number], constant: Number = 0
    ) -> "Polynomial":
        names = tuple(coefficients)
        terms: Dict[Monomial, Number] = {(0,) * len(names): constant}
        for i, name in enumerate(names):
            monomial = tuple(1 if j == i else 0 for j in range(len(names)))
            terms[monomial] = coefficients[name]
        return cls(names, terms)

    # Inspection

    @property
    def variables(self) -> Tuple[str, ...]:
        return self._variables

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        for monomial in sorted(self._terms, key=_graded_key, reverse=True):
            yield monomial, self._terms[monomial]

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return not self._variables

    @property
    def constant_value(self) -> Fraction:
        """Value of the polynomial if it has no variables."""
        if self._variables:
            raise ValueError(f"polynomial {self} is not constant")
        return self._terms.get((), Fraction(0))

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * len(self._variables), Fraction(0))

    @property
    def degree(self) -> int:
        if not self._terms:
            return 0
        return max(sum(monomial) for monomial in self._terms)

    def degree_in(self, names: Iterable[str]) -> int:
        wanted = set(names)
        indices = {
            i for i, name in enumerate(self._variables) if name in wanted
        }
        if not self._terms:
            return 0
        return max(
            sum(power for i, power in enumerate(monomial) if i in indices)
            for monomial in self._terms
        )

    def free_symbols(self) -> frozenset:
        return frozenset(self._variables)

    def coefficient(self, powers: Mapping[str, int]) -> Fraction:
        for name in powers:
            if powers[name] and name not in self._variables:
                return Fraction(0)
        monomial = tuple(powers.get(name, 0) for name in self._variables)
        return self._terms.get(monomial, Fraction(0))

    # Arithmetic

    def _aligned(
        self, other: "Polynomial"
    ) -> Tuple[Tuple[str, ...], Dict[Monomial, Fraction], Dict]:
        names = tuple(sorted(set(self._variables) | set(other._variables)))
        return names, self._lift(names), other._lift(names)

    def _lift(self, names: Tuple[str, ...]) -> Dict[Monomial, Fraction]:
        if names == self._variables:
            return self._terms
        position = [names.index(name) for name in self._variables]
        lifted: Dict[Monomial, Fraction] = {}
        for monomial, value in self._terms.items():
            exponents = [0] * len(names)
            for i, power in zip(position, monomial):
                exponents[i] = power
            lifted[tuple(exponents)] = value
        return lifted

    def __add__(self, other: Coercible) -> "Polynomial":
        other = Polynomial.coerce(other)
        names, left, right = self._aligned(other)
        result = dict(left)
        for monomial, value in right.items():
            result[monomial] = result.get(monomial, Fraction(0)) + value
        return Polynomial(names, result)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(
            self._variables, {m: -v for m, v in self._terms.items()}
        )

    def __sub__(self, other: Coercible) -> "Polynomial":
        return self + (-Polynomial.coerce(other))

    def __rsub__(self, other: Coercible) -> "Polynomial":
        return Polynomial.coerce(other) - self

    def __mul__(self, other: Coercible) -> "Polynomial":
        if not isinstance(other, Polynomial):
            factor = _as_fraction(other)
            return Polynomial(
                self._variables,
                {m: v * factor for m, v in self._terms.items()},
            )
        names, left, right = self._aligned(other)
        result: Dict[Monomial, Fraction] = {}
        for (m1, v1), (m2, v2) in cartesian(left.items(), right.items()):
            monomial = tuple(a + b for a, b in zip(m1, m2))
            result[monomial] = result.get(monomial, Fraction(0)) + v1 * v2
        return Polynomial(names, result)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Polynomial":
        divisor = _as_fraction(other)
        if divisor == 0:
            raise ZeroDivisionError("polynomial division by zero")
        return self * (1 / divisor)

    def __pow__(self, exponent: int) -> "Polynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # Evaluation and substitution

    def evaluate(self, point: Mapping[str, Number]) -> Fraction:
        missing = [name for name in self._variables if name not in point]
        if missing:
            raise ArityError(
                f"cannot evaluate {self}: no value for {', '.join(missing)}"
            )
        values = [_as_fraction(point[name]) for name in self._variables]
        total = Fraction(0)
        for monomial, coefficient in self._terms.items():
            term = coefficient
            for value, power in zip(values, monomial):
                if power:
                    term *= value**power
            total += term
        return total

    def partial_evaluate(
        self, point: Mapping[str, Number]
    ) -> "Polynomial":
        """Substitute constants for the variables named in ``point``."""
        bindings = {
            name: Polynomial.constant(point[name])
            for name in self._variables
            if name in point
        }
        if not bindings:
            return self
        return self.substitute(bindings)

    def substitute(
        self, bindings: Mapping[str, Coercible]
    ) -> "Polynomial":
        """Simultaneously replace variables by polynomials."""
        replaced = {
            name: Polynomial.coerce(bindings[name])
            for name in self._variables
            if name in bindings
        }
        if not replaced:
            return self
        powers: Dict[Tuple[str, int], Polynomial] = {}
        result = Polynomial.zero()
        for monomial, coefficient in self._terms.items():
            term = Polynomial.constant(coefficient)
            kept: Dict[Monomial, Number] = {}
            residual_names = []
            residual_powers = []
            for name, power in zip(self._variables, monomial):
                if not power:
                    continue
                if name in replaced:
                    key = (name, power)
                    if key not in powers:
                        powers[key] = replaced[name] ** power
                    term = term * powers[key]
                else:
                    residual_names.append(name)
                    residual_powers.append(power)
            if residual_names:
                kept[tuple(residual_powers)] = 1
                term = term * Polynomial(residual_names, kept)
            result = result + term
        return result

    def rename(self, mapping: Mapping[str, str]) -> "Polynomial":
        names = tuple(mapping.get(name, name) for name in self._variables)
        if len(set(names)) != len(names):
            return self.substitute(
                {old: Polynomial.var(new) for old, new in mapping.items()}
            )
        return Polynomial(names, self._terms)

    def collect(
        self, names: Sequence[str]
    ) -> Dict[Monomial, "Polynomial"]:
        """Group terms by their exponents in ``names``.

        The returned coefficients are polynomials in the remaining
        variables; keys are exponent vectors ordered like ``names``.
        """
        names = tuple(names)
        position = {name: i for i, name in enumerate(names)}
        grouped: Dict[Monomial, Dict[Tuple, Fraction]] = {}
        other_names = tuple(
            name for name in self._variables if name not in position
        )
        for monomial, coefficient in self._terms.items():
            outer = [0] * len(names)
            inner = []
            for name, power in zip(self._variables, monomial):
                if name in position:
                    outer[position[name]] = power
                else:
                    inner.append(power)
            bucket = grouped.setdefault(tuple(outer), {})
            bucket[tuple(inner)] = (
                bucket.get(tuple(inner), Fraction(0)) + coefficient
            )
        return {
            outer: Polynomial(other_names, inner)
            for outer, inner in grouped.items()
        }

    def linear_coefficients(self) -> Tuple[Dict[str, Fraction], Fraction]:
        """Coefficients of a degree-one polynomial and its constant."""
        if self.degree > 1:
            raise ValueError(f"{self} is not affine")
        coefficients: Dict[str, Fraction] = {}
        for i, name in enumerate(self._variables):
            monomial = tuple(1 if j == i else 0 for j in range(len(self)))
            coefficients[name] = self._terms.get(monomial, Fraction(0))
        return coefficients, self.constant_term

    # Protocols

    def __len__(self) -> int:
        return len(self._variables)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)) and not isinstance(
            other, bool
        ):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (
            self._variables == other._variables
            and self._terms == other._terms
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(
                (self._variables, frozenset(self._terms.items()))
            )
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for monomial, coefficient in self.items():
            factors = []
            for name, power in zip(self._variables, monomial):
                if power == 1:
                    factors.append(name)
                elif power > 1:
                    factors.append(f"{name}^{power}")
            magnitude = abs(coefficient)
            if not factors:
                body = str(magnitude)
            elif magnitude == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(magnitude)] + factors)
            sign = "-" if coefficient < 0 else "+"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def _graded_key(monomial: Monomial) -> Tuple[int, Monomial]:
    return (sum(monomial), monomial)


def monomials_up_to(count: int, degree: int) -> Iterator[Monomial]:
    """Exponent vectors over ``count`` variables with total <= ``degree``.

    Ordered by total degree, then reverse-lexicographically, so the
    constant comes first and ``x`` precedes ``y``.
    """
    if count == 0:
        yield ()
        return
    for total in range(degree + 1):
        yield from _compositions(count, total)


def _compositions(count: int, total: int) -> Iterator[Monomial]:
    if count == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(count - 1, total - head):
            yield (head,) + tail


def monomial_polynomial(
    names: Sequence[str], monomial: Monomial
) -> Polynomial:
    return Polynomial(tuple(names), {tuple(monomial): 1})
