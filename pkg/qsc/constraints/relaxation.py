"""Handelman relaxation of polynomial implications over polytopes."""

import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

from qsc.algebra.handelman import handelman_products
from qsc.algebra.polyhedron import Polyhedron
from qsc.algebra.polynomial import Polynomial
from qsc.core.exceptions import NonCompactDomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Implication:
    """``claim >= 0`` on every point of ``domain``.

    ``half_open`` domains come from invariant pieces declared infinite on
    one side; their products are still sound, only not complete.
    """

    domain: Polyhedron
    claim: Polynomial
    tag: str
    where: str = ""
    half_open: bool = False

    @property
    def coordinates(self) -> Tuple[str, ...]:
        return self.domain.coordinates

    def describe(self) -> str:
        location = f" {self.where}" if self.where else ""
        return f"[{self.tag}]{location}: {self.domain} => {self.claim} >= 0"


@dataclass(frozen=True)
class RelaxedImplication:
    tag: str
    equations: Tuple[Polynomial, ...]
    multipliers: Tuple[str, ...]


def multiplier_names(prefix: str = "lam") -> Iterator[str]:
    index = 0
    while True:
        yield f"{prefix}.{index}"
        index += 1


def check_compact(imp: Implication) -> None:
    """Raise :class:`NonCompactDomainError` naming an unbounded variable."""
    used = set(imp.claim.variables)
    for constraint in imp.domain.constraints:
        used.update(constraint.variables)
    for name in imp.coordinates:
        if name in used and not imp.domain.is_bounded_in(name):
            raise NonCompactDomainError(name, imp.tag)


def relax_handelman(
    imp: Implication,
    D: int,
    names: Optional[Iterator[str]] = None,
) -> RelaxedImplication:
    """Coefficient equations for ``claim = sum_e lam_e * basis_e``.

    Equations are linear in the multipliers and polynomial in the template
    unknowns; every multiplier is implicitly non-negative.
    """
    names = names if names is not None else multiplier_names()
    coordinates = imp.coordinates
    if imp.claim.degree_in(coordinates) == 0:
        # A claim free of state variables needs no products at all.
        multiplier = next(names)
        return RelaxedImplication(
            imp.tag,
            (imp.claim - Polynomial.var(multiplier),),
            (multiplier,),
        )
    if not imp.half_open:
        check_compact(imp)
    basis = handelman_products(imp.domain.forms, D)
    multipliers = tuple(next(names) for _ in basis)
    residual = imp.claim
    for multiplier, product in zip(multipliers, basis):
        residual = residual - Polynomial.var(multiplier) * product
    equations = tuple(
        coefficient
        for _, coefficient in sorted(residual.collect(coordinates).items())
        if not coefficient.is_zero
    )
    logger.debug(
        f"[HANDELMAN] {imp.tag}: {len(multipliers)} multiplier(s), "
        f"{len(equations)} equation(s)"
    )
    return RelaxedImplication(imp.tag, equations, multipliers)
