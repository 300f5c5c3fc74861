from itertools import combinations_with_replacement
from typing import List, Sequence

from qsc.algebra.polyhedron import Polyhedron
from qsc.algebra.polynomial import Polynomial
from qsc.core.exceptions import EmptyRegionError


def handelman_products(
    facets: Sequence[Polynomial], maxdeg: int
) -> List[Polynomial]:
    """Products of facets with repetition, at most ``maxdeg`` factors.

    The empty product comes first, then products ordered by factor count
    and lexicographically by the multiset of facet indices.
    """
    if maxdeg < 0:
        raise ValueError("maxdeg must be non-negative")
    basis = [Polynomial.one()]
    cache = {(): Polynomial.one()}
    for count in range(1, maxdeg + 1):
        for indices in combinations_with_replacement(
            range(len(facets)), count
        ):
            product = cache[indices[:-1]] * facets[indices[-1]]
            cache[indices] = product
            basis.append(product)
    return basis


def handelman_basis(region: Polyhedron, maxdeg: int) -> List[Polynomial]:
    if maxdeg < 1:
        raise ValueError("maxdeg must be at least 1")
    if region.is_empty():
        raise EmptyRegionError(
            "Handelman basis requested for an empty region"
        )
    return handelman_products(region.forms, maxdeg)
