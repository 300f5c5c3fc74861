"""Closed-form reference values for random-walk benchmarks."""

from fractions import Fraction
from typing import Optional

from qsc.core.exceptions import InvalidInputError


def gamblers_ruin(
    p_up: Fraction,
    start: int,
    lower: int,
    upper: Optional[int] = None,
) -> Fraction:
    """Probability that a +1/-1 walk hits ``lower`` before ``upper``.

    ``upper=None`` is an absent ceiling; the walk then escapes to infinity
    with positive probability only when it drifts upward.
    """
    p_up = Fraction(p_up)
    if not 0 < p_up < 1:
        raise InvalidInputError(f"step probability {p_up} must lie in (0, 1)")
    if upper is not None and not lower <= start <= upper:
        raise InvalidInputError(
            f"start {start} outside the barriers [{lower}, {upper}]"
        )
    if upper is None and start < lower:
        raise InvalidInputError(f"start {start} below the barrier {lower}")
    ratio = (1 - p_up) / p_up
    distance = start - lower
    if upper is None:
        return ratio**distance if ratio < 1 else Fraction(1)
    width = upper - lower
    if ratio == 1:
        return Fraction(upper - start, width)
    return (ratio**distance - ratio**width) / (1 - ratio**width)


def reach_upper(
    p_up: Fraction, start: int, lower: int, upper: int
) -> Fraction:
    return 1 - gamblers_ruin(p_up, start, lower, upper)
