import shutil
from pathlib import Path

import pytest

from qsc.model.model import ensure_valid
from qsc.model.parser import parse_model
from qsc.product.product import compose
from qsc.spec.ltl import parse_ltl
from qsc.spec.patterns import ltl_to_dsa

BENCHMARKS = Path(__file__).resolve().parent.parent / "qsc" / "benchmarks"

GAMBLER = """
var x : int in [0, inf);
init x = 10;
when x = 0 -> { 1 : x' = 0; }
when x >= 1 -> { 51/100 : x' = x + 1; 49/100 : x' = x - 1; }
"""

GAMBLER_CONTROL = """
var x : int in [0, inf);
param kappa in [-1/4, 1/4];
init x = 10;
when x = 0 -> { 1 : x' = 0; }
when x >= 1 -> { 1/2 + kappa : x' = x + 1; 1/2 - kappa : x' = x - 1; }
"""

SMALL_WALK = """
var x : int in [0, 4];
init x = 2;
when x = 0 -> { 1 : x' = 0; }
when x = 4 -> { 1 : x' = 4; }
when x >= 1 & x <= 3 -> { 1/2 : x' = x + 1; 1/2 : x' = x - 1; }
"""


def solver_available() -> bool:
    return shutil.which("z3") is not None


requires_solver = pytest.mark.skipif(
    not solver_available(), reason="no SMT solver binary on PATH"
)


@pytest.fixture
def benchmarks_dir():
    """Directory of the shipped benchmark corpus."""
    return BENCHMARKS


@pytest.fixture
def gambler_model():
    """Favourable gambler's ruin from 10, absorbed at 0."""
    return ensure_valid(parse_model(GAMBLER, "gambler"))


@pytest.fixture
def control_model():
    """Gambler's ruin with a bias parameter kappa."""
    return ensure_valid(parse_model(GAMBLER_CONTROL, "gambler-control"))


@pytest.fixture
def walk_model():
    """Fair walk on 0..4 from 2, absorbed at both ends."""
    return ensure_valid(parse_model(SMALL_WALK, "walk"))


@pytest.fixture
def ruin_product(gambler_model):
    """Gambler product with the automaton of F(x <= 0)."""
    formula = parse_ltl("F(x <= 0)", space=gambler_model.space)
    return compose(gambler_model, ltl_to_dsa(formula, gambler_model.space))


@pytest.fixture
def recurrence_product(gambler_model):
    """Gambler product with the automaton of GF(x = 0)."""
    formula = parse_ltl("GF(x = 0)", space=gambler_model.space)
    return compose(gambler_model, ltl_to_dsa(formula, gambler_model.space))


@pytest.fixture
def walk_product(walk_model):
    """Small walk product with the automaton of F(x <= 0)."""
    formula = parse_ltl("F(x <= 0)", space=walk_model.space)
    return compose(walk_model, ltl_to_dsa(formula, walk_model.space))
