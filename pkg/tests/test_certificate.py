"""Tests for templates, certificate instances and the certificate format."""

from fractions import Fraction

import pytest

from qsc.algebra.polynomial import Polynomial
from qsc.certificate.instance import (
    instantiate,
    parse_box,
    parse_certificate,
    trivial_instance,
)
from qsc.certificate.templates import (
    UNKNOWN,
    InvariantSpec,
    PieceKind,
    TemplateOptions,
    apply_sink_heuristics,
    build_templates,
)
from qsc.core.consts import BOUND_SYMBOL, EPS_SYMBOL
from qsc.core.exceptions import (
    ConfigurationError,
    InvalidInputError,
    QscSyntaxError,
    UnsupportedTemplateError,
)
from qsc.product.modes import analyze_sinks

x = Polynomial.var("x")


@pytest.fixture
def ruin_certificate(benchmarks_dir):
    path = benchmarks_dir / "certificates" / "gambler-ruin.cert"
    return path.read_text(encoding="utf-8")


class TestInvariantSpec:
    def test_keywords(self):
        assert InvariantSpec.parse("full").kind == PieceKind.FULL
        assert InvariantSpec.parse(" EMPTY ").kind == PieceKind.EMPTY

    def test_box_with_unknown_side(self):
        spec = InvariantSpec.parse("x:[0,?]")
        assert spec.bounds == (("x", Fraction(0), UNKNOWN),)

    def test_infinite_side(self):
        spec = InvariantSpec.parse("x:[-inf,5]")
        assert spec.bounds == (("x", None, Fraction(5)),)

    def test_malformed(self):
        with pytest.raises(ConfigurationError, match="malformed"):
            InvariantSpec.parse("x in 0..5")

    def test_parse_box(self):
        box = parse_box("x:[0,300]", ["x"])
        assert box.syntactic_bounds("x") == (0, 300)

    def test_parse_box_rejects_unknowns(self):
        with pytest.raises(InvalidInputError, match="unknown bounds"):
            parse_box("x:[0,?]", ["x"])


class TestTemplates:
    """Value-function and invariant templates over a product."""

    def test_value_functions_per_pair(self, ruin_product):
        templates = build_templates(ruin_product, 2)
        assert len(templates.values) == 2
        # 1, x, x^2 for one state variable
        assert len(templates.value_at(0, "q0").terms) == 3

    def test_symbol_table(self, ruin_product):
        table = build_templates(ruin_product, 1).symbol_table()
        assert "V0.q0.c0" in table
        assert "I.q0.x.lo" in table.names("bound")
        assert EPS_SYMBOL in table
        assert BOUND_SYMBOL in table.names("target")

    def test_fixed_invariant_and_drift(self, ruin_product):
        options = TemplateOptions(
            degree=1,
            invariant=(("q0", InvariantSpec.parse("x:[0,99]")),),
            eps=Fraction(1, 50),
            M=Fraction(1),
        )
        templates = build_templates(ruin_product, 1, options)
        assert templates.piece("q0").is_fixed
        assert templates.eps == Fraction(1, 50)
        assert EPS_SYMBOL not in templates.symbol_table()

    def test_invariant_for_unknown_state(self, ruin_product):
        options = TemplateOptions(
            invariant=(("q7", InvariantSpec.parse("full")),)
        )
        with pytest.raises(ConfigurationError, match="unknown automaton"):
            build_templates(ruin_product, 1, options)

    def test_negative_degree(self, ruin_product):
        with pytest.raises(UnsupportedTemplateError):
            build_templates(ruin_product, -1)

    def test_sink_heuristics(self, ruin_product):
        templates = apply_sink_heuristics(
            build_templates(ruin_product, 2), analyze_sinks(ruin_product)
        )
        assert templates.value_at(0, "q1") == 0
        assert templates.value_at(1, "q1") == 0
        assert templates.piece("q1").kind == PieceKind.FULL
        assert not templates.value_at(0, "q0").is_constant

    def test_exponential_atom(self, recurrence_product):
        options = TemplateOptions(
            degree=1, exponential=True, exp_base=Fraction(49, 51)
        )
        templates = build_templates(recurrence_product, 1, options)
        atom = templates.exponential
        assert (atom.variable, atom.offset) == ("x", 0)
        assert atom.power(2) == Fraction(49**2, 51**2)
        assert templates.values[0].exp_coefficient("q0") == Polynomial.var(
            "E.q0"
        )

    def test_exponential_base_out_of_range(self, recurrence_product):
        options = TemplateOptions(exponential=True, exp_base=Fraction(2))
        with pytest.raises(UnsupportedTemplateError, match="base"):
            build_templates(recurrence_product, 1, options)


class TestInstances:
    """Instantiation, parsing and serialization of certificates."""

    def test_instantiate(self, ruin_product):
        options = TemplateOptions(
            degree=1,
            invariant=(("q0", InvariantSpec.parse("x:[0,99]")),),
            eps=Fraction(1, 50),
            M=Fraction(1),
        )
        templates = apply_sink_heuristics(
            build_templates(ruin_product, 1, options),
            analyze_sinks(ruin_product),
        )
        assignment = {
            "V0.q0.c0": Fraction(1),
            "V0.q0.c1": Fraction(0),
            "V1.q0.c0": Fraction(100),
            "V1.q0.c1": Fraction(-1),
        }
        instance = instantiate(templates, assignment, p=Fraction(0))
        assert instance.values[(1, "q0")] == 100 - x
        assert instance.bound == 0
        assert instance.invariant["q0"].interval("x") == (0, 99)

    def test_instantiate_reports_unresolved(self, ruin_product):
        templates = build_templates(ruin_product, 1)
        with pytest.raises(InvalidInputError, match="unresolved"):
            instantiate(templates, {})

    def test_trivial_instance(self, ruin_product):
        instance = trivial_instance(ruin_product)
        assert instance.bound == 0
        assert instance.initial_value(ruin_product) == 1
        assert instance.pair_count == 1

    def test_parse_shipped_certificate(self, ruin_product, ruin_certificate):
        instance = parse_certificate(ruin_certificate, ruin_product)
        assert instance.invariant["q0"].interval("x") == (0, 99)
        assert instance.invariant["q1"].kind == PieceKind.FULL
        assert instance.exp_base == Fraction(49, 51)
        # V0 at the initial state is exactly one minus the bound
        assert instance.initial_value(ruin_product) == 1 - instance.bound
        assert instance.frame.syntactic_bounds("x") == (0, 300)

    def test_serialize_reparses(self, ruin_product, ruin_certificate):
        instance = parse_certificate(ruin_certificate, ruin_product)
        again = parse_certificate(instance.serialize(), ruin_product)
        assert again.bound == instance.bound
        assert again.values == instance.values
        assert again.exp_coefficients == instance.exp_coefficients

    def test_missing_value_function(self, ruin_product, ruin_certificate):
        text = "\n".join(
            line
            for line in ruin_certificate.splitlines()
            if not line.startswith("V1.q0")
        )
        with pytest.raises(QscSyntaxError, match="V1.q0"):
            parse_certificate(text, ruin_product)

    def test_duplicate_key(self, ruin_product, ruin_certificate):
        with pytest.raises(QscSyntaxError, match="duplicate"):
            parse_certificate(
                ruin_certificate + "eps = 1/10\n", ruin_product, "dup.cert"
            )

    def test_unknown_automaton_state(self, ruin_product, ruin_certificate):
        with pytest.raises(QscSyntaxError, match="unknown entries"):
            parse_certificate(
                ruin_certificate + "V0.q9 = 1\n", ruin_product
            )

    def test_bad_number_has_line(self, ruin_product, ruin_certificate):
        text = ruin_certificate.replace("eps = 1/50", "eps = one")
        with pytest.raises(QscSyntaxError) as info:
            parse_certificate(text, ruin_product)
        assert info.value.line == 4
