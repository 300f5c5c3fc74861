"""Tests for the exact certificate checker."""

from dataclasses import replace
from fractions import Fraction

import pytest

from qsc.certificate.instance import parse_certificate, trivial_instance
from qsc.core.exceptions import QscSyntaxError
from qsc.oracle.checker import check_certificate
from qsc.schemas.verdict import VerdictStatus


@pytest.fixture
def ruin_text(benchmarks_dir):
    path = benchmarks_dir / "certificates" / "gambler-ruin.cert"
    return path.read_text(encoding="utf-8")


def _check(text, product, **kwargs):
    instance = parse_certificate(text, product)
    return check_certificate(instance, product, **kwargs)


class TestCheckCertificate:
    """Verdicts on the shipped gambler's ruin certificate and variants."""

    def test_shipped_certificate_is_valid(self, ruin_text, ruin_product):
        verdict = _check(ruin_text, ruin_product)
        assert verdict.status == VerdictStatus.VALID
        assert verdict.exact > 0
        assert verdict.grid == 0
        assert verdict.describe().startswith("Valid")

    def test_weak_ranking_function_is_violated(self, ruin_text, ruin_product):
        text = ruin_text.replace("V1.q0 = 100 - x", "V1.q0 = 100 - 9/10*x")
        verdict = _check(text, ruin_product)

        assert verdict.status == VerdictStatus.VIOLATED
        assert "streett-dec" in verdict.implication
        assert 1 <= verdict.point["x"] <= 99
        assert verdict.value == Fraction(-1, 500)

    def test_overclaimed_bound(self, ruin_text, ruin_product):
        claimed = "bound = 49^10*(51^90 - 49^90)/(51^100 - 49^100)"
        text = ruin_text.replace(claimed, "bound = 9/10")
        verdict = _check(text, ruin_product)
        assert verdict.status == VerdictStatus.VIOLATED
        assert verdict.implication == "target"

    def test_frame_too_small(self, ruin_text, ruin_product):
        text = ruin_text.replace("frame = x:[0,300]", "frame = x:[0,50]")
        verdict = _check(text, ruin_product)
        assert verdict.status == VerdictStatus.VIOLATED
        assert verdict.implication == "frame"

    def test_grid_cap_makes_it_inconclusive(self, ruin_text, ruin_product):
        text = ruin_text.replace("V1.q0 = 100 - x", "V1.q0 = 100 - 9/10*x")
        verdict = _check(text, ruin_product, grid_cap=5)
        assert verdict.status == VerdictStatus.INCONCLUSIVE
        assert "undecided" in verdict.message

    def test_trivial_certificate_is_valid(self, ruin_product):
        verdict = check_certificate(
            trivial_instance(ruin_product), ruin_product
        )
        assert verdict.is_valid

    def test_parameter_outside_box(self, control_model):
        from qsc.product.product import compose
        from qsc.spec.ltl import parse_ltl
        from qsc.spec.patterns import ltl_to_dsa

        formula = parse_ltl("F(x <= 0)", space=control_model.space)
        product = compose(
            control_model, ltl_to_dsa(formula, control_model.space)
        )
        verdict = check_certificate(
            trivial_instance(product, {"kappa": Fraction(1)}), product
        )
        assert verdict.status == VerdictStatus.VIOLATED
        assert verdict.implication == "kappa-box"

        missing = check_certificate(trivial_instance(product), product)
        assert "no value for kappa" in missing.message


class TestCertificateConstants:
    """Out-of-range constants are rejected before any implication."""

    @pytest.mark.parametrize(
        "field, value, tag",
        [
            ("eps", Fraction(0), "eps"),
            ("eps", Fraction(-1), "eps"),
            ("M", Fraction(0), "M"),
            ("exp_base", Fraction(2), "exp-base"),
            ("exp_base", Fraction(1), "exp-base"),
            ("bound", Fraction(3, 2), "bound"),
            ("bound", Fraction(-1, 10), "bound"),
        ],
    )
    def test_checker_rejects(
        self, ruin_text, ruin_product, field, value, tag
    ):
        instance = replace(
            parse_certificate(ruin_text, ruin_product), **{field: value}
        )
        verdict = check_certificate(instance, ruin_product)
        assert verdict.status == VerdictStatus.VIOLATED
        assert verdict.implication == tag

    @pytest.mark.parametrize(
        "line, replacement",
        [
            ("eps = 1/50", "eps = -1/50"),
            ("M = 1", "M = 0"),
            ("exp_base = 49/51", "exp_base = 2"),
        ],
    )
    def test_parser_rejects(self, ruin_text, ruin_product, line, replacement):
        text = ruin_text.replace(line, replacement)
        with pytest.raises(QscSyntaxError, match="not"):
            parse_certificate(text, ruin_product)
