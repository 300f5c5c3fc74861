"""Tests for SMT-LIB rendering, solver I/O and the bound search."""

import subprocess
from fractions import Fraction
from unittest.mock import MagicMock, patch

import pytest

from qsc.algebra.polynomial import Polynomial
from qsc.certificate.instance import trivial_instance
from qsc.certificate.templates import (
    InvariantSpec,
    TemplateOptions,
    apply_sink_heuristics,
    build_templates,
)
from qsc.constraints.system import Relation, RelaxedSystem, SideConstraint
from qsc.core.consts import BOUND_SYMBOL
from qsc.core.exceptions import ConfigurationError, InvalidInputError
from qsc.product.modes import analyze_sinks
from qsc.schemas.job import load_job
from qsc.schemas.report import Provenance
from qsc.schemas.solve_result import SolveResult, SolveStatus
from qsc.services import VerifyService
from qsc.solver.executor import SolverExecutor
from qsc.solver.model_parser import IRRATIONAL, parse_output
from qsc.solver.optimize import (
    fix_bound,
    optimize_bound,
    solve_with_retry,
    synthesize_control,
)
from qsc.solver.smtlib import emit_smtlib, rational, symbol
from tests.conftest import requires_solver

c = Polynomial.var("c")


def _z3():
    return SolverExecutor(provider="z3", path="", timeout=120)


@pytest.fixture
def relaxed():
    return RelaxedSystem(
        unknowns=(("c", "coefficient"), (BOUND_SYMBOL, "target")),
        equations=(("demo", c - Polynomial.var("lam.0") - 1),),
        multipliers=("lam.0",),
        side=(
            SideConstraint(
                1 - Polynomial.var(BOUND_SYMBOL) - c, Relation.GE, "target"
            ),
        ),
    )


def _completed(stdout, returncode=0, stderr=""):
    return subprocess.CompletedProcess(
        args=["z3"], returncode=returncode, stdout=stdout, stderr=stderr
    )


class TestSmtlib:
    """Rendering of relaxed systems."""

    def test_symbols(self):
        assert symbol("V0.q0.c0") == "V0.q0.c0"
        assert symbol("a b") == "|a b|"

    def test_rationals_are_decimal(self):
        assert rational(Fraction(3)) == "3.0"
        assert rational(Fraction(-1, 2)) == "(- (/ 1.0 2.0))"

    def test_rendering_is_deterministic(self, relaxed):
        first = emit_smtlib(relaxed).text
        assert first == emit_smtlib(relaxed).text
        assert "(set-logic QF_NRA)" in first
        assert "(assert (>= lam.0 0.0))" in first
        assert first.rstrip().endswith("(get-value (c bound.p))")

    def test_grid_pins_unknowns(self, relaxed):
        script = emit_smtlib(relaxed, grid_bits=8)
        assert script.logic == "QF_NIRA"
        assert "(declare-const grid.c Int)" in script.text
        assert "(* 256.0 c)" in script.text

    def test_high_powers_use_auxiliaries(self):
        system = RelaxedSystem(
            unknowns=(("c", "coefficient"),),
            equations=(("demo", c**6 - 1),),
            multipliers=(),
            side=(),
        )
        text = emit_smtlib(system).text
        assert "(declare-const pow.c.6 Real)" in text
        assert "(= pow.c.6 (* (* c c c) (* c c c)))" in text


class TestModelParser:
    def test_sat_values(self):
        result = parse_output(
            "sat\n((c (/ 1.0 2.0))\n (k (- 3.0)))\n", unknowns=["c", "k"]
        )
        assert result.is_sat
        assert result.assignment == {"c": Fraction(1, 2), "k": Fraction(-3)}

    def test_sat_without_unknowns(self):
        assert parse_output("sat\n").assignment == {}

    def test_unsat(self):
        assert parse_output("unsat\n").status == SolveStatus.UNSAT

    def test_unsat_ignores_value_error(self):
        text = 'unsat\n(error "line 9 column 10: model is not available")\n'
        assert parse_output(text, unknowns=["c"]).status == SolveStatus.UNSAT

    def test_unknown_keeps_reason(self):
        result = parse_output("unknown\n")
        assert result.status == SolveStatus.UNKNOWN
        assert result.reason == "unknown"

    def test_error_reason(self):
        result = parse_output('(error "unsupported logic")\n')
        assert result.reason == "unsupported logic"

    def test_algebraic_number_is_irrational(self):
        result = parse_output(
            "sat\n((c (root-obj (+ (^ x 2) (- 2)) 1)))\n", unknowns=["c"]
        )
        assert result.status == SolveStatus.UNKNOWN
        assert result.reason == IRRATIONAL


class TestSolverExecutor:
    """Subprocess handling around the solver binary."""

    @patch("qsc.solver.adapters.base.shutil.which", return_value="/bin/z3")
    @patch("qsc.solver.executor.subprocess.run")
    def test_run_parses_output(self, mock_run, _which, relaxed):
        mock_run.return_value = _completed(
            "sat\n((c 1.0))\n"
        )
        executor = SolverExecutor(provider="z3", path="", flags=[], timeout=7)
        result = executor.run(emit_smtlib(relaxed))

        assert result.assignment == {"c": Fraction(1)}
        assert executor.queries == 1
        command = mock_run.call_args[0][0]
        assert command[:3] == ["/bin/z3", "-smt2", "-in"]
        assert "-T:7" in command
        assert mock_run.call_args.kwargs["input"].startswith("; ")

    @patch("qsc.solver.adapters.base.shutil.which", return_value="/bin/z3")
    @patch("qsc.solver.executor.subprocess.run")
    def test_timeout(self, mock_run, _which, relaxed):
        mock_run.side_effect = subprocess.TimeoutExpired("z3", 12)
        result = SolverExecutor(provider="z3", timeout=7).run(
            emit_smtlib(relaxed)
        )
        assert result.status == SolveStatus.UNKNOWN
        assert result.reason == "timeout"

    @patch("qsc.solver.adapters.base.shutil.which", return_value="/bin/z3")
    @patch("qsc.solver.executor.subprocess.run")
    def test_crash_without_output(self, mock_run, _which, relaxed):
        mock_run.return_value = _completed("", 1, "segfault\n")
        result = SolverExecutor(provider="z3", timeout=7).run(
            emit_smtlib(relaxed)
        )
        assert result.reason == "exit 1: segfault"

    @patch("qsc.solver.executor.subprocess.run")
    def test_zero_timeout_skips_the_solver(self, mock_run, relaxed):
        result = SolverExecutor(provider="z3", timeout=0).run(
            emit_smtlib(relaxed)
        )
        assert result.reason == "timeout"
        mock_run.assert_not_called()

    def test_unknown_provider(self, relaxed):
        executor = SolverExecutor(provider="yices", path="", timeout=5)
        with pytest.raises(ConfigurationError, match="yices"):
            executor.run(emit_smtlib(relaxed))

    @patch("qsc.solver.adapters.base.shutil.which", return_value="/opt/cvc5")
    @patch("qsc.solver.executor.subprocess.run")
    def test_provider_from_path(self, mock_run, _which, relaxed):
        mock_run.return_value = _completed("unsat\n")
        executor = SolverExecutor(
            provider="auto", path="/opt/cvc5", flags=[], timeout=3
        )
        executor.run(emit_smtlib(relaxed))
        assert "--tlimit=3000" in mock_run.call_args[0][0]


class TestBisection:
    """Bound search driven by mocked solver answers."""

    def test_fix_bound(self, relaxed):
        fixed = fix_bound(relaxed, Fraction(1, 4))
        assert BOUND_SYMBOL not in fixed.names
        assert fixed.side[0].expr == Fraction(3, 4) - c

    def test_irrational_model_is_retried_on_grid(self, relaxed):
        executor = MagicMock()
        executor.run.side_effect = [
            SolveResult.unknown(IRRATIONAL, 1.0),
            SolveResult(status=SolveStatus.SAT, wall_time=2.0),
        ]
        result = solve_with_retry(relaxed, executor, grid_bits=4)

        assert result.is_sat
        assert result.wall_time == 3.0
        retry_script = executor.run.call_args_list[1][0][0]
        assert retry_script.logic == "QF_NIRA"

    @patch("qsc.solver.optimize._certify")
    @patch("qsc.solver.optimize.solve_with_retry")
    @patch("qsc.solver.optimize.fix_bound", side_effect=lambda s, v: v)
    def test_bisection_converges(
        self, _fix, mock_solve, mock_certify, ruin_product
    ):
        def answer(value, executor):
            if value <= Fraction(3, 10):
                return SolveResult(status=SolveStatus.SAT)
            return SolveResult(status=SolveStatus.UNSAT)

        def certify(p, templates, assignment, bound, D):
            instance = trivial_instance(p)
            instance.bound = bound
            return instance

        mock_solve.side_effect = answer
        mock_certify.side_effect = certify
        tol = Fraction(1, 100)
        result = optimize_bound(
            ruin_product,
            build_templates(ruin_product, 1),
            tol=tol,
            executor=MagicMock(),
            system=MagicMock(),
        )

        low, high = result.bracket
        assert high - low <= tol
        assert low <= Fraction(3, 10) < high
        assert result.bound == low
        assert result.queries[0].bound == 1
        assert not result.inconclusive

    @patch("qsc.solver.optimize.solve_with_retry")
    @patch("qsc.solver.optimize.fix_bound", side_effect=lambda s, v: v)
    def test_all_unknown_is_inconclusive(self, _fix, mock_solve, ruin_product):
        mock_solve.return_value = SolveResult.unknown("timeout")
        result = optimize_bound(
            ruin_product,
            build_templates(ruin_product, 1),
            tol=Fraction(1, 8),
            executor=MagicMock(),
            system=MagicMock(),
        )
        assert result.inconclusive
        assert result.bound == 0
        assert not result.certified

    def test_tolerance_must_be_positive(self, ruin_product):
        with pytest.raises(InvalidInputError, match="tolerance"):
            optimize_bound(
                ruin_product, build_templates(ruin_product, 1), tol=Fraction(0)
            )

    def test_targets_are_validated(self, ruin_product):
        templates = build_templates(ruin_product, 1)
        with pytest.raises(InvalidInputError, match="targets"):
            synthesize_control(
                ruin_product,
                templates,
                ruin_product,
                templates,
                (Fraction(1, 2), Fraction(1, 4)),
            )

    def test_synthesis_needs_parameters(self, ruin_product):
        templates = build_templates(ruin_product, 1)
        with pytest.raises(InvalidInputError, match="parameters"):
            synthesize_control(
                ruin_product,
                templates,
                ruin_product,
                templates,
                (Fraction(1, 4), Fraction(1, 2)),
            )


@requires_solver
@pytest.mark.integration
@pytest.mark.slow
class TestWithSolver:
    """End-to-end bound search against a real solver binary."""

    def test_fair_walk_lower_bound(self, walk_product):
        options = TemplateOptions(
            degree=2,
            invariant=(("q0", InvariantSpec.parse("x:[0,3]")),),
        )
        templates = apply_sink_heuristics(
            build_templates(walk_product, 2, options),
            analyze_sinks(walk_product),
        )
        tol = Fraction(1, 20)
        result = optimize_bound(
            walk_product,
            templates,
            tol=tol,
            executor=SolverExecutor(provider="z3", path="", timeout=60),
        )
        assert Fraction(1, 2) - tol <= result.bound <= Fraction(1, 2)

    def test_reactivity1_interval(self, benchmarks_dir):
        job = load_job(benchmarks_dir / "configs" / "reactivity1.cfg")
        report = VerifyService(executor=_z3()).run(job)

        assert abs(report.lower - Fraction(1, 6)) <= Fraction(1, 100)
        assert abs(report.upper - Fraction(1, 6)) <= Fraction(1, 100)
        assert report.lower_source == Provenance.CERTIFIED
        assert report.upper_source == Provenance.CERTIFIED

    def test_gambler_interval_is_sound(self, benchmarks_dir):
        job = load_job(benchmarks_dir / "configs" / "gambler-d2.cfg")
        report = VerifyService(executor=_z3()).run(job)

        ruin = Fraction(49, 51) ** 10
        slack = Fraction(1, 1000)
        assert report.lower <= ruin + slack
        assert report.upper >= ruin - slack
