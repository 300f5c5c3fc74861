"""Tests for the run services behind each mode."""

import csv
from fractions import Fraction
from unittest.mock import patch

import pytest

from qsc.certificate.instance import trivial_instance
from qsc.core.exceptions import ConfigurationError
from qsc.product.modes import SinkKind, analyze_sinks
from qsc.schemas.job import build_job, load_job
from qsc.schemas.report import Provenance
from qsc.schemas.solve_result import SolveStatus
from qsc.schemas.verdict import VerdictStatus
from qsc.services import (
    CheckService,
    OracleService,
    SynthesisService,
    VerifyService,
)
from qsc.solver.executor import SolverExecutor
from qsc.solver.optimize import BoundResult, ControlResult, Query
from tests.conftest import GAMBLER_CONTROL, SMALL_WALK


@pytest.fixture
def walk_file(tmp_path):
    path = tmp_path / "walk.qsm"
    path.write_text(SMALL_WALK)
    return path


@pytest.fixture
def control_file(tmp_path):
    path = tmp_path / "control.qsm"
    path.write_text(GAMBLER_CONTROL)
    return path


def _job(tmp_path, **entries):
    return build_job(
        {key: str(value) for key, value in entries.items()}, tmp_path, "t"
    )


def _fake_bound(product, templates, **kwargs):
    """Lower direction proves 1/2, the negation proves 1/4."""
    kinds = analyze_sinks(product).values()
    instance = trivial_instance(product)
    if SinkKind.SURELY_ACCEPTING in kinds:
        instance.bound = Fraction(1, 2)
    else:
        instance.bound = Fraction(1, 4)
    query = Query(bound=instance.bound, status=SolveStatus.SAT)
    return BoundResult(instance.bound, instance, [query])


class TestVerifyService:
    """Two-sided verification with the bound search mocked out."""

    @pytest.fixture
    def service(self):
        return VerifyService(executor=SolverExecutor(provider="z3"))

    @patch(
        "qsc.services.verify_service.optimize_bound", side_effect=_fake_bound
    )
    def test_interval_and_cross_check(
        self, mock_optimize, service, walk_file, tmp_path
    ):
        job = _job(
            tmp_path,
            mode="verify",
            model=walk_file,
            spec="F(x <= 0)",
            degree=1,
            box="0..4",
            certificate_dir=tmp_path / "certs",
        )
        report = service.run(job)

        assert mock_optimize.call_count == 2
        assert report.interval == (Fraction(1, 2), Fraction(3, 4))
        assert report.lower_source == Provenance.CERTIFIED
        assert report.oracle["pessimistic"] == "1/2"
        assert report.warnings == []
        assert len(report.degree_rows) == 1
        for path in report.certificates.values():
            assert "bound = " in open(path).read()

    @patch(
        "qsc.services.verify_service.optimize_bound", side_effect=_fake_bound
    )
    def test_degree_escalation_stops_at_gap(
        self, mock_optimize, service, walk_file, tmp_path
    ):
        job = _job(
            tmp_path,
            mode="verify",
            model=walk_file,
            spec="F(x <= 0)",
            degree=1,
            degree_max=3,
            gap_target="1/2",
        )
        report = service.run(job)
        assert [row.degree for row in report.degree_rows] == [1]

    @patch(
        "qsc.services.verify_service.optimize_bound", side_effect=_fake_bound
    )
    def test_sweep_with_exact_column(
        self, _optimize, service, walk_file, tmp_path
    ):
        job = _job(
            tmp_path,
            mode="verify",
            model=walk_file,
            spec="F(x <= 0)",
            degree=1,
            box="0..4",
            sweep="1..3",
            csv=tmp_path / "sweep.csv",
        )
        report = service.run(job)

        exact = [row.exact for row in report.sweep]
        assert exact == [Fraction(3, 4), Fraction(1, 2), Fraction(1, 4)]
        with open(tmp_path / "sweep.csv") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["x", "lower", "upper", "exact"]
        assert rows[1][3] == "0.750000"

    @patch("qsc.services.verify_service.optimize_bound")
    def test_all_unknown_is_inconclusive(
        self, mock_optimize, service, walk_file, tmp_path
    ):
        def unknown(product, templates, **kwargs):
            query = Query(bound=Fraction(1), status=SolveStatus.UNKNOWN)
            return BoundResult(
                Fraction(0), trivial_instance(product), [query]
            )

        mock_optimize.side_effect = unknown
        job = _job(
            tmp_path,
            mode="verify",
            model=walk_file,
            spec="F(x <= 0)",
            degree=1,
        )
        report = service.run(job)
        assert report.inconclusive
        assert report.exit_code == 1
        assert report.interval == (0, 1)
        assert report.lower_source == Provenance.TRIVIAL

    def test_parametric_model_needs_kappa(self, control_file, tmp_path):
        job = _job(
            tmp_path, mode="verify", model=control_file, spec="F(x <= 0)"
        )
        with pytest.raises(ConfigurationError, match="kappa"):
            VerifyService().run(job)


class TestSynthesisService:
    """Parameter synthesis with the joint query mocked out."""

    @staticmethod
    def _sat(p_lower, t_lower, p_upper, t_upper, targets, **kwargs):
        kappa = {"kappa": Fraction(0)}
        lower = trivial_instance(p_lower, kappa)
        lower.bound = Fraction(3, 5)
        upper = trivial_instance(p_upper, kappa)
        upper.bound = Fraction(1, 5)
        return ControlResult(SolveStatus.SAT, kappa, lower, upper)

    @patch("qsc.services.synthesis_service.synthesize_control")
    def test_parameters_found(self, mock_synth, control_file, tmp_path):
        mock_synth.side_effect = self._sat
        job = _job(
            tmp_path,
            mode="synthesize",
            model=control_file,
            spec="F(x <= 0)",
            targets="1/2..1",
            box="0..60",
            certificate_dir=tmp_path,
        )
        report = SynthesisService(executor=SolverExecutor()).run(job)

        assert report.kappa == {"kappa": 0}
        assert report.interval == (Fraction(3, 5), Fraction(4, 5))
        assert report.upper_source == Provenance.CERTIFIED
        assert report.oracle["pessimistic"] == "51/61"
        assert report.warnings == []
        assert set(report.certificates) == {"lower", "upper"}

    @patch("qsc.services.synthesis_service.synthesize_control")
    def test_unsat_reports_targets(self, mock_synth, control_file, tmp_path):
        mock_synth.return_value = ControlResult(SolveStatus.UNSAT)
        job = _job(
            tmp_path,
            mode="synthesize",
            model=control_file,
            spec="F(x <= 0)",
            targets="1/2..1",
            degree=1,
            degree_max=2,
        )
        report = SynthesisService(executor=SolverExecutor()).run(job)

        assert mock_synth.call_count == 2
        assert report.inconclusive
        assert report.interval == (Fraction(1, 2), Fraction(1))
        assert "degree_max" in report.warnings[0]

    def test_model_without_parameters(self, walk_file, tmp_path):
        job = _job(
            tmp_path,
            mode="synthesize",
            model=walk_file,
            spec="F(x <= 0)",
            targets="0..1",
        )
        with pytest.raises(ConfigurationError, match="param"):
            SynthesisService().run(job)


class TestCheckService:
    def test_shipped_certificate(self, benchmarks_dir):
        job = load_job(benchmarks_dir / "configs" / "gambler-ruin-check.cfg")
        report = CheckService().run(job)

        assert report.verdict.status == VerdictStatus.VALID
        assert report.lower == Fraction(
            49**10 * (51**90 - 49**90), 51**100 - 49**100
        )
        assert report.lower_source == Provenance.CERTIFIED
        assert report.exit_code == 0


class TestOracleService:
    def test_exact_mode(self, benchmarks_dir):
        job = load_job(benchmarks_dir / "configs" / "reactivity1-exact.cfg")
        report = OracleService().exact(job)

        assert report.interval == (Fraction(1, 6), Fraction(1, 6))
        assert report.lower_source == Provenance.ORACLE
        assert report.oracle["stay_probability"] == "1/6"
        assert report.oracle["boundary_exits"] == "0"
        assert report.warnings == []

    def test_exact_mode_needs_kappa(self, control_file, tmp_path):
        job = _job(
            tmp_path,
            mode="exact",
            model=control_file,
            spec="F(x <= 0)",
            box="0..20",
        )
        with pytest.raises(ConfigurationError, match="kappa"):
            OracleService().exact(job)

    def test_simulate_mode(self, walk_file, tmp_path):
        job = _job(
            tmp_path,
            mode="simulate",
            model=walk_file,
            spec="F(x <= 0)",
            box="0..4",
            trajectories=50,
            horizon=5,
            seed=7,
            csv=tmp_path / "process.csv",
        )
        report = OracleService().simulate(job)

        assert report.lower == report.upper == Fraction(1, 2)
        assert report.statistics["initial"] == 0.5
        assert (tmp_path / "process.csv").exists()
