"""Tests for job configuration, verdicts and reports."""

from fractions import Fraction
from pathlib import Path

import pytest

from qsc.core.consts import RunMode
from qsc.core.exceptions import ConfigurationError, InvalidInputError
from qsc.schemas.job import build_job, load_job, parse_range, read_key_values
from qsc.schemas.report import DegreeRow, Provenance, Report
from qsc.schemas.stage_timing import StageTiming
from qsc.schemas.verdict import Verdict, VerdictStatus

VERIFY_JOB = """
# favourable walk
mode = verify
model = gambler.qsm
spec = GF(x = 0)
degree = 3
inv.q0 = x:[0,99]
neg.exponential = true
neg.inv.q0 = x:[1,?]
"""


class TestKeyValues:
    def test_comments_and_blank_lines(self):
        entries = read_key_values("a = 1  # note\n\n  b=x = y\n")
        assert entries == {"a": "1", "b": "x = y"}

    def test_missing_separator(self):
        with pytest.raises(ConfigurationError, match="cfg:2"):
            read_key_values("a = 1\nbroken\n", "cfg")

    def test_duplicate_key(self):
        with pytest.raises(ConfigurationError, match="duplicate 'a'"):
            read_key_values("a = 1\na = 2\n")

    @pytest.mark.parametrize(
        "text, expected",
        [
            ("1/4..3/4", (Fraction(1, 4), Fraction(3, 4))),
            ("[0, 1]", (Fraction(0), Fraction(1))),
        ],
    )
    def test_ranges(self, text, expected):
        assert parse_range(text) == expected

    def test_reversed_range(self):
        with pytest.raises(ValueError, match="ordered"):
            parse_range("3..1")


class TestJobConfig:
    """Validation of flat entries into a job."""

    @pytest.fixture
    def job(self, tmp_path):
        return build_job(read_key_values(VERIFY_JOB), tmp_path, "demo")

    def test_paths_are_relative_to_the_file(self, job, tmp_path):
        assert job.mode == RunMode.VERIFY
        assert job.model == tmp_path / "gambler.qsm"
        assert job.name == "demo"

    def test_negated_keys_default_to_plain_ones(self, job):
        assert job.template.degree == 3
        assert job.template.invariant == {"q0": "x:[0,99]"}
        assert not job.template.exponential
        assert job.negated.degree == 3
        assert job.negated.exponential
        assert job.negated.invariant == {"q0": "x:[1,?]"}

    def test_kappa_entries(self, tmp_path):
        entries = read_key_values(VERIFY_JOB + "kappa.kappa = 1/8\n")
        job = build_job(entries, tmp_path)
        assert job.kappa == {"kappa": Fraction(1, 8)}

    def test_unknown_negated_key(self, tmp_path):
        entries = read_key_values(VERIFY_JOB + "neg.timeout = 3\n")
        with pytest.raises(ConfigurationError, match="neg"):
            build_job(entries, tmp_path)

    @pytest.mark.parametrize(
        "extra, message",
        [
            ("mode = synthesize\n", "needs 'targets'"),
            ("mode = check\n", "needs 'certificate'"),
            ("mode = exact\n", "needs 'box'"),
            ("tol = 0\n", "tol must be positive"),
            ("degree_max = 1\n", "degree_max is below degree"),
            ("eps = lots\n", "eps"),
            ("colour = blue\n", "colour"),
        ],
    )
    def test_invalid_jobs(self, tmp_path, extra, message):
        text = VERIFY_JOB.replace("mode = verify\n", "") + extra
        if "mode" not in extra:
            text += "mode = verify\n"
        with pytest.raises(ConfigurationError, match=message):
            build_job(read_key_values(text), tmp_path)

    def test_targets_must_be_probabilities(self, tmp_path):
        text = VERIFY_JOB.replace("verify", "synthesize")
        text += "targets = 1/2..3/2\n"
        with pytest.raises(ConfigurationError, match="within"):
            build_job(read_key_values(text), tmp_path)

    def test_sweep_needs_integers(self, tmp_path):
        text = VERIFY_JOB + "sweep = 1/2..4\n"
        with pytest.raises(ConfigurationError, match="integers"):
            build_job(read_key_values(text), tmp_path)

    def test_load_job_with_overrides(self, tmp_path):
        path = tmp_path / "walk.cfg"
        path.write_text(VERIFY_JOB)
        job = load_job(path, {"degree": "4", "timeout": None})
        assert job.name == "walk"
        assert job.template.degree == 4
        assert job.timeout is None

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(InvalidInputError, match="cannot read config"):
            load_job(tmp_path / "absent.cfg")

    def test_shipped_configs_validate(self, benchmarks_dir):
        for path in sorted((benchmarks_dir / "configs").glob("*.cfg")):
            job = load_job(path)
            assert job.model.exists(), path.name
            assert isinstance(job.model, Path)


class TestReport:
    """Rendering and exit status of run reports."""

    def test_key_values(self):
        report = Report(
            job="gambler",
            mode="verify",
            lower=Fraction(1, 2),
            upper=Fraction(3, 4),
            lower_source=Provenance.CERTIFIED,
            degree_rows=[
                DegreeRow(degree=2, lower=Fraction(1, 2), upper=Fraction(1))
            ],
            verdict=Verdict(
                status=VerdictStatus.VIOLATED,
                point={"x": Fraction(3)},
            ),
            timings={"synthesis": 1.5},
        )
        text = report.to_key_values()
        assert "lower = 1/2\nlower.source = certified\n" in text
        assert "upper.source = trivial" in text
        assert "degree.2 = 1/2 1" in text
        assert "verdict = Violated\nverdict.point = x=3\n" in text
        assert "time.synthesis = 1.500" in text
        assert text.endswith("inconclusive = false\n")
        assert report.interval == (Fraction(1, 2), Fraction(3, 4))

    def test_exit_code(self):
        report = Report(job="j", mode="verify")
        assert report.exit_code == 0
        assert report.interval is None
        report.inconclusive = True
        assert report.exit_code == 1

    def test_verdict_description(self):
        verdict = Verdict(
            status=VerdictStatus.VIOLATED,
            implication="[exterior] q0",
            message="claim is negative",
            point={"x": Fraction(7)},
        )
        assert verdict.describe() == (
            "Violated: [exterior] q0 at x=7 (claim is negative)"
        )
        assert not verdict.is_valid

    def test_stage_timings_add(self):
        total = StageTiming(stage="solve", seconds=1.0) + StageTiming(
            stage="solve", seconds=0.5, solver_queries=3
        )
        assert total.seconds == 1.5
        assert total.solver_queries == 3
