"""Test the command-line entry point and its exit codes."""

from unittest.mock import patch

from qsc.main import build_parser, main
from qsc.schemas.report import Report


class TestMain:
    def test_parser_overrides(self):
        args = build_parser().parse_args(
            ["verify", "-b", "gambler-d2", "--degree", "3", "--tol", "1/100"]
        )
        assert args.mode == "verify"
        assert args.benchmark == "gambler-d2"
        assert args.degree == 3

    def test_exact_benchmark(self, tmp_path):
        output = tmp_path / "report.txt"
        code = main(
            ["exact", "-b", "reactivity1-exact", "--output", str(output)]
        )
        assert code == 0
        text = output.read_text()
        assert "lower = 1/6\n" in text
        assert "upper.source = oracle" in text

    def test_check_benchmark(self, tmp_path):
        output = tmp_path / "check.txt"
        code = main(
            ["check", "-b", "gambler-ruin-check", "--output", str(output)]
        )
        assert code == 0
        assert "verdict = Valid" in output.read_text()

    def test_unknown_benchmark(self):
        assert main(["exact", "-b", "no-such-config"]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["verify", "-c", str(tmp_path / "absent.cfg")]) == 2

    def test_invalid_job(self, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("mode = exact\nmodel = m.qsm\nspec = F(x <= 0)\n")
        # exact without a box
        assert main(["exact", "-c", str(config)]) == 2

    @patch("qsc.main.run_job")
    def test_inconclusive_report(self, mock_run):
        mock_run.return_value = Report(
            job="gambler-d2", mode="verify", inconclusive=True
        )
        assert main(["verify", "-b", "gambler-d2"]) == 1

    @patch("qsc.main.run_job", side_effect=RuntimeError("boom"))
    def test_unexpected_failure(self, _run):
        assert main(["verify", "-b", "gambler-d2"]) == 3
