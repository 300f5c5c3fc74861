import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from rich.console import Console
from rich.table import Table

from qsc.core.config import settings
from qsc.core.consts import EXIT_INTERNAL, RunMode
from qsc.core.exceptions import ConfigurationError, QscError
from qsc.core.global_depends import Container
from qsc.schemas.job import JobConfig, load_job
from qsc.schemas.report import Report

logger = logging.getLogger(__name__)

# flag -> job key
_OVERRIDES = {
    "degree": "degree",
    "degree_max": "degree_max",
    "handelman_degree": "handelman_degree",
    "solver": "solver_path",
    "timeout": "timeout",
    "tol": "tol",
    "frame": "frame",
    "box": "box",
    "csv": "csv",
    "output": "output",
    "targets": "targets",
    "certificate": "certificate",
    "certificate_dir": "certificate_dir",
    "direction": "direction",
    "model": "model",
    "spec": "spec",
    "dsa": "dsa",
    "seed": "seed",
    "trajectories": "trajectories",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsc",
        description="Certified probability bounds for omega-regular "
        "properties of infinite-state Markov chains.",
    )
    parser.add_argument("mode", choices=[mode.value for mode in RunMode])
    parser.add_argument("-c", "--config", type=Path, default=None)
    parser.add_argument(
        "-b",
        "--benchmark",
        default=None,
        help="Shipped experiment config by name, e.g. gambler-d2",
    )
    parser.add_argument("--model", default=None)
    parser.add_argument("--spec", default=None)
    parser.add_argument("--dsa", default=None)
    parser.add_argument("--degree", type=int, default=None)
    parser.add_argument("--degree-max", type=int, default=None)
    parser.add_argument("--handelman-degree", type=int, default=None)
    parser.add_argument("--solver", default=None, help="Solver binary")
    parser.add_argument("--timeout", type=int, default=None)
    parser.add_argument("--tol", default=None)
    parser.add_argument("--frame", default=None, help="a..b or x:[a,b]")
    parser.add_argument("--box", default=None, help="a..b or x:[a,b]")
    parser.add_argument("--csv", default=None)
    parser.add_argument("--output", default=None)
    parser.add_argument("--targets", default=None, help="lo..hi")
    parser.add_argument("--certificate", default=None)
    parser.add_argument("--certificate-dir", default=None)
    parser.add_argument(
        "--direction", choices=["lower", "upper"], default=None
    )
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--trajectories", type=int, default=None)
    parser.add_argument("--log-level", default=None)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Optional[str]]:
    values = {"mode": args.mode}
    for flag, key in _OVERRIDES.items():
        value = getattr(args, flag)
        if value is not None:
            values[key] = str(value)
    return values


def _fmt(value) -> str:
    return "-" if value is None else f"{float(value):.4f}"


def render(report: Report, console: Console) -> None:
    table = Table(title=f"{report.job} ({report.mode})")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_column("source")
    if report.lower is not None:
        table.add_row(
            "lower", _fmt(report.lower), report.lower_source.value
        )
    if report.upper is not None:
        table.add_row(
            "upper", _fmt(report.upper), report.upper_source.value
        )
    for name, value in report.kappa.items():
        table.add_row(f"kappa {name}", str(value), "")
    for name, value in report.oracle.items():
        table.add_row(f"oracle {name}", value, "oracle")
    for name, value in report.statistics.items():
        table.add_row(f"stat {name}", f"{value:.4g}", "statistical")
    if report.verdict is not None:
        table.add_row("verdict", report.verdict.describe(), "checker")
    for name, path in report.certificates.items():
        table.add_row(f"certificate {name}", path, "")
    console.print(table)

    if report.degree_rows:
        degrees = Table(title="bounds per degree")
        for column in ("degree", "lower", "upper", "time [s]"):
            degrees.add_column(column, justify="right")
        for row in report.degree_rows:
            degrees.add_row(
                str(row.degree),
                _fmt(row.lower),
                _fmt(row.upper),
                f"{row.seconds:.2f}",
            )
        console.print(degrees)
    if report.timings:
        timings = Table(title="wall time [s]")
        timings.add_column("stage")
        timings.add_column("seconds", justify="right")
        for stage, seconds in report.timings.items():
            timings.add_row(stage, f"{seconds:.3f}")
        console.print(timings)
    for warning in report.warnings:
        console.print(f"[yellow]warning:[/yellow] {warning}")
    if report.inconclusive:
        console.print("[bold red]inconclusive[/bold red]")


def run_job(job: JobConfig, container: Container) -> Report:
    if job.mode == RunMode.VERIFY:
        return container.verify_service().run(job)
    if job.mode == RunMode.SYNTHESIZE:
        return container.synthesis_service().run(job)
    if job.mode == RunMode.CHECK:
        return container.check_service().run(job)
    oracle = container.oracle_service()
    if job.mode == RunMode.EXACT:
        return oracle.exact(job)
    return oracle.simulate(job)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = (args.log_level or settings.log_level).upper()
    logging.getLogger().setLevel(level)
    console = Console()

    container = Container()
    container.config.from_dict(settings.model_dump())
    try:
        config = args.config
        if config is None and args.benchmark:
            try:
                config = container.benchmark_store().config(args.benchmark)
            except KeyError as err:
                raise ConfigurationError(err.args[0])
        job = load_job(config, _overrides(args))
        report = run_job(job, container)
    except QscError as err:
        console.print(f"[bold red]error:[/bold red] {err.detail}")
        return err.exit_code
    except Exception:
        logger.exception("Unhandled exception")
        return EXIT_INTERNAL

    render(report, console)
    if job.output is not None:
        Path(job.output).write_text(report.to_key_values(), encoding="utf-8")
        logger.info(f"[JOB] report written to {job.output}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
