"""Shared construction steps: model, automata, product and templates."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

from qsc.algebra.polyhedron import Polyhedron
from qsc.certificate.instance import parse_box
from qsc.certificate.templates import (
    InvariantSpec,
    TemplateOptions,
    TemplateSet,
    apply_sink_heuristics,
    build_templates,
)
from qsc.core.exceptions import ConfigurationError, InvalidInputError
from qsc.model.model import Model, ensure_valid
from qsc.model.parser import parse_model
from qsc.product.modes import analyze_sinks
from qsc.product.product import ProductModel, compose
from qsc.schemas.job import JobConfig, TemplateConfig, parse_range
from qsc.solver.executor import SolverExecutor
from qsc.spec.dsa import DSA, parse_dsa
from qsc.spec.ltl import negate_ltl, parse_ltl
from qsc.spec.patterns import ltl_to_dsa

logger = logging.getLogger(__name__)

LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class Direction:
    """One side of a verification job: a product and its templates."""

    name: str
    product: ProductModel
    templates: TemplateSet


def read_text(path: Path, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise InvalidInputError(f"cannot read {what} {path}: {err}")


def load_model(path: Path) -> Model:
    return ensure_valid(parse_model(read_text(path, "model"), str(path)))


def load_automata(job: JobConfig, model: Model) -> Tuple[DSA, DSA]:
    """Automata for the specification and for its negation."""
    space = model.space
    if job.dsa is not None:
        automaton = parse_dsa(
            read_text(job.dsa, "automaton"), space=space, source=str(job.dsa)
        )
        if job.neg_dsa is not None:
            negated = parse_dsa(
                read_text(job.neg_dsa, "automaton"),
                space=space,
                source=str(job.neg_dsa),
            )
        else:
            try:
                negated = automaton.complemented()
            except InvalidInputError as err:
                raise ConfigurationError(
                    f"{err.detail}; give 'neg.dsa' for the negation"
                )
        return automaton, negated
    formula = parse_ltl(job.spec, space=space)
    return ltl_to_dsa(formula, space), ltl_to_dsa(negate_ltl(formula), space)


def parse_region(text: str, model: Model) -> Polyhedron:
    """``a..b`` for single-variable models, otherwise ``x:[a,b];...``."""
    names = model.space.names
    if ".." in text and ":" not in text:
        if len(names) != 1:
            raise ConfigurationError(
                f"range '{text}' is ambiguous over {len(names)} variables"
            )
        try:
            lower, upper = parse_range(text)
        except ValueError as err:
            raise ConfigurationError(str(err))
        text = f"{names[0]}:[{lower},{upper}]"
    return parse_box(text, names)


def parse_truncation_box(
    text: str, model: Model
) -> Dict[str, Tuple[int, int]]:
    region = parse_region(text, model)
    box: Dict[str, Tuple[int, int]] = {}
    for name in region.coordinates:
        lower, upper = region.syntactic_bounds(name)
        if lower is None or upper is None:
            raise ConfigurationError(f"truncation box leaves {name} open")
        if lower.denominator != 1 or upper.denominator != 1:
            raise ConfigurationError("truncation bounds must be integers")
        box[name] = (int(lower), int(upper))
    return box


def template_options(
    config: TemplateConfig,
    degree: int,
    frame: Optional[Polyhedron],
) -> TemplateOptions:
    return TemplateOptions(
        degree=degree,
        exponential=config.exponential,
        exp_variable=config.exp_variable,
        exp_base=config.exp_base,
        exp_offset=config.exp_offset,
        invariant=tuple(
            (q, InvariantSpec.parse(text))
            for q, text in config.invariant.items()
        ),
        frame=frame,
        eps=config.eps,
        M=config.M,
    )


def build_direction(
    name: str,
    model: Model,
    automaton: DSA,
    config: TemplateConfig,
    degree: int,
    frame: Optional[Polyhedron],
) -> Direction:
    product = compose(model, automaton)
    templates = build_templates(
        product, degree, template_options(config, degree, frame)
    )
    templates = apply_sink_heuristics(templates, analyze_sinks(product))
    logger.info(f"[PIPELINE] {name} direction built at degree {degree}")
    return Direction(name, product, templates)


def job_frame(job: JobConfig, model: Model) -> Optional[Polyhedron]:
    if job.frame:
        return parse_region(job.frame, model)
    return model.frame


def executor_for(job: JobConfig, default: SolverExecutor) -> SolverExecutor:
    """The shared executor, or a copy carrying the job's solver overrides."""
    if not any(
        value is not None
        for value in (
            job.solver,
            job.solver_path,
            job.solver_flags,
            job.timeout,
        )
    ):
        return default
    return SolverExecutor(
        provider=job.solver or default.provider,
        path=job.solver_path if job.solver_path is not None else default.path,
        flags=(
            job.solver_flags.split()
            if job.solver_flags is not None
            else default.flags
        ),
        timeout=job.timeout if job.timeout is not None else default.timeout,
    )
