"""Job configuration: line-oriented ``key = value`` files plus overrides.

Keys prefixed with ``neg.`` configure the templates of the negated
specification and default to the unprefixed values::

    mode = verify
    model = gambler.qsm
    spec = GF(x <= 0)
    degree = 2
    neg.exponential = true
    neg.inv.q0 = x:[1,?]
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from qsc.core.consts import RunMode
from qsc.core.exceptions import ConfigurationError, InvalidInputError
from qsc.model.expressions import parse_number

logger = logging.getLogger(__name__)

NEGATED_PREFIX = "neg."
_PATH_KEYS = (
    "model",
    "dsa",
    "neg_dsa",
    "certificate",
    "csv",
    "output",
    "certificate_dir",
)
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _fraction(value: Any) -> Optional[Fraction]:
    if value is None or isinstance(value, Fraction):
        return value
    if isinstance(value, (int, float)):
        return Fraction(value)
    text = str(value).strip()
    if not text:
        return None
    try:
        return parse_number(text)
    except InvalidInputError as err:
        raise ValueError(err.detail)


def parse_range(text: str) -> Tuple[Fraction, Fraction]:
    """``a..b`` or ``[a, b]`` as an ordered pair of rationals."""
    cleaned = text.strip().strip("[]")
    separator = ".." if ".." in cleaned else ","
    parts = cleaned.split(separator)
    if len(parts) != 2:
        raise ValueError(f"expected a range 'a..b', got '{text}'")
    lower, upper = (_fraction(part) for part in parts)
    if lower is None or upper is None or lower > upper:
        raise ValueError(f"'{text}' is not an ordered range")
    return lower, upper


class TemplateConfig(BaseModel):
    """Template shape of one direction of a verification job."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    degree: int = Field(2, ge=0, description="Polynomial template degree")
    exponential: bool = Field(
        False, description="Add an exponential atom to V0"
    )
    exp_variable: Optional[str] = None
    exp_base: Optional[Fraction] = None
    exp_offset: Optional[Fraction] = None
    eps: Optional[Fraction] = None
    M: Optional[Fraction] = None
    invariant: Dict[str, str] = Field(
        default_factory=dict, description="Invariant box per automaton state"
    )

    @field_validator("exp_base", "exp_offset", "eps", "M", mode="before")
    @classmethod
    def _rational(cls, value: Any) -> Optional[Fraction]:
        return _fraction(value)


class JobConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    mode: RunMode
    model: Path = Field(..., description="Guarded-command model file")
    spec: Optional[str] = Field(None, description="LTL specification")
    dsa: Optional[Path] = Field(None, description="Streett automaton file")
    neg_dsa: Optional[Path] = Field(
        None, description="Automaton for the negated specification"
    )
    template: TemplateConfig = Field(default_factory=TemplateConfig)
    negated: TemplateConfig = Field(default_factory=TemplateConfig)
    degree_max: Optional[int] = Field(None, ge=0)
    gap_target: Fraction = Fraction(0)
    handelman_degree: Optional[int] = Field(None, ge=1)
    frame: Optional[str] = None
    box: Optional[str] = None

    solver: Optional[str] = None
    solver_path: Optional[str] = None
    solver_flags: Optional[str] = None
    timeout: Optional[int] = Field(None, ge=0)
    tol: Optional[Fraction] = None

    targets: Optional[Tuple[Fraction, Fraction]] = None
    kappa: Dict[str, Fraction] = Field(default_factory=dict)
    certificate: Optional[Path] = None
    direction: str = Field(
        "lower",
        pattern="^(lower|upper)$",
        description="Specification side a checked certificate bounds",
    )
    sweep: Optional[Tuple[int, int]] = None

    trajectories: int = Field(1000, ge=1)
    horizon: int = Field(100, ge=0)
    seed: int = 0
    columns: int = Field(10, ge=1)

    csv: Optional[Path] = None
    output: Optional[Path] = None
    certificate_dir: Optional[Path] = None
    name: str = "job"

    @field_validator("gap_target", "tol", mode="before")
    @classmethod
    def _rational(cls, value: Any) -> Optional[Fraction]:
        return _fraction(value)

    @field_validator("targets", mode="before")
    @classmethod
    def _targets(cls, value: Any) -> Any:
        return parse_range(value) if isinstance(value, str) else value

    @field_validator("sweep", mode="before")
    @classmethod
    def _sweep(cls, value: Any) -> Any:
        if not isinstance(value, str):
            return value
        lower, upper = parse_range(value)
        if lower.denominator != 1 or upper.denominator != 1:
            raise ValueError("sweep bounds must be integers")
        return int(lower), int(upper)

    @field_validator("kappa", mode="before")
    @classmethod
    def _kappa(cls, value: Any) -> Any:
        if isinstance(value, Mapping):
            return {name: _fraction(v) for name, v in value.items()}
        return value

    @model_validator(mode="after")
    def _mode_fields(self) -> "JobConfig":
        if self.spec is None and self.dsa is None:
            raise ValueError(f"mode {self.mode.value} needs 'spec' or 'dsa'")
        if self.mode == RunMode.SYNTHESIZE:
            if self.targets is None:
                raise ValueError("mode synthesize needs 'targets'")
            lower, upper = self.targets
            if not 0 <= lower <= upper <= 1:
                raise ValueError(
                    f"targets [{lower}, {upper}] must lie within [0, 1]"
                )
        if self.mode == RunMode.CHECK and self.certificate is None:
            raise ValueError("mode check needs 'certificate'")
        if self.mode in (RunMode.EXACT, RunMode.SIMULATE) and not self.box:
            raise ValueError(f"mode {self.mode.value} needs 'box'")
        if self.tol is not None and self.tol <= 0:
            raise ValueError("tol must be positive")
        top = self.degree_max
        if top is not None and top < self.template.degree:
            raise ValueError("degree_max is below degree")
        return self


_TEMPLATE_KEYS = set(TemplateConfig.model_fields)


def read_key_values(text: str, source: str = "<config>") -> Dict[str, str]:
    entries: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{source}:{number}: expected 'key = value'"
            )
        key, value = (part.strip() for part in line.split("=", 1))
        if key in entries:
            raise ConfigurationError(f"{source}:{number}: duplicate '{key}'")
        entries[key] = value
    return entries


def _boolean(key: str, value: str) -> bool:
    lowered = value.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigurationError(f"'{key}' expects true or false, got '{value}'")


def _template_fields(entries: Mapping[str, str]) -> Dict[str, Any]:
    fields: Dict[str, Any] = {}
    invariant: Dict[str, str] = {}
    for key, value in entries.items():
        if key.startswith("inv."):
            invariant[key[len("inv."):]] = value
        elif key == "exponential":
            fields[key] = _boolean(key, value)
        elif key in _TEMPLATE_KEYS:
            fields[key] = value
    if invariant:
        fields["invariant"] = invariant
    return fields


def build_job(
    entries: Mapping[str, str],
    base_dir: Optional[Path] = None,
    name: str = "job",
) -> JobConfig:
    """Validate flat key/value entries into a :class:`JobConfig`."""
    base_dir = base_dir or Path.cwd()
    plain = {
        k: v
        for k, v in entries.items()
        if not k.startswith(NEGATED_PREFIX)
    }
    negated_only = {
        k[len(NEGATED_PREFIX):]: v
        for k, v in entries.items()
        if k.startswith(NEGATED_PREFIX)
    }
    template = _template_fields(plain)
    negated = dict(template)
    negated_fields = _template_fields(negated_only)
    if "invariant" in negated_fields:
        negated.pop("invariant", None)
    negated.update(negated_fields)
    unknown_negated = [
        k
        for k in negated_only
        if k not in _TEMPLATE_KEYS
        and not k.startswith("inv.")
        and k != "dsa"
    ]
    if unknown_negated:
        raise ConfigurationError(
            f"unknown negated key(s) {sorted(unknown_negated)}"
        )

    fields: Dict[str, Any] = {"name": name}
    kappa: Dict[str, str] = {}
    for key, value in plain.items():
        if key in _TEMPLATE_KEYS or key.startswith("inv."):
            continue
        if key.startswith("kappa."):
            kappa[key[len("kappa."):]] = value
            continue
        fields[key.replace("-", "_")] = value
    if "dsa" in negated_only:
        fields["neg_dsa"] = negated_only["dsa"]
    for key in _PATH_KEYS:
        if fields.get(key):
            path = Path(fields[key])
            fields[key] = path if path.is_absolute() else base_dir / path
    fields["kappa"] = kappa
    fields["template"] = template
    fields["negated"] = negated
    try:
        return JobConfig(**fields)
    except ValidationError as err:
        problems: List[str] = [
            f"{'.'.join(str(p) for p in e['loc']) or 'config'}: {e['msg']}"
            for e in err.errors()
        ]
        raise ConfigurationError("; ".join(problems))


def load_job(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, str]] = None,
) -> JobConfig:
    """Read a job file and apply command-line overrides on top."""
    entries: Dict[str, str] = {}
    base_dir = Path.cwd()
    name = "job"
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            raise InvalidInputError(f"cannot read config {path}: {err}")
        entries = read_key_values(text, str(path))
        base_dir = path.resolve().parent
        name = path.stem
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in _PATH_KEYS:
            # command-line paths are relative to the working directory
            value = Path(value).resolve()
        entries[key] = str(value)
    logger.debug(f"[JOB] {name}: {sorted(entries)}")
    return build_job(entries, base_dir, name)
