from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from qsc.core.exceptions import InvalidInputError
from qsc.model.expressions import parse_number

ROOT = Path(__file__).resolve().parent
REGISTRY = ROOT / "registry.yaml"

"""
Shipped benchmark corpus: models, specifications and experiment configs.
"""


@dataclass
class BenchmarkSpec:
    key: str
    model: Path
    spec: str
    start: Dict[str, int] = field(default_factory=dict)
    reference: Optional[str] = None
    configs: List[Path] = field(default_factory=list)


class BenchmarkStore:
    """
    Look up benchmarks and experiment configs from a registry.
    """

    def __init__(self, base_dir: Path = ROOT, registry: Path = REGISTRY):
        self.base = base_dir
        self.registry = registry

    @lru_cache(maxsize=8)
    def _load_registry(self) -> Dict[str, Any]:
        """Load the benchmark registry from a YAML file."""
        with open(self.registry, "r", encoding="utf-8") as f:
            return yaml.safe_load(f) or {}

    def keys(self) -> List[str]:
        return sorted(self._load_registry().get("benchmarks", {}))

    def spec(self, key: str) -> BenchmarkSpec:
        """
        Get the BenchmarkSpec for a given key.
        Raises KeyError if the key is not found.
        """
        reg = self._load_registry().get("benchmarks", {})

        if key not in reg:
            raise KeyError(f"Benchmark key not found: {key}")

        entry = reg[key]
        return BenchmarkSpec(
            key=key,
            model=self.base / entry["model"],
            spec=entry["spec"],
            start=dict(entry.get("start") or {}),
            reference=entry.get("reference"),
            configs=[self.base / path for path in entry.get("configs", [])],
        )

    @lru_cache(maxsize=32)
    def model_text(self, key: str) -> str:
        return self.spec(key).model.read_text(encoding="utf-8")

    def reference_value(self, key: str) -> Optional[Fraction]:
        """Exact reference probability, ``None`` if absent or symbolic."""
        text = self.spec(key).reference
        if text is None:
            return None
        try:
            return parse_number(text)
        except InvalidInputError:
            return None

    def config(self, name: str) -> Path:
        """Path of the experiment config whose file stem is ``name``."""
        for key in self.keys():
            for path in self.spec(key).configs:
                if path.stem == name:
                    return path
        raise KeyError(f"Experiment config not found: {name}")
