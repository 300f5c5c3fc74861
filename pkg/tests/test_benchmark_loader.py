"""Test benchmark registry lookups."""

from fractions import Fraction
from pathlib import Path
from unittest.mock import mock_open, patch

import pytest

from qsc.benchmarks.loader import BenchmarkSpec, BenchmarkStore


class TestBenchmarkStore:
    """Test BenchmarkStore functionality."""

    @pytest.fixture
    def mock_registry_data(self):
        """Mock registry data."""
        return {
            "benchmarks": {
                "walk": {
                    "model": "models/walk.qsm",
                    "spec": "F(x <= 0)",
                    "start": {"x": 2},
                    "reference": "1/2",
                    "configs": ["configs/walk-d2.cfg"],
                },
                "coin": {
                    "model": "models/coin.qsm",
                    "spec": "GF(x >= 20)",
                    "reference": "kappa^19",
                },
            }
        }

    @pytest.fixture
    def store(self):
        """Create a BenchmarkStore over a fake base directory."""
        return BenchmarkStore(base_dir=Path("/bench"))

    def test_spec_defaults(self):
        spec = BenchmarkSpec(
            key="walk", model=Path("walk.qsm"), spec="F(x <= 0)"
        )
        assert spec.start == {}
        assert spec.reference is None
        assert spec.configs == []

    @patch(
        "builtins.open",
        new_callable=mock_open,
        read_data='benchmarks:\n  walk:\n    model: "walk.qsm"',
    )
    @patch("yaml.safe_load")
    def test_load_registry(
        self, mock_yaml, mock_file, store, mock_registry_data
    ):
        """Test registry loading."""
        mock_yaml.return_value = mock_registry_data

        # Clear the cache to ensure fresh load
        store._load_registry.cache_clear()

        assert store._load_registry() == mock_registry_data

    @patch.object(BenchmarkStore, "_load_registry")
    def test_spec_from_registry(self, mock_load, store, mock_registry_data):
        mock_load.return_value = mock_registry_data

        spec = store.spec("walk")

        assert spec.model == Path("/bench/models/walk.qsm")
        assert spec.start == {"x": 2}
        assert spec.configs == [Path("/bench/configs/walk-d2.cfg")]
        assert store.keys() == ["coin", "walk"]

    @patch.object(BenchmarkStore, "_load_registry")
    def test_spec_not_found(self, mock_load, store):
        mock_load.return_value = {"benchmarks": {}}

        with pytest.raises(KeyError, match="Benchmark key not found: none"):
            store.spec("none")

    @patch.object(BenchmarkStore, "_load_registry")
    def test_reference_values(self, mock_load, store, mock_registry_data):
        """Symbolic references have no exact value."""
        mock_load.return_value = mock_registry_data

        assert store.reference_value("walk") == Fraction(1, 2)
        assert store.reference_value("coin") is None

    @patch.object(BenchmarkStore, "_load_registry")
    def test_config_by_stem(self, mock_load, store, mock_registry_data):
        mock_load.return_value = mock_registry_data

        assert store.config("walk-d2") == Path("/bench/configs/walk-d2.cfg")
        with pytest.raises(KeyError, match="walk-d9"):
            store.config("walk-d9")

    def test_shipped_registry(self):
        """Every shipped benchmark points at files that exist."""
        store = BenchmarkStore()
        assert "gambler" in store.keys()
        for key in store.keys():
            spec = store.spec(key)
            assert spec.model.exists(), key
            assert all(path.exists() for path in spec.configs), key
        assert store.reference_value("reactivity1") == Fraction(1, 6)
