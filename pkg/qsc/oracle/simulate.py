"""Monte-Carlo trajectories of the satisfaction-probability process."""

import csv
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from qsc.oracle.truncation import FiniteChain
from qsc.product.product import ProductModel

logger = logging.getLogger(__name__)

Trajectory = List[Tuple[Dict[str, Fraction], str]]


@dataclass
class SimulationResult:
    trajectories: List[Trajectory]
    # rows are trajectories, columns steps; NaN outside the truncation
    process: Optional[np.ndarray] = None
    summary: Dict[str, float] = field(default_factory=dict)

    @property
    def step_means(self) -> np.ndarray:
        return np.nanmean(self.process, axis=0)


def trajectory_streams(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators, one per trajectory, derived from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def _process_values(
    trajectory: Trajectory,
    chain: FiniteChain,
    probabilities: Mapping[int, Fraction],
) -> List[float]:
    values = []
    for state, q in trajectory:
        index = chain.find(chain.state_key(state, q))
        values.append(
            float(probabilities[index]) if index is not None else np.nan
        )
    return values


def summarize(process: np.ndarray) -> Dict[str, float]:
    """Mean drift of the process relative to its initial value."""
    means = np.nanmean(process, axis=0)
    counts = np.sum(~np.isnan(process), axis=0)
    errors = np.nanstd(process, axis=0, ddof=1) / np.sqrt(
        np.maximum(counts, 1)
    )
    initial = means[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        deviation = np.where(errors > 0, np.abs(means - initial) / errors, 0)
    return {
        "initial": float(initial),
        "final_mean": float(means[-1]),
        "max_stderr": float(np.nanmax(errors)),
        "max_deviation": float(np.nanmax(deviation)),
    }


def simulate(
    p: ProductModel,
    kappa: Optional[Mapping[str, Fraction]],
    n_traj: int,
    horizon: int,
    seed: int,
    chain: Optional[FiniteChain] = None,
    probabilities: Optional[Mapping[int, Fraction]] = None,
) -> SimulationResult:
    """Simulate ``n_traj`` product runs of ``horizon`` steps.

    With a solved truncation the per-state acceptance probabilities turn
    each run into a trace of the satisfaction-probability process.
    """
    kappa = dict(kappa or {})
    trajectories: List[Trajectory] = []
    for rng in trajectory_streams(seed, n_traj):
        state, q = p.initial
        trajectory: Trajectory = [(state, q)]
        for _ in range(horizon):
            state, q = p.sample(state, q, kappa, rng)
            trajectory.append((state, q))
        trajectories.append(trajectory)
    result = SimulationResult(trajectories)
    if chain is not None and probabilities is not None:
        result.process = np.array(
            [_process_values(t, chain, probabilities) for t in trajectories]
        )
        result.summary = summarize(result.process)
        logger.info(
            f"[SIMULATE] {n_traj} trajectories, mean "
            f"{result.summary['initial']:.4f} -> "
            f"{result.summary['final_mean']:.4f}, max deviation "
            f"{result.summary['max_deviation']:.2f} sigma"
        )
    return result


def write_process_csv(
    result: SimulationResult, path: Path, columns: int = 10
) -> None:
    """Columns ``n, s1..sK`` for the first ``K`` trajectories."""
    if result.process is None:
        raise ValueError("no process values to write")
    shown = result.process[:columns]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n"] + [f"s{k + 1}" for k in range(len(shown))])
        for n in range(shown.shape[1]):
            writer.writerow([n] + [f"{value:.6f}" for value in shown[:, n]])
