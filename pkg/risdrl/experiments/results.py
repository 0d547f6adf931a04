"""
CSV and manifest writers for experiment outputs.
"""

from __future__ import annotations

import csv
import logging
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import toml

from ..agent.ddpg import EpisodeRecord, StepRecord, smooth
from ..config import APP_NAME, APP_VERSION, MANIFEST_FILENAME
from ..models import ExperimentConfig
from ..rates import ErgodicEstimate
from ..settings import SeedPlan

log = logging.getLogger(__name__)

TRAINING_STEPS_CSV = "training_steps.csv"
CONVERGENCE_CSV = "convergence.csv"
RATE_SWEEP_CSV = "rate_vs_elements.csv"
COMPLEXITY_CSV = "complexity.csv"
EVALUATION_CSV = "evaluation.csv"

TRAINING_STEPS_COLUMNS = [
    "episode",
    "step",
    "reward",
    "evaluation_reward",
    "smoothed_reward",
    "critic_loss",
    "noise_scale",
]
CONVERGENCE_COLUMNS = ["episode", "evaluation_reward", "smoothed"]
RATE_SWEEP_COLUMNS = ["N", "pilot_factor", "maur_longterm", "maur_instantaneous"]
COMPLEXITY_COLUMNS = [
    "N",
    "solver_calls_longterm",
    "solver_calls_instantaneous",
    "wallclock_longterm_s",
    "wallclock_instantaneous_s",
]
EVALUATION_COLUMNS = ["user", "mean_rate", "std_error"]

TRACKED_PACKAGES = ("numpy", "sqlmodel", "toml")


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
            count += 1
    log.info("Wrote %s rows to %s", count, path)
    return path


def write_training_steps(path: Path, steps: Sequence[StepRecord]) -> Path:
    return write_csv(
        path,
        TRAINING_STEPS_COLUMNS,
        (
            (s.episode, s.step, s.reward, s.evaluation_reward, s.smoothed_reward, s.critic_loss, s.noise_scale)
            for s in steps
        ),
    )


def write_convergence(path: Path, episodes: Sequence[EpisodeRecord], smoothing_weight: float) -> Path:
    rewards = [e.evaluation_reward for e in episodes]
    smoothed = smooth(rewards, smoothing_weight)
    return write_csv(
        path,
        CONVERGENCE_COLUMNS,
        ((e.episode, e.evaluation_reward, s) for e, s in zip(episodes, smoothed)),
    )


def write_rate_sweep(path: Path, points: Sequence) -> Path:
    return write_csv(
        path,
        RATE_SWEEP_COLUMNS,
        ((p.N, p.comparison.pilot_factor, p.comparison.maur_longterm, p.comparison.maur_instantaneous) for p in points),
    )


def write_complexity(path: Path, points: Sequence) -> Path:
    return write_csv(
        path,
        COMPLEXITY_COLUMNS,
        (
            (
                p.N,
                p.comparison.solver_calls_longterm,
                p.comparison.solver_calls_instantaneous,
                p.comparison.wallclock_longterm_s,
                p.comparison.wallclock_instantaneous_s,
            )
            for p in points
        ),
    )


def write_evaluation(path: Path, estimate: ErgodicEstimate) -> Path:
    rows = [(k, mean, err) for k, (mean, err) in enumerate(zip(estimate.mean, estimate.std_error))]
    rows.append(("min", estimate.min_rate, ""))
    return write_csv(path, EVALUATION_COLUMNS, rows)


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def package_versions() -> dict[str, str]:
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def write_manifest(
    out_dir: Path,
    *,
    command: str,
    cfg: ExperimentConfig,
    seeds: SeedPlan,
    outputs: Sequence[Path] = (),
) -> Path:
    """
    Record the config echo, seeds and package versions next to the results.
    """
    path = Path(out_dir) / MANIFEST_FILENAME
    manifest = {
        "app": {"name": APP_NAME, "version": APP_VERSION},
        "command": command,
        "written_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seeds": {
            "master": seeds.master,
            "scenario": seeds.scenario,
            "training": seeds.training,
            "dataset": seeds.dataset,
            "agent": seeds.agent,
            "baseline": seeds.baseline,
        },
        "versions": package_versions(),
        "outputs": [Path(p).name for p in outputs],
        "config": cfg.model_dump(),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(toml.dumps(manifest))
    return path
