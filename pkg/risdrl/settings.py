"""
Experiment configuration presets, TOML I/O, validation and seed derivation.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import toml

from .agent.ddpg import validate_agent_config
from .baselines import validate_local_search
from .channel import PathLossParams, RicianFactors
from .models import ExperimentConfig

SECTIONS = ("scenario", "agent", "baseline", "run")

DESK_SCALE_OVERRIDES: dict[str, dict[str, Any]] = {
    "scenario": {"M": 4, "N": 16, "K": 4},
    # Every configuration is reachable from any state in one action.
    "agent": {"hidden_layers": [128, 128], "gamma": 0.5, "noise_decay": 0.9999},
    "run": {"episodes": 300},
}

# Element sweeps compare schemes with four users and a single BS-RIS path.
SWEEP_SCENARIO_DEFAULTS: dict[str, Any] = {"K": 4, "I": 1}


def default_paper_config() -> ExperimentConfig:
    return ExperimentConfig()


def desk_scale_config() -> ExperimentConfig:
    return ExperimentConfig.model_validate(_merge(default_paper_config().model_dump(), DESK_SCALE_OVERRIDES))


def preset_config(full_scale: bool) -> ExperimentConfig:
    return default_paper_config() if full_scale else desk_scale_config()


def _merge(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def config_from_dict(data: dict[str, Any], base: ExperimentConfig | None = None) -> ExperimentConfig:
    """
    Overlay `data` on `base` (full-scale defaults when omitted); missing keys keep the base value.
    """
    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise ValueError(f"Unknown config sections {unknown}; expected {list(SECTIONS)}")
    base = base or default_paper_config()
    cfg = ExperimentConfig.model_validate(_merge(base.model_dump(), data))
    validate_config(cfg)
    return cfg


def read_config_file(path: Path) -> dict[str, Any]:
    path = Path(path).expanduser()
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        return toml.load(path)
    except toml.TomlDecodeError as exc:
        raise ValueError(f"Cannot parse config {path}: {exc}") from exc


def load_config(path: Path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    return config_from_dict(read_config_file(path), base)


def sweep_config(cfg: ExperimentConfig, file_data: dict[str, Any] | None = None) -> ExperimentConfig:
    """
    Scenario used by the element sweeps: K and I fall back to SWEEP_SCENARIO_DEFAULTS
    unless `file_data` (the raw config file) sets them.
    """
    explicit = (file_data or {}).get("scenario", {})
    updates = {key: value for key, value in SWEEP_SCENARIO_DEFAULTS.items() if key not in explicit}
    if not updates:
        return cfg
    return cfg.model_copy(update={"scenario": cfg.scenario.model_copy(update=updates)})


def config_to_toml(cfg: ExperimentConfig) -> str:
    return toml.dumps(cfg.model_dump())


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    return config_from_dict(toml.loads(text), base)


def save_config(path: Path, cfg: ExperimentConfig) -> Path:
    path = Path(path).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config_to_toml(cfg))
    return path


def validate_config(cfg: ExperimentConfig) -> None:
    scenario = cfg.scenario
    for name in ("M", "N", "K", "I", "T"):
        if getattr(scenario, name) < 1:
            raise ValueError(f"scenario.{name} must be >= 1, got {getattr(scenario, name)}")
    if scenario.tau_c < 1:
        raise ValueError(f"scenario.tau_c must be >= 1, got {scenario.tau_c}")
    if scenario.transmit_power_w <= 0:
        raise ValueError(f"scenario.transmit_power_w must be positive, got {scenario.transmit_power_w}")
    geometry = scenario.geometry
    for name in ("bs_position", "ris_position", "user_disk_center"):
        if len(getattr(geometry, name)) != 3:
            raise ValueError(f"scenario.geometry.{name} must have three coordinates")
    if geometry.user_disk_radius < 0:
        raise ValueError(f"scenario.geometry.user_disk_radius must be nonnegative, got {geometry.user_disk_radius}")
    rician = scenario.rician
    if min(rician.bs_ris, rician.ris_user, rician.bs_user) < 0:
        raise ValueError("Rician factors must be nonnegative")
    path_loss_params(cfg)

    validate_agent_config(cfg.agent)
    validate_local_search(cfg.baseline)

    run = cfg.run
    if run.seed < 0:
        raise ValueError(f"run.seed must be nonnegative, got {run.seed}")
    if run.n_mc < 1 or run.episodes < 1:
        raise ValueError("run.n_mc and run.episodes must be >= 1")
    if not run.n_list or min(run.n_list) < 1:
        raise ValueError(f"run.n_list must be a nonempty list of positive sizes, got {run.n_list}")


def path_loss_params(cfg: ExperimentConfig) -> PathLossParams:
    settings = cfg.scenario.path_loss
    return PathLossParams(
        pl0_db=settings.pl0_db,
        d0=settings.d0,
        alpha_bs_ris=settings.alpha_bs_ris,
        alpha_ris_user=settings.alpha_ris_user,
        alpha_bs_user=settings.alpha_bs_user,
        noise_density_dbm_hz=settings.noise_density_dbm_hz,
        bandwidth_hz=settings.bandwidth_hz,
    )


def rician_factors(cfg: ExperimentConfig) -> RicianFactors:
    settings = cfg.scenario.rician
    return RicianFactors(bs_ris=settings.bs_ris, ris_user=settings.ris_user, bs_user=settings.bs_user)


@dataclass(frozen=True)
class SeedPlan:
    master: int
    scenario: int  # geometry and angles
    training: int  # everything the learner and the NLoS draws consume
    dataset: int
    agent: int
    baseline: int


def derive_seeds(master: int) -> SeedPlan:
    scenario, training = (int(v) for v in np.random.SeedSequence(master).generate_state(2))
    dataset, agent, baseline = (int(v) for v in np.random.SeedSequence(training).generate_state(3))
    return SeedPlan(
        master=master,
        scenario=scenario,
        training=training,
        dataset=dataset,
        agent=agent,
        baseline=baseline,
    )
