"""
Configuration schemas and run-registry tables shared by the application.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Optional

from sqlmodel import Field, SQLModel

from . import config


class RunStatus(str):
    RUNNING = "RUNNING"
    SUCCEEDED = "SUCCEEDED"
    FAILED = "FAILED"


class PrecoderRule(str):
    MATCHED_FILTER = "matched_filter"
    RANDOM_REFINE = "random_refine"
    ZERO_FORCING = "zero_forcing"

    ALL = (MATCHED_FILTER, RANDOM_REFINE, ZERO_FORCING)


class GeometrySettings(SQLModel):
    bs_position: list[float] = Field(default_factory=lambda: list(config.DEFAULT_BS_POSITION))
    ris_position: list[float] = Field(default_factory=lambda: list(config.DEFAULT_RIS_POSITION))
    user_disk_center: list[float] = Field(default_factory=lambda: list(config.DEFAULT_USER_DISK_CENTER))
    user_disk_radius: float = config.DEFAULT_USER_DISK_RADIUS


class PathLossSettings(SQLModel):
    pl0_db: float = config.DEFAULT_PL0_DB
    d0: float = config.DEFAULT_D0
    alpha_bs_ris: float = config.ALPHA_BS_RIS
    alpha_ris_user: float = config.ALPHA_RIS_USER
    alpha_bs_user: float = config.ALPHA_BS_USER
    noise_density_dbm_hz: float = config.NOISE_DENSITY_DBM_HZ
    bandwidth_hz: float = config.BANDWIDTH_HZ


class RicianSettings(SQLModel):
    bs_ris: float = 2.2
    ris_user: float = 3.75
    bs_user: float = 2.2


class ScenarioSettings(SQLModel):
    M: int = 8
    N: int = 80
    K: int = 10
    I: int = 2
    transmit_power_w: float = config.TRANSMIT_POWER_W
    T: int = 150
    tau_c: int = 150
    geometry: GeometrySettings = Field(default_factory=GeometrySettings)
    path_loss: PathLossSettings = Field(default_factory=PathLossSettings)
    rician: RicianSettings = Field(default_factory=RicianSettings)


class AgentConfig(SQLModel):
    gamma: float = config.DISCOUNT
    replay_capacity: int = config.REPLAY_CAPACITY
    batch_size: int = config.BATCH_SIZE
    eta: float = config.SOFT_UPDATE_RATE
    noise_scale: float = config.NOISE_SCALE
    noise_decay: float = config.NOISE_DECAY
    # 0 means one pass over the offline dataset per episode.
    steps_per_episode: int = 0
    learning_start: int = config.LEARNING_START
    hidden_layers: list[int] = Field(default_factory=lambda: list(config.HIDDEN_LAYERS))
    actor_learning_rate: float = config.ACTOR_LEARNING_RATE
    critic_learning_rate: float = config.CRITIC_LEARNING_RATE
    actor_final_scale: float = config.ACTOR_FINAL_LAYER_SCALE
    smoothing_weight: float = config.SMOOTHING_WEIGHT
    greedy_n_mc: int = config.GREEDY_N_MC


class LocalSearchConfig(SQLModel):
    iterations: int = 30
    candidates_per_iter: int = 8
    phase_step: float = 0.3
    precoder_rule: str = PrecoderRule.MATCHED_FILTER
    workers: int = 1


class RunSettings(SQLModel):
    seed: int = 2024
    output_dir: str = str(config.DEFAULT_OUTPUT_DIR)
    n_mc: int = 1000
    episodes: int = 1000
    n_list: list[int] = Field(default_factory=lambda: [4, 8, 16, 24, 32, 48])
    save_dataset: bool = False


class ExperimentConfig(SQLModel):
    scenario: ScenarioSettings = Field(default_factory=ScenarioSettings)
    agent: AgentConfig = Field(default_factory=AgentConfig)
    baseline: LocalSearchConfig = Field(default_factory=LocalSearchConfig)
    run: RunSettings = Field(default_factory=RunSettings)


class Run(SQLModel, table=True):
    id: Optional[int] = Field(default=None, primary_key=True)
    command: str = Field(index=True)
    status: str = Field(default=RunStatus.RUNNING, index=True)
    seed: int
    scenario_seed: int
    training_seed: int
    config_toml: str
    output_dir: str
    started_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc), index=True)
    finished_at: Optional[datetime] = None
    error_message: Optional[str] = None


class SweepPoint(SQLModel, table=True):
    id: Optional[int] = Field(default=None, primary_key=True)
    run_id: int = Field(foreign_key="run.id", index=True)
    N: int = Field(index=True)
    pilot_factor: float
    maur_longterm: float
    maur_instantaneous: float
    maur_instantaneous_unpenalized: float
    solver_calls_longterm: int
    solver_calls_instantaneous: int
    wallclock_longterm_s: float
    wallclock_instantaneous_s: float
