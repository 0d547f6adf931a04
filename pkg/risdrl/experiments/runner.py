"""
The experiments: convergence, rate versus RIS size, complexity and checkpoint evaluation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..agent.ddpg import StepCallback, TrainingResult, extract_greedy_tx, train
from ..agent.encoding import action_dim, state_dim
from ..baselines import SchemeComparison, compare_schemes
from ..channel import (
    LongTermCsi,
    OfflineDataset,
    ScenarioGeometry,
    generate_offline_dataset,
    make_long_term_csi,
    noise_power,
    save_dataset,
)
from ..models import ExperimentConfig
from ..neural import load_checkpoint, save_checkpoint
from ..rates import ErgodicEstimate, OverheadParams, ergodic_rates
from ..runs import record_sweep_point
from ..settings import SeedPlan, derive_seeds, path_loss_params, rician_factors
from . import results

log = logging.getLogger(__name__)

ACTOR_CHECKPOINT = "actor.ckpt"
CRITIC_CHECKPOINT = "critic.ckpt"
DATASET_FILE = "dataset.bin"


@dataclass(frozen=True)
class Scenario:
    geometry: ScenarioGeometry
    csi: LongTermCsi
    dataset: OfflineDataset
    sigma2: float
    power: float


def build_scenario(cfg: ExperimentConfig, seeds: SeedPlan, *, N: int | None = None) -> Scenario:
    """
    Geometry and angles come from the scenario seed and do not depend on N,
    so a sweep over N keeps the same user drop.
    """
    scenario = cfg.scenario
    N = scenario.N if N is None else N
    rng = np.random.default_rng(seeds.scenario)
    geometry = ScenarioGeometry.generate(
        scenario.geometry.bs_position,
        scenario.geometry.ris_position,
        scenario.geometry.user_disk_center,
        scenario.geometry.user_disk_radius,
        scenario.K,
        rng,
    )
    path_loss = path_loss_params(cfg)
    csi = make_long_term_csi(
        geometry,
        path_loss,
        M=scenario.M,
        N=N,
        num_paths=scenario.I,
        rician=rician_factors(cfg),
        rng=rng,
    )
    dataset = generate_offline_dataset(csi, scenario.T, seeds.dataset)
    return Scenario(
        geometry=geometry,
        csi=csi,
        dataset=dataset,
        sigma2=noise_power(path_loss),
        power=scenario.transmit_power_w,
    )


def train_scenario(
    cfg: ExperimentConfig, scenario: Scenario, seeds: SeedPlan, on_step: StepCallback | None = None
) -> TrainingResult:
    return train(
        scenario.csi,
        scenario.dataset,
        cfg.agent,
        power=scenario.power,
        sigma2=scenario.sigma2,
        episodes=cfg.run.episodes,
        seed=seeds.agent,
        on_step=on_step,
    )


def run_convergence(
    cfg: ExperimentConfig, out_dir: Path, on_step: StepCallback | None = None
) -> TrainingResult:
    out_dir = Path(out_dir)
    seeds = derive_seeds(cfg.run.seed)
    scenario = build_scenario(cfg, seeds)
    log.info(
        "Convergence run: M=%s N=%s K=%s, sigma2=%.3e W",
        cfg.scenario.M, cfg.scenario.N, cfg.scenario.K, scenario.sigma2,
    )
    result = train_scenario(cfg, scenario, seeds, on_step)
    outputs = [
        results.write_training_steps(out_dir / results.TRAINING_STEPS_CSV, result.steps),
        results.write_convergence(out_dir / results.CONVERGENCE_CSV, result.episodes, cfg.agent.smoothing_weight),
    ]
    save_checkpoint(out_dir / ACTOR_CHECKPOINT, result.actor)
    save_checkpoint(out_dir / CRITIC_CHECKPOINT, result.critic)
    outputs += [out_dir / ACTOR_CHECKPOINT, out_dir / CRITIC_CHECKPOINT]
    if cfg.run.save_dataset:
        save_dataset(out_dir / DATASET_FILE, scenario.dataset)
        outputs.append(out_dir / DATASET_FILE)
    results.write_manifest(out_dir, command="convergence", cfg=cfg, seeds=seeds, outputs=outputs)
    return result


@dataclass(frozen=True)
class SweepRow:
    N: int
    comparison: SchemeComparison


def sweep_elements(
    cfg: ExperimentConfig,
    n_list: Sequence[int],
    *,
    db_path: Optional[Path] = None,
    run_id: Optional[int] = None,
) -> list[SweepRow]:
    """
    For every N: rebuild the scenario, train the long-term agent once and compare
    it with per-CCTI local search.
    """
    if not n_list:
        raise ValueError("The element sweep needs at least one N")
    seeds = derive_seeds(cfg.run.seed)
    rows = []
    for N in n_list:
        scenario = build_scenario(cfg, seeds, N=N)

        def solve_longterm():
            return train_scenario(cfg, scenario, seeds).greedy_tx

        comparison = compare_schemes(
            scenario.csi,
            scenario.dataset,
            scenario.sigma2,
            solve_longterm,
            cfg.baseline,
            OverheadParams(tau_c=cfg.scenario.tau_c, K=cfg.scenario.K, N=N),
            seed=seeds.baseline,
        )
        rows.append(SweepRow(N=N, comparison=comparison))
        if db_path is not None and run_id is not None:
            record_sweep_point(
                db_path,
                run_id,
                N=N,
                pilot_factor=comparison.pilot_factor,
                maur_longterm=comparison.maur_longterm,
                maur_instantaneous=comparison.maur_instantaneous,
                maur_instantaneous_unpenalized=comparison.maur_instantaneous_unpenalized,
                solver_calls_longterm=comparison.solver_calls_longterm,
                solver_calls_instantaneous=comparison.solver_calls_instantaneous,
                wallclock_longterm_s=comparison.wallclock_longterm_s,
                wallclock_instantaneous_s=comparison.wallclock_instantaneous_s,
            )
    return rows


def run_rate_vs_elements(
    cfg: ExperimentConfig,
    out_dir: Path,
    n_list: Sequence[int],
    *,
    db_path: Optional[Path] = None,
    run_id: Optional[int] = None,
) -> list[SweepRow]:
    rows = sweep_elements(cfg, n_list, db_path=db_path, run_id=run_id)
    path = results.write_rate_sweep(Path(out_dir) / results.RATE_SWEEP_CSV, rows)
    results.write_manifest(out_dir, command="rate-sweep", cfg=cfg, seeds=derive_seeds(cfg.run.seed), outputs=[path])
    return rows


def run_complexity(
    cfg: ExperimentConfig,
    out_dir: Path,
    n_list: Sequence[int],
    *,
    db_path: Optional[Path] = None,
    run_id: Optional[int] = None,
) -> list[SweepRow]:
    rows = sweep_elements(cfg, n_list, db_path=db_path, run_id=run_id)
    path = results.write_complexity(Path(out_dir) / results.COMPLEXITY_CSV, rows)
    results.write_manifest(out_dir, command="complexity", cfg=cfg, seeds=derive_seeds(cfg.run.seed), outputs=[path])
    return rows


def eval_checkpoint(cfg: ExperimentConfig, checkpoint: Path, out_dir: Path) -> ErgodicEstimate:
    """
    Greedy extraction with a saved actor, then a fresh ergodic estimate of its configuration.
    """
    seeds = derive_seeds(cfg.run.seed)
    scenario = build_scenario(cfg, seeds)
    M, N, K = scenario.dataset.dims
    actor = load_checkpoint(checkpoint, name="actor")
    expected = (state_dim(M, N, K), action_dim(M, N, K))
    if (actor.layer_dims[0], actor.layer_dims[-1]) != expected:
        raise ValueError(
            f"Checkpoint {checkpoint} maps {actor.layer_dims[0]} -> {actor.layer_dims[-1]}, "
            f"scenario needs {expected[0]} -> {expected[1]}"
        )
    rng = np.random.default_rng(seeds.agent)
    tx, _ = extract_greedy_tx(
        actor,
        scenario.csi,
        scenario.dataset,
        power=scenario.power,
        sigma2=scenario.sigma2,
        n_mc=cfg.agent.greedy_n_mc,
        rng=rng,
    )
    estimate = ergodic_rates(scenario.csi, tx, scenario.sigma2, cfg.run.n_mc, rng)
    log.info("Checkpoint %s: ergodic min-rate %.4f bit/s/Hz", checkpoint, estimate.min_rate)
    path = results.write_evaluation(Path(out_dir) / results.EVALUATION_CSV, estimate)
    results.write_manifest(out_dir, command="eval-checkpoint", cfg=cfg, seeds=seeds, outputs=[path])
    return estimate
