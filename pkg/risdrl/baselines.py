"""
Comparison strategies: random configurations and a per-CCTI local search that
stands in for instantaneous-CSI optimizers.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .agent.encoding import normalize_precoder, wrap_phase
from .channel import ChannelRealization, LongTermCsi, OfflineDataset, complex_gaussian
from .config import DEGENERATE_PRECODER_NORM
from .models import LocalSearchConfig, PrecoderRule
from .rates import (
    OverheadParams,
    TxConfig,
    dataset_rates,
    effective_channel,
    maur,
    pilot_overhead_factor,
    rate,
    sinr_from_effective,
)

log = logging.getLogger(__name__)

InstantaneousSolver = Callable[
    [ChannelRealization, float, float, LocalSearchConfig, np.random.Generator], TxConfig
]
LongTermSolver = Callable[[], TxConfig]


def random_tx(M: int, N: int, K: int, power: float, rng: np.random.Generator) -> TxConfig:
    W = normalize_precoder(complex_gaussian((M, K), rng), power)
    return TxConfig(W=W, phase_angles=rng.uniform(0.0, 2.0 * np.pi, N), power=power)


def _equal_power_columns(W: np.ndarray, power: float) -> np.ndarray | None:
    norms = np.linalg.norm(W, axis=0)
    if np.any(norms < DEGENERATE_PRECODER_NORM):
        return None
    W = W / norms * np.sqrt(power / W.shape[1])
    return normalize_precoder(W, power)


def matched_filter_precoder(V: np.ndarray, power: float) -> np.ndarray:
    """
    w_k proportional to conj(v_k) with the power split equally over users. `V` is (K, M).
    """
    W = _equal_power_columns(V.conj().T, power)
    if W is None:
        raise ValueError("Matched filter is undefined for a zero effective channel")
    return W


def zero_forcing_precoder(V: np.ndarray, power: float) -> np.ndarray:
    """
    Pseudo-inverse of the effective channel, equal power per stream.
    """
    W = _equal_power_columns(np.linalg.pinv(V), power)
    if W is None:
        raise ValueError("Zero forcing is undefined for a rank-deficient effective channel")
    return W


def validate_local_search(cfg: LocalSearchConfig) -> None:
    if cfg.iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {cfg.iterations}")
    if cfg.candidates_per_iter < 1:
        raise ValueError(f"candidates_per_iter must be >= 1, got {cfg.candidates_per_iter}")
    if cfg.phase_step < 0:
        raise ValueError(f"phase_step must be nonnegative, got {cfg.phase_step}")
    if cfg.precoder_rule not in PrecoderRule.ALL:
        raise ValueError(f"Unknown precoder rule {cfg.precoder_rule}")
    if cfg.workers < 1:
        raise ValueError(f"workers must be >= 1, got {cfg.workers}")


def _objective(V: np.ndarray, W: np.ndarray, sigma2: float) -> float:
    return float(np.min(rate(sinr_from_effective(V, W, sigma2))))


def _derive_precoder(
    rule: str, V: np.ndarray, incumbent: np.ndarray, power: float, step: float, rng: np.random.Generator
) -> np.ndarray | None:
    try:
        if rule == PrecoderRule.MATCHED_FILTER:
            return matched_filter_precoder(V, power)
        if rule == PrecoderRule.ZERO_FORCING:
            return zero_forcing_precoder(V, power)
    except ValueError:
        return None
    raw = incumbent + step * complex_gaussian(incumbent.shape, rng)
    if np.linalg.norm(raw) < DEGENERATE_PRECODER_NORM:
        return None
    return normalize_precoder(raw, power)


def instantaneous_solve(
    real: ChannelRealization,
    sigma2: float,
    power: float,
    cfg: LocalSearchConfig,
    rng: np.random.Generator,
    history: list[float] | None = None,
) -> TxConfig:
    """
    Greedy random local search on min_k R_k for one realization.

    Starts from the best of `candidates_per_iter` random configurations, then each
    iteration perturbs the phases of the incumbent and re-derives the precoder by
    `precoder_rule`. A candidate replaces the incumbent only if it is strictly better,
    so the objective never decreases. `history` receives the incumbent objective
    after the start and after every iteration.
    """
    validate_local_search(cfg)
    M, N, K = real.dims
    best_tx, best_value = None, -np.inf
    for _ in range(cfg.candidates_per_iter):
        candidate = random_tx(M, N, K, power, rng)
        value = _objective(effective_channel(real, candidate.phase_angles), candidate.W, sigma2)
        if value > best_value:
            best_tx, best_value = candidate, value
    if history is not None:
        history.append(best_value)

    for _ in range(cfg.iterations):
        for _ in range(cfg.candidates_per_iter):
            angles = wrap_phase(best_tx.phase_angles + rng.normal(0.0, cfg.phase_step, N))
            V = effective_channel(real, angles)
            W = _derive_precoder(cfg.precoder_rule, V, best_tx.W, power, cfg.phase_step, rng)
            if W is None:
                continue
            value = _objective(V, W, sigma2)
            if value > best_value:
                best_tx, best_value = TxConfig(W=W, phase_angles=angles, power=power), value
        if history is not None:
            history.append(best_value)
    return best_tx


@dataclass(frozen=True)
class SchemeComparison:
    maur_longterm: float
    maur_instantaneous: float
    maur_instantaneous_unpenalized: float
    pilot_factor: float
    solver_calls_longterm: int
    solver_calls_instantaneous: int
    wallclock_longterm_s: float
    wallclock_instantaneous_s: float
    longterm_tx: TxConfig


def compare_schemes(
    csi: LongTermCsi,
    dataset: OfflineDataset,
    sigma2: float,
    longterm: Union[TxConfig, LongTermSolver],
    ls_cfg: LocalSearchConfig,
    ov: OverheadParams,
    *,
    seed: int,
    solver: InstantaneousSolver = instantaneous_solve,
) -> SchemeComparison:
    """
    MAUR of the long-term scheme (one configuration for all CCTIs, no pilot
    penalty) against the instantaneous scheme (one solve per CCTI, pilot penalty).
    CCTI t draws from the substream (seed, t).
    """
    if len(dataset) == 0:
        raise ValueError("Cannot compare schemes on an empty dataset")
    validate_local_search(ls_cfg)
    M, N, K = dataset.dims
    if (ov.K, ov.N) != (K, N):
        raise ValueError(f"Overhead parameters (K={ov.K}, N={ov.N}) do not match the dataset")
    if (csi.M, csi.N, csi.K) != (M, N, K):
        raise ValueError("Long-term CSI and dataset dimensions differ")

    longterm_calls = 1 if callable(longterm) else 0
    started = time.perf_counter()
    tx = longterm() if longterm_calls else longterm
    wallclock_longterm = time.perf_counter() - started
    maur_longterm = maur(dataset_rates(dataset, tx, sigma2))

    def solve_ccti(index: int) -> np.ndarray:
        real = dataset[index]
        rng = np.random.default_rng([seed, real.t])
        solution = solver(real, sigma2, tx.power, ls_cfg, rng)
        return rate(sinr_from_effective(effective_channel(real, solution.phase_angles), solution.W, sigma2))

    started = time.perf_counter()
    if ls_cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=ls_cfg.workers) as executor:
            per_ccti = list(executor.map(solve_ccti, range(len(dataset))))
    else:
        per_ccti = [solve_ccti(index) for index in range(len(dataset))]
    wallclock_instantaneous = time.perf_counter() - started

    factor = pilot_overhead_factor(ov)
    if factor == 0.0:
        log.warning(
            "Pilot overhead %s slots fills tau_c=%s; instantaneous rates clamp to zero",
            ov.pilot_slots,
            ov.tau_c,
        )
    unpenalized = maur(np.vstack(per_ccti))
    comparison = SchemeComparison(
        maur_longterm=maur_longterm,
        maur_instantaneous=maur(factor * np.vstack(per_ccti)),
        maur_instantaneous_unpenalized=unpenalized,
        pilot_factor=factor,
        solver_calls_longterm=longterm_calls,
        solver_calls_instantaneous=len(per_ccti),
        wallclock_longterm_s=wallclock_longterm,
        wallclock_instantaneous_s=wallclock_instantaneous,
        longterm_tx=tx,
    )
    log.info(
        "N=%s: long-term MAUR %.4f, instantaneous MAUR %.4f (factor %.3f)",
        N,
        comparison.maur_longterm,
        comparison.maur_instantaneous,
        factor,
    )
    return comparison
