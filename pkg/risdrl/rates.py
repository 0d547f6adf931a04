"""
Effective channels, SINR, rates and pilot-overhead accounting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, LongTermCsi, OfflineDataset, sample_batch
from .config import MC_CHUNK_SIZE, MODULUS_TOLERANCE, POWER_TOLERANCE

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TxConfig:
    W: np.ndarray  # (M, K) precoder, column k serves user k
    phase_angles: np.ndarray  # (N,) radians in [0, 2 pi)
    power: float  # P_t, watts

    @property
    def phases(self) -> np.ndarray:
        return np.cos(self.phase_angles) + 1j * np.sin(self.phase_angles)

    @property
    def transmit_power(self) -> float:
        return float(np.real(np.trace(self.W @ self.W.conj().T)))

    def satisfies_power(self, *, equality: bool = False) -> bool:
        used = self.transmit_power
        if equality:
            return abs(used - self.power) <= POWER_TOLERANCE * max(self.power, 1.0)
        return used <= self.power + POWER_TOLERANCE

    def satisfies_modulus(self) -> bool:
        return bool(np.all(np.abs(np.abs(self.phases) - 1.0) <= MODULUS_TOLERANCE))


@dataclass(frozen=True)
class OverheadParams:
    tau_c: int
    K: int
    N: int

    def __post_init__(self):
        if self.tau_c < 1:
            raise ValueError(f"tau_c must be >= 1, got {self.tau_c}")

    @property
    def pilot_slots(self) -> int:
        return 2 * self.K + self.N - 1


@dataclass(frozen=True)
class RateReport:
    per_user_sinr: np.ndarray
    per_user_rate: np.ndarray

    @property
    def min_rate(self) -> float:
        return min_rate(self)


def _check_dims(real: ChannelRealization, phase_angles: np.ndarray, W: np.ndarray | None = None):
    M, N, K = real.dims
    if real.h.shape != (K, M):
        raise ValueError(f"BS-user channels have shape {real.h.shape}, expected ({K}, {M})")
    if np.shape(phase_angles) != (N,):
        raise ValueError(f"Expected {N} phase angles, got shape {np.shape(phase_angles)}")
    if W is not None and W.shape != (M, K):
        raise ValueError(f"Precoder has shape {W.shape}, expected ({M}, {K})")


def _effective(G: np.ndarray, g: np.ndarray, h: np.ndarray, phases: np.ndarray) -> np.ndarray:
    return np.einsum("...kn,...nm->...km", g * phases, G) + h


def _sinr(V: np.ndarray, W: np.ndarray, sigma2: float) -> np.ndarray:
    if sigma2 <= 0:
        raise ValueError(f"Noise power must be positive, got {sigma2}")
    power = np.abs(V @ W) ** 2  # [..., k, j] = |v_k^T w_j|^2
    K = power.shape[-1]
    signal = np.diagonal(power, axis1=-2, axis2=-1)
    interference = np.sum(power * (1.0 - np.eye(K)), axis=-1)
    return signal / (interference + sigma2)


def sinr_from_effective(V: np.ndarray, W: np.ndarray, sigma2: float) -> np.ndarray:
    """
    SINR of every user given effective channels `V` (..., K, M) and precoder `W` (M, K).
    """
    return _sinr(V, W, sigma2)


def effective_channel(real: ChannelRealization, phase_angles: np.ndarray) -> np.ndarray:
    """
    Rows are v_k^T = g_k^T diag(phi) G + h_k^T, shape (K, M).
    """
    phase_angles = np.asarray(phase_angles, dtype=float)
    _check_dims(real, phase_angles)
    phases = np.cos(phase_angles) + 1j * np.sin(phase_angles)
    return _effective(real.G, real.g, real.h, phases)


def sinr(real: ChannelRealization, tx: TxConfig, sigma2: float) -> np.ndarray:
    _check_dims(real, tx.phase_angles, tx.W)
    return _sinr(effective_channel(real, tx.phase_angles), tx.W, sigma2)


def rate(sinr_k: float | np.ndarray) -> float | np.ndarray:
    values = np.asarray(sinr_k, dtype=float)
    if np.any(values < 0):
        raise ValueError(f"SINR must be nonnegative, got {sinr_k}")
    rates = np.log2(1.0 + values)
    return float(rates) if rates.ndim == 0 else rates


def rate_report(real: ChannelRealization, tx: TxConfig, sigma2: float) -> RateReport:
    values = sinr(real, tx, sigma2)
    return RateReport(per_user_sinr=values, per_user_rate=rate(values))


def min_rate(report: RateReport) -> float:
    if np.size(report.per_user_rate) == 0:
        raise ValueError("Cannot take the minimum rate over an empty user set")
    return float(np.min(report.per_user_rate))


def pilot_overhead_factor(ov: OverheadParams) -> float:
    """
    Pre-log factor 1 - (2K + N - 1) / tau_c, clamped at zero.
    """
    return max(0.0, 1.0 - ov.pilot_slots / ov.tau_c)


def net_rate_instantaneous(
    real: ChannelRealization, tx_t: TxConfig, sigma2: float, ov: OverheadParams
) -> np.ndarray:
    return pilot_overhead_factor(ov) * rate(sinr(real, tx_t, sigma2))


def net_rate_longterm(real: ChannelRealization, tx: TxConfig, sigma2: float) -> np.ndarray:
    return rate(sinr(real, tx, sigma2))


def dataset_rates(dataset: OfflineDataset, tx: TxConfig, sigma2: float) -> np.ndarray:
    """
    Per-CCTI rates of a fixed configuration, shape (T, K).
    """
    M, N, K = dataset.dims
    if tx.W.shape != (M, K) or tx.phase_angles.shape != (N,):
        raise ValueError(f"Configuration does not match dataset dimensions M={M}, N={N}, K={K}")
    V = _effective(dataset.G, dataset.g, dataset.h, tx.phases)
    return rate(_sinr(V, tx.W, sigma2))


def maur(rates: np.ndarray) -> float:
    """
    Minimum over users of the time-averaged rate; `rates` has shape (T, K).
    """
    rates = np.asarray(rates, dtype=float)
    if rates.ndim != 2 or rates.shape[0] == 0 or rates.shape[1] == 0:
        raise ValueError(f"Expected a nonempty (T, K) rate history, got shape {rates.shape}")
    return float(np.min(rates.mean(axis=0)))


def rates_on_draws(
    draws: tuple[np.ndarray, np.ndarray, np.ndarray], tx: TxConfig, sigma2: float
) -> np.ndarray:
    """
    Rates of one configuration on stacked draws (G, g, h) from `sample_batch`, shape (n, K).
    """
    G, g, h = draws
    return rate(_sinr(_effective(G, g, h, tx.phases), tx.W, sigma2))


@dataclass(frozen=True)
class ErgodicEstimate:
    mean: np.ndarray  # per-user
    std_error: np.ndarray
    n_mc: int

    @property
    def min_rate(self) -> float:
        return float(np.min(self.mean))


def ergodic_rates(
    csi: LongTermCsi, tx: TxConfig, sigma2: float, n_mc: int, rng: np.random.Generator
) -> ErgodicEstimate:
    """
    Monte-Carlo estimate of E[R_k] over fresh NLoS draws.
    """
    if n_mc < 1:
        raise ValueError(f"n_mc must be >= 1, got {n_mc}")
    total = np.zeros(csi.K)
    total_sq = np.zeros(csi.K)
    remaining = n_mc
    while remaining > 0:
        chunk = min(remaining, MC_CHUNK_SIZE)
        rates = rates_on_draws(sample_batch(csi, chunk, rng), tx, sigma2)
        total += rates.sum(axis=0)
        total_sq += (rates**2).sum(axis=0)
        remaining -= chunk
    mean = total / n_mc
    if n_mc > 1:
        variance = np.maximum(total_sq / n_mc - mean**2, 0.0) * n_mc / (n_mc - 1)
        std_error = np.sqrt(variance / n_mc)
    else:
        std_error = np.full(csi.K, np.inf)
    return ErgodicEstimate(mean=mean, std_error=std_error, n_mc=n_mc)


def ergodic_min_rate(
    csi: LongTermCsi, tx: TxConfig, sigma2: float, n_mc: int, rng: np.random.Generator
) -> float:
    """
    min_k of the per-user Monte-Carlo means (minimum taken after averaging).
    """
    return ergodic_rates(csi, tx, sigma2, n_mc, rng).min_rate
