"""
State and action vectors of the precoding/phase-shift agent.

State layout (each complex block written as all real parts, then all imaginary parts):
    W (M x K, row-major) | phi (N) | G (N x M, row-major) | g (K x N) | h (K x M)
Length 2MK + 2N + 2(NM + NK + MK). The channel blocks may be multiplied by powers
of two (see `StateScale`) so that they are O(1); powers of two keep decoding exact.

Action layout, entries in [-1, 1]:
    Re W (M x K, row-major) | Im W (M x K, row-major) | phase increments (N)
Length 2MK + N.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..channel import ChannelRealization, LongTermCsi
from ..config import DEGENERATE_PRECODER_NORM
from ..rates import TxConfig

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


def action_dim(M: int, N: int, K: int) -> int:
    return 2 * M * K + N


def state_dim(M: int, N: int, K: int) -> int:
    return 2 * M * K + 2 * N + 2 * (N * M + N * K + M * K)


@dataclass(frozen=True)
class StateScale:
    """
    Base-2 exponents applied to the channel blocks of the state: G is multiplied
    by 2**G_exp, row k of g by 2**g_exp[k] and row k of h by 2**h_exp[k].
    """

    G_exp: int
    g_exp: np.ndarray  # (K,) int
    h_exp: np.ndarray  # (K,) int

    @classmethod
    def identity(cls, K: int) -> "StateScale":
        return cls(G_exp=0, g_exp=np.zeros(K, dtype=int), h_exp=np.zeros(K, dtype=int))

    @classmethod
    def from_csi(cls, csi: LongTermCsi) -> "StateScale":
        """
        Exponents that bring each block's large-scale amplitude to within a factor
        sqrt(2) of one. A zero gain leaves its block unscaled.
        """
        return cls(
            G_exp=int(_inverse_exponent(np.array([csi.kappa]))[0]),
            g_exp=_inverse_exponent(csi.beta),
            h_exp=_inverse_exponent(csi.gamma),
        )


def _inverse_exponent(gains: np.ndarray) -> np.ndarray:
    gains = np.asarray(gains, dtype=float)
    exps = np.zeros(gains.shape, dtype=int)
    positive = gains > 0
    exps[positive] = -np.round(0.5 * np.log2(gains[positive])).astype(int)
    return exps


def _split(values: np.ndarray) -> np.ndarray:
    flat = np.asarray(values).ravel()
    return np.concatenate([flat.real, flat.imag])


def _rescale(block: np.ndarray, exps: np.ndarray | int) -> np.ndarray:
    # Exact power-of-two scaling; decode_state undoes it bit for bit.
    exps = np.asarray(exps)
    if exps.ndim:
        exps = exps[:, None]
    return np.ldexp(block.real, exps) + 1j * np.ldexp(block.imag, exps)


def encode_state(tx: TxConfig, real: ChannelRealization, scale: StateScale | None = None) -> np.ndarray:
    M, N, K = real.dims
    if tx.W.shape != (M, K) or tx.phase_angles.shape != (N,):
        raise ValueError(f"Configuration does not match channel dimensions M={M}, N={N}, K={K}")
    G, g, h = real.G, real.g, real.h
    if scale is not None:
        if scale.g_exp.shape != (K,) or scale.h_exp.shape != (K,):
            raise ValueError(f"State scale does not cover K={K} users")
        G, g, h = _rescale(G, scale.G_exp), _rescale(g, scale.g_exp), _rescale(h, scale.h_exp)
    return np.concatenate(
        [_split(tx.W), _split(tx.phases), _split(G), _split(g), _split(h)]
    ).astype(np.float64)


def decode_state(
    state: np.ndarray, M: int, N: int, K: int, scale: StateScale | None = None
) -> tuple[np.ndarray, np.ndarray, ChannelRealization]:
    """
    Inverse of `encode_state` under the same `scale`: returns (W, phi, realization).
    """
    state = np.asarray(state, dtype=np.float64)
    if state.shape != (state_dim(M, N, K),):
        raise ValueError(f"State has shape {state.shape}, expected ({state_dim(M, N, K)},)")
    blocks = []
    cursor = 0
    for shape in ((M, K), (N,), (N, M), (K, N), (K, M)):
        size = int(np.prod(shape))
        real = state[cursor : cursor + size]
        imag = state[cursor + size : cursor + 2 * size]
        blocks.append((real + 1j * imag).reshape(shape))
        cursor += 2 * size
    W, phi, G, g, h = blocks
    if scale is not None:
        G, g, h = _rescale(G, -scale.G_exp), _rescale(g, -scale.g_exp), _rescale(h, -scale.h_exp)
    return W, phi, ChannelRealization(G=G, g=g, h=h)


def channel_slice(M: int, N: int, K: int) -> slice:
    return slice(2 * M * K + 2 * N, state_dim(M, N, K))


def wrap_phase(angles: np.ndarray) -> np.ndarray:
    """
    Wrap into [0, 2 pi); np.mod can round up to exactly 2 pi for tiny negatives.
    """
    wrapped = np.mod(angles, TWO_PI)
    return np.where(wrapped >= TWO_PI, wrapped - TWO_PI, wrapped)


def normalize_precoder(raw: np.ndarray, power: float) -> np.ndarray:
    return np.sqrt(power) * raw / np.linalg.norm(raw)


def apply_action(tx: TxConfig, action: np.ndarray) -> TxConfig:
    """
    Build the next configuration: the precoder is taken from the action and
    scaled to full power; each phase angle moves by pi times its increment.
    """
    M, K = tx.W.shape
    N = tx.phase_angles.shape[0]
    action = np.asarray(action, dtype=np.float64)
    if action.shape != (action_dim(M, N, K),):
        raise ValueError(f"Action has shape {action.shape}, expected ({action_dim(M, N, K)},)")
    if np.any(np.abs(action) > 1.0):
        raise ValueError("Action entries must lie in [-1, 1]")
    MK = M * K
    raw = (action[:MK] + 1j * action[MK : 2 * MK]).reshape(M, K)
    if np.linalg.norm(raw) < DEGENERATE_PRECODER_NORM:
        log.warning("Degenerate precoder in action; keeping the previous precoder")
        W = tx.W.copy()
    else:
        W = normalize_precoder(raw, tx.power)
    angles = wrap_phase(tx.phase_angles + action[2 * MK :] * np.pi)
    return TxConfig(W=W, phase_angles=angles, power=tx.power)


def reset_tx(M: int, N: int, K: int, power: float, rng: np.random.Generator) -> TxConfig:
    """
    Episode start: uniform random phases and the equal-entry precoder at full power.
    """
    W = np.full((M, K), np.sqrt(power / (M * K)), dtype=complex)
    return TxConfig(W=W, phase_angles=rng.uniform(0.0, TWO_PI, N), power=power)
