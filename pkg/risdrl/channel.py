"""
Rician channel model for the BS -> RIS -> user downlink.

Convention: ``g[k]`` is the RIS -> user k channel (length N) and ``h[k]`` is the
direct BS -> user k channel (length M). The effective channel of user k is
``g[k]^T diag(phi) G + h[k]^T`` with ``G`` the N x M BS -> RIS matrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

log = logging.getLogger(__name__)

DATASET_HEADER_DTYPE = np.dtype("<u8")
DATASET_BODY_DTYPE = np.dtype("<f8")


@dataclass(frozen=True)
class ScenarioGeometry:
    bs_position: np.ndarray
    ris_position: np.ndarray
    user_positions: np.ndarray  # (K, 3)
    user_disk_center: np.ndarray
    user_disk_radius: float

    @classmethod
    def generate(
        cls,
        bs_position: Sequence[float],
        ris_position: Sequence[float],
        disk_center: Sequence[float],
        disk_radius: float,
        num_users: int,
        rng: np.random.Generator,
    ) -> "ScenarioGeometry":
        """
        Drop `num_users` users uniformly on the horizontal disk around `disk_center`.
        """
        if num_users < 1:
            raise ValueError(f"Need at least one user, got {num_users}")
        if disk_radius < 0:
            raise ValueError(f"Disk radius must be nonnegative, got {disk_radius}")
        center = np.asarray(disk_center, dtype=float)
        radii = disk_radius * np.sqrt(rng.uniform(0.0, 1.0, num_users))
        angles = rng.uniform(0.0, 2.0 * np.pi, num_users)
        users = np.tile(center, (num_users, 1))
        users[:, 0] += radii * np.cos(angles)
        users[:, 1] += radii * np.sin(angles)
        geometry = cls(
            bs_position=np.asarray(bs_position, dtype=float),
            ris_position=np.asarray(ris_position, dtype=float),
            user_positions=users,
            user_disk_center=center,
            user_disk_radius=float(disk_radius),
        )
        geometry.check()
        return geometry

    @property
    def num_users(self) -> int:
        return int(self.user_positions.shape[0])

    def check(self) -> None:
        distances = link_distances(self)
        values = np.concatenate([[distances.bs_ris], distances.ris_user, distances.bs_user])
        if np.any(values <= 0):
            raise ValueError("All BS/RIS/user distances must be strictly positive")


@dataclass(frozen=True)
class LinkDistances:
    bs_ris: float
    ris_user: np.ndarray
    bs_user: np.ndarray


def link_distances(geometry: ScenarioGeometry) -> LinkDistances:
    users = geometry.user_positions
    return LinkDistances(
        bs_ris=float(np.linalg.norm(geometry.ris_position - geometry.bs_position)),
        ris_user=np.linalg.norm(users - geometry.ris_position, axis=1),
        bs_user=np.linalg.norm(users - geometry.bs_position, axis=1),
    )


@dataclass(frozen=True)
class PathLossParams:
    pl0_db: float = -30.0
    d0: float = 1.0
    alpha_bs_ris: float = 2.2
    alpha_ris_user: float = 2.2
    alpha_bs_user: float = 3.5
    noise_density_dbm_hz: float = -174.0
    bandwidth_hz: float = 1e6

    def __post_init__(self):
        if self.d0 <= 0:
            raise ValueError(f"Reference distance must be positive, got {self.d0}")
        for name in ("alpha_bs_ris", "alpha_ris_user", "alpha_bs_user"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.bandwidth_hz <= 0:
            raise ValueError(f"Bandwidth must be positive, got {self.bandwidth_hz}")


def path_loss_linear(params: PathLossParams, d: float | np.ndarray, alpha: float) -> float | np.ndarray:
    """
    Large-scale power gain PL0 - 10 alpha log10(d / d0), converted from dB.
    """
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0):
        raise ValueError(f"Distance must be positive, got {d}")
    gain_db = params.pl0_db - 10.0 * alpha * np.log10(d_arr / params.d0)
    gain = 10.0 ** (gain_db / 10.0)
    return float(gain) if gain.ndim == 0 else gain


def noise_power(params: PathLossParams) -> float:
    """
    Receiver noise power in watts over the configured bandwidth.
    """
    dbm = params.noise_density_dbm_hz + 10.0 * math.log10(params.bandwidth_hz)
    return 10.0 ** ((dbm - 30.0) / 10.0)


def steering_vector(x: int, theta: float) -> np.ndarray:
    if x < 1:
        raise ValueError(f"Array size must be >= 1, got {x}")
    return np.exp(1j * theta * np.arange(x))


@dataclass(frozen=True)
class RicianFactors:
    bs_ris: float = 2.2  # delta
    ris_user: float = 3.75  # epsilon_k
    bs_user: float = 2.2  # eta_k


@dataclass(frozen=True)
class LongTermCsi:
    M: int
    N: int
    K: int
    I: int
    kappa: float
    beta: np.ndarray  # (K,) RIS -> user gains
    gamma: np.ndarray  # (K,) BS -> user gains
    delta: float
    epsilon: np.ndarray  # (K,)
    eta: np.ndarray  # (K,)
    aoa_bs_ris: np.ndarray  # (I,)
    aod_bs_ris: np.ndarray  # (I,)
    aod_ris_user: np.ndarray  # (K,)
    aod_bs_user: np.ndarray  # (K,)
    G_bar: np.ndarray = field(repr=False)  # (N, M)
    g_bar: np.ndarray = field(repr=False)  # (K, N)
    h_bar: np.ndarray = field(repr=False)  # (K, M)

    @classmethod
    def from_angles(
        cls,
        *,
        M: int,
        N: int,
        kappa: float,
        beta: Sequence[float],
        gamma: Sequence[float],
        delta: float,
        epsilon: Sequence[float],
        eta: Sequence[float],
        aoa_bs_ris: Sequence[float],
        aod_bs_ris: Sequence[float],
        aod_ris_user: Sequence[float],
        aod_bs_user: Sequence[float],
    ) -> "LongTermCsi":
        aoa = np.asarray(aoa_bs_ris, dtype=float)
        aod = np.asarray(aod_bs_ris, dtype=float)
        theta = np.asarray(aod_ris_user, dtype=float)
        psi = np.asarray(aod_bs_user, dtype=float)
        if M < 1 or N < 1:
            raise ValueError(f"Array sizes must be positive, got M={M}, N={N}")
        if aoa.shape != aod.shape or aoa.size < 1:
            raise ValueError("BS-RIS AoA and AoD lists must be nonempty and of equal length")
        if theta.shape != psi.shape or theta.size < 1:
            raise ValueError("Per-user angle lists must be nonempty and of equal length")
        K = theta.size
        beta_arr = _per_user(beta, K, "beta")
        gamma_arr = _per_user(gamma, K, "gamma")
        epsilon_arr = _per_user(epsilon, K, "epsilon")
        eta_arr = _per_user(eta, K, "eta")
        for name, value in (
            ("kappa", kappa),
            ("delta", delta),
            ("beta", beta_arr),
            ("gamma", gamma_arr),
            ("epsilon", epsilon_arr),
            ("eta", eta_arr),
        ):
            if np.any(np.asarray(value) < 0):
                raise ValueError(f"{name} must be nonnegative")
        G_bar, g_bar, h_bar = _los_from_angles(M, N, aoa, aod, theta, psi)
        return cls(
            M=M,
            N=N,
            K=K,
            I=aoa.size,
            kappa=float(kappa),
            beta=beta_arr,
            gamma=gamma_arr,
            delta=float(delta),
            epsilon=epsilon_arr,
            eta=eta_arr,
            aoa_bs_ris=aoa,
            aod_bs_ris=aod,
            aod_ris_user=theta,
            aod_bs_user=psi,
            G_bar=G_bar,
            g_bar=g_bar,
            h_bar=h_bar,
        )


def _per_user(values: Sequence[float] | float, K: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return np.full(K, float(arr))
    if arr.shape != (K,):
        raise ValueError(f"{name} must have one entry per user ({K}), got shape {arr.shape}")
    return arr


def _los_from_angles(M, N, aoa, aod, theta, psi):
    G_bar = np.zeros((N, M), dtype=complex)
    for phi_a, phi_d in zip(aoa, aod):
        G_bar += np.outer(steering_vector(N, phi_a), steering_vector(M, phi_d))
    g_bar = np.stack([steering_vector(N, t) for t in theta])
    h_bar = np.stack([steering_vector(M, p) for p in psi])
    return G_bar, g_bar, h_bar


def los_components(csi: LongTermCsi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Rebuild (G_bar, g_bar, h_bar) from the stored angles.
    """
    return _los_from_angles(csi.M, csi.N, csi.aoa_bs_ris, csi.aod_bs_ris, csi.aod_ris_user, csi.aod_bs_user)


def make_long_term_csi(
    geometry: ScenarioGeometry,
    path_loss: PathLossParams,
    *,
    M: int,
    N: int,
    num_paths: int,
    rician: RicianFactors,
    rng: np.random.Generator,
) -> LongTermCsi:
    """
    Freeze the long-term CSI of a scenario: large-scale gains from geometry, angles i.i.d. uniform.

    Angles are composite electrical angles and are not derived from positions.
    """
    if num_paths < 1:
        raise ValueError(f"Need at least one BS-RIS path, got {num_paths}")
    K = geometry.num_users
    distances = link_distances(geometry)
    two_pi = 2.0 * np.pi
    return LongTermCsi.from_angles(
        M=M,
        N=N,
        kappa=path_loss_linear(path_loss, distances.bs_ris, path_loss.alpha_bs_ris),
        beta=path_loss_linear(path_loss, distances.ris_user, path_loss.alpha_ris_user),
        gamma=path_loss_linear(path_loss, distances.bs_user, path_loss.alpha_bs_user),
        delta=rician.bs_ris,
        epsilon=rician.ris_user,
        eta=rician.bs_user,
        aoa_bs_ris=rng.uniform(0.0, two_pi, num_paths),
        aod_bs_ris=rng.uniform(0.0, two_pi, num_paths),
        aod_ris_user=rng.uniform(0.0, two_pi, K),
        aod_bs_user=rng.uniform(0.0, two_pi, K),
    )


@dataclass(frozen=True)
class ChannelRealization:
    G: np.ndarray  # (N, M)
    g: np.ndarray  # (K, N)
    h: np.ndarray  # (K, M)
    t: int = 0

    @property
    def dims(self) -> tuple[int, int, int]:
        N, M = self.G.shape
        return M, N, self.g.shape[0]


def complex_gaussian(shape, rng: np.random.Generator) -> np.ndarray:
    """
    Circularly symmetric CN(0, 1) samples: each real component has variance 1/2.
    """
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _rician_weights(factor: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    factor = np.asarray(factor, dtype=float)
    # An infinite factor is the LoS-only limit.
    with np.errstate(invalid="ignore"):
        los = np.where(np.isinf(factor), 1.0, np.sqrt(factor / (factor + 1.0)))
        nlos = np.where(np.isinf(factor), 0.0, np.sqrt(1.0 / (factor + 1.0)))
    return los, nlos


def sample_batch(csi: LongTermCsi, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Draw `n` realizations as stacked arrays G (n, N, M), g (n, K, N), h (n, K, M).
    """
    if n < 1:
        raise ValueError(f"Need at least one draw, got {n}")
    los_G, nlos_G = _rician_weights(csi.delta)
    los_g, nlos_g = _rician_weights(csi.epsilon)
    los_h, nlos_h = _rician_weights(csi.eta)
    G = np.sqrt(csi.kappa) * (los_G * csi.G_bar + nlos_G * complex_gaussian((n, csi.N, csi.M), rng))
    g = np.sqrt(csi.beta)[:, None] * (
        los_g[:, None] * csi.g_bar + nlos_g[:, None] * complex_gaussian((n, csi.K, csi.N), rng)
    )
    h = np.sqrt(csi.gamma)[:, None] * (
        los_h[:, None] * csi.h_bar + nlos_h[:, None] * complex_gaussian((n, csi.K, csi.M), rng)
    )
    return G, g, h


def sample_realization(csi: LongTermCsi, rng: np.random.Generator, t: int = 0) -> ChannelRealization:
    G, g, h = sample_batch(csi, 1, rng)
    return ChannelRealization(G=G[0], g=g[0], h=h[0], t=t)


@dataclass(frozen=True)
class OfflineDataset:
    """
    T realizations stored as stacked arrays; indexing yields `ChannelRealization` with t = 1..T.
    """

    G: np.ndarray  # (T, N, M)
    g: np.ndarray  # (T, K, N)
    h: np.ndarray  # (T, K, M)

    def __post_init__(self):
        T, N, M = self.G.shape
        if self.g.ndim != 3 or self.g.shape[0] != T or self.g.shape[2] != N:
            raise ValueError(f"RIS-user channels have shape {self.g.shape}, expected ({T}, K, {N})")
        if self.h.shape != (T, self.g.shape[1], M):
            raise ValueError(f"BS-user channels have shape {self.h.shape}, expected ({T}, K, {M})")

    def __len__(self) -> int:
        return int(self.G.shape[0])

    def __getitem__(self, index: int) -> ChannelRealization:
        return ChannelRealization(G=self.G[index], g=self.g[index], h=self.h[index], t=index % len(self) + 1)

    def __iter__(self) -> Iterator[ChannelRealization]:
        for index in range(len(self)):
            yield self[index]

    @property
    def dims(self) -> tuple[int, int, int]:
        _, N, M = self.G.shape
        return M, N, self.g.shape[1]

    @classmethod
    def from_realizations(cls, realizations: Sequence[ChannelRealization]) -> "OfflineDataset":
        if not realizations:
            raise ValueError("Cannot build a dataset from zero realizations")
        return cls(
            G=np.stack([r.G for r in realizations]),
            g=np.stack([r.g for r in realizations]),
            h=np.stack([r.h for r in realizations]),
        )


def generate_offline_dataset(csi: LongTermCsi, T: int, seed: int) -> OfflineDataset:
    """
    Generate T independent realizations; realization t draws from substream (seed, t).
    """
    if T < 1:
        raise ValueError(f"Dataset needs at least one CCTI, got T={T}")
    realizations = [
        sample_realization(csi, np.random.default_rng([seed, t]), t=t) for t in range(1, T + 1)
    ]
    log.debug("Generated offline dataset with %s realizations (M=%s, N=%s, K=%s)", T, csi.M, csi.N, csi.K)
    return OfflineDataset.from_realizations(realizations)


def save_dataset(path: Path, dataset: OfflineDataset) -> None:
    """
    Write the flat binary layout: header M, N, K, T as <u8, then per t the
    interleaved real/imag <f8 values of G (row-major), g[1..K], h[1..K].
    """
    M, N, K = dataset.dims
    T = len(dataset)
    body = np.concatenate(
        [dataset.G.reshape(T, -1), dataset.g.reshape(T, -1), dataset.h.reshape(T, -1)], axis=1
    )
    interleaved = np.ascontiguousarray(body.astype(np.complex128)).view(np.float64)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        handle.write(np.array([M, N, K, T], dtype=DATASET_HEADER_DTYPE).tobytes())
        handle.write(interleaved.astype(DATASET_BODY_DTYPE).tobytes())


def load_dataset(path: Path) -> OfflineDataset:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    raw = path.read_bytes()
    header_size = 4 * DATASET_HEADER_DTYPE.itemsize
    if len(raw) < header_size:
        raise ValueError(f"Dataset file {path} is too short for its header")
    M, N, K, T = (int(v) for v in np.frombuffer(raw[:header_size], dtype=DATASET_HEADER_DTYPE))
    per_t = N * M + K * N + K * M
    values = np.frombuffer(raw[header_size:], dtype=DATASET_BODY_DTYPE)
    if values.size != 2 * per_t * T:
        raise ValueError(f"Dataset file {path} holds {values.size} floats, expected {2 * per_t * T}")
    body = values.astype(np.float64).view(np.complex128).reshape(T, per_t)
    G = body[:, : N * M].reshape(T, N, M)
    g = body[:, N * M : N * M + K * N].reshape(T, K, N)
    h = body[:, N * M + K * N :].reshape(T, K, M)
    return OfflineDataset(G=G.copy(), g=g.copy(), h=h.copy())
