"""
DDPG learner for a single long-term precoder and RIS configuration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

import numpy as np

from ..channel import ChannelRealization, LongTermCsi, OfflineDataset, sample_batch
from ..models import AgentConfig
from ..neural import (
    AdamState,
    Mlp,
    TrainingDiverged,
    backward,
    forward,
    gradient_norm,
    optimizer_step,
    soft_update,
)
from ..rates import ErgodicEstimate, TxConfig, maur, rate, rates_on_draws, sinr
from .encoding import StateScale, action_dim, apply_action, encode_state, reset_tx, state_dim
from .replay import Batch, Experience, ReplayBuffer

log = logging.getLogger(__name__)


class ActionValue(Protocol):
    def action_gradient(self, states: np.ndarray, actions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Return Q(s, a) with shape (V,) and dQ/da with shape (V, action_dim).
        """


class MlpActionValue:
    """
    Critic network viewed through its action inputs.
    """

    def __init__(self, net: Mlp):
        self.net = net

    def action_gradient(self, states: np.ndarray, actions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        q, cache = forward(self.net, np.concatenate([states, actions], axis=1))
        _, input_grad = backward(self.net, cache, np.ones_like(q))
        return q[:, 0], input_grad[:, states.shape[1] :]


def reward(real: ChannelRealization, tx: TxConfig, sigma2: float) -> float:
    return float(np.min(rate(sinr(real, tx, sigma2))))


def select_action(
    actor: Mlp, state: np.ndarray, noise_scale: float, rng: np.random.Generator
) -> np.ndarray:
    action, _ = forward(actor, state)
    if noise_scale > 0:
        action = action + rng.normal(0.0, noise_scale, action.shape)
    return np.clip(action, -1.0, 1.0)


def critic_update(
    critic: Mlp,
    critic_target: Mlp,
    actor_target: Mlp,
    batch: Batch,
    gamma: float,
    opt: AdamState,
) -> float:
    """
    One step on L = mean((r + gamma Q'(s', pi'(s')) - Q(s, a))^2); returns the pre-step loss.
    """
    next_actions, _ = forward(actor_target, batch.next_states)
    next_q, _ = forward(critic_target, np.concatenate([batch.next_states, next_actions], axis=1))
    targets = batch.rewards + gamma * next_q[:, 0]
    q, cache = forward(critic, np.concatenate([batch.states, batch.actions], axis=1))
    error = q[:, 0] - targets
    loss = float(np.mean(error**2))
    if not np.isfinite(loss):
        message = f"Non-finite critic loss at update {opt.step + 1}"
        log.error(message)
        raise TrainingDiverged(message)
    grads, _ = backward(critic, cache, (2.0 / len(batch) * error)[:, None])
    optimizer_step(critic, grads, opt)
    return loss


def policy_gradient(
    actor: Mlp, critic: ActionValue | Mlp, states: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """
    J = mean_i Q(s_i, pi(s_i)) and its gradient with respect to the actor parameters.
    """
    value = MlpActionValue(critic) if isinstance(critic, Mlp) else critic
    actions, cache = forward(actor, states)
    q, dq_da = value.action_gradient(states, actions)
    grads, _ = backward(actor, cache, dq_da / states.shape[0])
    return float(np.mean(q)), grads


def actor_update(actor: Mlp, critic: ActionValue | Mlp, states: np.ndarray, opt: AdamState) -> float:
    """
    One ascent step on mean Q(s, pi(s)); returns the policy-gradient norm.
    """
    _, grads = policy_gradient(actor, critic, states)
    optimizer_step(actor, [-g for g in grads], opt)
    return gradient_norm(grads)


def evaluation_reward(history: np.ndarray) -> float:
    """
    min over users of each user's rate averaged over steps 1..t; `history` is (t, K).
    """
    return maur(history)


def running_evaluation_reward(history: np.ndarray) -> np.ndarray:
    history = np.asarray(history, dtype=float)
    if history.ndim != 2 or history.shape[0] == 0:
        raise ValueError(f"Expected a nonempty (t, K) rate history, got shape {history.shape}")
    steps = np.arange(1, history.shape[0] + 1)[:, None]
    return np.min(np.cumsum(history, axis=0) / steps, axis=1)


def smooth(series, w: float) -> np.ndarray:
    """
    Exponential moving average seeded with the first value.
    """
    if not 0.0 <= w < 1.0:
        raise ValueError(f"Smoothing weight must lie in [0, 1), got {w}")
    values = np.asarray(series, dtype=float)
    smoothed = np.empty_like(values)
    previous = values[0] if values.size else 0.0
    for index, value in enumerate(values):
        previous = w * previous + (1.0 - w) * value
        smoothed[index] = previous
    return smoothed


@dataclass(frozen=True)
class StepRecord:
    episode: int
    step: int
    reward: float
    evaluation_reward: float
    smoothed_reward: float
    critic_loss: float  # nan before learning starts
    noise_scale: float


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    evaluation_reward: float
    mean_reward: float


@dataclass
class TrainingResult:
    actor: Mlp
    critic: Mlp
    steps: list[StepRecord]
    episodes: list[EpisodeRecord]
    greedy_tx: Optional[TxConfig] = None
    greedy_estimate: Optional[ErgodicEstimate] = None
    updates: int = 0
    initial_actor: Optional[Mlp] = field(default=None, repr=False)
    actor_target: Optional[Mlp] = field(default=None, repr=False)
    critic_target: Optional[Mlp] = field(default=None, repr=False)


def validate_agent_config(cfg: AgentConfig) -> None:
    if not 0.0 <= cfg.gamma <= 1.0:
        raise ValueError(f"Discount must lie in [0, 1], got {cfg.gamma}")
    if cfg.replay_capacity < 1 or cfg.batch_size < 1:
        raise ValueError("Replay capacity and batch size must be positive")
    if cfg.batch_size > cfg.replay_capacity:
        raise ValueError(f"Batch size {cfg.batch_size} exceeds replay capacity {cfg.replay_capacity}")
    if not 0.0 < cfg.eta <= 1.0:
        raise ValueError(f"Soft-update rate must lie in (0, 1], got {cfg.eta}")
    if cfg.noise_scale < 0:
        raise ValueError(f"Noise scale must be nonnegative, got {cfg.noise_scale}")
    if not 0.0 < cfg.noise_decay <= 1.0:
        raise ValueError(f"Noise decay must lie in (0, 1], got {cfg.noise_decay}")
    if cfg.steps_per_episode < 0 or cfg.learning_start < 0:
        raise ValueError("steps_per_episode and learning_start must be nonnegative")
    if not cfg.hidden_layers or min(cfg.hidden_layers) < 1:
        raise ValueError(f"Hidden layers must be positive widths, got {cfg.hidden_layers}")
    if not 0.0 <= cfg.smoothing_weight < 1.0:
        raise ValueError(f"Smoothing weight must lie in [0, 1), got {cfg.smoothing_weight}")
    if cfg.greedy_n_mc < 1:
        raise ValueError(f"greedy_n_mc must be >= 1, got {cfg.greedy_n_mc}")


def build_networks(
    M: int, N: int, K: int, cfg: AgentConfig, rng: np.random.Generator
) -> tuple[Mlp, Mlp]:
    s_dim, a_dim = state_dim(M, N, K), action_dim(M, N, K)
    actor = Mlp.initialize(
        [s_dim, *cfg.hidden_layers, a_dim],
        rng,
        output_activation="tanh",
        final_scale=cfg.actor_final_scale,
        name="actor",
    )
    critic = Mlp.initialize([s_dim + a_dim, *cfg.hidden_layers, 1], rng, output_activation="identity", name="critic")
    return actor, critic


def extract_greedy_tx(
    actor: Mlp,
    csi: LongTermCsi,
    dataset: OfflineDataset,
    *,
    power: float,
    sigma2: float,
    n_mc: int,
    rng: np.random.Generator,
) -> tuple[TxConfig, ErgodicEstimate]:
    """
    Run the actor noise-free over one pass of the dataset and keep the configuration
    with the best ergodic min-rate. All candidates are scored on the same draws.
    """
    M, N, K = dataset.dims
    scale = StateScale.from_csi(csi)
    tx = reset_tx(M, N, K, power, rng)
    candidates = []
    for real in dataset:
        action = select_action(actor, encode_state(tx, real, scale), 0.0, rng)
        tx = apply_action(tx, action)
        candidates.append(tx)
    draws = sample_batch(csi, n_mc, rng)
    best_tx, best_rates, best_value = None, None, -np.inf
    for candidate in candidates:
        rates = rates_on_draws(draws, candidate, sigma2)
        value = float(np.min(rates.mean(axis=0)))
        if value > best_value:
            best_tx, best_rates, best_value = candidate, rates, value
    std_error = best_rates.std(axis=0, ddof=1) / np.sqrt(n_mc) if n_mc > 1 else np.full(K, np.inf)
    return best_tx, ErgodicEstimate(mean=best_rates.mean(axis=0), std_error=std_error, n_mc=n_mc)


StepCallback = Callable[[StepRecord, TxConfig], None]


def train(
    csi: LongTermCsi,
    dataset: OfflineDataset,
    cfg: AgentConfig,
    *,
    power: float,
    sigma2: float,
    episodes: int,
    seed: int,
    on_step: StepCallback | None = None,
    extract: bool = True,
) -> TrainingResult:
    """
    Train the actor/critic pair on the offline dataset and extract the deployed configuration.
    """
    validate_agent_config(cfg)
    if episodes < 1:
        raise ValueError(f"Need at least one episode, got {episodes}")
    if power <= 0:
        raise ValueError(f"Transmit power must be positive, got {power}")
    M, N, K = dataset.dims
    if (csi.M, csi.N, csi.K) != (M, N, K):
        raise ValueError("Long-term CSI and dataset dimensions differ")
    T = len(dataset)
    steps_per_episode = cfg.steps_per_episode or T
    total_steps = episodes * steps_per_episode

    init_seq, noise_seq, replay_seq, reset_seq, greedy_seq = np.random.SeedSequence(seed).spawn(5)
    noise_rng = np.random.default_rng(noise_seq)
    replay_rng = np.random.default_rng(replay_seq)
    reset_rng = np.random.default_rng(reset_seq)

    actor, critic = build_networks(M, N, K, cfg, np.random.default_rng(init_seq))
    initial_actor = actor.clone()
    actor_target = actor.clone(name="actor_target")
    critic_target = critic.clone(name="critic_target")
    actor_opt = AdamState.for_network(actor, cfg.actor_learning_rate)
    critic_opt = AdamState.for_network(critic, cfg.critic_learning_rate)
    critic_value = MlpActionValue(critic)
    scale = StateScale.from_csi(csi)

    # Eviction only starts after `replay_capacity` insertions, so a shorter run
    # needs no more rows than it has steps.
    capacity = min(cfg.replay_capacity, total_steps)
    if capacity < cfg.replay_capacity:
        log.warning("Replay buffer sized to %s rows for a %s-step run", capacity, total_steps)
    buffer = ReplayBuffer(max(capacity, cfg.batch_size), state_dim(M, N, K), action_dim(M, N, K))
    start_learning = max(cfg.learning_start, cfg.batch_size)

    noise_scale = cfg.noise_scale
    smoothed = None
    updates = 0
    steps: list[StepRecord] = []
    episode_records: list[EpisodeRecord] = []
    log.info(
        "Training DDPG: M=%s N=%s K=%s, %s episodes x %s steps, learning after %s experiences",
        M, N, K, episodes, steps_per_episode, start_learning,
    )
    for episode in range(1, episodes + 1):
        tx = reset_tx(M, N, K, power, reset_rng)
        rate_sums = np.zeros(K)
        episode_rewards = []
        for step in range(steps_per_episode):
            real = dataset[step % T]
            state = encode_state(tx, real, scale)
            action = select_action(actor, state, noise_scale, noise_rng)
            tx_next = apply_action(tx, action)
            user_rates = rate(sinr(real, tx_next, sigma2))
            step_reward = float(np.min(user_rates))
            next_state = encode_state(tx_next, dataset[(step + 1) % T], scale)
            buffer.add(Experience(s=state, a=action, r=step_reward, s_next=next_state))

            loss = float("nan")
            if len(buffer) >= start_learning:
                batch = buffer.sample(cfg.batch_size, replay_rng)
                loss = critic_update(critic, critic_target, actor_target, batch, cfg.gamma, critic_opt)
                actor_update(actor, critic_value, batch.states, actor_opt)
                soft_update(actor_target, actor, cfg.eta)
                soft_update(critic_target, critic, cfg.eta)
                updates += 1

            rate_sums += user_rates
            smoothed = step_reward if smoothed is None else (
                cfg.smoothing_weight * smoothed + (1.0 - cfg.smoothing_weight) * step_reward
            )
            record = StepRecord(
                episode=episode,
                step=step + 1,
                reward=step_reward,
                evaluation_reward=float(np.min(rate_sums / (step + 1))),
                smoothed_reward=float(smoothed),
                critic_loss=loss,
                noise_scale=noise_scale,
            )
            steps.append(record)
            episode_rewards.append(step_reward)
            log.debug(
                "Episode %s step %s: reward %.4f, critic loss %.4g, noise %.4g",
                episode, step + 1, step_reward, loss, noise_scale,
            )
            if on_step is not None:
                on_step(record, tx_next)
            noise_scale *= cfg.noise_decay
            tx = tx_next
        episode_records.append(
            EpisodeRecord(
                episode=episode,
                evaluation_reward=float(np.min(rate_sums / steps_per_episode)),
                mean_reward=float(np.mean(episode_rewards)),
            )
        )
        log.info(
            "Episode %s: evaluation reward %.4f, mean reward %.4f, noise %.4g",
            episode, episode_records[-1].evaluation_reward, episode_records[-1].mean_reward, noise_scale,
        )

    result = TrainingResult(
        actor=actor,
        critic=critic,
        steps=steps,
        episodes=episode_records,
        updates=updates,
        initial_actor=initial_actor,
        actor_target=actor_target,
        critic_target=critic_target,
    )
    if extract:
        result.greedy_tx, result.greedy_estimate = extract_greedy_tx(
            actor,
            csi,
            dataset,
            power=power,
            sigma2=sigma2,
            n_mc=cfg.greedy_n_mc,
            rng=np.random.default_rng(greedy_seq),
        )
        log.info("Greedy configuration ergodic min-rate %.4f bit/s/Hz", result.greedy_estimate.min_rate)
    return result
