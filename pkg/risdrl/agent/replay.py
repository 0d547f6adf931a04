"""
Fixed-capacity FIFO experience replay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Experience:
    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray


@dataclass(frozen=True)
class Batch:
    states: np.ndarray  # (V, state_dim)
    actions: np.ndarray  # (V, action_dim)
    rewards: np.ndarray  # (V,)
    next_states: np.ndarray  # (V, state_dim)

    def __len__(self) -> int:
        return int(self.rewards.shape[0])

    @classmethod
    def from_experiences(cls, experiences: list[Experience]) -> "Batch":
        return cls(
            states=np.stack([e.s for e in experiences]),
            actions=np.stack([e.a for e in experiences]),
            rewards=np.array([e.r for e in experiences], dtype=np.float64),
            next_states=np.stack([e.s_next for e in experiences]),
        )


class ReplayBuffer:
    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        if capacity < 1:
            raise ValueError(f"Replay capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._states = np.zeros((capacity, state_dim))
        self._actions = np.zeros((capacity, action_dim))
        self._rewards = np.zeros(capacity)
        self._next_states = np.zeros((capacity, state_dim))
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, experience: Experience) -> None:
        index = self._cursor
        self._states[index] = experience.s
        self._actions[index] = experience.a
        self._rewards[index] = experience.r
        self._next_states[index] = experience.s_next
        self._cursor = (self._cursor + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _oldest_first(self) -> np.ndarray:
        if self._size < self.capacity:
            return np.arange(self._size)
        return (np.arange(self.capacity) + self._cursor) % self.capacity

    def contents(self) -> list[Experience]:
        """
        Stored experiences from oldest to newest.
        """
        return [
            Experience(
                s=self._states[i].copy(),
                a=self._actions[i].copy(),
                r=float(self._rewards[i]),
                s_next=self._next_states[i].copy(),
            )
            for i in self._oldest_first()
        ]

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        if batch_size > self._size:
            raise ValueError(f"Cannot sample {batch_size} experiences from {self._size}")
        indices = rng.choice(self._size, size=batch_size, replace=False)
        return Batch(
            states=self._states[indices].copy(),
            actions=self._actions[indices].copy(),
            rewards=self._rewards[indices].copy(),
            next_states=self._next_states[indices].copy(),
        )
