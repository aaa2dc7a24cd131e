"""Proportional prioritized experience replay backed by an array sum-tree."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np


class Transition(NamedTuple):
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    done: bool


class SumTree:
    """Complete binary tree over ``capacity`` leaves; internal nodes hold child sums."""

    def __init__(self, capacity: int):
        size = 1
        while size < capacity:
            size *= 2
        self.leaves = size
        self.tree = np.zeros(2 * size, dtype=np.float64)
        self._shifts = np.arange(1, size.bit_length(), dtype=np.int64)

    @property
    def total(self) -> float:
        return float(self.tree[1])

    def update(self, idx, values) -> None:
        tree = self.tree
        if np.ndim(idx) == 0:
            i = int(idx) + self.leaves
            delta = float(values) - tree[i]
            tree[i] = values
            # Ancestors of leaf i are i >> 1, i >> 2, ... up to the root.
            tree[i >> self._shifts] += delta
            return
        idx = np.asarray(idx, dtype=np.int64) + self.leaves
        tree[idx] = values
        # Parents are recomputed from children, so repeated indices are harmless.
        idx //= 2
        while idx[0] >= 1:
            tree[idx] = tree[2 * idx] + tree[2 * idx + 1]
            idx //= 2

    def find(self, mass) -> np.ndarray:
        """Leaf index whose cumulative interval contains each value of ``mass``."""
        mass = np.array(mass, dtype=np.float64)
        node = np.ones(mass.shape, dtype=np.int64)
        while node[0] < self.leaves:
            left = 2 * node
            lv = self.tree[left]
            go_right = mass >= lv
            mass -= lv * go_right
            node = left + go_right
        return node - self.leaves


class PrioritizedReplayBuffer:
    def __init__(self, capacity: int = 1_000_000, obs_dim: int = 8, alpha: float = 0.6,
                 epsilon_priority: float = 1e-6):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.alpha = alpha
        self.epsilon_priority = epsilon_priority
        self.obs = np.zeros((capacity, obs_dim))
        self.next_obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self.priorities = np.zeros(capacity)
        self._tree = SumTree(capacity)
        self._next = 0
        self.size = 0
        self.max_priority = 1.0

    def __len__(self):
        return self.size

    def add(self, t: Transition, priority: float | None = None) -> None:
        i = self._next
        self.obs[i] = t.obs
        self.next_obs[i] = t.next_obs
        self.actions[i] = t.action
        self.rewards[i] = t.reward
        self.dones[i] = float(t.done)
        self._set(i, self.max_priority if priority is None else priority)
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _set(self, idx, p) -> None:
        p = np.maximum(np.asarray(p, dtype=np.float64), self.epsilon_priority)
        self.priorities[idx] = p
        self._tree.update(idx, p**self.alpha)

    def update_priorities(self, idx, td_errors) -> None:
        p = np.abs(np.asarray(td_errors, dtype=np.float64)) + self.epsilon_priority
        self._set(idx, p)
        self.max_priority = max(self.max_priority, float(np.max(p)))

    def probabilities(self) -> np.ndarray:
        scaled = self.priorities[: self.size] ** self.alpha
        return scaled / scaled.sum()

    def sample(self, batch_size: int, rng: np.random.Generator, beta_is: float = 0.4):
        """Draw ``batch_size`` indices proportionally to priority**alpha.

        Returns ``((obs, actions, rewards, next_obs, dones), indices, weights)``
        with importance weights scaled so the largest is 1.
        """
        if self.size < batch_size or batch_size < 1:
            raise ValueError(f"cannot sample {batch_size} items from a buffer holding {self.size}")
        total = self._tree.total
        idx = self._tree.find(rng.random(batch_size) * total)
        # Guard against landing on an empty leaf through rounding at the right edge.
        idx = np.minimum(idx, self.size - 1)
        probs = self._tree.tree[idx + self._tree.leaves] / total
        weights = (self.size * probs) ** (-beta_is)
        weights /= weights.max()
        batch = (self.obs[idx], self.actions[idx], self.rewards[idx], self.next_obs[idx], self.dones[idx])
        return batch, idx, weights

    def items(self) -> list:
        """Stored transitions from oldest to newest."""
        start = self._next if self.size == self.capacity else 0
        order = [(start + k) % self.capacity for k in range(self.size)]
        return [
            Transition(self.obs[i].copy(), int(self.actions[i]), float(self.rewards[i]),
                       self.next_obs[i].copy(), bool(self.dones[i]))
            for i in order
        ]
