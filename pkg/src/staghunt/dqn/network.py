"""Numpy multilayer perceptron Q-network with hand-written backpropagation."""
from __future__ import annotations

import numpy as np

N_ACTIONS = 5
OBS_DIM = 8


class TrainingError(RuntimeError):
    pass


class QNetwork:
    """Fully connected ReLU network. ``weights[i]`` has shape (out, in)."""

    def __init__(self, weights, biases):
        if len(weights) != len(biases) or not weights:
            raise ValueError("need one bias vector per weight matrix")
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {i}: weight {w.shape} and bias {b.shape} disagree")
            if i and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(f"layer {i}: input size {w.shape[1]} does not match previous output")

    @classmethod
    def create(cls, dims=(OBS_DIM, 64, 64, 64, N_ACTIONS), rng=None) -> "QNetwork":
        """He-initialised weights, zero biases."""
        rng = rng if rng is not None else np.random.default_rng(0)
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @property
    def dims(self) -> tuple:
        return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

    @property
    def n_actions(self) -> int:
        return self.weights[-1].shape[0]

    def params(self) -> list:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "QNetwork":
        return QNetwork([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def load_from(self, other: "QNetwork") -> None:
        for dst, src in zip(self.params(), other.params()):
            dst[...] = src

    def __eq__(self, other):
        if not isinstance(other, QNetwork) or self.dims != other.dims:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.params(), other.params()))

    def _forward(self, x):
        """Return q-values and the pre-activations / activations for backprop."""
        acts = [x]
        pre = []
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            pre.append(z)
            h = z if i == last else np.maximum(z, 0.0)
            acts.append(h)
        return h, pre, acts

    def __call__(self, obs):
        return forward(self, obs)


def forward(net: QNetwork, obs) -> np.ndarray:
    x = np.asarray(obs, dtype=np.float64)
    if x.shape[-1] != net.dims[0]:
        raise ValueError(f"expected observation of length {net.dims[0]}, got {x.shape[-1]}")
    q, _, _ = net._forward(x)
    return q


def huber(delta, kappa: float = 1.0):
    a = np.abs(delta)
    return np.where(a <= kappa, 0.5 * delta**2, kappa * (a - 0.5 * kappa))


def td_targets(rewards, next_obs, dones, target_net: QNetwork, gamma: float) -> np.ndarray:
    rewards = np.asarray(rewards, dtype=np.float64)
    q_next = forward(target_net, next_obs).max(axis=-1)
    return rewards + gamma * (1.0 - np.asarray(dones, dtype=np.float64)) * q_next


def td_target(t, target_net: QNetwork, gamma: float) -> float:
    if t.done:
        return float(t.reward)
    return float(t.reward + gamma * np.max(forward(target_net, t.next_obs)))


def loss_and_grads(net: QNetwork, obs, actions, targets, weights, kappa: float = 1.0):
    """Importance-weighted mean Huber loss on Q(s, a) and its parameter gradients."""
    obs = np.asarray(obs, dtype=np.float64)
    actions = np.asarray(actions, dtype=np.int64)
    n = len(actions)
    q, pre, acts = net._forward(obs)
    rows = np.arange(n)
    delta = q[rows, actions] - targets
    loss = float(np.sum(weights * huber(delta, kappa)) / n)

    dq = np.zeros_like(q)
    dq[rows, actions] = weights * np.clip(delta, -kappa, kappa) / n
    grads_w = [None] * len(net.weights)
    grads_b = [None] * len(net.weights)
    g = dq
    for i in range(len(net.weights) - 1, -1, -1):
        grads_w[i] = g.T @ acts[i]
        grads_b[i] = g.sum(axis=0)
        if i:
            g = (g @ net.weights[i]) * (pre[i - 1] > 0)
    return loss, delta, grads_w, grads_b


def sgd_step(net: QNetwork, batch, target_net: QNetwork, gamma: float, learning_rate: float, is_weights=None):
    """One SGD update in place. Returns (net, |td errors|, loss)."""
    obs, actions, rewards, next_obs, dones = batch
    if len(actions) == 0:
        raise ValueError("empty batch")
    w = np.ones(len(actions)) if is_weights is None else np.asarray(is_weights, dtype=np.float64)
    targets = td_targets(rewards, next_obs, dones, target_net, gamma)
    loss, delta, gw, gb = loss_and_grads(net, obs, actions, targets, w)
    if not np.isfinite(loss):
        raise TrainingError(f"non-finite loss {loss}; max |td| = {np.max(np.abs(delta))}")
    if learning_rate:
        for p, g in zip(net.weights, gw):
            p -= learning_rate * g
        for p, g in zip(net.biases, gb):
            p -= learning_rate * g
    return net, np.abs(delta), loss


def greedy(q) -> int:
    # np.argmax returns the first maximum, i.e. the lowest index on ties.
    return int(np.argmax(q))


def select_action(net: QNetwork, obs, epsilon: float, rng: np.random.Generator) -> int:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if rng.random() < epsilon:
        return int(rng.integers(net.n_actions))
    return greedy(forward(net, obs))


def decode_joint(k: int) -> tuple:
    return divmod(int(k), N_ACTIONS)


def encode_joint(a1: int, a2: int) -> int:
    return int(a1) * N_ACTIONS + int(a2)
