"""Epsilon-greedy DQN training for the three controller variants."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple

import numpy as np

from ..arena import (
    BLUE,
    RED,
    Action,
    ArenaConfig,
    GridMap,
    RobotId,
    is_two_v_one,
    observation,
    step,
)
from ..rewards import RewardConfig, assign_stag, dense_reward, sparse_reward
from ..spawn import spawn_random
from .network import (
    N_ACTIONS,
    OBS_DIM,
    QNetwork,
    TrainingError,
    decode_joint,
    forward,
    greedy,
    select_action,
    sgd_step,
)
from .replay import PrioritizedReplayBuffer, Transition

log = logging.getLogger(__name__)

VARIANTS = ("model1", "model2", "model3")
OPPONENTS = ("random", "stationary")


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 0.99
    learning_rate: float = 0.01
    target_update_every: int = 1000
    epsilon_start: float = 0.8
    epsilon_end: float = 0.3
    epsilon_decay_fraction: float = 1.0
    total_episodes: int = 20_000
    batch_size: int = 32
    model_variant: str = "model1"
    seed: int = 0
    hidden: tuple = (64, 64, 64)
    buffer_capacity: int = 1_000_000
    alpha: float = 0.6
    beta_is: float = 0.4
    learning_starts: int = 1000
    train_every: int = 1
    max_episode_steps: int = 100
    log_every: int = 100
    opponent: str = "random"

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not self.epsilon_start >= self.epsilon_end >= 0:
            raise ValueError("need epsilon_start >= epsilon_end >= 0")
        if self.model_variant not in VARIANTS:
            raise ValueError(f"model_variant must be one of {VARIANTS}")
        if self.opponent not in OPPONENTS:
            raise ValueError(f"opponent must be one of {OPPONENTS}")

    @property
    def n_outputs(self) -> int:
        return N_ACTIONS * N_ACTIONS if self.model_variant == "model2" else N_ACTIONS


def epsilon_at(cfg: TrainConfig, episode: int) -> float:
    """Linear decay from epsilon_start to epsilon_end over the decay window."""
    span = cfg.epsilon_decay_fraction * cfg.total_episodes
    if span <= 0 or episode >= span:
        return cfg.epsilon_end
    frac = episode / span
    return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)


class MetricsRecord(NamedTuple):
    episode: int
    mean_reward: float
    mean_loss: float
    mean_td_error: float


@dataclass
class TrainMetrics:
    records: List[MetricsRecord] = field(default_factory=list)
    episode_rewards: List[float] = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(MetricsRecord._fields)
            for r in self.records:
                w.writerow([r.episode] + [f"{v:.17g}" for v in r[1:]])


def _mean(xs) -> float:
    return float(np.mean(xs)) if len(xs) else math.nan


def _agent_reward(variant, state, agent, assignment, reward_cfg, grid):
    if variant == "model3":
        return sparse_reward(state, agent, assignment, reward_cfg, grid)
    return dense_reward(state, agent, assignment, reward_cfg, grid)


def _shared_actions(net, obs, eps, rng):
    # Same draws as calling select_action per agent, but one forward pass for
    # whichever agents act greedily.
    out = [None] * len(obs)
    for i in range(len(obs)):
        if rng.random() < eps:
            out[i] = int(rng.integers(net.n_actions))
    todo = [i for i, a in enumerate(out) if a is None]
    if todo:
        q = forward(net, np.stack([obs[i] for i in todo]))
        for i, row in zip(todo, q):
            out[i] = greedy(row)
    return tuple(out)


def train(
    cfg: TrainConfig,
    grid: GridMap,
    arena_cfg: ArenaConfig | None = None,
    reward_cfg: RewardConfig | None = None,
):
    """Run a training session. Returns ``(network, TrainMetrics)``.

    model1 and model3 share one 5-action network between both agents (one
    transition per agent per step); model2 picks a 25-way joint action and
    learns from the summed per-agent reward.
    """
    arena_cfg = arena_cfg or ArenaConfig()
    reward_cfg = reward_cfg or RewardConfig.for_map(grid, attack_range=arena_cfg.attack_range)
    rng = np.random.default_rng(cfg.seed)
    dims = (OBS_DIM,) + cfg.hidden + (cfg.n_outputs,)
    net = QNetwork.create(dims, rng)
    target = net.copy()
    metrics = TrainMetrics()
    if cfg.total_episodes <= 0:
        return net, metrics

    buf = PrioritizedReplayBuffer(min(cfg.buffer_capacity, cfg.total_episodes * cfg.max_episode_steps * 2),
                                  OBS_DIM, cfg.alpha)
    agents = (RobotId.AGENT1, RobotId.AGENT2)
    total_steps = 0
    win_rewards, win_losses, win_tds = [], [], []

    for episode in range(cfg.total_episodes):
        if episode and episode % cfg.target_update_every == 0:
            target.load_from(net)
        eps = epsilon_at(cfg, episode)
        state = spawn_random(grid, rng, arena_cfg)
        ep_reward = 0.0
        for _ in range(cfg.max_episode_steps):
            assignment = assign_stag(state)
            obs = [observation(state, a, grid) for a in agents]
            if cfg.model_variant == "model2":
                joint = select_action(net, obs[0], eps, rng)
                chosen = decode_joint(joint)
            else:
                chosen = _shared_actions(net, obs, eps, rng)
            actions = {a: Action(c) for a, c in zip(agents, chosen)}
            for e in (RobotId.ENEMY1, RobotId.ENEMY2):
                actions[e] = Action(int(rng.integers(N_ACTIONS))) if cfg.opponent == "random" else Action.STOP
            nxt = step(state, actions, grid, arena_cfg)
            done = is_two_v_one(nxt, BLUE, arena_cfg, grid) or is_two_v_one(nxt, RED, arena_cfg, grid)
            rewards = [_agent_reward(cfg.model_variant, nxt, a, assignment, reward_cfg, grid) for a in agents]
            next_obs = [observation(nxt, a, grid) for a in agents]
            if cfg.model_variant == "model2":
                buf.add(Transition(obs[0], joint, sum(rewards), next_obs[0], done))
            else:
                for i in range(2):
                    buf.add(Transition(obs[i], chosen[i], rewards[i], next_obs[i], done))
            ep_reward += sum(rewards)
            total_steps += 1
            state = nxt

            if len(buf) >= max(cfg.learning_starts, cfg.batch_size) and total_steps % cfg.train_every == 0:
                batch, idx, w = buf.sample(cfg.batch_size, rng, cfg.beta_is)
                try:
                    _, td, loss = sgd_step(net, batch, target, cfg.gamma, cfg.learning_rate, w)
                except TrainingError as exc:
                    raise TrainingError(f"episode {episode}, step {total_steps}: {exc}") from None
                buf.update_priorities(idx, td)
                win_losses.append(loss)
                win_tds.append(float(np.mean(td)))
            if done:
                break

        metrics.episode_rewards.append(ep_reward)
        win_rewards.append(ep_reward)
        if (episode + 1) % cfg.log_every == 0 or episode + 1 == cfg.total_episodes:
            rec = MetricsRecord(episode + 1, _mean(win_rewards), _mean(win_losses), _mean(win_tds))
            metrics.records.append(rec)
            log.info("episode %d reward %.3f loss %.4f td %.4f eps %.3f", *rec, eps)
            win_rewards, win_losses, win_tds = [], [], []
    return net, metrics

