"""Stag-hunt target assignment and shaped rewards for the friendly team."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .arena import ArenaConfig, ArenaState, GridMap, RobotId, distance, in_attack_range

# Stag-hunt payoffs, keyed by (agent1 choice, agent2 choice) -> (agent1, agent2).
PAYOFF_TABLE = {
    ("stag", "stag"): (3.0, 3.0),
    ("stag", "hare"): (0.0, 2.0),
    ("hare", "stag"): (2.0, 0.0),
    ("hare", "hare"): (1.0, 1.0),
}

PUNISHMENT_MODES = ("paper", "corrected")

# Reward components are rounded onto this dyadic grid. Values of magnitude < 2**20
# on the grid add and subtract exactly in float64, so r2 - r1 == punishment bit-for-bit.
_GRID = 2.0**32


def _q(x: float) -> float:
    return round(x * _GRID) / _GRID


class StagAssignment(NamedTuple):
    stag: RobotId
    hare: RobotId


@dataclass(frozen=True)
class RewardConfig:
    beta: float = 52.0
    attack_range: float = 5.0
    punishment_mode: str = "corrected"
    sparse_hit_reward: float = 1.0
    coop_bonus_scale: float = 1.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.attack_range <= 0:
            raise ValueError("attack_range must be positive")
        if self.punishment_mode not in PUNISHMENT_MODES:
            raise ValueError(f"punishment_mode must be one of {PUNISHMENT_MODES}")

    @classmethod
    def for_map(cls, grid: GridMap, **kw) -> "RewardConfig":
        return cls(beta=float(grid.width + grid.height), **kw)

    def arena_config(self) -> ArenaConfig:
        return ArenaConfig(attack_range=self.attack_range)


def assign_stag(state: ArenaState) -> StagAssignment:
    """Pick the enemy with the smallest summed distance to both agents; ties go to Enemy1."""
    a1 = state.pos[RobotId.AGENT1]
    a2 = state.pos[RobotId.AGENT2]
    e1 = state.last_seen[RobotId.ENEMY1]
    e2 = state.last_seen[RobotId.ENEMY2]
    d1 = distance(a1, e1) + distance(a2, e1)
    d2 = distance(a1, e2) + distance(a2, e2)
    if d2 < d1:
        return StagAssignment(RobotId.ENEMY2, RobotId.ENEMY1)
    return StagAssignment(RobotId.ENEMY1, RobotId.ENEMY2)


def _friendly(agent) -> RobotId:
    agent = RobotId(agent)
    if agent not in (RobotId.AGENT1, RobotId.AGENT2):
        raise ValueError(f"rewards are defined for friendly robots, got {agent.name}")
    return agent


def r1(state: ArenaState, agent: RobotId, stag, cfg: RewardConfig) -> float:
    """Dense approach reward, -distance(agent, stag) / beta."""
    return _q(-distance(state.pos[_friendly(agent)], stag) / cfg.beta)


def punishment(state: ArenaState, agent: RobotId, hare, cfg: RewardConfig) -> float:
    d = distance(state.pos[_friendly(agent)], hare)
    if cfg.punishment_mode == "paper":
        return _q(-d / cfg.attack_range)
    return _q(-max(0.0, (cfg.attack_range - d) / cfg.attack_range))


def r2(state: ArenaState, agent: RobotId, assignment: StagAssignment, cfg: RewardConfig) -> float:
    stag = state.last_seen[assignment.stag]
    hare = state.last_seen[assignment.hare]
    return r1(state, agent, stag, cfg) + punishment(state, agent, hare, cfg)


def _choice(state, agent, assignment, arena_cfg, grid):
    me = state.pos[agent]
    if in_attack_range(me, state.pos[assignment.stag], arena_cfg, grid):
        return "stag"
    if in_attack_range(me, state.pos[assignment.hare], arena_cfg, grid):
        return "hare"
    return None


def coop_bonus(
    state: ArenaState, cfg: RewardConfig, grid: GridMap, assignment: StagAssignment | None = None
) -> tuple:
    """Scaled payoff pair for the joint attack situation, (0, 0) unless both agents engage."""
    assignment = assignment or assign_stag(state)
    arena_cfg = cfg.arena_config()
    c1 = _choice(state, RobotId.AGENT1, assignment, arena_cfg, grid)
    c2 = _choice(state, RobotId.AGENT2, assignment, arena_cfg, grid)
    if c1 is None or c2 is None:
        return (0.0, 0.0)
    p1, p2 = PAYOFF_TABLE[(c1, c2)]
    return (cfg.coop_bonus_scale * p1, cfg.coop_bonus_scale * p2)


def sparse_reward(
    state: ArenaState, agent: RobotId, assignment: StagAssignment, cfg: RewardConfig, grid: GridMap
) -> float:
    agent = _friendly(agent)
    if not in_attack_range(state.pos[agent], state.pos[assignment.stag], cfg.arena_config(), grid):
        # Nothing is paid unless this agent has the stag in range, hare payoffs included.
        return 0.0
    return cfg.sparse_hit_reward + coop_bonus(state, cfg, grid, assignment)[int(agent)]


def dense_reward(
    state: ArenaState, agent: RobotId, assignment: StagAssignment, cfg: RewardConfig, grid: GridMap
) -> float:
    """r2 plus the per-step cooperation payoff (the Model 1 training signal)."""
    agent = _friendly(agent)
    return r2(state, agent, assignment, cfg) + coop_bonus(state, cfg, grid, assignment)[int(agent)]
