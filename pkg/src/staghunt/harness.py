"""Policies, matches and tournaments measuring who reaches a 2v1 first."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .arena import (
    ACTION_DELTAS,
    BLUE,
    RED,
    Action,
    ArenaConfig,
    ArenaState,
    GridMap,
    RobotId,
    distance,
    is_two_v_one,
    legal_actions,
    observation,
    step,
    swap_teams,
)
from .dqn.network import N_ACTIONS, QNetwork, decode_joint, greedy, forward
from .planner import InvalidStart, NoSafePath, PlanRequest, next_action, plan
from .rewards import assign_stag
from .spawn import spawn_random

SCHEMA_VERSION = 1
FRIENDLY = (RobotId.AGENT1, RobotId.AGENT2)
_RED_VIEW = {RobotId.AGENT1: RobotId.ENEMY1, RobotId.AGENT2: RobotId.ENEMY2}


class Policy:
    """Controls one team. ``act`` always sees the state from Agent1/Agent2's side."""

    name = "policy"

    def reset(self, seed) -> None:
        pass

    def act(self, state: ArenaState, grid: GridMap, cfg: ArenaConfig) -> Dict[RobotId, Action]:
        raise NotImplementedError


class StationaryPolicy(Policy):
    name = "stationary"

    def act(self, state, grid, cfg):
        return {a: Action.STOP for a in FRIENDLY}


class RandomPolicy(Policy):
    name = "random"

    def __init__(self, seed=0):
        self.reset(seed)

    def reset(self, seed) -> None:
        self.rng = np.random.default_rng(seed)

    def act(self, state, grid, cfg):
        return {a: Action(int(self.rng.integers(N_ACTIONS))) for a in FRIENDLY}


def _flee(state, agent, hare, grid) -> Action:
    """Legal move that opens the most distance from the hare (first wins on ties)."""
    cur = state.pos[agent]
    best, best_d = Action.STOP, distance(cur, hare)
    for a in legal_actions(state, agent, grid):
        dx, dy = ACTION_DELTAS[a]
        d = distance((cur.x + dx, cur.y + dy), hare)
        if d > best_d:
            best, best_d = a, d
    return best


class AStarPolicy(Policy):
    """Both teammates chase the same stag with the standoff planner, replanning every tick."""

    name = "astar"

    def __init__(self, attack_range: Optional[float] = None, safe_distance: Optional[float] = None):
        self.attack_range = attack_range
        self.safe_distance = safe_distance

    def _request(self, start, stag, hare, cfg, safe=None):
        ar = cfg.attack_range if self.attack_range is None else self.attack_range
        sd = cfg.safe_distance if self.safe_distance is None else self.safe_distance
        return PlanRequest(start, stag, hare, ar, sd if safe is None else safe)

    def _move(self, state, agent, grid, cfg, stag, hare) -> Action:
        start = state.pos[agent]
        try:
            path = plan(grid, self._request(start, stag, hare, cfg))
        except InvalidStart:
            return _flee(state, agent, hare, grid)
        except NoSafePath:
            try:
                path = plan(grid, self._request(start, stag, hare, cfg, safe=0.0))
            except NoSafePath:
                return Action.STOP
        if len(path) < 2:
            return Action.STOP
        occupied = {p for r, p in state.pos.items() if r != agent}
        if path[1] in occupied:
            # Route around the other robots, treating them as walls for this tick only.
            walls = grid.walls.copy()
            for p in occupied:
                walls[p.y, p.x] = True
            walls[stag[1], stag[0]] = grid.walls[stag[1], stag[0]]
            try:
                path = plan(GridMap(walls), self._request(start, stag, hare, cfg))
            except (InvalidStart, NoSafePath):
                return Action.STOP
        return next_action(path, start)

    def act(self, state, grid, cfg):
        assignment = assign_stag(state)
        stag = state.last_seen[assignment.stag]
        hare = state.last_seen[assignment.hare]
        return {a: self._move(state, a, grid, cfg, stag, hare) for a in FRIENDLY}


class DqnPolicy(Policy):
    """Greedy controller from a trained network (5 outputs per agent, or 25 joint)."""

    name = "dqn"

    def __init__(self, net: QNetwork, variant: str = "model1", epsilon: float = 0.0, seed=0):
        joint = variant == "model2"
        expected = N_ACTIONS * N_ACTIONS if joint else N_ACTIONS
        if net.n_actions != expected:
            raise ValueError(f"{variant} expects {expected} outputs, network has {net.n_actions}")
        self.net = net
        self.variant = variant
        self.epsilon = epsilon
        self.reset(seed)

    def reset(self, seed) -> None:
        self.rng = np.random.default_rng(seed)

    def _pick(self, q) -> int:
        if self.epsilon and self.rng.random() < self.epsilon:
            return int(self.rng.integers(len(q)))
        return greedy(q)

    def act(self, state, grid, cfg):
        if self.variant == "model2":
            q = forward(self.net, observation(state, RobotId.AGENT1, grid))
            a1, a2 = decode_joint(self._pick(q))
            return {RobotId.AGENT1: Action(a1), RobotId.AGENT2: Action(a2)}
        return {a: Action(self._pick(forward(self.net, observation(state, a, grid)))) for a in FRIENDLY}


def team_actions(policy: Policy, state: ArenaState, team: str, grid: GridMap, cfg: ArenaConfig):
    if team == BLUE:
        return policy.act(state, grid, cfg)
    acts = policy.act(swap_teams(state), grid, cfg)
    return {_RED_VIEW[k]: v for k, v in acts.items()}


@dataclass
class MatchResult:
    winner: str
    steps: int
    trace: List[ArenaState] = field(default_factory=list)


def _seeds(seed):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    spawn_ss, blue_ss, red_ss = ss.spawn(3)
    return np.random.default_rng(spawn_ss), blue_ss, red_ss


def run_match(
    blue: Policy,
    red: Policy,
    grid: GridMap,
    cfg: ArenaConfig | None = None,
    seed=0,
    max_steps: int | None = None,
    state: ArenaState | None = None,
    record_trace: bool = True,
) -> MatchResult:
    """Play until a team holds a 2v1 (both at once is a draw) or the step cap."""
    cfg = cfg or ArenaConfig()
    max_steps = cfg.max_steps if max_steps is None else max_steps
    spawn_rng, blue_ss, red_ss = _seeds(seed)
    if state is None:
        state = spawn_random(grid, spawn_rng, cfg)
    blue.reset(blue_ss)
    red.reset(red_ss)
    trace = [state]
    for t in range(1, max_steps + 1):
        actions = team_actions(blue, state, BLUE, grid, cfg)
        actions.update(team_actions(red, state, RED, grid, cfg))
        state = step(state, actions, grid, cfg)
        if record_trace:
            trace.append(state)
        b = is_two_v_one(state, BLUE, cfg, grid)
        r = is_two_v_one(state, RED, cfg, grid)
        if b or r:
            winner = "draw" if (b and r) else (BLUE if b else RED)
            return MatchResult(winner, t, trace)
    return MatchResult("draw", max_steps, trace)


@dataclass
class RepeatResult:
    repeat: int
    blue_wins: int
    red_wins: int
    draws: int
    matches: int

    @property
    def blue_rate(self) -> float:
        return self.blue_wins / self.matches

    @property
    def red_rate(self) -> float:
        return self.red_wins / self.matches


@dataclass
class TournamentResult:
    repeats: List[RepeatResult]
    base_seed: int
    config: dict = field(default_factory=dict)

    def rates(self, team: str) -> list:
        return [r.blue_rate if team == BLUE else r.red_rate for r in self.repeats]

    def to_dict(self) -> dict:
        blue, red = self.rates(BLUE), self.rates(RED)
        return {
            "schema_version": SCHEMA_VERSION,
            "base_seed": self.base_seed,
            "config": self.config,
            "repeats": [
                {
                    "repeat": r.repeat,
                    "matches": r.matches,
                    "blue_wins": r.blue_wins,
                    "red_wins": r.red_wins,
                    "draws": r.draws,
                    "blue_rate": r.blue_rate,
                    "red_rate": r.red_rate,
                }
                for r in self.repeats
            ],
            "aggregate": {
                "blue_rate_min": min(blue),
                "blue_rate_max": max(blue),
                "blue_rate_mean": sum(blue) / len(blue),
                "red_rate_min": min(red),
                "red_rate_max": max(red),
                "red_rate_mean": sum(red) / len(red),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["repeat", "matches", "blue_wins", "red_wins", "draws", "blue_rate", "red_rate"])
        for r in self.repeats:
            w.writerow([r.repeat, r.matches, r.blue_wins, r.red_wins, r.draws, r.blue_rate, r.red_rate])
        return buf.getvalue()


def match_seed(base_seed: int, repeat: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(base_seed, spawn_key=(repeat, index))


def run_tournament(
    blue: Policy,
    red: Policy,
    grid: GridMap,
    cfg: ArenaConfig | None = None,
    n_matches: int = 100,
    repeats: int = 5,
    base_seed: int = 0,
    on_match=None,
) -> TournamentResult:
    """``repeats`` blocks of ``n_matches`` seeded matches; ``on_match(repeat, i, result)`` sees each one."""
    if n_matches < 1 or repeats < 1:
        raise ValueError("need at least one match and one repeat")
    cfg = cfg or ArenaConfig()
    out = []
    for rep in range(repeats):
        counts = {BLUE: 0, RED: 0, "draw": 0}
        for i in range(n_matches):
            res = run_match(blue, red, grid, cfg, match_seed(base_seed, rep, i), record_trace=on_match is not None)
            counts[res.winner] += 1
            if on_match is not None:
                on_match(rep, i, res)
        out.append(RepeatResult(rep, counts[BLUE], counts[RED], counts["draw"], n_matches))
    config = {
        "blue": blue.name,
        "red": red.name,
        "matches": n_matches,
        "repeats": repeats,
        "attack_range": cfg.attack_range,
        "safe_distance": cfg.safe_distance,
        "sensor_range": cfg.sensor_range,
        "max_steps": cfg.max_steps,
        "map": {"width": grid.width, "height": grid.height},
    }
    return TournamentResult(out, base_seed, config)


__all__ = [
    "AStarPolicy",
    "DqnPolicy",
    "MatchResult",
    "Policy",
    "RandomPolicy",
    "RepeatResult",
    "StationaryPolicy",
    "TournamentResult",
    "run_match",
    "run_tournament",
    "spawn_random",
    "team_actions",
]
