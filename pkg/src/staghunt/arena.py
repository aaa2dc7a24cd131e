"""Deterministic grid arena: static wall map, four robots, movement and geometry.

Coordinates are ``(x, y)`` cell indices with ``y`` growing downwards, the same
orientation as the rows of a map file. ``Up`` therefore decreases ``y``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Dict, Iterable, Mapping, NamedTuple

import numpy as np


class CellKind(enum.Enum):
    WALL = "#"
    EMPTY = "."


class Position(NamedTuple):
    x: int
    y: int


class RobotId(enum.IntEnum):
    AGENT1 = 0
    AGENT2 = 1
    ENEMY1 = 2
    ENEMY2 = 3


class Action(enum.IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    STOP = 4


ACTION_DELTAS = {
    Action.UP: (0, -1),
    Action.DOWN: (0, 1),
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
    Action.STOP: (0, 0),
}

BLUE = "blue"
RED = "red"
TEAMS = {BLUE: (RobotId.AGENT1, RobotId.AGENT2), RED: (RobotId.ENEMY1, RobotId.ENEMY2)}
RESOLUTION_ORDER = (RobotId.AGENT1, RobotId.AGENT2, RobotId.ENEMY1, RobotId.ENEMY2)


class MapParseError(ValueError):
    pass


class InvalidPoseError(ValueError):
    pass


def opponents(team: str) -> tuple:
    return TEAMS[RED] if team == BLUE else TEAMS[BLUE]


def team_of(robot: RobotId) -> str:
    return BLUE if robot in TEAMS[BLUE] else RED


@dataclass(frozen=True, eq=False)
class GridMap:
    """Static occupancy grid. ``walls[y, x]`` is True for wall cells."""

    walls: np.ndarray

    def __post_init__(self):
        walls = np.array(self.walls, dtype=bool)
        if walls.ndim != 2 or walls.shape[0] < 2 or walls.shape[1] < 2:
            raise ValueError(f"map must be at least 2x2, got shape {walls.shape}")
        walls.setflags(write=False)
        object.__setattr__(self, "walls", walls)
        object.__setattr__(self, "_key", (walls.shape, walls.tobytes()))

    @property
    def width(self) -> int:
        return self.walls.shape[1]

    @property
    def height(self) -> int:
        return self.walls.shape[0]

    def __eq__(self, other):
        return isinstance(other, GridMap) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def in_bounds(self, p) -> bool:
        return 0 <= p[0] < self.width and 0 <= p[1] < self.height

    def is_wall(self, p) -> bool:
        return bool(self.walls[p[1], p[0]])

    def cell(self, p) -> CellKind:
        return CellKind.WALL if self.is_wall(p) else CellKind.EMPTY

    def free_cells(self) -> list:
        ys, xs = np.nonzero(~self.walls)
        return [Position(int(x), int(y)) for y, x in zip(ys, xs)]

    @classmethod
    def empty(cls, width: int, height: int) -> "GridMap":
        return cls(np.zeros((height, width), dtype=bool))

    def to_text(self) -> str:
        return "\n".join("".join("#" if w else "." for w in row) for row in self.walls) + "\n"


def parse_map(text: str) -> GridMap:
    lines = text.splitlines()
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MapParseError("empty map")
    width = len(lines[0])
    if width == 0:
        raise MapParseError("line 1: empty row")
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if len(line) != width:
            raise MapParseError(f"line {lineno}: expected {width} columns, got {len(line)}")
        row = []
        for col, ch in enumerate(line, start=1):
            if ch == "#":
                row.append(True)
            elif ch == ".":
                row.append(False)
            else:
                raise MapParseError(f"line {lineno}, column {col}: illegal character {ch!r}")
        rows.append(row)
    if len(rows) < 2 or width < 2:
        raise MapParseError(f"map must be at least 2x2, got {width}x{len(rows)}")
    return GridMap(np.array(rows, dtype=bool))


def load_map(path=None) -> GridMap:
    """Read a map file; ``None`` loads the bundled 32x20 arena."""
    if path is None:
        text = resources.files("staghunt").joinpath("data/default_map.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return parse_map(text)


def default_map() -> GridMap:
    return load_map(None)


@dataclass(frozen=True)
class ArenaConfig:
    attack_range: float = 5.0
    safe_distance: float = 3.0
    sensor_range: float = 32.0
    max_steps: int = 400

    def __post_init__(self):
        if self.attack_range <= 0:
            raise ValueError("attack_range must be positive")
        if self.safe_distance < 0:
            raise ValueError("safe_distance must be non-negative")
        if self.sensor_range <= 0:
            raise ValueError("sensor_range must be positive")


@dataclass(frozen=True)
class ArenaState:
    pos: Mapping[RobotId, Position]
    last_seen: Mapping[RobotId, Position] = field(default=None)
    step: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pos", {RobotId(k): Position(*v) for k, v in self.pos.items()})
        # Both teams see the spawn configuration at t=0.
        seen = self.pos if self.last_seen is None else self.last_seen
        object.__setattr__(self, "last_seen", {RobotId(k): Position(*v) for k, v in seen.items()})

    def validate(self, grid: GridMap) -> None:
        if set(self.pos) != set(RobotId):
            raise ValueError("state must place exactly four robots")
        cells = list(self.pos.values())
        if len(set(cells)) != len(cells):
            raise ValueError("two robots share a cell")
        for rid, p in self.pos.items():
            if not grid.in_bounds(p) or grid.is_wall(p):
                raise ValueError(f"{rid.name} at {tuple(p)} is out of bounds or on a wall")
        for rid, p in self.last_seen.items():
            if not grid.in_bounds(p):
                raise ValueError(f"last_seen for {rid.name} out of bounds")


def make_state(a1, a2, e1, e2, step: int = 0) -> ArenaState:
    return ArenaState(
        {RobotId.AGENT1: a1, RobotId.AGENT2: a2, RobotId.ENEMY1: e1, RobotId.ENEMY2: e2}, step=step
    )


def swap_teams(state: ArenaState) -> ArenaState:
    """Relabel the state so that the red team plays as Agent1/Agent2."""
    swap = {
        RobotId.AGENT1: RobotId.ENEMY1,
        RobotId.AGENT2: RobotId.ENEMY2,
        RobotId.ENEMY1: RobotId.AGENT1,
        RobotId.ENEMY2: RobotId.AGENT2,
    }
    return ArenaState(
        {swap[k]: v for k, v in state.pos.items()},
        {swap[k]: v for k, v in state.last_seen.items()},
        state.step,
    )


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def supercover(a, b) -> list:
    """Cells touched by the segment joining the centres of ``a`` and ``b``.

    Where the segment passes exactly through a cell corner, both side cells are
    included, so the result is the same set whichever end we start from.
    """
    x, y = a
    dx, dy = b[0] - a[0], b[1] - a[1]
    nx, ny = abs(dx), abs(dy)
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    cells = [Position(x, y)]
    ix = iy = 0
    while ix < nx or iy < ny:
        decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx
        if decision == 0:
            cells.append(Position(x + sx, y))
            cells.append(Position(x, y + sy))
            x += sx
            y += sy
            ix += 1
            iy += 1
        elif decision < 0:
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        cells.append(Position(x, y))
    return cells


@lru_cache(maxsize=1 << 20)
def _los_cached(grid: GridMap, a: Position, b: Position) -> bool:
    walls = grid.walls
    for c in supercover(a, b)[1:-1]:
        if walls[c[1], c[0]]:
            return False
    return True


def line_of_sight(grid: GridMap, a, b) -> bool:
    """True when no wall lies strictly between the two cells."""
    a, b = Position(*a), Position(*b)
    if a == b:
        return True
    # Canonical order keeps the cache symmetric.
    if b < a:
        a, b = b, a
    return _los_cached(grid, a, b)


def visible_cells(grid: GridMap, origin, rng: float) -> set:
    origin = Position(*origin)
    if not grid.in_bounds(origin) or grid.is_wall(origin):
        raise InvalidPoseError(f"sensor at {tuple(origin)} is out of bounds or inside a wall")
    r = int(math.floor(rng))
    out = set()
    for y in range(max(0, origin.y - r), min(grid.height, origin.y + r + 1)):
        for x in range(max(0, origin.x - r), min(grid.width, origin.x + r + 1)):
            p = Position(x, y)
            if distance(origin, p) <= rng and line_of_sight(grid, origin, p):
                out.add(p)
    return out


def in_attack_range(a, b, cfg: ArenaConfig, grid: GridMap) -> bool:
    return distance(a, b) <= cfg.attack_range and line_of_sight(grid, a, b)


def is_two_v_one(state: ArenaState, team: str, cfg: ArenaConfig, grid: GridMap) -> bool:
    m1, m2 = (state.pos[r] for r in TEAMS[team])
    for foe in opponents(team):
        target = state.pos[foe]
        if in_attack_range(m1, target, cfg, grid) and in_attack_range(m2, target, cfg, grid):
            return True
    return False


def _update_last_seen(state_pos, last_seen, cfg: ArenaConfig, grid: GridMap) -> Dict[RobotId, Position]:
    seen = dict(last_seen)
    for team in (BLUE, RED):
        eyes = [state_pos[r] for r in TEAMS[team]]
        for foe in opponents(team):
            p = state_pos[foe]
            if any(distance(e, p) <= cfg.sensor_range and line_of_sight(grid, e, p) for e in eyes):
                seen[foe] = p
    return seen


def step(
    state: ArenaState,
    actions: Mapping[RobotId, Action],
    grid: GridMap,
    cfg: ArenaConfig | None = None,
) -> ArenaState:
    """Advance one tick. Illegal moves (wall, border, occupied cell) become Stop."""
    cfg = cfg or ArenaConfig()
    pos = dict(state.pos)
    for rid in RESOLUTION_ORDER:
        dx, dy = ACTION_DELTAS[Action(actions.get(rid, Action.STOP))]
        if dx == 0 and dy == 0:
            continue
        cur = pos[rid]
        nxt = Position(cur.x + dx, cur.y + dy)
        if not grid.in_bounds(nxt) or grid.is_wall(nxt):
            continue
        if any(other == nxt for o, other in pos.items() if o != rid):
            continue
        pos[rid] = nxt
    seen = _update_last_seen(pos, state.last_seen, cfg, grid)
    return ArenaState(pos, seen, state.step + 1)


def observation(state: ArenaState, agent: RobotId, grid: GridMap) -> np.ndarray:
    """8-vector (agent, ally, enemy1, enemy2) with x/width and y/height."""
    agent = RobotId(agent)
    if agent not in TEAMS[BLUE]:
        raise ValueError(f"observation is defined for friendly robots, got {agent.name}")
    ally = RobotId.AGENT2 if agent == RobotId.AGENT1 else RobotId.AGENT1
    pts: Iterable[Position] = (
        state.pos[agent],
        state.pos[ally],
        state.last_seen[RobotId.ENEMY1],
        state.last_seen[RobotId.ENEMY2],
    )
    out = np.empty(8, dtype=np.float64)
    for i, p in enumerate(pts):
        out[2 * i] = p.x / grid.width
        out[2 * i + 1] = p.y / grid.height
    return out


def legal_actions(state: ArenaState, robot: RobotId, grid: GridMap) -> list:
    """Actions whose target cell is currently free (Stop is always legal)."""
    cur = state.pos[robot]
    taken = {p for r, p in state.pos.items() if r != robot}
    out = []
    for a, (dx, dy) in ACTION_DELTAS.items():
        nxt = Position(cur.x + dx, cur.y + dy)
        if a == Action.STOP or (grid.in_bounds(nxt) and not grid.is_wall(nxt) and nxt not in taken):
            out.append(a)
    return out


def with_step(state: ArenaState, n: int) -> ArenaState:
    return replace(state, step=n)
