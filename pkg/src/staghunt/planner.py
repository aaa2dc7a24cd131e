"""Standoff A*: reach a cell that has the stag in range while keeping clear of the hare."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

from .arena import (
    Action,
    ArenaConfig,
    GridMap,
    Position,
    distance,
    in_attack_range,
    manhattan,
)


class PlanError(Exception):
    pass


class InvalidStart(PlanError):
    pass


class NoSafePath(PlanError):
    pass


@dataclass(frozen=True)
class PlanRequest:
    start: Position
    stag: Position
    hare: Position
    attack_range: float = 5.0
    safe_distance: float = 3.0

    def __post_init__(self):
        for name in ("start", "stag", "hare"):
            object.__setattr__(self, name, Position(*getattr(self, name)))


@lru_cache(maxsize=None)
def max_manhattan_in_range(attack_range: float) -> int:
    """Largest |dx|+|dy| over lattice offsets with Euclidean norm <= attack_range."""
    r = int(math.floor(attack_range))
    best = 0
    for dx in range(r + 1):
        dy = int(math.floor(math.sqrt(max(0.0, attack_range**2 - dx * dx))))
        while dx * dx + dy * dy > attack_range**2:
            dy -= 1
        best = max(best, dx + dy)
    return best


def heuristic(c, stag, attack_range: float) -> int:
    return max(0, manhattan(c, stag) - max_manhattan_in_range(attack_range))


def is_safe(c, req: PlanRequest) -> bool:
    return distance(c, req.hare) >= req.safe_distance


def is_goal(c, grid: GridMap, req: PlanRequest) -> bool:
    """Standoff predicate shared by the planner and its test oracles."""
    if grid.is_wall(c) or not is_safe(c, req):
        return False
    if req.attack_range >= 1 and c == req.stag:
        return False
    return in_attack_range(c, req.stag, ArenaConfig(attack_range=req.attack_range), grid)


def neighbors(grid: GridMap, c):
    x, y = c
    for nx, ny in ((x, y - 1), (x, y + 1), (x - 1, y), (x + 1, y)):
        if 0 <= nx < grid.width and 0 <= ny < grid.height and not grid.walls[ny, nx]:
            yield Position(nx, ny)


def plan(grid: GridMap, req: PlanRequest) -> list:
    """Shortest 4-connected path from ``req.start`` into the standoff goal set.

    Raises InvalidStart when the start is a wall or inside the hare's exclusion
    zone, NoSafePath when no goal cell is reachable without entering it.
    """
    start = req.start
    if not grid.in_bounds(start) or grid.is_wall(start):
        raise InvalidStart(f"start {tuple(start)} is not a free cell")
    if not is_safe(start, req):
        raise InvalidStart(f"start {tuple(start)} is inside the hare exclusion zone")

    h0 = heuristic(start, req.stag, req.attack_range)
    # Heap order: f, then h, then row-major position.
    frontier = [(h0, h0, start.y, start.x)]
    g_cost = {start: 0}
    parent = {start: None}
    closed = set()
    while frontier:
        _, _, y, x = heapq.heappop(frontier)
        cur = Position(x, y)
        if cur in closed:
            continue
        closed.add(cur)
        if is_goal(cur, grid, req):
            path = []
            while cur is not None:
                path.append(cur)
                cur = parent[cur]
            return path[::-1]
        g_next = g_cost[cur] + 1
        for nb in neighbors(grid, cur):
            if nb in closed or not is_safe(nb, req):
                continue
            if g_next < g_cost.get(nb, math.inf):
                g_cost[nb] = g_next
                parent[nb] = cur
                h = heuristic(nb, req.stag, req.attack_range)
                heapq.heappush(frontier, (g_next + h, h, nb.y, nb.x))
    raise NoSafePath(f"no safe standoff cell reachable from {tuple(start)}")


def plan_for(grid: GridMap, start, stag, hare, cfg: ArenaConfig) -> list:
    return plan(grid, PlanRequest(start, stag, hare, cfg.attack_range, cfg.safe_distance))


_MOVES = {(0, -1): Action.UP, (0, 1): Action.DOWN, (-1, 0): Action.LEFT, (1, 0): Action.RIGHT}


def next_action(path, current) -> Action:
    current = Position(*current)
    try:
        i = list(path).index(current)
    except ValueError:
        raise ValueError(f"{tuple(current)} is not on the path; replan") from None
    if i == len(path) - 1:
        return Action.STOP
    nxt = path[i + 1]
    return _MOVES[(nxt[0] - current.x, nxt[1] - current.y)]
