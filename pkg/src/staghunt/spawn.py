from __future__ import annotations

import numpy as np

from .arena import BLUE, RED, ArenaConfig, ArenaState, GridMap, RobotId, is_two_v_one

MAX_SPAWN_TRIES = 10_000


def spawn_random(grid: GridMap, rng: np.random.Generator, cfg: ArenaConfig | None = None) -> ArenaState:
    """Four distinct uniform empty cells, resampled while either team already has a 2v1."""
    cfg = cfg or ArenaConfig()
    free = grid.free_cells()
    if len(free) < 4:
        raise ValueError(f"map has {len(free)} empty cells, need at least 4")
    for _ in range(MAX_SPAWN_TRIES):
        picks = rng.choice(len(free), size=4, replace=False)
        state = ArenaState({rid: free[i] for rid, i in zip(RobotId, picks)})
        if not (is_two_v_one(state, BLUE, cfg, grid) or is_two_v_one(state, RED, cfg, grid)):
            return state
    raise ValueError("could not find a spawn without an immediate 2v1; map too small for attack_range")
