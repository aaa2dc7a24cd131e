import json

import numpy as np
import pytest
from scipy.stats import binomtest, chisquare

from staghunt.arena import BLUE, RED, Action, ArenaConfig, GridMap, RobotId, is_two_v_one, make_state
from staghunt.dqn.network import QNetwork
from staghunt.harness import (
    AStarPolicy,
    DqnPolicy,
    RandomPolicy,
    StationaryPolicy,
    match_seed,
    run_match,
    run_tournament,
    team_actions,
)
from staghunt.spawn import spawn_random


def test_spawn_on_four_cell_map(make_grid):
    g = make_grid(["#..", "#.#", "#.#", "###"])
    s = spawn_random(g, np.random.default_rng(0), ArenaConfig(attack_range=0.5))
    assert set(s.pos.values()) == set(g.free_cells())


def test_spawn_too_small(make_grid):
    with pytest.raises(ValueError):
        spawn_random(make_grid(["..#", "###"]), np.random.default_rng(0))


def test_spawn_is_seeded(arena_map):
    a = spawn_random(arena_map, np.random.default_rng(42))
    b = spawn_random(arena_map, np.random.default_rng(42))
    assert a == b


def test_spawn_never_prewon(arena_map):
    rng = np.random.default_rng(1)
    cfg = ArenaConfig()
    for _ in range(300):
        s = spawn_random(arena_map, rng, cfg)
        assert not is_two_v_one(s, BLUE, cfg, arena_map) and not is_two_v_one(s, RED, cfg, arena_map)


@pytest.mark.slow
def test_spawn_occupancy_uniform(arena_map):
    rng = np.random.default_rng(2024)
    free = arena_map.free_cells()
    index = {c: i for i, c in enumerate(free)}
    counts = np.zeros(len(free))
    for _ in range(10_000):
        for c in spawn_random(arena_map, rng).pos.values():
            counts[index[c]] += 1
    assert chisquare(counts).pvalue > 0.01


def test_stationary_teams_draw_at_cap(arena_map):
    s = make_state((0, 0), (31, 19), (0, 19), (31, 0))
    res = run_match(StationaryPolicy(), StationaryPolicy(), arena_map, ArenaConfig(max_steps=25), state=s)
    assert res.winner == "draw" and res.steps == 25 and len(res.trace) == 26
    assert all(t.pos == s.pos for t in res.trace)


def test_blue_finishes_near_terminal_state():
    g = GridMap.empty(20, 20)
    s = make_state((5, 10), (10, 16), (10, 10), (18, 18))
    res = run_match(AStarPolicy(), StationaryPolicy(), g, ArenaConfig(), state=s)
    assert res.winner == BLUE and res.steps <= 2


def test_match_is_deterministic(arena_map):
    runs = [run_match(AStarPolicy(), RandomPolicy(), arena_map, seed=match_seed(3, 0, 7)) for _ in range(2)]
    assert runs[0].winner == runs[1].winner and runs[0].steps == runs[1].steps
    assert runs[0].trace == runs[1].trace


def test_protocol_correctness(arena_map):
    cfg = ArenaConfig()
    for i in range(15):
        res = run_match(AStarPolicy(), RandomPolicy(), arena_map, cfg, seed=match_seed(0, 0, i))
        for st in res.trace[:-1]:
            assert not is_two_v_one(st, BLUE, cfg, arena_map) and not is_two_v_one(st, RED, cfg, arena_map)
        last = res.trace[-1]
        if res.winner in (BLUE, RED):
            assert is_two_v_one(last, res.winner, cfg, arena_map)
        elif res.steps < cfg.max_steps:
            assert is_two_v_one(last, BLUE, cfg, arena_map) and is_two_v_one(last, RED, cfg, arena_map)


def test_red_side_sees_mirrored_state(arena_map):
    s = make_state((1, 1), (2, 1), (20, 10), (21, 10))

    class Recorder(StationaryPolicy):
        def act(self, state, grid, cfg):
            self.seen = state
            return {RobotId.AGENT1: Action.RIGHT, RobotId.AGENT2: Action.DOWN}

    rec = Recorder()
    acts = team_actions(rec, s, RED, arena_map, ArenaConfig())
    assert rec.seen.pos[RobotId.AGENT1] == (20, 10)
    assert acts == {RobotId.ENEMY1: Action.RIGHT, RobotId.ENEMY2: Action.DOWN}


def test_dqn_policy_checks_outputs():
    net = QNetwork.create((8, 4, 5), np.random.default_rng(0))
    with pytest.raises(ValueError):
        DqnPolicy(net, "model2")
    joint = QNetwork.create((8, 4, 25), np.random.default_rng(0))
    acts = DqnPolicy(joint, "model2").act(make_state((0, 0), (1, 0), (5, 5), (6, 6)), GridMap.empty(8, 8), ArenaConfig())
    assert set(acts) == {RobotId.AGENT1, RobotId.AGENT2}


def test_stationary_tournament_all_draws(arena_map):
    res = run_tournament(StationaryPolicy(), StationaryPolicy(), arena_map, ArenaConfig(max_steps=5), 10, 2)
    assert res.rates(BLUE) == [0.0, 0.0] and res.rates(RED) == [0.0, 0.0]
    assert all(r.draws == 10 for r in res.repeats)


def test_tournament_conservation_and_reproducibility(arena_map):
    cfg = ArenaConfig(max_steps=60)
    a = run_tournament(AStarPolicy(), RandomPolicy(), arena_map, cfg, 12, 3, base_seed=5)
    b = run_tournament(AStarPolicy(), RandomPolicy(), arena_map, cfg, 12, 3, base_seed=5)
    for r in a.repeats:
        assert r.blue_wins + r.red_wins + r.draws == r.matches == 12
    assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()
    doc = json.loads(a.to_json())
    assert doc["schema_version"] == 1 and len(doc["repeats"]) == 3
    assert doc["aggregate"]["blue_rate_min"] <= doc["aggregate"]["blue_rate_max"]
    assert a.to_csv().splitlines()[0].split(",")[:3] == ["repeat", "matches", "blue_wins"]


def test_tournament_rejects_empty(arena_map):
    with pytest.raises(ValueError):
        run_tournament(StationaryPolicy(), StationaryPolicy(), arena_map, n_matches=0)


@pytest.mark.slow
def test_color_swap_symmetry(arena_map):
    # Identical planners on both sides: neither colour should have an edge.
    res = run_tournament(AStarPolicy(), AStarPolicy(), arena_map, ArenaConfig(max_steps=150), 100, 5, base_seed=9)
    blue = sum(r.blue_wins for r in res.repeats)
    red = sum(r.red_wins for r in res.repeats)
    assert blue + red > 50
    assert binomtest(blue, blue + red, 0.5).pvalue > 0.01
