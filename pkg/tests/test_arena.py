import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import los_oracle

from staghunt.arena import (
    BLUE,
    RED,
    Action,
    ArenaConfig,
    ArenaState,
    CellKind,
    GridMap,
    InvalidPoseError,
    MapParseError,
    Position,
    RobotId,
    distance,
    in_attack_range,
    is_two_v_one,
    line_of_sight,
    make_state,
    observation,
    parse_map,
    step,
    supercover,
    swap_teams,
    visible_cells,
)
from staghunt.spawn import spawn_random

ALL_STOP = {r: Action.STOP for r in RobotId}


def test_parse_identity():
    g = parse_map("..\n..")
    assert (g.width, g.height) == (2, 2)
    assert not g.walls.any()


def test_parse_walls():
    g = parse_map("#.\n.#\n")
    assert g.cell((0, 0)) == CellKind.WALL and g.cell((1, 1)) == CellKind.WALL
    assert g.cell((1, 0)) == CellKind.EMPTY


@pytest.mark.parametrize(
    "text, fragment",
    [("", "empty"), ("..\n.", "line 2"), ("..\n.x", "line 2, column 2"), ("...\n", "2x2")],
)
def test_parse_errors(text, fragment):
    with pytest.raises(MapParseError, match=fragment):
        parse_map(text)


def test_default_map_round_trip(arena_map):
    assert (arena_map.width, arena_map.height) == (32, 20)
    assert parse_map(arena_map.to_text()) == arena_map
    # Point-symmetric layout, like the real venue.
    assert np.array_equal(arena_map.walls, arena_map.walls[::-1, ::-1])


@pytest.mark.parametrize(
    "a, b, d", [((0, 0), (0, 0), 0.0), ((0, 0), (3, 4), 5.0), ((1, 1), (4, 1), 3.0)]
)
def test_distance(a, b, d):
    assert distance(a, b) == d


def _state(a1=(0, 0), a2=(2, 0), e1=(0, 4), e2=(4, 4)):
    return make_state(a1, a2, e1, e2)


def test_all_stop_only_advances_counter():
    g = GridMap.empty(5, 5)
    s = _state()
    n = step(s, ALL_STOP, g)
    assert n.pos == s.pos and n.step == s.step + 1


def test_boundary_clamp():
    g = GridMap.empty(5, 5)
    n = step(_state(), {RobotId.AGENT1: Action.LEFT}, g)
    assert n.pos[RobotId.AGENT1] == (0, 0)


def test_wall_block(make_grid):
    g = make_grid(["......", "......", "...#..", "......", "......", "......"])
    s = make_state((3, 3), (0, 0), (5, 5), (0, 5))
    n = step(s, {RobotId.AGENT1: Action.UP}, g)
    assert n.pos[RobotId.AGENT1] == (3, 3)


def test_moves_and_resolution_order():
    g = GridMap.empty(5, 5)
    s = make_state((1, 1), (2, 1), (4, 4), (0, 4))
    # Agent1 moves first into a cell nobody holds yet; Agent2 then follows into Agent1's old cell.
    n = step(s, {RobotId.AGENT1: Action.DOWN, RobotId.AGENT2: Action.LEFT}, g)
    assert n.pos[RobotId.AGENT1] == (1, 2) and n.pos[RobotId.AGENT2] == (1, 1)
    # Agent1 cannot enter Agent2's cell because Agent2 has not moved yet.
    n = step(s, {RobotId.AGENT1: Action.RIGHT, RobotId.AGENT2: Action.RIGHT}, g)
    assert n.pos[RobotId.AGENT1] == (1, 1) and n.pos[RobotId.AGENT2] == (3, 1)
    # Two robots heading for the same cell: the earlier one in the order wins.
    s = make_state((1, 1), (3, 1), (4, 4), (0, 4))
    n = step(s, {RobotId.AGENT1: Action.RIGHT, RobotId.AGENT2: Action.LEFT}, g)
    assert n.pos[RobotId.AGENT1] == (2, 1) and n.pos[RobotId.AGENT2] == (3, 1)


def test_visible_cells_open_map():
    g = GridMap.empty(5, 5)
    assert visible_cells(g, (2, 2), 10) == {Position(x, y) for x in range(5) for y in range(5)}
    assert visible_cells(g, (2, 2), 0) == {Position(2, 2)}


def test_visible_cells_wall_east_matches_ray_oracle(make_grid):
    g = make_grid([".....", ".....", "...#.", ".....", "....."])
    vis = visible_cells(g, (2, 2), 10)
    walls = {(3, 2)}
    expected = {Position(x, y) for x in range(5) for y in range(5) if los_oracle(walls, (2, 2), (x, y))}
    assert vis == expected
    assert Position(4, 2) not in vis  # directly behind the wall
    assert Position(3, 2) in vis  # the wall face itself is seen


def test_visible_cells_rejects_wall_origin(make_grid):
    with pytest.raises(InvalidPoseError):
        visible_cells(make_grid(["#.", ".."]), (0, 0), 3)


def test_supercover_includes_both_corner_neighbours():
    cells = set(supercover((0, 0), (2, 2)))
    assert cells == {(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2)}


random_maps = st.integers(4, 9).flatmap(
    lambda w: st.integers(4, 9).flatmap(
        lambda h: st.tuples(st.just(w), st.just(h), st.lists(st.booleans(), min_size=w * h, max_size=w * h))
    )
)


@settings(max_examples=60, deadline=None)
@given(random_maps, st.data())
def test_line_of_sight_matches_exact_oracle_and_is_symmetric(drawn, data):
    w, h, flat = drawn
    walls = np.array(flat, dtype=bool).reshape(h, w) & (np.arange(w * h).reshape(h, w) % 3 == 0)
    g = GridMap(walls)
    wall_set = {(x, y) for y in range(h) for x in range(w) if walls[y, x]}
    free = [(x, y) for y in range(h) for x in range(w) if not walls[y, x]]
    if len(free) < 2:
        return
    a = data.draw(st.sampled_from(free))
    for b in free:
        assert line_of_sight(g, a, b) == los_oracle(wall_set, a, b)
        r = data.draw(st.floats(0, 12))
        assert (b in visible_cells(g, a, r)) == (a in visible_cells(g, b, r))


def test_observation_normalised(arena_map):
    s = make_state((0, 0), (16, 10), (8, 5), (31, 19))
    o = observation(s, RobotId.AGENT1, arena_map)
    assert o[:2].tolist() == [0.0, 0.0]
    assert o.tolist() == [0, 0, 0.5, 0.5, 0.25, 0.25, 31 / 32, 19 / 20]
    o2 = observation(s, RobotId.AGENT2, arena_map)
    assert o2[:4].tolist() == [0.5, 0.5, 0.0, 0.0]
    assert ((o >= 0) & (o < 1)).all()


def test_observation_rejects_enemy(arena_map):
    with pytest.raises(ValueError):
        observation(make_state((0, 0), (1, 0), (2, 0), (3, 0)), RobotId.ENEMY1, arena_map)


def test_occluded_enemy_keeps_spawn_last_seen(make_grid):
    # A solid wall column separates the agents (left) from Enemy1 (right).
    g = make_grid(["...#...", "...#...", "...#...", "...#...", "...#..."])
    cfg = ArenaConfig(attack_range=1)
    s = make_state((0, 0), (0, 4), (5, 0), (1, 2))
    trail = [s.pos[RobotId.ENEMY1]]
    for a in (Action.DOWN, Action.DOWN, Action.RIGHT):
        s = step(s, {RobotId.ENEMY1: a}, g, cfg)
        trail.append(s.pos[RobotId.ENEMY1])
    assert trail == [(5, 0), (5, 1), (5, 2), (6, 2)]
    assert s.last_seen[RobotId.ENEMY1] == (5, 0)
    assert observation(s, RobotId.AGENT1, g)[4:6].tolist() == [5 / 7, 0.0]
    # Enemy2 stays in plain view, so its entry tracks the truth.
    assert s.last_seen[RobotId.ENEMY2] == s.pos[RobotId.ENEMY2]


def test_attack_range_basic():
    g = GridMap.empty(10, 10)
    cfg = ArenaConfig(attack_range=5)
    assert in_attack_range((3, 3), (3, 3), cfg, g)
    assert not in_attack_range((0, 0), (0, 6), cfg, g)


def test_attack_blocked_by_wall_in_corridor(make_grid):
    g = make_grid([".#.", "###"])
    cfg = ArenaConfig(attack_range=5)
    assert distance((0, 0), (2, 0)) == 2
    assert not in_attack_range((0, 0), (2, 0), cfg, g)
    assert Position(2, 0) not in visible_cells(g, (0, 0), 5)


def test_two_v_one_cases():
    g = GridMap.empty(8, 8)
    cfg = ArenaConfig(attack_range=1.5)
    both_on_e1 = make_state((2, 3), (4, 3), (3, 3), (7, 7))
    assert is_two_v_one(both_on_e1, BLUE, cfg, g)
    split = make_state((0, 1), (7, 6), (0, 0), (7, 7))
    assert not is_two_v_one(split, BLUE, cfg, g)


def test_two_v_one_enumerated_on_toy_state():
    g = GridMap.empty(4, 4)
    cfg = ArenaConfig(attack_range=2)
    s = make_state((1, 1), (2, 2), (1, 2), (2, 1))
    in_range = {
        (a, e): in_attack_range(s.pos[a], s.pos[e], cfg, g)
        for a in (RobotId.AGENT1, RobotId.AGENT2)
        for e in (RobotId.ENEMY1, RobotId.ENEMY2)
    }
    assert all(in_range.values())
    enemies = (RobotId.ENEMY1, RobotId.ENEMY2)
    expected = any(in_range[(RobotId.AGENT1, e)] and in_range[(RobotId.AGENT2, e)] for e in enemies)
    assert expected
    assert is_two_v_one(s, BLUE, cfg, g)
    assert is_two_v_one(s, RED, cfg, g)


def test_swap_teams_roundtrip():
    s = make_state((0, 0), (1, 0), (2, 0), (3, 0))
    t = swap_teams(s)
    assert t.pos[RobotId.AGENT1] == (2, 0) and t.pos[RobotId.ENEMY2] == (1, 0)
    assert swap_teams(t).pos == s.pos


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.integers(0, 4), min_size=4 * 30, max_size=4 * 30))
def test_random_actions_keep_occupancy_invariants(arena_map, seed, acts):
    g = arena_map
    s = spawn_random(g, np.random.default_rng(seed))
    for t in range(30):
        joint = {r: Action(acts[4 * t + int(r)]) for r in RobotId}
        n1 = step(s, joint, g)
        n2 = step(s, joint, g)
        assert n1 == n2
        cells = list(n1.pos.values())
        assert len(set(cells)) == 4
        assert not any(g.is_wall(c) for c in cells)
        n1.validate(g)
        s = n1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.5, 6), st.floats(0, 6))
def test_two_v_one_monotone_in_range(arena_map, seed, r, extra):
    g = arena_map
    rng = np.random.default_rng(seed)
    free = g.free_cells()
    idx = rng.choice(len(free), 4, replace=False)
    s = ArenaState({rid: free[i] for rid, i in zip(RobotId, idx)})
    for team in (BLUE, RED):
        if is_two_v_one(s, team, ArenaConfig(attack_range=r), g):
            assert is_two_v_one(s, team, ArenaConfig(attack_range=r + extra), g)
