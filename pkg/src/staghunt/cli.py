"""Command line entry point: ``staghunt {train,eval,plan,detect}``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import svg
from .arena import GridMap, Position, load_map
from .config import ConfigError, load_config
from .dqn.network import N_ACTIONS
from .dqn.training import train
from .dqn.weights import WeightFileError, load_weights, save_weights
from .harness import AStarPolicy, DqnPolicy, RandomPolicy, StationaryPolicy, run_tournament
from .lidar import Circle, detect_enemies
from .planner import PlanError, PlanRequest, plan

log = logging.getLogger("staghunt")


def _cell(text: str) -> Position:
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y cell coordinates, got {text!r}") from None
    return Position(x, y)


def make_policy(spec: str):
    """``astar``, ``random``, ``stationary`` or ``dqn:WEIGHTS[:model1|model2|model3]``."""
    kind, _, rest = spec.partition(":")
    if kind == "astar":
        return AStarPolicy()
    if kind == "random":
        return RandomPolicy()
    if kind == "stationary":
        return StationaryPolicy()
    if kind == "dqn":
        path, variant = rest, "model1"
        for v in ("model1", "model2", "model3"):
            if rest.endswith(":" + v):
                path, variant = rest[: -len(v) - 1], v
        n_out = N_ACTIONS * N_ACTIONS if variant == "model2" else N_ACTIONS
        return DqnPolicy(load_weights(path, n_out), variant)
    raise ValueError(f"unknown policy {spec!r}")


def _map(path) -> GridMap:
    return load_map(path)


def _write(path, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    cfg.override("train", model_variant=args.variant, total_episodes=args.episodes, seed=args.seed,
                  opponent=args.opponent, max_episode_steps=args.max_episode_steps)
    cfg.override("arena", attack_range=args.attack_range)
    grid = _map(args.map)
    tcfg = cfg.train_config()
    net, metrics = train(tcfg, grid, cfg.arena_config(), cfg.reward_config(grid))
    if args.out_weights:
        save_weights(net, args.out_weights)
    if args.metrics_csv:
        metrics.write_csv(args.metrics_csv)
    if args.plot:
        from .plotting import plot_training_curves

        plot_training_curves({tcfg.model_variant: metrics}, args.plot)
    last = metrics.records[-1] if metrics.records else None
    print(json.dumps({"episodes": tcfg.total_episodes, "variant": tcfg.model_variant,
                      "final_mean_reward": None if last is None else last.mean_reward}))
    return 0


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    cfg.override("arena", attack_range=args.attack_range, safe_distance=args.safe_distance,
                 max_steps=args.max_steps)
    grid = _map(args.map)
    blue, red = make_policy(args.blue), make_policy(args.red)
    on_match = None
    if args.trace_svg_dir:
        os.makedirs(args.trace_svg_dir, exist_ok=True)

        def on_match(rep, i, res):
            svg.emit_trace_svg(res, grid, os.path.join(args.trace_svg_dir, f"repeat{rep:02d}_match{i:03d}.svg"))

    result = run_tournament(blue, red, grid, cfg.arena_config(), args.matches, args.repeats, args.seed, on_match)
    text = result.to_json()
    if args.json_out:
        _write(args.json_out, text)
    else:
        sys.stdout.write(text)
    if args.csv_out:
        _write(args.csv_out, result.to_csv())
    if args.plot:
        from .plotting import plot_tournament

        plot_tournament(result, args.plot)
    return 0


def cmd_plan(args) -> int:
    grid = _map(args.map)
    req = PlanRequest(args.start, args.stag, args.hare, args.attack_range, args.safe_distance)
    try:
        path = plan(grid, req)
    except PlanError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        if args.svg:
            _write(args.svg, svg.plan_svg(grid, [], req.start, req.stag, req.hare, req.safe_distance))
        return 2
    text = json.dumps([[p.x, p.y] for p in path])
    if args.json_out:
        _write(args.json_out, text + "\n")
    else:
        print(text)
    if args.svg:
        _write(args.svg, svg.plan_svg(grid, path, req.start, req.stag, req.hare, req.safe_distance))
    return 0


def load_scene(path):
    """Scene JSON: ``map`` (file path or null for the bundled arena), ``sensors``
    (the two friendly robots, [x, y] cells) and ``robots`` (enemy cells)."""
    with open(path) as fh:
        scene = json.load(fh)
    map_ref = scene.get("map")
    if map_ref and not os.path.isabs(map_ref):
        map_ref = os.path.join(os.path.dirname(os.path.abspath(path)), map_ref)
    grid = load_map(map_ref)
    sensors = [Position(*p) for p in scene["sensors"]]
    robots = [Position(*p) for p in scene.get("robots", [])]
    return grid, sensors, robots, scene


def cmd_detect(args) -> int:
    cfg = load_config(args.config)
    grid, sensors, robots, scene = load_scene(args.scene)
    for key in ("robot_radius", "n_beams", "max_range"):
        if key in scene:
            cfg.override("detection", **{key: scene[key]})
    dets, scans, circles = detect_enemies(grid, sensors, robots, cfg.detection_config())
    out = {
        "detections": [{"center": [round(d.center[0], 6), round(d.center[1], 6)], "cell": [d.cell.x, d.cell.y]}
                       for d in dets],
        "circles": [[{"center": [round(c.center[0], 6), round(c.center[1], 6)], "radius": round(c.radius, 6)}
                     for c in per] for per in circles],
    }
    text = json.dumps(out, indent=2) + "\n"
    if args.json_out:
        _write(args.json_out, text)
    else:
        sys.stdout.write(text)
    if args.svg:
        flat: list[Circle] = [c for per in circles for c in per]
        _write(args.svg, svg.lidar_svg(grid, scans, flat, dets))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="staghunt", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a DQN controller")
    t.add_argument("--variant", choices=("model1", "model2", "model3"))
    t.add_argument("--episodes", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--map", help="map file (default: bundled 32x20 arena)")
    t.add_argument("--opponent", choices=("random", "stationary"))
    t.add_argument("--max-episode-steps", type=int)
    t.add_argument("--attack-range", type=float)
    t.add_argument("--config")
    t.add_argument("--out-weights")
    t.add_argument("--metrics-csv")
    t.add_argument("--plot", help="write training curves to this image file")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="run a tournament between two policies")
    e.add_argument("--blue", default="astar", help="astar | random | stationary | dqn:WEIGHTS[:VARIANT]")
    e.add_argument("--red", default="random")
    e.add_argument("--matches", type=int, default=100)
    e.add_argument("--repeats", type=int, default=5)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--map")
    e.add_argument("--config")
    e.add_argument("--attack-range", type=float)
    e.add_argument("--safe-distance", type=float)
    e.add_argument("--max-steps", type=int)
    e.add_argument("--json-out")
    e.add_argument("--csv-out")
    e.add_argument("--trace-svg-dir")
    e.add_argument("--plot", help="write a success-rate chart to this image file")
    e.set_defaults(func=cmd_eval)

    pl = sub.add_parser("plan", help="plan a standoff path")
    pl.add_argument("--map")
    pl.add_argument("--start", type=_cell, required=True)
    pl.add_argument("--stag", type=_cell, required=True)
    pl.add_argument("--hare", type=_cell, required=True)
    pl.add_argument("--attack-range", type=float, default=5.0)
    pl.add_argument("--safe-distance", type=float, default=3.0)
    pl.add_argument("--json-out")
    pl.add_argument("--svg")
    pl.set_defaults(func=cmd_plan)

    d = sub.add_parser("detect", help="run lidar enemy detection on a scene file")
    d.add_argument("--scene", required=True)
    d.add_argument("--config")
    d.add_argument("--json-out")
    d.add_argument("--svg")
    d.set_defaults(func=cmd_detect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, WeightFileError, ValueError, OSError) as exc:
        print(f"staghunt: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
