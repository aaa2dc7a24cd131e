"""Synthetic 2D lidar and secant-circle robot detection.

Everything is in cell units. Cell ``(x, y)`` covers ``[x, x+1) x [y, y+1)``
so a robot standing on that cell is a disc centred at ``(x + 0.5, y + 0.5)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import numpy as np

from .arena import GridMap, InvalidPoseError, Position


@dataclass(frozen=True)
class DetectionConfig:
    split_threshold: float = 0.2
    min_points_per_segment: int = 4
    circle_radius_margin: float = 0.3
    robot_radius: float = 0.5
    ally_match_radius: float = 1.0
    max_point_gap: float = 0.5
    n_beams: int = 1600
    max_range: float = 32.0
    range_noise: float = 0.0

    def __post_init__(self):
        for name in ("split_threshold", "min_points_per_segment", "circle_radius_margin", "robot_radius",
                     "ally_match_radius", "max_point_gap", "n_beams", "max_range"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True, eq=False)
class LidarScan:
    origin: tuple
    bearings: np.ndarray
    ranges: np.ndarray
    hits: np.ndarray
    max_range: float

    def points(self) -> np.ndarray:
        """Cartesian coordinates of every beam end (hit or not), shape (n, 2)."""
        ox, oy = self.origin
        return np.column_stack((ox + self.ranges * np.cos(self.bearings), oy + self.ranges * np.sin(self.bearings)))


class Segment(NamedTuple):
    p1: tuple
    p2: tuple
    points: np.ndarray

    @property
    def length(self) -> float:
        return math.dist(self.p1, self.p2)


class Circle(NamedTuple):
    center: tuple
    radius: float


class Detection(NamedTuple):
    center: tuple
    cell: Position


def cell_center(p) -> tuple:
    return (p[0] + 0.5, p[1] + 0.5)


def _ray_boxes(ox, oy, dx, dy, boxes):
    """Entry distance of each ray into the nearest box (inf when missed)."""
    if len(boxes) == 0:
        return np.full(dx.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_x = 1.0 / dx[:, None]
        inv_y = 1.0 / dy[:, None]
        tx1 = (boxes[None, :, 0] - ox) * inv_x
        tx2 = (boxes[None, :, 0] + 1.0 - ox) * inv_x
        ty1 = (boxes[None, :, 1] - oy) * inv_y
        ty2 = (boxes[None, :, 1] + 1.0 - oy) * inv_y
    # Axis-parallel rays: inside the slab -> unbounded, outside -> never enters.
    zx = dx[:, None] == 0
    inside_x = (boxes[None, :, 0] <= ox) & (ox <= boxes[None, :, 0] + 1.0)
    tx1 = np.where(zx, np.where(inside_x, -np.inf, np.inf), tx1)
    tx2 = np.where(zx, np.inf, tx2)
    zy = dy[:, None] == 0
    inside_y = (boxes[None, :, 1] <= oy) & (oy <= boxes[None, :, 1] + 1.0)
    ty1 = np.where(zy, np.where(inside_y, -np.inf, np.inf), ty1)
    ty2 = np.where(zy, np.inf, ty2)
    tnear = np.maximum(np.minimum(tx1, tx2), np.minimum(ty1, ty2))
    tfar = np.minimum(np.maximum(tx1, tx2), np.maximum(ty1, ty2))
    hit = (tnear <= tfar) & (tfar >= 0)
    t = np.where(hit, np.maximum(tnear, 0.0), np.inf)
    return t.min(axis=1)


def _ray_discs(ox, oy, dx, dy, discs):
    if not discs:
        return np.full(dx.shape, np.inf)
    best = np.full(dx.shape, np.inf)
    for (cx, cy), r in discs:
        ex, ey = cx - ox, cy - oy
        c = ex * ex + ey * ey - r * r
        if c <= 0:
            continue
        b = dx * ex + dy * ey
        disc = b * b - c
        ok = (disc >= 0) & (b > 0)
        t = np.where(ok, b - np.sqrt(np.where(ok, disc, 0.0)), np.inf)
        best = np.minimum(best, t)
    return best


def simulate_scan(
    grid: GridMap,
    pose,
    n_beams: int = 1600,
    max_range: float = 32.0,
    robots: Sequence = (),
    noise: float = 0.0,
    rng: np.random.Generator | None = None,
) -> LidarScan:
    """Cast ``n_beams`` evenly spaced rays from a continuous ``pose``.

    ``robots`` holds ``(cell, radius)`` pairs; each robot is a disc on its cell centre.
    Discs containing the pose (the sensor's own body) are ignored.
    """
    ox, oy = float(pose[0]), float(pose[1])
    cx, cy = int(math.floor(ox)), int(math.floor(oy))
    if grid.in_bounds((cx, cy)) and grid.is_wall((cx, cy)):
        raise InvalidPoseError(f"sensor pose {(ox, oy)} is inside a wall")
    bearings = 2.0 * np.pi * np.arange(n_beams) / n_beams
    dx, dy = np.cos(bearings), np.sin(bearings)
    wy, wx = np.nonzero(grid.walls)
    near = (np.abs(wx + 0.5 - ox) <= max_range + 1) & (np.abs(wy + 0.5 - oy) <= max_range + 1)
    boxes = np.column_stack((wx[near], wy[near])).astype(np.float64)
    discs = [(cell_center(p), float(r)) for p, r in robots]
    t = np.minimum(_ray_boxes(ox, oy, dx, dy, boxes), _ray_discs(ox, oy, dx, dy, discs))
    if noise > 0:
        rng = rng if rng is not None else np.random.default_rng()
        t = t + rng.normal(0.0, noise, size=t.shape)
    hits = t <= max_range
    ranges = np.where(hits, np.maximum(t, 0.0), max_range)
    return LidarScan((ox, oy), bearings, ranges, hits, max_range)


def _split(pts: np.ndarray, threshold: float) -> List[np.ndarray]:
    """Recursive split on the point farthest from the end-to-end chord."""
    if len(pts) <= 2:
        return [pts]
    a, b = pts[0], pts[-1]
    chord = b - a
    length = math.hypot(*chord)
    if length == 0:
        dev = np.hypot(*(pts - a).T)
    else:
        dev = np.abs(chord[0] * (pts[:, 1] - a[1]) - chord[1] * (pts[:, 0] - a[0])) / length
    k = int(np.argmax(dev))
    if dev[k] <= threshold or k in (0, len(pts) - 1):
        return [pts]
    return _split(pts[: k + 1], threshold) + _split(pts[k:], threshold)


def _max_deviation(pts: np.ndarray) -> float:
    a, b = pts[0], pts[-1]
    chord = b - a
    length = math.hypot(*chord)
    if length == 0:
        return float(np.max(np.hypot(*(pts - a).T)))
    return float(np.max(np.abs(chord[0] * (pts[:, 1] - a[1]) - chord[1] * (pts[:, 0] - a[0])) / length))


def _chord(pts: np.ndarray) -> float:
    return math.dist(pts[0], pts[-1])


def _groups(scan: LidarScan, max_gap: float) -> List[np.ndarray]:
    pts = scan.points()
    hits = scan.hits
    n = len(hits)
    if not hits.any():
        return []
    # Rotate so index 0 is a miss or a break, letting groups wrap past bearing 0.
    start = 0
    if hits.all():
        gaps = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
        start = int(np.argmax(gaps)) + 1
    else:
        start = int(np.argmin(hits))
    groups, cur = [], []
    for k in range(n):
        i = (start + k) % n
        if not hits[i]:
            if cur:
                groups.append(cur)
            cur = []
            continue
        if cur and math.dist(pts[cur[-1]], pts[i]) > max_gap:
            groups.append(cur)
            cur = []
        cur.append(i)
    if cur:
        groups.append(cur)
    return [pts[g] for g in groups]


def extract_segments(scan: LidarScan, cfg: DetectionConfig = DetectionConfig()) -> List[Segment]:
    """Split-and-merge line extraction over contiguous runs of hit points."""
    # Adjacent pieces that together are no wider than a robot are one object.
    robot_width = 2.0 * cfg.robot_radius + cfg.split_threshold
    segments = []
    for group in _groups(scan, cfg.max_point_gap):
        if len(group) < cfg.min_points_per_segment:
            continue
        pieces = _split(group, cfg.split_threshold)
        merged = [pieces[0]]
        for piece in pieces[1:]:
            joined = np.vstack((merged[-1], piece[1:]))
            if _max_deviation(joined) <= cfg.split_threshold or _chord(joined) <= robot_width:
                merged[-1] = joined
            else:
                merged.append(piece)
        for piece in merged:
            if len(piece) < cfg.min_points_per_segment:
                continue
            p1, p2 = tuple(map(float, piece[0])), tuple(map(float, piece[-1]))
            if p1 != p2:
                segments.append(Segment(p1, p2, piece))
    return segments


def segment_to_circle(seg: Segment, sensor, cfg: DetectionConfig = DetectionConfig()) -> Circle:
    """Treat the segment as a chord; push the centre away from the sensor by the margin."""
    (x1, y1), (x2, y2) = seg.p1, seg.p2
    mx, my = (x1 + x2) / 2.0, (y1 + y2) / 2.0
    length = math.hypot(x2 - x1, y2 - y1)
    nx, ny = -(y2 - y1) / length, (x2 - x1) / length
    if nx * (mx - sensor[0]) + ny * (my - sensor[1]) < 0:
        nx, ny = -nx, -ny
    m = cfg.circle_radius_margin
    return Circle((mx + m * nx, my + m * ny), length / 2.0 + m)


def _containing_cells(x: float, y: float) -> list:
    xs = [int(x) - 1, int(x)] if float(x).is_integer() else [math.floor(x)]
    ys = [int(y) - 1, int(y)] if float(y).is_integer() else [math.floor(y)]
    return [(cx, cy) for cx in xs for cy in ys]


def center_in_wall(center, grid: GridMap) -> bool:
    """True when the point lies inside wall cells; boundaries count as the empty side."""
    cells = _containing_cells(*center)
    return all(grid.in_bounds(c) and grid.is_wall(c) for c in cells)


def filter_walls(circles, grid: GridMap) -> list:
    return [c for c in circles if not center_in_wall(c.center, grid)]


def snap_to_free_cell(center, grid: GridMap) -> Position:
    cx, cy = math.floor(center[0]), math.floor(center[1])
    if grid.in_bounds((cx, cy)) and not grid.is_wall((cx, cy)):
        return Position(cx, cy)
    ys, xs = np.nonzero(~grid.walls)
    d = (xs + 0.5 - center[0]) ** 2 + (ys + 0.5 - center[1]) ** 2
    k = int(np.argmin(d))  # row-major order breaks ties
    return Position(int(xs[k]), int(ys[k]))


def fuse_views(detections_a, detections_b, ally_positions, grid: GridMap,
               cfg: DetectionConfig = DetectionConfig()) -> List[Detection]:
    """Merge two sensors' circles into enemy detections.

    Circles near a known ally are dropped; the rest are clustered (single
    linkage within ``ally_match_radius``) and replaced by their centroid.
    """
    allies = [cell_center(p) for p in ally_positions]
    centers = []
    for c in list(detections_a) + list(detections_b):
        if any(math.dist(c.center, a) <= cfg.ally_match_radius for a in allies):
            continue
        centers.append(c.center)
    n = len(centers)
    parent = list(range(n))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if math.dist(centers[i], centers[j]) < cfg.ally_match_radius:
                parent[root(j)] = root(i)
    clusters = {}
    for i in range(n):
        clusters.setdefault(root(i), []).append(centers[i])
    out = []
    for members in clusters.values():
        c = tuple(float(v) for v in np.mean(members, axis=0))
        out.append(Detection(c, snap_to_free_cell(c, grid)))
    return out


def detect_from_scan(scan: LidarScan, grid: GridMap, cfg: DetectionConfig = DetectionConfig()) -> List[Circle]:
    circles = [segment_to_circle(s, scan.origin, cfg) for s in extract_segments(scan, cfg)]
    return filter_walls(circles, grid)


def detect_enemies(grid: GridMap, allies, enemies, cfg: DetectionConfig = DetectionConfig(),
                   rng: np.random.Generator | None = None):
    """Full pipeline for a scene: each ally scans, circles are filtered and fused.

    Returns ``(detections, scans, circles_per_sensor)``.
    """
    scans, per_sensor = [], []
    for i, me in enumerate(allies):
        others = [p for j, p in enumerate(allies) if j != i] + list(enemies)
        scan = simulate_scan(grid, cell_center(me), cfg.n_beams, cfg.max_range,
                             [(p, cfg.robot_radius) for p in others], cfg.range_noise, rng)
        scans.append(scan)
        per_sensor.append(detect_from_scan(scan, grid, cfg))
    a = per_sensor[0] if per_sensor else []
    b = per_sensor[1] if len(per_sensor) > 1 else []
    return fuse_views(a, b, allies, grid, cfg), scans, per_sensor
