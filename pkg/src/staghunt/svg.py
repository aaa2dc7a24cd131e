"""Deterministic SVG renderings: match traces, planner overlays and lidar scenes."""
from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .arena import GridMap, RobotId

CELL = 20
TEAM_COLORS = {
    RobotId.AGENT1: "#1f4fd1",
    RobotId.AGENT2: "#5fa8ff",
    RobotId.ENEMY1: "#c81e1e",
    RobotId.ENEMY2: "#ff7b6b",
}
# Planner overlay convention: r1 policy green, r2 policy yellow, variant A* red.
OVERLAY_COLORS = {"r1": "#2ca02c", "r2": "#e6c700", "astar": "#d62728"}


def _f(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".") if v != int(v) else str(int(v))


def _cx(x) -> str:
    return _f((x + 0.5) * CELL)


def _header(grid: GridMap, extra_height: int = 0) -> list:
    w, h = grid.width * CELL, grid.height * CELL + extra_height
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{grid.width * CELL}" height="{grid.height * CELL}" fill="#ffffff" stroke="#000000"/>',
    ]


def _walls(grid: GridMap) -> list:
    out = ['<g id="walls" fill="#555555">']
    for y in range(grid.height):
        for x in range(grid.width):
            if grid.walls[y, x]:
                out.append(f'<rect x="{x * CELL}" y="{y * CELL}" width="{CELL}" height="{CELL}"/>')
    out.append("</g>")
    return out


def _polyline(cells: Sequence, color: str, width: float = 3.0, dash: str | None = None) -> str:
    pts = " ".join(f"{_cx(c[0])},{_cx(c[1])}" for c in cells)
    style = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{_f(width)}"{style}/>'


def _marker(cell, color: str, shape: str) -> str:
    cx, cy = (cell[0] + 0.5) * CELL, (cell[1] + 0.5) * CELL
    r = CELL * 0.35
    if shape == "square":
        return f'<rect x="{_f(cx - r)}" y="{_f(cy - r)}" width="{_f(2 * r)}" height="{_f(2 * r)}" fill="{color}"/>'
    pts = f"{_f(cx)},{_f(cy - r)} {_f(cx - r)},{_f(cy + r)} {_f(cx + r)},{_f(cy + r)}"
    return f'<polygon points="{pts}" fill="{color}"/>'


def _legend(grid: GridMap, entries: Iterable) -> list:
    y0 = grid.height * CELL + 16
    out = ['<g id="legend" font-family="sans-serif" font-size="12">']
    for i, (label, color) in enumerate(entries):
        x = 8 + (i % 4) * 150
        y = y0 + (i // 4) * 18
        out.append(f'<rect x="{x}" y="{y - 10}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{x + 18}" y="{y}">{label}</text>')
    out.append("</g>")
    return out


def trace_svg(trace: Sequence, grid: GridMap, overlays: Mapping[str, Sequence] | None = None) -> str:
    """Walls, one polyline per robot that moved, start markers, optional planner paths."""
    overlays = overlays or {}
    legend = [(rid.name.lower(), TEAM_COLORS[rid]) for rid in RobotId]
    legend += [(name, OVERLAY_COLORS.get(name, "#9467bd")) for name in overlays]
    rows = (len(legend) + 3) // 4
    out = _header(grid, 12 + 18 * rows)
    out += _walls(grid)
    for name, cells in overlays.items():
        if cells:
            out.append(_polyline(cells, OVERLAY_COLORS.get(name, "#9467bd"), 4.0))
    if trace:
        for rid in RobotId:
            cells = [s.pos[rid] for s in trace]
            if len(set(cells)) > 1:
                dash = None if rid in (RobotId.AGENT1, RobotId.ENEMY1) else "6,3"
                out.append(_polyline(cells, TEAM_COLORS[rid], 2.5, dash))
            shape = "square" if rid in (RobotId.AGENT1, RobotId.ENEMY1) else "triangle"
            out.append(_marker(cells[-1], TEAM_COLORS[rid], shape))
    out += _legend(grid, legend)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_trace_svg(result, grid: GridMap, path_out, overlays=None) -> None:
    trace = getattr(result, "trace", result)
    with open(path_out, "w") as fh:
        fh.write(trace_svg(trace, grid, overlays))


def plan_svg(grid: GridMap, path: Sequence, start, stag, hare, safe_distance: float) -> str:
    out = _header(grid, 30)
    out += _walls(grid)
    r = safe_distance * CELL
    out.append(f'<circle cx="{_cx(hare[0])}" cy="{_cx(hare[1])}" r="{_f(r)}" fill="#ff7b6b" fill-opacity="0.2" '
               f'stroke="#ff7b6b"/>')
    if path:
        out.append(_polyline(path, OVERLAY_COLORS["astar"], 4.0))
    out.append(_marker(start, TEAM_COLORS[RobotId.AGENT1], "square"))
    out.append(_marker(stag, "#000000", "square"))
    out.append(_marker(hare, "#000000", "triangle"))
    out += _legend(grid, [("variant A*", OVERLAY_COLORS["astar"]), ("start", TEAM_COLORS[RobotId.AGENT1]),
                          ("stag / hare", "#000000")])
    out.append("</svg>")
    return "\n".join(out) + "\n"


def lidar_svg(grid: GridMap, scans: Sequence, circles: Sequence, detections: Sequence) -> str:
    """Scan rays in yellow, raw circles in green, fused enemy detections in red."""
    out = _header(grid, 30)
    out += _walls(grid)
    out.append('<g id="rays" stroke="#e6c700" stroke-width="0.5">')
    for scan in scans:
        ox, oy = scan.origin
        for (px, py), hit in zip(scan.points(), scan.hits):
            if hit:
                out.append(f'<line x1="{_f(ox * CELL)}" y1="{_f(oy * CELL)}" x2="{_f(px * CELL)}" '
                           f'y2="{_f(py * CELL)}"/>')
    out.append("</g>")
    for scan in scans:
        ox, oy = scan.origin
        out.append(f'<circle cx="{_f(ox * CELL)}" cy="{_f(oy * CELL)}" r="{_f(0.5 * CELL)}" fill="#1f4fd1"/>')
    for c in circles:
        out.append(f'<circle cx="{_f(c.center[0] * CELL)}" cy="{_f(c.center[1] * CELL)}" '
                   f'r="{_f(c.radius * CELL)}" fill="none" stroke="#2ca02c" stroke-width="2"/>')
    for d in detections:
        out.append(f'<circle cx="{_f(d.center[0] * CELL)}" cy="{_f(d.center[1] * CELL)}" r="{_f(0.25 * CELL)}" '
                   f'fill="#c81e1e"/>')
    out += _legend(grid, [("scan", "#e6c700"), ("circles", "#2ca02c"), ("enemy", "#c81e1e"),
                          ("sensor", "#1f4fd1")])
    out.append("</svg>")
    return "\n".join(out) + "\n"
