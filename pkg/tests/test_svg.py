import re

from staghunt.arena import GridMap, make_state
from staghunt.harness import MatchResult
from staghunt.svg import emit_trace_svg, plan_svg, trace_svg


def _polylines(text):
    return re.findall(r'<polyline points="([^"]*)"', text)


def test_empty_trace_is_map_only(make_grid):
    g = make_grid(["..#", "..."])
    text = trace_svg([], g)
    assert text.startswith("<svg") and text.endswith("</svg>\n")
    assert text.count('<rect x="40" y="0" width="20" height="20"/>') == 1
    assert _polylines(text) == []


def test_three_step_trace_has_four_points_per_mover():
    g = GridMap.empty(6, 6)
    trace = [
        make_state((0, 0), (5, 5), (0, 5), (5, 0)),
        make_state((1, 0), (5, 5), (0, 4), (5, 0)),
        make_state((2, 0), (5, 5), (0, 3), (5, 0)),
        make_state((2, 1), (5, 5), (0, 3), (5, 0)),
    ]
    lines = _polylines(trace_svg(trace, g))
    assert len(lines) == 2  # two robots moved
    assert all(len(pts.split()) == 4 for pts in lines)
    assert lines[0].split()[0] == "10,10"


def test_output_is_byte_identical(tmp_path):
    g = GridMap.empty(5, 5)
    trace = [make_state((0, 0), (4, 4), (0, 4), (4, 0)), make_state((1, 0), (4, 4), (0, 4), (4, 0))]
    res = MatchResult("draw", 1, trace)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    emit_trace_svg(res, g, a, overlays={"r1": [(0, 0), (1, 1)]})
    emit_trace_svg(res, g, b, overlays={"r1": [(0, 0), (1, 1)]})
    assert a.read_bytes() == b.read_bytes()
    assert "#2ca02c" in a.read_text()


def test_plan_svg_marks_path():
    g = GridMap.empty(5, 5)
    text = plan_svg(g, [(0, 0), (1, 0)], (0, 0), (4, 4), (4, 0), 2)
    assert _polylines(text) == ["10,10 30,10"]
    assert 'r="40"' in text
