import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from staghunt.arena import GridMap, default_map  # noqa: E402


@pytest.fixture(scope="session")
def arena_map():
    return default_map()


def grid_from(rows):
    return GridMap(np.array([[c == "#" for c in r] for r in rows], dtype=bool))


@pytest.fixture
def make_grid():
    return grid_from


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            lines += [v for k, v in getattr(rep, "user_properties", []) if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: (int(s.split()[1].rstrip("ab:")), s)):
            terminalreporter.write_line(line)
