import heapq
import math

import numpy as np
import pytest

from crowdflow.grid import build_grid
from crowdflow.params import ModelParams


def dijkstra_8(grid, sources, slowness=None):
    """Plain heapq Dijkstra on the 8-connected node graph (test oracle)."""
    ny, nx = grid.shape
    s = np.ones(grid.shape) if slowness is None else slowness
    dist = np.full(grid.shape, math.inf)
    heap = []
    for j, i in zip(*np.nonzero(sources)):
        dist[j, i] = 0.0
        heap.append((0.0, int(j), int(i)))
    heapq.heapify(heap)
    steps = [(dj, di) for dj in (-1, 0, 1) for di in (-1, 0, 1) if (dj, di) != (0, 0)]
    while heap:
        d, j, i = heapq.heappop(heap)
        if d > dist[j, i]:
            continue
        for dj, di in steps:
            jj, ii = j + dj, i + di
            if 0 <= jj < ny and 0 <= ii < nx:
                nd = d + grid.h * math.hypot(dj, di) * 0.5 * (s[j, i] + s[jj, ii])
                if nd < dist[jj, ii]:
                    dist[jj, ii] = nd
                    heapq.heappush(heap, (nd, jj, ii))
    return dist


@pytest.fixture
def line201():
    return build_grid([[-1, 1]], [201], ["left", "right"])


@pytest.fixture
def default_params():
    return ModelParams()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
