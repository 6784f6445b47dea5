from collections import deque

import numpy as np
import pytest

from dwlse.models import SensorModel, StateEstimate

ACCEPTANCE_LINES = []


def random_spd(rng, m, scale=1.0, floor=0.5):
    a = rng.normal(size=(m, m))
    return scale * (a @ a.T + floor * np.eye(m))


def random_instance(rng, m, J, n_max=2):
    """Well-conditioned prior, J sensors and one measurement per sensor."""
    prior = StateEstimate(rng.normal(size=m), random_spd(rng, m))
    n = int(rng.integers(1, n_max + 1))
    sensors = [SensorModel(rng.normal(size=(n, m)), random_spd(rng, n)) for _ in range(J)]
    ys = [rng.normal(size=n) * 2 for _ in range(J)]
    return prior, sensors, ys


def bfs_reachable(adjacency, start=0):
    """Independent breadth-first traversal over a boolean adjacency matrix."""
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for j in range(len(adjacency)):
            if adjacency[s][j] and j not in seen:
                seen.add(j)
                queue.append(j)
    return seen


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
