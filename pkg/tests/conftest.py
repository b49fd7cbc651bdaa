import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from app.lab.domain import Grid, MonotoneFunction, WeightSpec, make_log_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def decade_grid():
    return make_log_grid(1e-3, 1e3, 6)


@pytest.fixture
def unit_edge_grid():
    """Log grid on (1e-3, 1e3] with 1 as an exact edge."""
    left = np.geomspace(1e-3, 1.0, 301)
    right = np.geomspace(1.0, 1e3, 301)
    return Grid.from_edges(np.concatenate([left, right[1:]]))


@pytest.fixture
def power_weights():
    """(grid, one) with one the constant weight."""
    grid = make_log_grid(1e-2, 1e2, 240)
    return grid, WeightSpec.power(grid, 0.0)


def random_monotone(grid, rng, zero_tail: bool = False) -> MonotoneFunction:
    values = np.sort(rng.exponential(size=grid.N))[::-1]
    if zero_tail:
        values[rng.integers(1, grid.N):] = 0.0
    return MonotoneFunction(grid, values)


def random_weight(grid, rng) -> WeightSpec:
    return WeightSpec.from_samples(grid, rng.uniform(0.1, 3.0, size=grid.N))
