import math

import numpy as np
import pytest

from app.exceptions import ParameterError
from app.lab.domain import Grid, GridFunction, MonotoneFunction, make_log_grid
from app.lab.rearrangement import (
    RadialField,
    RadialProfile,
    StepField,
    decreasing_profile,
    distribution,
    doublestar,
    rearrange,
)


def random_step_field(rng, pieces=6) -> StepField:
    cuts = np.sort(rng.uniform(-5, 5, 2 * pieces))
    rows = [(cuts[2 * i], cuts[2 * i + 1], float(rng.integers(0, 5))) for i in range(pieces)]
    return StepField.from_intervals(rows)


class TestDistribution:
    def test_two_level_field(self):
        f = StepField.from_intervals([(0, 1, 3.0), (1, 3, 1.0)])
        assert distribution(f, 0.5) == 3.0
        assert distribution(f, 1.0) == 1.0
        assert distribution(f, 3.0) == 0.0

    def test_zero_field(self):
        f = StepField.zero(1)
        assert distribution(f, 0.0) == 0.0
        assert decreasing_profile(f).total_measure == 0.0


class TestRearrange:
    def test_indicator(self):
        f = StepField.from_intervals([(0, 2, 1.0)])
        grid = Grid.from_edges([0.5, 1.0, 2.0, 4.0])
        assert list(rearrange(f, grid).values) == [1.0, 1.0, 0.0]

    def test_two_levels(self):
        f = StepField.from_intervals([(0, 1, 3.0), (1, 3, 1.0)])
        grid = Grid.from_edges([0.5, 1.0, 3.0, 4.0])
        assert list(rearrange(f, grid).values) == [3.0, 1.0, 0.0]

    def test_disc_measure(self):
        profile = decreasing_profile(RadialField.from_steps(2, [0.5, 1.0], [1.0]))
        assert profile.total_measure == pytest.approx(math.pi, rel=1e-12)

    def test_monotone_input_is_fixed(self, rng, decade_grid):
        values = np.sort(rng.uniform(0.1, 2.0, decade_grid.N))[::-1]
        f = MonotoneFunction(decade_grid, values)
        assert np.array_equal(rearrange(f, decade_grid).values, values)

    def test_dimension_guard(self):
        with pytest.raises(ParameterError):
            StepField(3, np.zeros((0, 3, 2)), np.zeros(0))

    def test_overlap_guard(self):
        with pytest.raises(ParameterError):
            StepField.from_intervals([(0, 2, 1.0), (1, 3, 1.0)])


def test_equimeasurable(rng):
    for _ in range(100):
        f = random_step_field(rng)
        profile = decreasing_profile(f)
        for lam in np.unique(np.concatenate([[0.0], f.values])):
            assert distribution(profile, lam) == pytest.approx(distribution(f, lam), rel=1e-12, abs=1e-12)


def test_hardy_littlewood(rng):
    for _ in range(100):
        f = random_step_field(rng)
        cuts = np.sort(rng.uniform(-6, 6, 4))
        region = StepField.from_intervals([(cuts[0], cuts[1], 1.0), (cuts[2], cuts[3], 1.0)])
        measure = region.integral
        assert f.integral_over(region) <= decreasing_profile(f).integral(measure) + 1e-12


class TestDoublestar:
    def test_indicator_average(self):
        edges = np.concatenate([np.geomspace(1e-3, 1.0, 31), np.geomspace(1.0, 1e3, 31)[1:]])
        grid = Grid.from_edges(edges)
        fstar = MonotoneFunction(grid, np.where(grid.right <= 1.0 + 1e-12, 1.0, 0.0))
        fss = doublestar(fstar).values
        expected = np.where(grid.mids < 1.0, 1.0, 1.0 / grid.mids)
        assert np.allclose(fss, expected, rtol=1e-12)

    def test_dominates_and_decreases(self, rng):
        grid = make_log_grid(1e-2, 1e2, 60)
        fstar = MonotoneFunction(grid, np.sort(rng.exponential(size=grid.N))[::-1])
        fss = doublestar(fstar).values
        assert np.all(fss >= fstar.values * (1 - 1e-12))
        assert np.all(np.diff(fss) <= 1e-12 * fss[:-1])

    def test_constant(self, decade_grid):
        assert np.allclose(doublestar(GridFunction.constant(decade_grid, 2.0)).values, 2.0, rtol=1e-12)


class TestRadialProfile:
    def test_single_step_ball(self):
        f = RadialField.from_steps(1, [0.25, 0.5], [1.0])
        assert f.support_radius() == 0.5
        assert list(f.value_at_radius([0.0, 0.3, 0.5, 0.6])) == [1.0, 1.0, 1.0, 0.0]
        assert distribution(f, 0.5) == pytest.approx(1.0, rel=1e-12)

    def test_step_lookup(self):
        h = RadialProfile([0.5, 1.0, 2.0, 3.0], [3.0, 2.0, 1.0])
        assert list(h.evaluate([0.1, 1.0, 1.5, 2.0, 2.5, 9.0])) == [3.0, 3.0, 2.0, 2.0, 1.0, 1.0]

    def test_from_grid_function(self):
        grid = Grid.from_edges([0.5, 1.0, 2.0])
        f = RadialField(2, MonotoneFunction(grid, [2.0, 1.0]))
        assert isinstance(f.h, RadialProfile)
        assert np.array_equal(f.radii, grid.edges)

    @pytest.mark.parametrize("radii, values", [
        ([0.5], []),
        ([0.5, 1.0], [1.0, 0.5]),
        ([1.0, 0.5], [1.0]),
        ([0.5, 1.0, 2.0], [1.0, 2.0]),
        ([0.5, 1.0], [-1.0]),
    ])
    def test_rejects(self, radii, values):
        with pytest.raises(ParameterError):
            RadialProfile(radii, values)
