from types import SimpleNamespace

import numpy as np
import pytest

from app.exceptions import ParameterError
from app.lab.domain import Grid, MonotoneFunction, PowerLog, make_log_grid
from app.lab.maximal_sandbox import (
    OperatorPreset,
    eval_maximal,
    herz_stein_check,
    rhs_at_tau_equals_t,
    rhs_reduction,
    sandwich_check,
)
from app.lab.rearrangement import RadialField, StepField, doublestar
from tests.conftest import random_monotone

CLASSICAL = OperatorPreset.classical()
UNIT = StepField.from_intervals([(-0.5, 0.5, 1.0)])


def unit_radial(n=1):
    return RadialField.from_steps(n, [0.25, 0.5], [1.0])


def evaluate(f, preset, points, budget=8):
    return eval_maximal(f, preset.phi, preset.alpha, preset.b, budget, np.asarray(points, dtype=float)[:, None],
                        threads=1).values


class TestEvalMaximal:
    def test_classical_indicator(self):
        xs = np.array([0.0, 0.25, 0.75, 1.5, 3.0])
        expected = np.where(np.abs(xs) <= 0.5, 1.0, 1.0 / (np.abs(xs) + 0.5))
        assert np.allclose(evaluate(UNIT, CLASSICAL, xs), expected, rtol=1e-12)

    def test_zero_field(self):
        sample = eval_maximal(StepField.zero(1), PowerLog(1.0), 1.0, PowerLog(0.0),
                              points=np.array([[0.0], [2.0]]), threads=1)
        assert np.all(sample.values == 0.0)

    def test_fractional_half(self):
        preset = OperatorPreset.fractional(0.5)
        assert evaluate(UNIT, preset, [0.5])[0] == pytest.approx(1.0, rel=1e-12)

    def test_dimension_guard(self):
        with pytest.raises(ParameterError):
            eval_maximal(SimpleNamespace(n=3), PowerLog(1.0), 1.0, PowerLog(0.0))

    def test_budget_monotone(self):
        f = StepField.from_intervals([(-1.0, 1.0, 1.0), (1.0, 3.0, 0.5)])
        preset = OperatorPreset.power_log(2.0, 0.5, (1.0, -1.0))
        xs = np.linspace(-4.0, 6.0, 23)
        coarse = evaluate(f, preset, xs, budget=4)
        fine = evaluate(f, preset, xs, budget=8)
        assert np.all(coarse <= fine)

    def test_dilation_covariance(self):
        f = StepField.from_intervals([(-1.0, 1.0, 2.0), (1.0, 2.5, 1.0)])
        g = f.dilated(2.0)
        xs = np.array([-0.3, 0.2, 0.9, 1.7])
        assert np.allclose(evaluate(g, CLASSICAL, xs), evaluate(f, CLASSICAL, 2 * xs), rtol=1e-12)

    def test_two_dimensional_centre(self):
        f = StepField(2, np.array([[[-0.5, 0.5], [-0.5, 0.5]]]), np.array([1.0]))
        sample = eval_maximal(f, PowerLog(1.0), 1.0, PowerLog(0.0), points=np.array([[0.0, 0.0]]), threads=1)
        assert sample.values[0] == pytest.approx(1.0, rel=1e-12)


class TestReduction:
    def test_classical_is_doublestar(self):
        edges = np.concatenate([np.geomspace(1e-3, 1.0, 41), np.geomspace(1.0, 1e3, 41)[1:]])
        grid = Grid.from_edges(edges)
        fstar = MonotoneFunction(grid, np.where(grid.right <= 1.0 + 1e-12, 1.0, 0.0))
        rhs = rhs_reduction(fstar, PowerLog(1.0), 1.0, PowerLog(0.0))
        assert np.allclose(rhs.values, doublestar(fstar).values, rtol=1e-12)

    def test_collapse_when_alpha_equals_q(self, rng):
        grid = make_log_grid(1e-3, 1e3, 120)
        preset = OperatorPreset.lorentz(2.0, 1.0)
        for _ in range(5):
            fstar = random_monotone(grid, rng, zero_tail=True)
            full = rhs_reduction(fstar, preset.phi, preset.alpha, preset.b, check_hypotheses=False)
            dropped = rhs_at_tau_equals_t(fstar, preset.phi, preset.alpha, preset.b)
            assert np.allclose(full.values, dropped.values, rtol=1e-12)

    def test_sup_never_below_dropped(self, rng):
        grid = make_log_grid(1e-3, 1e3, 120)
        preset = OperatorPreset.power_log(1.0, 0.3, (0.0, 0.0))
        fstar = random_monotone(grid, rng)
        full = rhs_reduction(fstar, preset.phi, preset.alpha, preset.b, check_hypotheses=False)
        dropped = rhs_at_tau_equals_t(fstar, preset.phi, preset.alpha, preset.b)
        assert np.all(full.values >= dropped.values * (1 - 1e-12))


class TestPresets:
    def test_lorentz_data(self):
        preset = OperatorPreset.lorentz(3.0, 2.0)
        assert preset.phi == PowerLog(1.0 / 3.0)
        assert preset.alpha == 2.0
        assert preset.b == PowerLog(2.0 / 3.0 - 1.0)

    def test_classical_flag(self):
        assert CLASSICAL.is_classical
        assert not OperatorPreset.fractional(0.5).is_classical

    def test_fractional_range(self):
        with pytest.raises(ParameterError):
            OperatorPreset.fractional(1.0, n=1)


class TestSandwich:
    def test_zero_field(self):
        empty = RadialField.from_steps(1, [0.25, 0.5], [0.0])
        result = sandwich_check(empty, PowerLog(1.0), 1.0, PowerLog(0.0), threads=1)
        assert result.c_low == 0.0 and result.t.size == 0

    def test_needs_radial_field(self):
        with pytest.raises(ParameterError):
            sandwich_check(UNIT, PowerLog(1.0), 1.0, PowerLog(0.0))

    @pytest.mark.slow
    def test_classical_window(self):
        result = sandwich_check(unit_radial(), PowerLog(1.0), 1.0, PowerLog(0.0), threads=1)
        assert result.tail == "analytic"
        assert result.c_low > 0
        assert result.window <= 50

    @pytest.mark.slow
    def test_lorentz_window(self):
        preset = OperatorPreset.lorentz(2.0, 1.0)
        result = sandwich_check(unit_radial(), preset.phi, preset.alpha, preset.b, samples=256, threads=1)
        assert result.c_low > 0


@pytest.mark.slow
def test_herz_stein_indicator():
    result = herz_stein_check(UNIT, threads=1)
    assert result.c_low >= 0.95
    assert result.C_high <= 2.05
    far = result.t >= 2.0
    assert far.any()
    assert np.allclose(result.lhs[far], 2.0 / (1.0 + result.t[far]), rtol=0.03)
    near = result.t < 0.9
    assert np.allclose(result.lhs[near], 1.0, rtol=0.03)


def random_radial(n, rng):
    steps = int(rng.integers(1, 5))
    radii = np.sort(rng.uniform(0.1, 1.5, size=steps + 1))
    values = np.sort(rng.uniform(0.2, 2.0, size=steps))[::-1]
    return RadialField.from_steps(n, radii, values)


def sandwich_presets(n):
    return [
        OperatorPreset.classical(),
        OperatorPreset.lorentz(2.0, 1.0),
        OperatorPreset.power_log(1.0, n / 2, (1.0, -1.0), n=n),
    ]


@pytest.mark.slow
@pytest.mark.parametrize("n, count", [(1, 10), (2, 5)])
def test_sandwich_families(n, count, rng):
    for _ in range(count):
        f = random_radial(n, rng)
        for preset in sandwich_presets(n):
            windows = []
            for budget in (8, 16):
                result = sandwich_check(f, preset.phi, preset.alpha, preset.b, cube_budget=budget,
                                        samples=256, threads=4)
                assert result.c_low > 0, preset.name
                assert result.C_high / result.c_low <= 50, preset.name
                windows.append(result.C_high / result.c_low)
            assert abs(windows[1] - windows[0]) < 0.25 * windows[0], preset.name
