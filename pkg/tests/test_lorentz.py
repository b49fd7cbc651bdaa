import math

import numpy as np
import pytest

from app.exceptions import ParameterError
from app.lab.domain import Grid, MonotoneFunction, PowerLog, WeightSpec, cumulative, make_log_grid
from app.lab.lorentz import (
    LorentzParams,
    check_delta2,
    check_lower_r_estimate,
    check_Qr,
    check_Qr_structural,
    check_quasi_monotone,
    gamma_norm,
    lambda_norm,
    qr_ratio,
    quasi_monotone_constant,
    weak_lambda_norm,
    weighted_norm,
)


def one(grid):
    return WeightSpec.power(grid, 0.0)


class TestNorms:
    def test_unit_indicator(self):
        grid = Grid.from_edges([0.5, 1.0, 2.0, 4.0])
        f = MonotoneFunction(grid, [1.0, 0.0, 0.0])
        assert lambda_norm(f, LorentzParams(2.0, one(grid))) == pytest.approx(1.0, rel=1e-12)

    def test_constant(self):
        grid = make_log_grid(1e-3, 5.0, 40)
        f = MonotoneFunction(grid, np.full(grid.N, 3.0))
        assert lambda_norm(f, LorentzParams(2.0, one(grid))) == pytest.approx(3.0 * math.sqrt(5.0), rel=1e-12)

    def test_power_profile(self):
        grid = make_log_grid(1e-8, 1.0, 4000)
        f = MonotoneFunction(grid, np.power(grid.mids, -0.25))
        assert lambda_norm(f, LorentzParams(2.0, one(grid))) == pytest.approx(math.sqrt(2.0), rel=1e-3)

    def test_weak_power_profile(self):
        grid = make_log_grid(1e-4, 1e4, 4000)
        f = MonotoneFunction(grid, np.power(grid.mids, -0.5))
        assert weak_lambda_norm(f, LorentzParams(2.0, one(grid))) == pytest.approx(1.0, rel=1e-2)

    def test_gamma_indicator(self):
        edges = np.concatenate([np.geomspace(1e-3, 1.0, 201), np.geomspace(1.0, math.e, 201)[1:]])
        grid = Grid.from_edges(edges)
        f = MonotoneFunction(grid, np.where(grid.right <= 1.0 + 1e-12, 1.0, 0.0))
        assert gamma_norm(f, LorentzParams(1.0, one(grid))) == pytest.approx(2.0, rel=1e-3)

    def test_weak_below_strong(self, rng):
        grid = make_log_grid(1e-3, 1e3, 120)
        w = WeightSpec.power(grid, -0.3)
        for p in (0.5, 1.0, 2.0, 4.0):
            prm = LorentzParams(p, w)
            for _ in range(10):
                f = MonotoneFunction(grid, np.sort(rng.exponential(size=grid.N))[::-1])
                assert weak_lambda_norm(f, prm) <= lambda_norm(f, prm) * (1 + 1e-12)

    def test_homogeneity(self, rng, decade_grid):
        w = WeightSpec.power(decade_grid, 0.5)
        f = MonotoneFunction(decade_grid, np.sort(rng.exponential(size=decade_grid.N))[::-1])
        prm = LorentzParams(1.5, w)
        assert lambda_norm(f.scaled(3.0), prm) == pytest.approx(3.0 * lambda_norm(f, prm), rel=1e-12)

    def test_sup_norm(self, decade_grid):
        values = np.linspace(2.0, 1.0, decade_grid.N)
        assert weighted_norm(values, one(decade_grid), math.inf) == 2.0

    def test_rejects_nonpositive_exponent(self, decade_grid):
        with pytest.raises(ParameterError):
            LorentzParams(0.0, one(decade_grid))


class TestDelta2:
    @pytest.mark.parametrize("a, expected", [(0.0, 2.0), (1.0, 4.0)])
    def test_powers(self, a, expected):
        grid = make_log_grid(1e-3, 1e3, 60)
        F = cumulative(WeightSpec.power(grid, a, scale=a + 1))
        result = check_delta2(F)
        assert result.constant == pytest.approx(expected, rel=1e-12)
        assert result.finite

    def test_exponential_fails(self):
        grid = make_log_grid(1e-2, 40.0, 400)
        F = cumulative(WeightSpec.from_function(grid, np.exp))
        assert not check_delta2(F, cap=1e6).finite


class TestQuasiMonotone:
    def test_increasing_power(self, decade_grid):
        assert check_quasi_monotone(WeightSpec.power(decade_grid, 1.0)).constant == 1.0

    def test_matches_pairwise(self, rng):
        grid = make_log_grid(1e-2, 1e2, 50)
        values = grid.mids * np.where(np.arange(grid.N) % 2 == 0, 2.0, 1.0)
        brute = max(values[i] / values[j] for i in range(grid.N) for j in range(i, grid.N))
        assert quasi_monotone_constant(values) == pytest.approx(brute, rel=1e-12)
        assert quasi_monotone_constant(values) <= 2.0

    def test_decreasing_function_fails(self):
        grid = make_log_grid(1e-4, 1e4, 80)
        assert not check_quasi_monotone(1.0 / grid.mids, cap=1e6).finite


class TestQr:
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_critical_power(self, r):
        phi = WeightSpec.power(make_log_grid(1e-2, 1e2, 64), 1.0 / r)
        assert check_Qr(phi, r).constant == pytest.approx(1.0, rel=1e-12)

    def test_pair_ratio(self, decade_grid):
        phi = WeightSpec.power(decade_grid, 2.0)
        assert qr_ratio(phi, [1.0, 1.0], 1.0) == pytest.approx(2.0, rel=1e-12)

    def test_random_below_structural(self):
        grid = make_log_grid(1e-3, 1e3, 90)
        phi = WeightSpec.from_descriptor(grid, PowerLog(0.5, 0.0, -1.0))
        structural = check_Qr_structural(phi, 2.0)
        assert structural.constant == pytest.approx(1.0, rel=1e-12)
        assert check_Qr(phi, 2.0).constant <= structural.constant * (1 + 1e-12)

    def test_structural_needs_descriptor(self, decade_grid):
        with pytest.raises(ParameterError):
            check_Qr_structural(WeightSpec.from_samples(decade_grid, np.ones(decade_grid.N)), 1.0)


class TestLowerEstimate:
    def test_lebesgue(self):
        grid = make_log_grid(1e-3, 1e3, 60)
        result = check_lower_r_estimate(2.0, one(grid), 2.0)
        assert result.verdict
        assert result.constant == pytest.approx(1.0, rel=1e-12)

    def test_lorentz_weight(self):
        p, q = 2.0, 1.0
        grid = make_log_grid(1e-3, 1e3, 60)
        w = WeightSpec.power(grid, q / p - 1.0)
        result = check_lower_r_estimate(q, w, p)
        assert result.verdict
        assert result.constant == pytest.approx(1.0, rel=1e-12)

    def test_r_below_p(self):
        grid = make_log_grid(1e-3, 1e3, 60)
        assert not check_lower_r_estimate(2.0, one(grid), 1.0).verdict
