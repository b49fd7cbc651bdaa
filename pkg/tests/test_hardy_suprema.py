import numpy as np
import pytest

from app.exceptions import ParameterError
from app.lab.domain import Grid, GridFunction, MonotoneFunction, WeightSpec, make_log_grid
from app.lab.hardy_suprema import (
    SupOpSpec,
    apply_T,
    hardy_average_spec,
    kernel_profile,
    maximal_rhs,
    primitive_against_b,
    reduce_maximal_to_T,
    weighted_sup_norm_T,
)
from app.lab.rearrangement import doublestar
from tests.conftest import random_monotone, random_weight


def unit_edge_grid_small():
    edges = np.concatenate([np.geomspace(1e-2, 1.0, 41), np.geomspace(1.0, 1e2, 41)[1:]])
    return Grid.from_edges(edges)


class TestApplyT:
    def test_u_equals_B_is_constant(self, rng, decade_grid):
        b = WeightSpec.power(decade_grid, 0.0)
        spec = SupOpSpec.from_kernel(np.ones(decade_grid.N), b)
        g = GridFunction(decade_grid, rng.uniform(size=decade_grid.N))
        Tg = apply_T(spec, g).values
        P = primitive_against_b(spec, g)
        assert np.allclose(Tg, P.max(), rtol=1e-12)

    def test_indicator_average(self):
        grid = unit_edge_grid_small()
        spec = hardy_average_spec(grid)
        g = GridFunction(grid, np.where(grid.right <= 1.0 + 1e-12, 1.0, 0.0))
        expected = np.where(grid.mids < 1.0, 1.0, 1.0 / grid.mids)
        assert np.allclose(apply_T(spec, g).values, expected, rtol=1e-12)

    def test_monotone_input_gives_doublestar(self, rng):
        grid = make_log_grid(1e-2, 1e2, 80)
        f = random_monotone(grid, rng)
        assert np.allclose(apply_T(hardy_average_spec(grid), f).values, doublestar(f).values, rtol=1e-12)

    def test_against_quadratic_loop(self, rng):
        grid = make_log_grid(1e-2, 1e2, 60)
        b = random_weight(grid, rng)
        u = random_weight(grid, rng)
        spec = SupOpSpec.build(u, b)
        g = rng.uniform(size=grid.N)
        head = g[0] * spec.B.head
        P = np.empty(grid.N)
        for j in range(grid.N):
            acc = head
            for i in range(j):
                acc += g[i] * b.cell_masses[i]
            P[j] = acc + g[j] * (spec.B.at_mids[j] - spec.B.at_edges[j])
        naive = [max(spec.kernel[j] * P[j] for j in range(k, grid.N)) for k in range(grid.N)]
        assert np.allclose(apply_T(spec, GridFunction(grid, g)).values, naive, rtol=1e-12)

    def test_monotone_in_g(self, rng, decade_grid):
        spec = hardy_average_spec(decade_grid)
        g = rng.uniform(size=decade_grid.N)
        h = g + rng.uniform(size=decade_grid.N)
        Tg = apply_T(spec, GridFunction(decade_grid, g)).values
        Th = apply_T(spec, GridFunction(decade_grid, h)).values
        assert np.all(Tg <= Th)

    def test_grid_mismatch(self, decade_grid):
        spec = hardy_average_spec(decade_grid)
        with pytest.raises(ParameterError):
            apply_T(spec, GridFunction.constant(make_log_grid(1, 2, 4)))


class TestWeightedSupNorm:
    def test_indicator(self):
        grid = unit_edge_grid_small()
        b = WeightSpec.power(grid, 0.0)
        spec = SupOpSpec.from_kernel(np.ones(grid.N), b)
        f = MonotoneFunction(grid, np.where(grid.right <= 1.0 + 1e-12, 1.0, 0.0))
        assert weighted_sup_norm_T(spec, f, b) == pytest.approx(1.0, rel=1e-12)

    def test_zero(self, decade_grid):
        spec = hardy_average_spec(decade_grid)
        f = MonotoneFunction(decade_grid, np.zeros(decade_grid.N))
        assert weighted_sup_norm_T(spec, f, WeightSpec.power(decade_grid, 0.0)) == 0.0

    @pytest.mark.parametrize("N", [200, 500])
    def test_identity(self, rng, N):
        grid = make_log_grid(1e-3, 1e3, N)
        for _ in range(5):
            spec = SupOpSpec.build(random_weight(grid, rng), random_weight(grid, rng))
            w = random_weight(grid, rng)
            f = random_monotone(grid, rng, zero_tail=True)
            direct = float(np.max(w.values * apply_T(spec, f).values))
            assert weighted_sup_norm_T(spec, f, w) == pytest.approx(direct, rel=1e-10)


class TestReduction:
    def test_classical(self, decade_grid):
        phi = WeightSpec.power(decade_grid, 1.0)
        spec = reduce_maximal_to_T(phi, 1.0, WeightSpec.power(decade_grid, 0.0))
        assert np.allclose(spec.kernel, 1.0 / decade_grid.mids, rtol=1e-12)
        assert np.allclose(spec.u_mids, 1.0, rtol=1e-12)

    def test_lorentz_pair(self, decade_grid):
        p, q = 3.0, 2.0
        phi = WeightSpec.power(decade_grid, 1.0 / p)
        b = WeightSpec.power(decade_grid, q / p - 1.0)
        spec = reduce_maximal_to_T(phi, q, b)
        assert np.allclose(spec.kernel, np.power(decade_grid.mids, -q / p), rtol=1e-12)

    def test_rhs_is_root_of_T(self, rng, decade_grid):
        phi = WeightSpec.power(decade_grid, 0.5)
        spec = reduce_maximal_to_T(phi, 2.0, WeightSpec.power(decade_grid, 0.0))
        f = random_monotone(decade_grid, rng)
        expected = np.sqrt(np.maximum.accumulate(kernel_profile(spec, f.values**2)[::-1])[::-1])
        assert np.allclose(maximal_rhs(spec, f, 2.0).values, expected, rtol=1e-12)

    def test_rejects_nonpositive_alpha(self, decade_grid):
        with pytest.raises(ParameterError):
            reduce_maximal_to_T(WeightSpec.power(decade_grid, 1.0), 0.0, WeightSpec.power(decade_grid, 0.0))
