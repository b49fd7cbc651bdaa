"""The iterated supremum operator

    (T_{u,b} g)(t) = sup_{t <= tau < inf} (u(tau) / B(tau)) int_0^tau g b

and the weighted sup-norm identity that turns ||T f||_{inf,w} into three scans.
"""

from dataclasses import dataclass

import numpy as np

from app.exceptions import ParameterError
from app.lab.domain import (
    CumulativeWeight,
    GridFunction,
    MonotoneFunction,
    WeightSpec,
    cumulative,
    prefix_max,
    suffix_max,
)
from app.lab.extended import xmul, xpow


@dataclass(frozen=True, eq=False)
class SupOpSpec:
    """T_{u,b} on a grid; ``kernel`` holds u/B at cell midpoints."""

    u: WeightSpec
    b: WeightSpec
    B: CumulativeWeight
    kernel: np.ndarray

    @classmethod
    def build(cls, u: WeightSpec, b: WeightSpec, acknowledge_truncation: bool = False) -> "SupOpSpec":
        if not u.grid.same_as(b.grid):
            raise ParameterError("u and b must live on the same grid")
        if np.any(u.values <= 0):
            raise ParameterError("u must be strictly positive")
        B = cumulative(b, acknowledge_truncation)
        kernel = np.array(u.values / B.at_mids)
        kernel.setflags(write=False)
        return cls(u, b, B, kernel)

    @classmethod
    def from_kernel(cls, kernel, b: WeightSpec, acknowledge_truncation: bool = False) -> "SupOpSpec":
        """Spec with a prescribed u/B (u is recovered as kernel * B)."""
        kernel = np.array(kernel, dtype=float)
        if kernel.shape != (b.grid.N,) or np.any(kernel <= 0) or not np.all(np.isfinite(kernel)):
            raise ParameterError("kernel u/B must be positive and finite on every cell")
        B = cumulative(b, acknowledge_truncation)
        kernel.setflags(write=False)
        return cls(WeightSpec.from_samples(b.grid, kernel * B.at_mids), b, B, kernel)

    @property
    def grid(self):
        return self.b.grid

    @property
    def u_mids(self) -> np.ndarray:
        return self.kernel * self.B.at_mids


def primitive_against_b(spec: SupOpSpec, g) -> np.ndarray:
    """P(tau) = int_0^tau g b at midpoints; g is extended by g[0] below t_min."""
    g = np.asarray(g.values if isinstance(g, GridFunction) else g, dtype=float)
    B = spec.B
    half = B.at_mids - B.at_edges[:-1]
    below = np.concatenate([[xmul(g[0], B.head)], xmul(g[:-1], spec.b.cell_masses[:-1])])
    return np.cumsum(below) + xmul(g, half)


def kernel_profile(spec: SupOpSpec, g) -> np.ndarray:
    """m(tau) = (u/B)(tau) P(tau), the quantity whose suffix sup is T g."""
    return xmul(spec.kernel, primitive_against_b(spec, g))


def apply_T(spec: SupOpSpec, g: GridFunction) -> MonotoneFunction:
    if not g.grid.same_as(spec.grid):
        raise ParameterError("g and the operator live on different grids")
    return MonotoneFunction(spec.grid, suffix_max(kernel_profile(spec, g)))


def weighted_sup_norm_T(spec: SupOpSpec, f: MonotoneFunction, w: WeightSpec) -> float:
    """sup_x ( sup_{t >= x} [sup_{tau <= t} w(tau)] u(t)/B(t) ) int_0^x f b."""
    outer = suffix_max(xmul(prefix_max(w.values), spec.kernel))
    return float(np.max(xmul(outer, primitive_against_b(spec, f))))


def reduce_maximal_to_T(phi: WeightSpec, alpha: float, b: WeightSpec,
                        acknowledge_truncation: bool = False) -> SupOpSpec:
    """T_{B/phi^alpha, b}: the supremum operator a generalized fractional maximal operator reduces to."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if np.any(phi.values <= 0):
        raise ParameterError("phi must be strictly positive")
    return SupOpSpec.from_kernel(phi.raised(-alpha).values, b, acknowledge_truncation)


def maximal_rhs(spec: SupOpSpec, fstar: MonotoneFunction, alpha: float) -> GridFunction:
    """(T_{B/phi^alpha,b} (f*)^alpha)^{1/alpha}."""
    psi = GridFunction(fstar.grid, xpow(fstar.values, alpha))
    return GridFunction(fstar.grid, xpow(apply_T(spec, psi).values, 1.0 / alpha))


def hardy_average_spec(grid) -> SupOpSpec:
    """u = b = 1: on the monotone cone T f is the running average f**."""
    one = WeightSpec.power(grid, 0.0)
    return SupOpSpec.build(one, one)
