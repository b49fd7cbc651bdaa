"""Grids, piecewise-constant functions, weights and the linear scan primitives.

A grid partitions (t_min, t_max] into cells (e_k, e_{k+1}]. Grid functions
are constant on cells and sampled at geometric midpoints sqrt(e_k e_{k+1}).
Below t_min every grid function is extended by its first cell value, so a
weight given only by samples has head mass samples[0] * t_min.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss

from app.exceptions import ConfigurationError, DispatchError, ParameterError
from app.logger import logger

LOG_MIDPOINT_NODES = 16
_LAGUERRE_NODES, _LAGUERRE_WEIGHTS = laggauss(48)
_LEGENDRE_NODES, _LEGENDRE_WEIGHTS = leggauss(16)
_CHUNK = 1 << 16
_SAMPLE_RTOL = 1e-12


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Grid:
    edges: np.ndarray
    mids: np.ndarray = field(init=False, repr=False)
    widths: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = _readonly(self.edges)
        if edges.ndim != 1 or edges.size < 3:
            raise ParameterError("a grid needs at least two cells")
        if not np.all(np.isfinite(edges)) or edges[0] <= 0:
            raise ParameterError("grid edges must be finite and positive")
        if np.any(np.diff(edges) <= 0):
            raise ParameterError("grid edges must be strictly increasing")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "mids", _readonly(np.sqrt(edges[:-1] * edges[1:])))
        object.__setattr__(self, "widths", _readonly(np.diff(edges)))

    @classmethod
    def from_edges(cls, edges) -> "Grid":
        return cls(np.asarray(edges, dtype=float))

    @property
    def t_min(self) -> float:
        return float(self.edges[0])

    @property
    def t_max(self) -> float:
        return float(self.edges[-1])

    @property
    def N(self) -> int:
        return self.edges.size - 1

    @property
    def right(self) -> np.ndarray:
        return self.edges[1:]

    @property
    def left(self) -> np.ndarray:
        return self.edges[:-1]

    def locate(self, t):
        """Index k of the cell (e_k, e_{k+1}] holding t, clipped to the grid."""
        idx = np.searchsorted(self.edges, t, side="left") - 1
        return np.clip(idx, 0, self.N - 1)

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.N == other.N and bool(np.array_equal(self.edges, other.edges))
        )

    def provenance(self) -> dict:
        return {"t_min": self.t_min, "t_max": self.t_max, "N": self.N}


def make_log_grid(t_min: float, t_max: float, N: int) -> Grid:
    """Log-uniform grid e_k = t_min * (t_max/t_min)**(k/N)."""
    if not (math.isfinite(t_min) and math.isfinite(t_max)) or not 0 < t_min < t_max:
        raise ParameterError(f"need 0 < t_min < t_max, got ({t_min}, {t_max})")
    if int(N) != N or N < 2:
        raise ParameterError(f"need N >= 2 cells, got {N}")
    N = int(N)
    edges = t_min * np.power(t_max / t_min, np.arange(N + 1) / N)
    edges[0], edges[-1] = t_min, t_max
    return Grid(edges)


# ---------------------------------------------------------------------------
# Piecewise-constant functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _readonly(self.values)
        if values.shape != (self.grid.N,):
            raise ParameterError(
                f"expected {self.grid.N} cell values, got shape {values.shape}"
            )
        if np.isnan(values).any() or (values < 0).any():
            raise ParameterError("grid function values must be nonnegative")
        object.__setattr__(self, "values", values)
        self._validate()

    def _validate(self):
        pass

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, fn(grid.mids))

    @classmethod
    def constant(cls, grid: Grid, c: float = 1.0):
        return cls(grid, np.full(grid.N, float(c)))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def scaled(self, c: float):
        return type(self)(self.grid, self.values * c)

    def evaluate(self, t):
        """Value at arbitrary t under the constant extension on both ends."""
        return self.values[self.grid.locate(t)]

    def cell_integrals(self) -> np.ndarray:
        return self.values * self.grid.widths

    def head_integral(self) -> float:
        return float(self.values[0] * self.grid.t_min)


class MonotoneFunction(GridFunction):
    """Non-increasing grid function, a member of the monotone cone."""

    def _validate(self):
        if np.any(np.diff(self.values) > 0):
            raise ParameterError("monotone function values must be non-increasing")

    @classmethod
    def indicator(cls, grid: Grid, s: float, height: float = 1.0):
        """height on (0, s] rounded to the cell boundary at or below s."""
        values = np.where(grid.right <= s * (1 + 1e-12), float(height), 0.0)
        return cls(grid, values)


# ---------------------------------------------------------------------------
# Power-log weights
# ---------------------------------------------------------------------------


def _log_midpoint(fn, lo, hi, nodes: int = LOG_MIDPOINT_NODES) -> np.ndarray:
    """Composite midpoint rule in s = log t for int_lo^hi fn(t) dt, vectorized."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    out = np.zeros(lo.shape)
    frac = (np.arange(nodes) + 0.5) / nodes
    for start in range(0, lo.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        s0 = np.log(lo[sl])
        h = np.log(hi[sl]) - s0
        t = np.exp(s0[:, None] + h[:, None] * frac[None, :])
        out[sl] = (fn(t) * t).sum(axis=1) * h / nodes
    return out


@dataclass(frozen=True)
class PowerLog:
    """w(t) = scale * t**a * l(t), l(t) = (1 + |log t|)**A0 below 1 and **Ainf above."""

    a: float
    A0: float = 0.0
    Ainf: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0 or not math.isfinite(self.scale):
            raise ParameterError("power-log scale must be positive and finite")

    @property
    def is_pure(self) -> bool:
        return self.A0 == 0 and self.Ainf == 0

    @property
    def integrable_at_zero(self) -> bool:
        return self.a > -1

    def log_factor(self, t):
        t = np.asarray(t, dtype=float)
        if self.is_pure:
            return np.ones_like(t)
        base = 1.0 + np.abs(np.log(t))
        return np.where(t < 1, base ** self.A0, base ** self.Ainf)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        return self.scale * np.power(t, self.a) * self.log_factor(t)

    def power(self, e: float) -> "PowerLog":
        return PowerLog(self.a * e, self.A0 * e, self.Ainf * e, self.scale ** e)

    def times(self, other: "PowerLog") -> "PowerLog":
        return PowerLog(
            self.a + other.a, self.A0 + other.A0, self.Ainf + other.Ainf,
            self.scale * other.scale,
        )

    def primitive_descriptor(self) -> Optional["PowerLog"]:
        """Descriptor of t -> int_0^t w when that is again a pure power."""
        if not self.is_pure or not self.integrable_at_zero:
            return None
        return PowerLog(self.a + 1, 0.0, 0.0, self.scale / (self.a + 1))

    def _pure_antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.a == -1:
            return self.scale * np.log(t)
        return self.scale * np.power(t, self.a + 1) / (self.a + 1)

    def cell_mass(self, lo, hi) -> np.ndarray:
        """int_lo^hi w, exact for pure powers, log-midpoint otherwise (split at t=1)."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.is_pure:
            if self.a == -1:
                return self.scale * np.log(hi / lo)
            e = self.a + 1
            return self.scale * (np.power(hi, e) - np.power(lo, e)) / e
        one = np.clip(1.0, lo, hi)
        return _log_midpoint(self.evaluate, lo, one) + _log_midpoint(self.evaluate, one, hi)

    def _primitive_scalar(self, t: float) -> float:
        if self.is_pure:
            return float(self._pure_antiderivative(t))
        e = self.a + 1
        if t <= 1:
            # t = x e^{-z/e}: Gauss-Laguerre in z
            base = 1.0 - math.log(t) + _LAGUERRE_NODES / e
            return float(self.scale * t ** e / e * (_LAGUERRE_WEIGHTS * base ** self.A0).sum())
        total = self._primitive_scalar(1.0)
        upper = math.log(t)
        panels = max(1, math.ceil(upper))
        width = upper / panels
        for i in range(panels):
            s = i * width + (_LEGENDRE_NODES + 1) * width / 2
            vals = np.exp(e * s) * (1.0 + s) ** self.Ainf
            total += self.scale * width / 2 * float((_LEGENDRE_WEIGHTS * vals).sum())
        return total

    def primitive(self, t):
        """int_0^t w; +inf when w is not integrable at the origin."""
        if not self.integrable_at_zero:
            return np.full(np.shape(t), np.inf) if np.ndim(t) else float("inf")
        if np.ndim(t) == 0:
            return self._primitive_scalar(float(t))
        if self.is_pure:
            return self._pure_antiderivative(t)
        return np.vectorize(self._primitive_scalar, otypes=[float])(t)


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightSpec:
    samples: GridFunction
    descriptor: Optional[PowerLog] = None

    def __post_init__(self):
        if self.descriptor is not None:
            expected = self.descriptor.evaluate(self.grid.mids)
            if not np.allclose(self.samples.values, expected, rtol=_SAMPLE_RTOL, atol=0):
                raise ParameterError("weight samples do not match their power-log descriptor")

    @classmethod
    def power(cls, grid: Grid, a: float = 0.0, A0: float = 0.0, Ainf: float = 0.0,
              scale: float = 1.0) -> "WeightSpec":
        return cls.from_descriptor(grid, PowerLog(a, A0, Ainf, scale))

    @classmethod
    def from_descriptor(cls, grid: Grid, descriptor: PowerLog) -> "WeightSpec":
        return cls(GridFunction(grid, descriptor.evaluate(grid.mids)), descriptor)

    @classmethod
    def from_samples(cls, grid: Grid, values) -> "WeightSpec":
        return cls(GridFunction(grid, values))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "WeightSpec":
        return cls(GridFunction.from_function(grid, fn))

    @property
    def grid(self) -> Grid:
        return self.samples.grid

    @property
    def values(self) -> np.ndarray:
        return self.samples.values

    def evaluate(self, t):
        if self.descriptor is not None:
            return self.descriptor.evaluate(t)
        return self.samples.evaluate(t)

    def raised(self, e: float) -> "WeightSpec":
        """w^e, keeping the power-log descriptor when there is one."""
        if self.descriptor is not None:
            return WeightSpec.from_descriptor(self.grid, self.descriptor.power(e))
        return WeightSpec.from_samples(self.grid, np.power(self.values, e))

    def scaled(self, c: float) -> "WeightSpec":
        if self.descriptor is not None:
            d = self.descriptor
            return WeightSpec.from_descriptor(self.grid, PowerLog(d.a, d.A0, d.Ainf, d.scale * c))
        return WeightSpec.from_samples(self.grid, self.values * c)

    @cached_property
    def cell_masses(self) -> np.ndarray:
        grid = self.grid
        if self.descriptor is not None:
            masses = self.descriptor.cell_mass(grid.left, grid.right)
        else:
            masses = self.samples.cell_integrals()
        return _readonly(masses)

    def partial_mass(self, k, lo, hi):
        """int over (lo, hi] inside cell k."""
        if self.descriptor is not None:
            return self.descriptor.cell_mass(lo, hi)
        return self.values[k] * (np.asarray(hi) - np.asarray(lo))

    def head_mass(self) -> tuple:
        """(int_0^{t_min} w, integrable flag)."""
        if self.descriptor is not None:
            if not self.descriptor.integrable_at_zero:
                return 0.0, False
            return float(self.descriptor.primitive(self.grid.t_min)), True
        return self.samples.head_integral(), True

    def primitive(self, t):
        if self.descriptor is not None:
            return self.descriptor.primitive(t)
        return cumulative(self).at(t)


Integrand = Union[GridFunction, WeightSpec]


def _masses(f: Integrand) -> np.ndarray:
    return f.cell_masses if isinstance(f, WeightSpec) else f.cell_integrals()


def _partial(f: Integrand, k: int, lo: float, hi: float) -> float:
    if isinstance(f, WeightSpec):
        return float(f.partial_mass(k, lo, hi))
    return float(f.values[k] * (hi - lo))


def integrate(f: Integrand, a: float, b: float) -> float:
    """int_a^b f of the piecewise-constant (or descriptor) representation."""
    grid = f.grid
    if a > b:
        raise ParameterError(f"integration bounds reversed: ({a}, {b})")
    slack = 1e-12 * grid.t_max
    if a < grid.t_min * (1 - 1e-12) or b > grid.t_max + slack:
        raise ParameterError(f"({a}, {b}) is outside the grid ({grid.t_min}, {grid.t_max}]")
    a, b = max(a, grid.t_min), min(b, grid.t_max)
    if a == b:
        return 0.0
    edges = grid.edges
    i = int(np.clip(np.searchsorted(edges, a, side="right") - 1, 0, grid.N - 1))
    j = int(grid.locate(b))
    if i == j:
        return _partial(f, i, a, b)
    masses = _masses(f)
    return (
        _partial(f, i, a, edges[i + 1])
        + float(masses[i + 1:j].sum())
        + _partial(f, j, edges[j], b)
    )


# ---------------------------------------------------------------------------
# Cumulative weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CumulativeWeight:
    """W(t) = int_0^t w at the right edges: prefix[k] = W(e_{k+1})."""

    base: WeightSpec
    head: float
    prefix: np.ndarray
    truncated: bool = False

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @cached_property
    def at_edges(self) -> np.ndarray:
        return _readonly(np.concatenate([[self.head], self.prefix]))

    @cached_property
    def at_mids(self) -> np.ndarray:
        grid = self.grid
        part = self.base.partial_mass(np.arange(grid.N), grid.left, grid.mids)
        return _readonly(self.at_edges[:-1] + part)

    @property
    def total(self) -> float:
        return float(self.prefix[-1])

    def at(self, t):
        """W(t) for any 0 < t <= t_max."""
        grid = self.grid
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t > grid.t_max * (1 + 1e-12)) or np.any(t <= 0):
            raise ParameterError(f"W(t) requested outside (0, {grid.t_max}]")
        t = np.minimum(t, grid.t_max)
        k = grid.locate(t)
        lo = grid.edges[k]
        out = self.at_edges[k] + self.base.partial_mass(k, lo, np.maximum(t, lo))
        below = t <= grid.t_min
        if below.any():
            d = self.base.descriptor
            if d is not None and not self.truncated:
                out[below] = d.primitive(t[below])
            else:
                out[below] = self.head * t[below] / grid.t_min
        return float(out[0]) if scalar else out


def cumulative(w: WeightSpec, acknowledge_truncation: bool = False) -> CumulativeWeight:
    """Primitive of w on the grid, with analytic head mass where possible."""
    head, integrable = w.head_mass()
    truncated = not integrable
    if truncated:
        if not acknowledge_truncation:
            raise ConfigurationError(
                "weight is not integrable at the origin; acknowledge truncation to use head = 0"
            )
        logger.warning("Truncating non-integrable weight head at t_min=%g", w.grid.t_min)
    prefix = head + np.cumsum(w.cell_masses)
    cw = CumulativeWeight(w, float(head), _readonly(prefix), truncated)
    if not (np.all(cw.prefix > 0) and np.all(cw.at_mids > 0)):
        raise DispatchError("primitive of the weight is not strictly positive on the grid")
    return cw


# ---------------------------------------------------------------------------
# Linear scans
# ---------------------------------------------------------------------------


def suffix_max(values) -> np.ndarray:
    """out[k] = max_{j >= k} values[j] in one backward pass."""
    values = np.asarray(values, dtype=float)
    return np.maximum.accumulate(values[::-1])[::-1]


def prefix_max(values) -> np.ndarray:
    return np.maximum.accumulate(np.asarray(values, dtype=float))


def tail_sum(values) -> np.ndarray:
    """out[k] = sum_{j > k} values[j]."""
    values = np.asarray(values, dtype=float)
    rev = np.cumsum(values[::-1])[::-1]
    return np.concatenate([rev[1:], [0.0]])


def suffix_sup(g: GridFunction) -> MonotoneFunction:
    return MonotoneFunction(g.grid, suffix_max(g.values))


def prefix_sup(g: GridFunction) -> GridFunction:
    return GridFunction(g.grid, prefix_max(g.values))
