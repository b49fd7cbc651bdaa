"""Distribution functions, non-increasing rearrangements and the maximal average f**."""

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from app.exceptions import ParameterError
from app.lab.domain import Grid, GridFunction, MonotoneFunction, make_log_grid

# Lebesgue measure of the unit ball
OMEGA = {1: 2.0, 2: math.pi}

# Resampling offset, as a fraction of the target cell width
_RESAMPLE_OFFSET = 1e-9


def _check_dimension(n: int):
    if n not in OMEGA:
        raise ParameterError(f"only dimensions 1 and 2 are supported, got n={n}")


def box_overlaps(boxes: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Measures |box_i ∩ query_j| for boxes (m, n, 2) and queries (k, n, 2) -> (k, m)."""
    lo = np.maximum(query[:, None, :, 0], boxes[None, :, :, 0])
    hi = np.minimum(query[:, None, :, 1], boxes[None, :, :, 1])
    return np.prod(np.clip(hi - lo, 0.0, None), axis=2)


@dataclass(frozen=True, eq=False)
class StepField:
    """Finite sum of values times indicators of pairwise disjoint axis-aligned boxes."""

    n: int
    boxes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        _check_dimension(self.n)
        boxes = np.array(self.boxes, dtype=float).reshape(-1, self.n, 2)
        values = np.array(self.values, dtype=float).reshape(-1)
        if boxes.shape[0] != values.size:
            raise ParameterError("one value per box is required")
        if np.any(boxes[:, :, 1] <= boxes[:, :, 0]):
            raise ParameterError("boxes must have positive side lengths")
        if np.isnan(values).any() or (values < 0).any():
            raise ParameterError("step field values must be nonnegative")
        boxes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "values", values)
        self._check_disjoint()

    def _check_disjoint(self):
        if self.values.size < 2:
            return
        if self.n == 1:
            order = np.argsort(self.boxes[:, 0, 0])
            lo = self.boxes[order, 0, 0]
            hi = self.boxes[order, 0, 1]
            if np.any(hi[:-1] > lo[1:]):
                raise ParameterError("step field boxes overlap")
            return
        overlap = box_overlaps(self.boxes, self.boxes)
        np.fill_diagonal(overlap, 0.0)
        if np.any(overlap > 0):
            raise ParameterError("step field boxes overlap")

    @classmethod
    def from_intervals(cls, intervals: Iterable) -> "StepField":
        """1-d field from (lo, hi, value) triples."""
        rows = list(intervals)
        boxes = np.array([[[lo, hi]] for lo, hi, _ in rows], dtype=float).reshape(-1, 1, 2)
        values = np.array([v for _, _, v in rows], dtype=float)
        return cls(1, boxes, values)

    @classmethod
    def zero(cls, n: int = 1) -> "StepField":
        return cls(n, np.zeros((0, n, 2)), np.zeros(0))

    @property
    def measures(self) -> np.ndarray:
        return np.prod(self.boxes[:, :, 1] - self.boxes[:, :, 0], axis=1)

    @property
    def integral(self) -> float:
        return math.fsum(self.values * self.measures)

    def support_hull(self) -> Optional[np.ndarray]:
        """(n, 2) bounding box of the boxes carrying positive values."""
        live = self.values > 0
        if not live.any():
            return None
        return np.stack(
            [self.boxes[live, :, 0].min(axis=0), self.boxes[live, :, 1].max(axis=0)], axis=1
        )

    def breakpoints(self, axis: int = 0) -> np.ndarray:
        return np.unique(self.boxes[:, axis, :])

    def dilated(self, lam: float) -> "StepField":
        """The field x -> f(lam * x)."""
        return StepField(self.n, self.boxes / lam, self.values)

    def scaled(self, c: float) -> "StepField":
        return StepField(self.n, self.boxes, self.values * c)

    def integral_over(self, region: "StepField") -> float:
        """int_E |f| where E is the union of the boxes of ``region``."""
        if self.values.size == 0 or region.values.size == 0:
            return 0.0
        overlap = box_overlaps(self.boxes, region.boxes)
        return math.fsum((overlap * self.values[None, :]).ravel())


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Non-increasing step profile h = values[k] on (radii[k], radii[k+1]], constant below radii[1].

    One step (an indicator ball) is a valid profile.
    """

    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        radii = np.array(self.radii, dtype=float)
        values = np.array(self.values, dtype=float)
        if radii.ndim != 1 or radii.size < 2 or values.shape != (radii.size - 1,):
            raise ParameterError("a radial profile needs len(radii) == len(values) + 1 >= 2")
        if not np.all(np.isfinite(radii)) or radii[0] <= 0 or np.any(np.diff(radii) <= 0):
            raise ParameterError("radii must be positive, finite and strictly increasing")
        if np.any(values < 0) or np.any(np.diff(values) > 0):
            raise ParameterError("a radial profile must be non-negative and non-increasing")
        radii.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_monotone(cls, h: MonotoneFunction) -> "RadialProfile":
        return cls(h.grid.edges, h.values)

    def evaluate(self, r):
        """h(r) with the constant extension on both ends."""
        idx = np.searchsorted(self.radii[1:-1], r, side="left")
        return self.values[idx]


@dataclass(frozen=True, eq=False)
class RadialField:
    """f(x) = h(|x|) with h a non-increasing radial step profile."""

    n: int
    h: RadialProfile

    def __post_init__(self):
        _check_dimension(self.n)
        if isinstance(self.h, MonotoneFunction):
            object.__setattr__(self, "h", RadialProfile.from_monotone(self.h))
        if not isinstance(self.h, RadialProfile):
            raise ParameterError("radial profile must be a RadialProfile or MonotoneFunction")

    @classmethod
    def from_steps(cls, n: int, radii, values) -> "RadialField":
        return cls(n, RadialProfile(radii, values))

    @property
    def radii(self) -> np.ndarray:
        return self.h.radii

    def support_radius(self) -> float:
        live = np.nonzero(self.h.values > 0)[0]
        if live.size == 0:
            return 0.0
        return float(self.radii[live[-1] + 1])

    def value_at_radius(self, r):
        r = np.asarray(r, dtype=float)
        vals = self.h.evaluate(r)
        return np.where(r > self.radii[-1], 0.0, vals)

    def to_step_field(self, pixels: int = 32) -> StepField:
        """Exact interval decomposition in 1-d, a pixel approximation in 2-d."""
        if self.n == 1:
            r = self.radii
            v = self.h.values
            rows = [(-r[1], r[1], v[0])]
            for k in range(1, v.size):
                rows.append((-r[k + 1], -r[k], v[k]))
                rows.append((r[k], r[k + 1], v[k]))
            rows = [row for row in rows if row[2] > 0]
            if not rows:
                return StepField.zero(1)
            return StepField.from_intervals(rows)
        R = self.support_radius()
        if R == 0:
            return StepField.zero(2)
        ticks = np.linspace(-R, R, pixels + 1)
        centers = 0.5 * (ticks[:-1] + ticks[1:])
        cx, cy = np.meshgrid(centers, centers, indexing="ij")
        vals = self.value_at_radius(np.hypot(cx, cy)).ravel()
        lo_x, lo_y = np.meshgrid(ticks[:-1], ticks[:-1], indexing="ij")
        hi_x, hi_y = np.meshgrid(ticks[1:], ticks[1:], indexing="ij")
        boxes = np.stack(
            [np.stack([lo_x.ravel(), hi_x.ravel()], axis=1),
             np.stack([lo_y.ravel(), hi_y.ravel()], axis=1)],
            axis=1,
        )
        live = vals > 0
        return StepField(2, boxes[live], vals[live])


@dataclass(frozen=True, eq=False)
class DecreasingProfile:
    """Exact f* as sorted (value, measure) pieces: f* = values[i] on [edges[i-1], edges[i])."""

    values: np.ndarray
    measures: np.ndarray

    @property
    def edges(self) -> np.ndarray:
        return np.cumsum(self.measures)

    @property
    def total_measure(self) -> float:
        return math.fsum(self.measures)

    def at(self, t):
        idx = np.searchsorted(self.edges, t, side="right")
        vals = np.append(self.values, 0.0)
        return vals[np.minimum(idx, self.values.size)]

    def integral(self, s: float) -> float:
        """int_0^s f*."""
        if s <= 0 or self.values.size == 0:
            return 0.0
        edges = self.edges
        starts = edges - self.measures
        covered = np.clip(np.minimum(edges, s) - starts, 0.0, None)
        return math.fsum(covered * self.values)

    def to_monotone(self, grid: Grid) -> MonotoneFunction:
        """Essential sup of f* over each target cell (right-continuous resampling)."""
        if self.values.size == 0:
            return MonotoneFunction(grid, np.zeros(grid.N))
        at = grid.left + _RESAMPLE_OFFSET * grid.widths
        return MonotoneFunction(grid, self.at(at))


StepInput = Union[StepField, RadialField, GridFunction, DecreasingProfile]


def _pieces(f: StepInput):
    if isinstance(f, DecreasingProfile):
        return f.values, f.measures
    if isinstance(f, StepField):
        return f.values, f.measures
    if isinstance(f, RadialField):
        r = f.radii
        omega = OMEGA[f.n]
        measures = omega * np.diff(r ** f.n)
        measures[0] += omega * r[0] ** f.n
        return f.h.values, measures
    if isinstance(f, GridFunction):
        measures = np.array(f.grid.widths, dtype=float)
        measures[0] += f.grid.t_min
        return f.values, measures
    raise ParameterError(f"unsupported field type {type(f).__name__}")


def distribution(f: StepInput, lam: float) -> float:
    """|{x : |f(x)| > lam}| from the step representation."""
    values, measures = _pieces(f)
    return math.fsum(measures[values > lam])


def decreasing_profile(f: StepInput) -> DecreasingProfile:
    values, measures = _pieces(f)
    live = values > 0
    values, measures = values[live], measures[live]
    order = np.argsort(-values, kind="stable")
    out_values = np.array(values[order], dtype=float)
    out_measures = np.array(measures[order], dtype=float)
    out_values.setflags(write=False)
    out_measures.setflags(write=False)
    return DecreasingProfile(out_values, out_measures)


def rearrange(f: StepInput, grid: Optional[Grid] = None) -> MonotoneFunction:
    """f* resampled onto ``grid`` (default: 512 log cells spanning the pieces)."""
    profile = decreasing_profile(f)
    if grid is None:
        total = profile.total_measure
        if total == 0:
            total = 1.0
        smallest = profile.measures.min() if profile.measures.size else total
        grid = make_log_grid(min(smallest, total) * 1e-3, total * 1e3, 512)
    return profile.to_monotone(grid)


def doublestar(fstar: GridFunction) -> GridFunction:
    """f**(t) = (1/t) int_0^t f* at cell midpoints, with the constant head."""
    grid = fstar.grid
    f = fstar.values
    below = np.concatenate([[f[0] * grid.t_min], f[:-1] * grid.widths[:-1]])
    P = np.cumsum(below) + f * (grid.mids - grid.left)
    return GridFunction(grid, P / grid.mids)
