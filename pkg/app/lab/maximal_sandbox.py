"""Direct evaluation of M_{phi, Lambda^alpha(b)} on R^1 and R^2 and the rearrangement sandwich.

    M f(x) = sup_{Q containing x} ||f chi_Q||_{Lambda^alpha(b)} / phi(|Q|)

The sup runs over a finite cube family, so every value here is a lower bound
for the true maximal function.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from app.config import config
from app.exceptions import ParameterError
from app.lab.characterization import maximal_hypotheses
from app.lab.domain import Grid, GridFunction, MonotoneFunction, PowerLog, WeightSpec, make_log_grid
from app.lab.extended import xdiv, xpow
from app.lab.hardy_suprema import kernel_profile, maximal_rhs, reduce_maximal_to_T
from app.lab.rearrangement import (
    DecreasingProfile,
    RadialField,
    StepField,
    box_overlaps,
    decreasing_profile,
    doublestar,
)
from app.logger import logger
from app.models.reports import MaximalSample, SandwichResult

WeightLike = Union[WeightSpec, PowerLog]

SAMPLE_MARGIN = 8.0
TRIM = 0.1
# cap on lattice positions per axis and on lattice side lengths in 2-d
_LATTICE_POSITIONS = 6
_LATTICE_SIZES = 32
_TAIL_CELLS = 2048
_TAIL_OCTAVES = 12


@dataclass(frozen=True)
class OperatorPreset:
    """(phi, alpha, b) data of a named maximal operator."""

    name: str
    phi: PowerLog
    alpha: float
    b: PowerLog

    @classmethod
    def classical(cls) -> "OperatorPreset":
        return cls("classical", PowerLog(1.0), 1.0, PowerLog(0.0))

    @classmethod
    def fractional(cls, gamma: float, n: int = 1) -> "OperatorPreset":
        if not 0 <= gamma < n:
            raise ParameterError(f"need 0 <= gamma < n, got gamma={gamma}, n={n}")
        return cls("fractional", PowerLog(1.0 - gamma / n), 1.0, PowerLog(0.0))

    @classmethod
    def power_log(cls, s: float, gamma: float, A: Tuple[float, float], n: int = 1) -> "OperatorPreset":
        """M_{s,gamma,A}: phi(t) = t^{(n-gamma)/(sn)} l^A(t), alpha = s, b = 1."""
        if not (s > 0 and 0 <= gamma < n):
            raise ParameterError(f"need s > 0 and 0 <= gamma < n, got s={s}, gamma={gamma}")
        A0, Ainf = A
        return cls("power_log", PowerLog((n - gamma) / (s * n), A0, Ainf), s, PowerLog(0.0))

    @classmethod
    def lorentz(cls, p: float, q: float) -> "OperatorPreset":
        """M_{p,q}: phi(t) = t^{1/p}, alpha = q, b(t) = t^{q/p - 1}."""
        if not (p > 0 and q > 0):
            raise ParameterError(f"need p, q > 0, got ({p}, {q})")
        return cls("lorentz", PowerLog(1.0 / p), q, PowerLog(q / p - 1.0))

    @property
    def is_classical(self) -> bool:
        return _is_classical(self.phi, self.alpha, self.b)


def _descriptor(w: WeightLike, name: str) -> PowerLog:
    if isinstance(w, PowerLog):
        return w
    if w.descriptor is None:
        raise ParameterError(f"{name} needs a power-log descriptor to be evaluated off the grid")
    return w.descriptor


def _on_grid(w: WeightLike, grid: Grid, name: str) -> WeightSpec:
    if isinstance(w, WeightSpec) and w.grid.same_as(grid):
        return w
    return WeightSpec.from_descriptor(grid, _descriptor(w, name))


def _is_classical(phi: PowerLog, alpha: float, b: PowerLog) -> bool:
    return phi == PowerLog(1.0) and alpha == 1 and b == PowerLog(0.0)


def _as_step(f) -> StepField:
    if isinstance(f, RadialField):
        return f.to_step_field(pixels=16) if f.n == 2 else f.to_step_field()
    if isinstance(f, StepField):
        return f
    raise ParameterError(f"maximal operator needs a step or radial field, got {type(f).__name__}")


def _thin(values: np.ndarray, cap: int) -> np.ndarray:
    if values.size <= cap:
        return values
    return values[np.linspace(0, values.size - 1, cap).astype(int)]


class _MaximalEvaluator:
    """Cube family and restricted Lambda^alpha(b) norms for one field."""

    def __init__(self, f: StepField, phi: PowerLog, alpha: float, b: PowerLog, cube_budget: int):
        if not alpha > 0:
            raise ParameterError(f"alpha must be positive, got {alpha}")
        if cube_budget < 1:
            raise ParameterError(f"cube_budget must be at least 1, got {cube_budget}")
        if not b.integrable_at_zero:
            raise ParameterError("b must be integrable at the origin")
        self.n = f.n
        self.phi, self.alpha, self.b = phi, alpha, b
        self.budget = cube_budget
        live = f.values > 0
        order = np.argsort(-f.values[live], kind="stable")
        self.boxes = f.boxes[live][order]
        self.va = xpow(f.values[live][order], alpha)
        self.hull = f.support_hull()
        self.ticks = [np.unique(self.boxes[:, axis, :]) for axis in range(self.n)]
        gaps = np.concatenate([np.diff(t) for t in self.ticks]) if self.va.size else np.zeros(0)
        gaps = gaps[gaps > 0]
        self.s_min = float(gaps.min()) / 2 if gaps.size else 0.0
        if self.n == 2 and self.va.size:
            diffs = np.unique(np.concatenate(
                [(t[None, :] - t[:, None])[np.triu_indices(t.size, 1)] for t in self.ticks]
            ))
            self.lattice_sizes = _thin(diffs[diffs > 0], _LATTICE_SIZES)

    def _B(self, M: np.ndarray) -> np.ndarray:
        out = np.zeros_like(M)
        pos = M > 0
        if pos.any():
            unique, inverse = np.unique(M[pos], return_inverse=True)
            out[pos] = np.asarray(self.b.primitive(unique), dtype=float)[inverse]
        return out

    def restricted(self, cubes: np.ndarray) -> np.ndarray:
        """||f chi_Q||_{Lambda^alpha(b)} / phi(|Q|) for cubes (k, n, 2)."""
        overlaps = box_overlaps(self.boxes, cubes)
        B = self._B(np.cumsum(overlaps, axis=1))
        dB = np.diff(B, axis=1, prepend=0.0)
        norms = xpow((dB * self.va[None, :]).sum(axis=1), 1.0 / self.alpha)
        measure = np.prod(cubes[:, :, 1] - cubes[:, :, 0], axis=1)
        return xdiv(norms, self.phi.evaluate(measure))

    def _budget_sizes(self, x: np.ndarray) -> np.ndarray:
        reach = np.max(np.maximum(np.abs(x - self.hull[:, 0]), np.abs(x - self.hull[:, 1])))
        s_max = 2.0 * (float(reach) + float(np.max(self.hull[:, 1] - self.hull[:, 0])))
        octaves = max(1, math.ceil(math.log2(s_max / self.s_min)))
        # sizes per octave nest when the budget doubles
        return self.s_min * np.power(2.0, np.arange(octaves * self.budget + 1) / self.budget)

    def _cubes_1d(self, x: np.ndarray) -> np.ndarray:
        lattice = np.union1d(self.ticks[0], x)
        left = lattice[lattice <= x[0]]
        right = lattice[lattice >= x[0]]
        lo, hi = np.meshgrid(left, right, indexing="ij")
        lattice_cubes = np.stack([lo.ravel(), hi.ravel()], axis=1)
        lattice_cubes = lattice_cubes[lattice_cubes[:, 1] > lattice_cubes[:, 0]]
        sizes = self._budget_sizes(x)
        centered = np.stack([x[0] - sizes / 2, x[0] + sizes / 2], axis=1)
        return np.concatenate([lattice_cubes, centered])[:, None, :]

    def _corners(self, x: float, s: float, ticks: np.ndarray) -> np.ndarray:
        inside = ticks[(ticks >= x - s) & (ticks <= x)]
        upper = ticks[(ticks >= x) & (ticks <= x + s)] - s
        lattice = _thin(np.unique(np.concatenate([inside, upper])), _LATTICE_POSITIONS)
        return np.unique(np.concatenate([[x - s, x - s / 2, x], lattice]))

    def _cubes_2d(self, x: np.ndarray) -> np.ndarray:
        blocks = []
        for s in self.lattice_sizes:
            ax = self._corners(x[0], s, self.ticks[0])
            ay = self._corners(x[1], s, self.ticks[1])
            blocks.append(self._squares(ax, ay, s))
        for s in self._budget_sizes(x):
            corners = np.array([-s, -s / 2, 0.0])
            blocks.append(self._squares(x[0] + corners, x[1] + corners, s))
        return np.concatenate(blocks)

    @staticmethod
    def _squares(ax: np.ndarray, ay: np.ndarray, s: float) -> np.ndarray:
        cx, cy = np.meshgrid(ax, ay, indexing="ij")
        cx, cy = cx.ravel(), cy.ravel()
        return np.stack([np.stack([cx, cx + s], axis=1), np.stack([cy, cy + s], axis=1)], axis=1)

    def at(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(self.n)
        if self.va.size == 0:
            return 0.0
        cubes = self._cubes_1d(x) if self.n == 1 else self._cubes_2d(x)
        return float(np.max(self.restricted(cubes)))


def default_points(f: StepField, samples: int = 512, margin: float = SAMPLE_MARGIN) -> np.ndarray:
    """Cell centres of a uniform sample box around the support (per axis in 2-d)."""
    center, half = _sample_box(f, margin)
    per_axis = samples if f.n == 1 else max(2, int(round(math.sqrt(samples))))
    ticks = [np.linspace(c - half, c + half, per_axis + 1) for c in center]
    centres = [0.5 * (t[:-1] + t[1:]) for t in ticks]
    if f.n == 1:
        return centres[0][:, None]
    cx, cy = np.meshgrid(*centres, indexing="ij")
    return np.stack([cx.ravel(), cy.ravel()], axis=1)


def _sample_box(f: StepField, margin: float):
    hull = f.support_hull()
    if hull is None:
        return np.zeros(f.n), 1.0
    center = hull.mean(axis=1)
    half = margin * float(np.max(hull[:, 1] - hull[:, 0])) / 2
    return center, half


def eval_maximal(f, phi: WeightLike, alpha: float, b: WeightLike, cube_budget: int = 8,
                 points: Optional[np.ndarray] = None, threads: Optional[int] = None) -> MaximalSample:
    """Sample M_{phi, Lambda^alpha(b)} f at ``points`` (shape (P, n)).

    Cube family: every cube with corners on the breakpoint lattice of f
    (thinned to a few positions per axis in 2-d) plus ``cube_budget`` sizes per
    octave anchored at x. Raising the budget only adds cubes.
    """
    if getattr(f, "n", None) not in (1, 2):
        raise ParameterError(f"only dimensions 1 and 2 are supported, got n={getattr(f, 'n', None)}")
    step = _as_step(f)
    evaluator = _MaximalEvaluator(step, _descriptor(phi, "phi"), alpha, _descriptor(b, "b"), cube_budget)
    points = default_points(step) if points is None else np.asarray(points, dtype=float).reshape(-1, step.n)
    threads = config.THREADS if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(evaluator.at, points))
    else:
        values = [evaluator.at(x) for x in points]
    return MaximalSample(points, np.asarray(values, dtype=float))


# ---------------------------------------------------------------------------
# Reduction to the supremum operator
# ---------------------------------------------------------------------------


def rhs_reduction(fstar: MonotoneFunction, phi: WeightLike, alpha: float, b: WeightLike,
                  r_est: Optional[float] = None, check_hypotheses: bool = True,
                  acknowledge_truncation: bool = False) -> GridFunction:
    """sup_{tau > t} (int_0^tau (f*)^alpha b)^{1/alpha} / phi(tau) on the grid of f*."""
    grid = fstar.grid
    phi_w = _on_grid(phi, grid, "phi")
    b_w = _on_grid(b, grid, "b")
    if check_hypotheses:
        maximal_hypotheses(phi_w, alpha, b_w, r_est)
    spec = reduce_maximal_to_T(phi_w, alpha, b_w, acknowledge_truncation)
    return maximal_rhs(spec, fstar, alpha)


def rhs_at_tau_equals_t(fstar: MonotoneFunction, phi: WeightLike, alpha: float,
                        b: WeightLike) -> GridFunction:
    """The reduction with the sup dropped: (int_0^t (f*)^alpha b)^{1/alpha} / phi(t)."""
    grid = fstar.grid
    spec = reduce_maximal_to_T(_on_grid(phi, grid, "phi"), alpha, _on_grid(b, grid, "b"))
    psi = xpow(fstar.values, alpha)
    return GridFunction(grid, xpow(kernel_profile(spec, psi), 1.0 / alpha))


# ---------------------------------------------------------------------------
# Sandwich checks
# ---------------------------------------------------------------------------


def _classical_tail(f: StepField, center: float, half: float) -> Tuple[np.ndarray, np.ndarray]:
    """Mf outside the sample box in 1-d: ||f||_1 / distance to the far end of the hull."""
    a, c = f.support_hull()[0]
    mass = f.integral
    dist = half * np.power(2.0, np.linspace(0.0, _TAIL_OCTAVES, _TAIL_CELLS + 1))
    starts, widths = dist[:-1], np.diff(dist)
    right = mass / (center + starts - a)
    left = mass / (c - (center - starts))
    return np.concatenate([right, left]), np.concatenate([widths, widths])


def _maximal_profile(f: StepField, preset: OperatorPreset, cube_budget: int, samples: int,
                     margin: float, threads: Optional[int], quadrant: bool):
    center, half = _sample_box(f, margin)
    if quadrant:
        per_axis = max(2, int(round(math.sqrt(samples))))
        ticks = np.linspace(0.0, half, per_axis + 1)
        centres = 0.5 * (ticks[:-1] + ticks[1:])
        cx, cy = np.meshgrid(centres + center[0], centres + center[1], indexing="ij")
        points = np.stack([cx.ravel(), cy.ravel()], axis=1)
        cell = (half / per_axis) ** 2 * 4
    else:
        points = default_points(f, samples, margin)
        per_axis = samples if f.n == 1 else max(2, int(round(math.sqrt(samples))))
        cell = (2 * half / per_axis) ** f.n
    sample = eval_maximal(f, preset.phi, preset.alpha, preset.b, cube_budget, points, threads)
    values = sample.values
    measures = np.full(values.size, cell)
    tail = "omitted"
    if f.n == 1 and preset.is_classical:
        tv, tm = _classical_tail(f, float(center[0]), half)
        values = np.concatenate([values, tv])
        measures = np.concatenate([measures, tm])
        tail = "analytic"
    elif values.size:
        logger.info(f"Maximal tail outside the sample box omitted ({preset.name}, n={f.n})")
    box_measure = (2 * half) ** f.n
    return decreasing_profile(DecreasingProfile(values, measures)), box_measure, tail


def _window(grid: Grid, lhs: np.ndarray, rhs: np.ndarray, trim: float):
    cut = int(trim * grid.N)
    keep = slice(cut, grid.N - cut)
    t, lhs, rhs = grid.mids[keep], lhs[keep], rhs[keep]
    ratio = xdiv(lhs, rhs)
    valid = (lhs > 0) & (rhs > 0)
    if not valid.any():
        return t, lhs, rhs, ratio, 0.0, 0.0
    return t, lhs, rhs, ratio, float(ratio[valid].min()), float(ratio[valid].max())


def _empty(cube_budget: int) -> SandwichResult:
    empty = np.zeros(0)
    return SandwichResult(empty, empty, empty, empty, 0.0, 0.0, "none", cube_budget)


def sandwich_check(f: RadialField, phi: WeightLike, alpha: float, b: WeightLike,
                   cube_budget: int = 8, samples: int = 512, grid_cells: int = 256,
                   margin: float = SAMPLE_MARGIN, trim: float = TRIM, r_est: Optional[float] = None,
                   threads: Optional[int] = None) -> SandwichResult:
    """Pointwise ratio window of (M f)* against the supremum-operator reduction.

    (M f)* comes from sampling M f on a box ``margin`` times the support and
    rearranging; ``trim`` of the comparison grid is dropped at each end.
    """
    if not isinstance(f, RadialField):
        raise ParameterError("sandwich_check needs a radial non-increasing field")
    preset = OperatorPreset("custom", _descriptor(phi, "phi"), alpha, _descriptor(b, "b"))
    step = _as_step(f)
    if step.values.size == 0:
        return _empty(cube_budget)
    profile, box_measure, tail = _maximal_profile(
        step, preset, cube_budget, samples, margin, threads, quadrant=f.n == 2
    )
    grid = make_log_grid(box_measure * 1e-3, box_measure, grid_cells)
    fstar = decreasing_profile(step).to_monotone(grid)
    rhs = rhs_reduction(fstar, preset.phi, alpha, preset.b, r_est).values
    lhs = profile.at(grid.mids)
    t, lhs, rhs, ratio, c_low, C_high = _window(grid, lhs, rhs, trim)
    logger.info(f"Sandwich window [{c_low:.4g}, {C_high:.4g}] (n={f.n}, budget={cube_budget}, tail={tail})")
    return SandwichResult(t, lhs, rhs, ratio, c_low, C_high, tail, cube_budget)


def herz_stein_check(f: StepField, cube_budget: int = 8, samples: int = 512, grid_cells: int = 256,
                     margin: float = SAMPLE_MARGIN, trim: float = TRIM,
                     threads: Optional[int] = None) -> SandwichResult:
    """Ratio window of (M f)*(t) / f**(t) for the Hardy-Littlewood maximal operator."""
    if not isinstance(f, StepField):
        raise ParameterError("herz_stein_check needs a step field")
    if f.support_hull() is None:
        return _empty(cube_budget)
    profile, box_measure, tail = _maximal_profile(
        f, OperatorPreset.classical(), cube_budget, samples, margin, threads, quadrant=False
    )
    grid = make_log_grid(box_measure * 1e-3, box_measure, grid_cells)
    rhs = doublestar(decreasing_profile(f).to_monotone(grid)).values
    lhs = profile.at(grid.mids)
    t, lhs, rhs, ratio, c_low, C_high = _window(grid, lhs, rhs, trim)
    return SandwichResult(t, lhs, rhs, ratio, c_low, C_high, tail, cube_budget)
