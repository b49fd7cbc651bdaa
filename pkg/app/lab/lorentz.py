"""Classical and weak-type Lorentz quasi-norms and the weight/parameter condition checkers."""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from app.config import config
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
from app.lab.extended import xdiv, xmul, xpow
from app.lab.rearrangement import doublestar
from app.models.reports import ConditionResult


@dataclass(frozen=True, eq=False)
class LorentzParams:
    p: float
    w: WeightSpec

    def __post_init__(self):
        if not self.p > 0:
            raise ParameterError(f"Lorentz exponent must be positive, got p={self.p}")


def _cap(cap: Optional[float]) -> float:
    return config.cap() if cap is None else float(cap)


def weighted_norm(values, w: WeightSpec, p: float) -> float:
    """||g||_{p,w} of a grid function under the constant head extension; p may be inf."""
    values = np.asarray(values, dtype=float)
    if np.isinf(p):
        return float(np.max(xmul(values, w.values)))
    head, integrable = w.head_mass()
    if not integrable:
        head = np.inf
    body = float(np.sum(xmul(xpow(values, p), w.cell_masses)))
    total = body + float(xmul(xpow(values[0], p), head))
    return float(xpow(total, 1.0 / p))


def lambda_norm(fstar: GridFunction, prm: LorentzParams) -> float:
    return weighted_norm(fstar.values, prm.w, prm.p)


def weak_lambda_norm(fstar: GridFunction, prm: LorentzParams,
                     W: Optional[CumulativeWeight] = None) -> float:
    """sup_t f*(t) W(t)^{1/p}, cell values against W at right edges."""
    W = W or cumulative(prm.w)
    return float(np.max(xmul(fstar.values, xpow(W.prefix, 1.0 / prm.p))))


def gamma_norm(fstar: MonotoneFunction, prm: LorentzParams) -> float:
    return weighted_norm(doublestar(fstar).values, prm.w, prm.p)


# ---------------------------------------------------------------------------
# Condition checkers
# ---------------------------------------------------------------------------


def check_delta2(F: CumulativeWeight, cap: Optional[float] = None) -> ConditionResult:
    """sup F(2t)/F(t) over grid edges with 2t inside the grid."""
    edges = F.grid.edges
    ts = edges[2 * edges <= F.grid.t_max]
    if ts.size == 0:
        raise ParameterError("grid too short for a doubling check (t_max < 2 t_min)")
    ratios = xdiv(F.at(2 * ts), F.at(ts))
    return ConditionResult("delta2", float(np.max(ratios)), _cap(cap))


def _as_values(phi: Union[GridFunction, WeightSpec, np.ndarray]) -> np.ndarray:
    if isinstance(phi, (GridFunction, WeightSpec)):
        return np.asarray(phi.values, dtype=float)
    return np.asarray(phi, dtype=float)


def quasi_monotone_constant(values, direction: str = "increasing") -> float:
    values = np.asarray(values, dtype=float)
    if direction == "increasing":
        # phi(t1) <= C phi(t2) for t1 <= t2
        return float(np.max(xdiv(prefix_max(values), values)))
    if direction == "decreasing":
        return float(np.max(xdiv(suffix_max(values), values)))
    raise ParameterError(f"direction must be 'increasing' or 'decreasing', got {direction!r}")


def check_quasi_monotone(phi, direction: str = "increasing",
                         cap: Optional[float] = None) -> ConditionResult:
    constant = quasi_monotone_constant(_as_values(phi), direction)
    return ConditionResult(f"quasi_{direction}", constant, _cap(cap))


def qr_ratio(phi: WeightSpec, ts, r: float) -> float:
    """phi(sum t_i) / (sum phi(t_i)^r)^{1/r} for one finite set."""
    ts = np.asarray(ts, dtype=float)
    top = phi.evaluate(ts.sum())
    bottom = xpow(np.sum(xpow(phi.evaluate(ts), r)), 1.0 / r)
    return float(xdiv(top, bottom))


def check_Qr(phi: WeightSpec, r: float, trials: int = 1000, seed: int = 0,
             cap: Optional[float] = None) -> ConditionResult:
    """Randomized lower bound for the Q_r constant over sets of 2..8 grid edges."""
    if not r > 0:
        raise ParameterError(f"Q_r needs r > 0, got {r}")
    rng = np.random.default_rng(seed)
    edges = phi.grid.edges
    t_max = phi.grid.t_max
    best = 0.0
    for _ in range(trials):
        size = int(rng.integers(2, 9))
        pool = edges[edges * size <= t_max]
        if pool.size == 0:
            continue
        ts = rng.choice(pool, size=size, replace=True)
        best = max(best, qr_ratio(phi, ts, r))
    return ConditionResult("Qr_random", best, _cap(cap), note=f"lower bound, {trials} trials")


def check_Qr_structural(phi: WeightSpec, r: float, cap: Optional[float] = None) -> ConditionResult:
    """Upper bound from phi = t^{1/r} g with g quasi-decreasing (power-log phi only)."""
    if phi.descriptor is None:
        raise ParameterError("structural Q_r check needs a power-log descriptor")
    edges = phi.grid.edges
    g = phi.descriptor.evaluate(edges) / np.power(edges, 1.0 / r)
    constant = quasi_monotone_constant(g, "decreasing")
    return ConditionResult("Qr_structural", constant, _cap(cap), note="upper bound")


def check_lower_r_estimate(p: float, w: WeightSpec, r: float,
                           cap: Optional[float] = None) -> ConditionResult:
    """Lambda^p(w) satisfies a lower r-estimate iff r >= p and W(t)/t^{p/r} is quasi-increasing."""
    if not (p > 0 and r > 0):
        raise ParameterError(f"need p, r > 0, got p={p}, r={r}")
    W = cumulative(w)
    edges = w.grid.edges
    ratio = xdiv(W.at_edges, np.power(edges, p / r))
    constant = quasi_monotone_constant(ratio, "increasing")
    cap = _cap(cap)
    result = ConditionResult("lower_r_estimate", constant, cap)
    return ConditionResult(
        "lower_r_estimate", constant, cap,
        holds=bool(r >= p and result.finite),
        note="" if r >= p else f"r={r} < p={p}",
    )
