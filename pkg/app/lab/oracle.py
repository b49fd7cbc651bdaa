"""Brute-force estimates of best constants over the discretized monotone cone.

Every candidate is a conical combination of left indicators chi_(0,s], so it
is non-increasing by construction. The oracle only ever produces LOWER bounds
for the best constant on its grid; refinement trends do the rest.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from app.config import config
from app.exceptions import ParameterError
from app.lab.domain import MonotoneFunction, WeightSpec, suffix_max
from app.lab.extended import xdiv, xpow
from app.lab.hardy_suprema import SupOpSpec, kernel_profile
from app.lab.lorentz import weighted_norm
from app.logger import logger
from app.models.reports import ConstantReport, EquivalenceReport, OracleResult

STAIRCASE_STEPS = 8
IMPROVEMENT = 1e-6
_STEP = 0.5
_MIN_STEP = 1e-4
_MAX_SWEEPS = 400
POWER_EXPONENTS = np.linspace(0.05, 0.95, 19)

RHO_WINDOW = (1e-2, 1e2)
STABLE_DRIFT = 0.2
DIVERGENCE_FACTOR = 2.0


@dataclass(frozen=True, eq=False)
class _Objective:
    """f -> ||T f||_{q,w} / ||f||_{p,v}, exponents in (0, inf]."""

    spec: SupOpSpec
    v: WeightSpec
    w: WeightSpec
    p: float
    q: float

    def __call__(self, values: np.ndarray) -> float:
        Tf = suffix_max(kernel_profile(self.spec, values))
        return float(xdiv(weighted_norm(Tf, self.w, self.q), weighted_norm(values, self.v, self.p)))


def _staircase(N: int, idx: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """sum_i c_i chi over cells 0..idx_i."""
    jumps = np.zeros(N)
    np.add.at(jumps, idx, coeffs)
    return np.cumsum(jumps[::-1])[::-1]


def _random_staircase(N: int, seed: int, i: int) -> Tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng([seed, i])
    size = min(STAIRCASE_STEPS, N)
    idx = np.sort(rng.choice(N, size=size, replace=False))
    # log-normal heights reach power-like profiles more often than uniform ones
    coeffs = np.exp(rng.normal(0.0, 2.0, size=size))
    return idx, coeffs


def _check_inputs(spec: SupOpSpec, v: WeightSpec, w: WeightSpec, p: float, q: float, budget: int):
    if not (p > 0 and q > 0):
        raise ParameterError(f"need p, q in (0, inf], got ({p}, {q})")
    if budget < 1:
        raise ParameterError(f"oracle budget must be at least 1, got {budget}")
    if not (spec.grid.same_as(v.grid) and spec.grid.same_as(w.grid)):
        raise ParameterError("operator and weights live on different grids")


class _Search:
    def __init__(self, objective: _Objective, N: int):
        self.objective = objective
        self.N = N
        self.best = 0.0
        self.best_values = np.zeros(N)

    def offer(self, values: np.ndarray, ratio: Optional[float] = None) -> float:
        ratio = self.objective(values) if ratio is None else ratio
        if ratio > self.best:
            self.best = ratio
            self.best_values = np.array(values, dtype=float)
        return ratio

    def indicators(self) -> float:
        best = 0.0
        for k in range(self.N):
            values = np.zeros(self.N)
            values[: k + 1] = 1.0
            best = max(best, self.offer(values))
        return best

    def staircases(self, budget: int, seed: int, threads: int):
        def evaluate(i):
            idx, coeffs = _random_staircase(self.N, seed, i)
            return idx, coeffs, self.objective(_staircase(self.N, idx, coeffs))

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(evaluate, range(budget)))
        else:
            results = [evaluate(i) for i in range(budget)]

        best, start = -1.0, None
        for idx, coeffs, ratio in results:
            # strict comparison keeps the lowest index on ties
            if ratio > best:
                best, start = ratio, (idx, coeffs)
        self.offer(_staircase(self.N, *start), best)
        return best, start

    def ascend(self, idx: np.ndarray, coeffs: np.ndarray) -> float:
        """Multiplicative coordinate ascent on the nonnegative staircase heights."""
        coeffs = np.array(coeffs, dtype=float)
        current = self.objective(_staircase(self.N, idx, coeffs))
        step = _STEP
        sweeps = 0
        while step >= _MIN_STEP and sweeps < _MAX_SWEEPS:
            sweeps += 1
            moved = False
            for i in range(coeffs.size):
                top = coeffs.max()
                for trial in (coeffs[i] * (1 + step), coeffs[i] * (1 - step),
                              coeffs[i] + step * top, 0.0):
                    if trial == coeffs[i] or trial < 0:
                        continue
                    candidate = coeffs.copy()
                    candidate[i] = trial
                    if not candidate.any():
                        continue
                    ratio = self.objective(_staircase(self.N, idx, candidate))
                    if ratio > current * (1 + IMPROVEMENT):
                        coeffs, current, moved = candidate, ratio, True
                        break
            if not moved:
                step /= 2
        self.offer(_staircase(self.N, idx, coeffs), current)
        logger.debug(f"Coordinate ascent stopped after {sweeps} sweeps at ratio {current:.6g}")
        return current

    def power_profiles(self, grid, p: float) -> float:
        betas = list(POWER_EXPONENTS)
        if math.isfinite(p):
            betas.append(1.0 / p)
        cuts = np.unique(np.linspace(0, self.N - 1, 9).astype(int))[1:]
        best = 0.0
        for beta in betas:
            profile = np.power(grid.mids, -beta)
            for k in cuts:
                values = np.where(np.arange(self.N) <= k, profile, 0.0)
                best = max(best, self.offer(values))
        return best


def _label(x: float):
    return x if math.isfinite(x) else "inf"


def cone_ratio(spec: SupOpSpec, v: WeightSpec, w: WeightSpec, p: float, q: float,
               f: MonotoneFunction) -> float:
    """||T f||_{q,w} / ||f||_{p,v} for one cone member (0/0 = 0)."""
    return _Objective(spec, v, w, p, q)(np.asarray(f.values, dtype=float))


def oracle_T_norm(spec: SupOpSpec, v: WeightSpec, w: WeightSpec, p: float, q: float,
                  budget: int = 256, seed: int = 0, threads: Optional[int] = None) -> OracleResult:
    """Lower bound for the best c in ||T f||_{q,w} <= c ||f||_{p,v} over the monotone cone.

    Strategies: every left indicator, ``budget`` random 8-step staircases,
    coordinate ascent from the best staircase, and truncated power profiles
    t^{-beta} chi_(0,s]. The result depends only on (seed, budget), never on
    the thread count.
    """
    _check_inputs(spec, v, w, p, q, budget)
    threads = config.THREADS if threads is None else threads
    grid = spec.grid
    search = _Search(_Objective(spec, v, w, p, q), grid.N)

    log = {"indicators": search.indicators()}
    log["staircases"], (idx, coeffs) = search.staircases(budget, seed, threads)
    log["ascent"] = search.ascend(idx, coeffs)
    log["power_profiles"] = search.power_profiles(grid, p)

    argmax = MonotoneFunction(grid, search.best_values)
    best = cone_ratio(spec, v, w, p, q, argmax)
    provenance = dict(grid.provenance(), p=_label(p), q=_label(q), budget=budget, seed=seed)
    logger.info(f"Oracle best ratio {best:.6g} (p={p}, q={q}, N={grid.N}, budget={budget})")
    return OracleResult(best, argmax, log, seed, provenance)


def oracle_weak_norms(spec: SupOpSpec, v: WeightSpec, w: WeightSpec, p: float,
                      target: str = "weak", budget: int = 256, seed: int = 0,
                      threads: Optional[int] = None) -> OracleResult:
    """Weak forms: sup_t w T f over ||f||_{p,v} ("weak") or over sup_t v f ("weak-weak").

    For the maximal reduction pass w = W^{alpha/q} and, for "weak-weak",
    v = V^{alpha/p} as sampled weights.
    """
    if target == "weak":
        return oracle_T_norm(spec, v, w, p, math.inf, budget, seed, threads)
    if target == "weak-weak":
        return oracle_T_norm(spec, v, w, math.inf, math.inf, budget, seed, threads)
    raise ParameterError(f"weak target must be 'weak' or 'weak-weak', got {target!r}")


# ---------------------------------------------------------------------------
# Formula vs oracle
# ---------------------------------------------------------------------------


def _check_provenance(report: ConstantReport, oracle: OracleResult):
    for key in ("t_min", "t_max", "N"):
        a, b = report.provenance.get(key), oracle.provenance.get(key)
        if a is None or b is None or not math.isclose(float(a), float(b), rel_tol=1e-12):
            raise ParameterError(f"report and oracle disagree on {key}: {a} vs {b}")


def _diverging(values: Sequence[float]) -> bool:
    if len(values) < 2:
        return False
    return all(
        math.isinf(b) or (a > 0 and b >= DIVERGENCE_FACTOR * a)
        for a, b in zip(values[:-1], values[1:])
    )


def _stable(values: Sequence[float]) -> bool:
    return all(
        math.isfinite(a) and math.isfinite(b) and abs(b - a) <= STABLE_DRIFT * max(a, b)
        for a, b in zip(values[:-1], values[1:])
    )


def verify_equivalence(report: ConstantReport, oracle: OracleResult,
                       refinements: Sequence[Tuple[ConstantReport, OracleResult]] = (),
                       case: str = "", alpha: float = 1.0) -> EquivalenceReport:
    """Compare a formula total with the oracle lower bound.

    ``refinements`` holds (report, oracle) pairs on refined grids (N -> 2N -> 4N
    or doubled domains); their ratios form the trend. For maximal-operator
    reports the oracle runs on the reduced operator and measures C^alpha, so
    its ratio enters as best^(1/alpha).
    """
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    chain = [(report, oracle)] + list(refinements)
    for r, o in chain:
        _check_provenance(r, o)

    trend = tuple(
        {
            "N": int(r.provenance["N"]),
            "t_max": float(r.provenance["t_max"]),
            "total": float(r.total),
            "oracle": float(xpow(o.best_ratio, 1.0 / alpha)),
            "rho": float(xdiv(xpow(o.best_ratio, 1.0 / alpha), r.total)),
        }
        for r, o in chain
    )
    rho = trend[0]["rho"]
    totals = [row["total"] for row in trend]
    bests = [row["oracle"] for row in trend]
    report_unbounded = not report.finite or _diverging(totals)
    oracle_unbounded = _diverging(bests)

    if report_unbounded and oracle_unbounded:
        verdict = "consistent: both unbounded"
    elif oracle_unbounded:
        verdict = "inconsistent"
    elif report_unbounded:
        # a finite formula total is never undercut by a bounded oracle, but an
        # unbounded formula needs a diverging oracle trend to be confirmed
        verdict = "inconclusive" if len(chain) == 1 else "inconsistent"
    else:
        lo, hi = RHO_WINDOW
        if not lo <= rho <= hi:
            verdict = "inconsistent"
        elif _stable([row["rho"] for row in trend]):
            verdict = "consistent"
        else:
            verdict = "inconclusive"

    if verdict == "inconsistent":
        logger.warning(f"Inconsistent verdict for case {case or report.regime}: rho={rho:.4g}")
    provenance = dict(report.provenance, seed=oracle.seed)
    return EquivalenceReport(
        case=case,
        regime=report.regime,
        rho=rho,
        verdict=verdict,
        report_total=report.total,
        oracle_best=trend[0]["oracle"],
        report_finite=report.finite,
        trend=trend,
        provenance=provenance,
    )
