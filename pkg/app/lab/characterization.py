"""Closed-form characterization constants with regime dispatch.

Discretization shared by every part:

* the outer variable x runs over right edges e_{k+1};
* sup over tau >= x is a suffix max over cells j >= k, sup over y <= x a
  prefix max over j <= k;
* int_0^x is cumulative through cell k (head included), int_x^inf sums j > k;
* primitives taken at the outer x use right-edge values, those inside
  integrands and inner suprema use midpoint values;
* outer int dx is sum val_k * w-mass_k + val_0 * W(t_min).

Operator parts are named after their regime letter (A1 ... F4, G1, G2, H1,
H2, I); the maximal-operator families carry an ``M`` prefix (MA1 ... MI), and
MX equals X^{1/alpha} for the substituted operator data whenever phi is
strictly increasing.
"""

import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Dict, List, Optional

import numpy as np

from app.config import config
from app.exceptions import DispatchError, ParameterError
from app.lab.domain import (
    WeightSpec,
    cumulative,
    prefix_max,
    suffix_max,
    tail_sum,
)
from app.lab.extended import xdiv, xmul, xpow
from app.lab.hardy_suprema import SupOpSpec
from app.lab.lorentz import (
    check_delta2,
    check_lower_r_estimate,
    check_Qr,
    check_Qr_structural,
    check_quasi_monotone,
)
from app.logger import logger
from app.models.reports import ConstantReport

STRONG_REGIMES = ("i", "ii", "iii", "iv", "v", "vi")
TARGETS = ("strong", "weak", "weak-weak")
_ONE = 1e-12


@dataclass(frozen=True)
class RegimeParams:
    p: float
    q: float
    alpha: float = 1.0
    r_est: Optional[float] = None

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0 and self.alpha > 0):
            raise ParameterError(f"need p, q, alpha > 0, got {self}")
        if self.r_est is not None and self.r_est < self.alpha:
            raise ParameterError(f"lower-estimate parameter r={self.r_est} must be >= alpha={self.alpha}")

    @property
    def r(self) -> Optional[float]:
        """1/r = 1/q - 1/p, defined only for q < p."""
        if not self.q < self.p:
            return None
        return 1.0 / (1.0 / self.q - 1.0 / self.p)

    @property
    def substituted(self) -> "RegimeParams":
        return RegimeParams(self.p / self.alpha, self.q / self.alpha, 1.0)


def _is_one(x: float) -> bool:
    return math.isclose(x, 1.0, rel_tol=_ONE, abs_tol=0.0)


def regime_select(p: float, q: float) -> str:
    """Case tag (i)..(vi); (v) and (vi) carry the p < 1 guard."""
    if not (p > 0 and q > 0):
        raise ParameterError(f"need p, q > 0, got ({p}, {q})")
    if _is_one(p):
        return "ii" if q >= 1 or _is_one(q) else "iv"
    if p > 1:
        return "i" if p <= q else "iii"
    return "v" if p <= q else "vi"


def maximal_regime(p: float, q: float, alpha: float) -> str:
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    return regime_select(p / alpha, q / alpha)


class _Scans:
    """Arrays shared by the parts of one (operator, v, w) configuration."""

    def __init__(self, b: WeightSpec, v: WeightSpec, w: WeightSpec, acknowledge_truncation: bool,
                 B=None):
        grid = b.grid
        if not (grid.same_as(v.grid) and grid.same_as(w.grid)):
            raise ParameterError("b, v and w must live on the same grid")
        self.grid = grid
        self.B = B if B is not None else cumulative(b, acknowledge_truncation)
        self.V = cumulative(v, acknowledge_truncation)
        self.W = cumulative(w, acknowledge_truncation)
        self.b, self.v, self.w = b, v, w
        self.Bm, self.Bx = self.B.at_mids, self.B.prefix
        self.Vm, self.Vx = self.V.at_mids, self.V.prefix
        self.Wm, self.Wx = self.W.at_mids, self.W.prefix

    def outer(self, *factors) -> float:
        """int_0^inf val(x) w(x) dx with val the extended-real product of the factors."""
        vals = np.asarray(reduce(xmul, factors), dtype=float)
        return float(np.sum(xmul(vals, self.w.cell_masses)) + xmul(vals[0], self.W.head))

    def tail(self, vals) -> np.ndarray:
        """int_x^inf val(t) w(t) dt."""
        return tail_sum(xmul(vals, self.w.cell_masses))

    def inner_v(self, vals) -> np.ndarray:
        """int_0^x val(y) v(y) dy."""
        vals = np.asarray(vals, dtype=float)
        return np.cumsum(xmul(vals, self.v.cell_masses)) + xmul(vals[0], self.V.head)

    def sup_block(self, S_pow) -> np.ndarray:
        """S^q(x) W(x) + int_x^inf S^q w, given S^q at every cell."""
        return xmul(S_pow, self.Wx) + self.tail(S_pow)

    def provenance(self) -> dict:
        prov = self.grid.provenance()
        prov["truncated"] = bool(self.B.truncated or self.V.truncated or self.W.truncated)
        prov["B_t_max"] = float(self.Bx[-1])
        prov["B_ratio_t_max_over_t_min"] = float(xdiv(self.Bx[-1], self.Bx[0]))
        return prov


def _sup(vals) -> float:
    return float(np.max(vals))


def _root(value: float, r: float) -> float:
    return float(xpow(value, 1.0 / r))


# ---------------------------------------------------------------------------
# Supremum operator constants
# ---------------------------------------------------------------------------


class _OperatorParts:
    def __init__(self, spec: SupOpSpec, scans: _Scans):
        self.s = scans
        self.kB = np.asarray(spec.kernel, dtype=float)
        self.u = self.kB * scans.Bm

    @cached_property
    def S_B(self):
        return suffix_max(self.kB)

    @cached_property
    def S_V(self):
        return suffix_max(xdiv(self.u, self.s.Vm ** 2))

    def S_E(self, p):
        return suffix_max(xdiv(xpow(self.u, p), self.s.Vm ** 2))

    def strong(self, regime: str, p: float, q: float) -> Dict[str, float]:
        s = self.s
        BV = xdiv(s.Bm, s.Vm)
        if regime in ("i", "iii"):
            pp = p / (p - 1)
            IvB = s.inner_v(xpow(BV, pp))
            IvV = s.inner_v(xpow(s.Vm, pp))
        if regime == "i":
            return {
                "A1": _sup(xmul(xpow(s.sup_block(xpow(self.S_B, q)), 1 / q), xpow(IvB, 1 / pp))),
                "A2": _sup(xmul(xpow(s.sup_block(xpow(self.S_V, q)), 1 / q), xpow(IvV, 1 / pp))),
            }
        if regime == "ii":
            return {
                "B1": _sup(xmul(xpow(s.sup_block(xpow(self.S_B, q)), 1 / q), prefix_max(BV))),
                "B2": _sup(xmul(xpow(s.sup_block(xpow(self.S_V, q)), 1 / q), s.Vx)),
            }
        if regime == "v":
            SE = xpow(self.S_E(p), q / p)
            return {
                "E1": _sup(xmul(xpow(s.sup_block(xpow(self.S_B, q)), 1 / q),
                                prefix_max(xdiv(s.Bm, xpow(s.Vm, 1 / p))))),
                "E2": _sup(xmul(xpow(s.sup_block(SE), 1 / q), xpow(s.Vx, 1 / p))),
            }

        r = 1.0 / (1.0 / q - 1.0 / p)
        SBq = xpow(self.S_B, q)
        SVq = xpow(self.S_V, q)
        if regime == "iii":
            return {
                "C1": _root(s.outer(xpow(s.tail(SBq), r / p), SBq, xpow(IvB, r / pp)), r),
                "C2": _root(s.outer(xpow(s.Wx, r / p),
                                    xpow(suffix_max(xmul(self.S_B, xpow(IvB, 1 / pp))), r)), r),
                "C3": _root(s.outer(xpow(s.tail(SVq), r / p), SVq, xpow(IvV, r / pp)), r),
                "C4": _root(s.outer(xpow(s.Wx, r / p),
                                    xpow(suffix_max(xmul(self.S_V, xpow(IvV, 1 / pp))), r)), r),
            }
        if regime == "iv":
            RBV = prefix_max(BV)
            return {
                "D1": _root(s.outer(xpow(s.tail(SBq), r), SBq, xpow(RBV, r)), r),
                "D2": _root(s.outer(xpow(s.Wx, r), xpow(suffix_max(xmul(self.S_B, RBV)), r)), r),
                "D3": _root(s.outer(xpow(s.tail(SVq), r), SVq, xpow(s.Vx, r)), r),
                "D4": _root(s.outer(xpow(s.Wx, r), xpow(suffix_max(xmul(self.S_V, s.Vm)), r)), r),
            }
        if regime == "vi":
            SEp = self.S_E(p)
            SE = xpow(SEp, q / p)
            RBpV = prefix_max(xdiv(xpow(s.Bm, p), s.Vm))
            return {
                "F1": _root(s.outer(xpow(s.Wx, r / p),
                                    xpow(suffix_max(xmul(xpow(self.S_B, p), RBpV)), r / p)), r),
                "F2": _root(s.outer(xpow(s.tail(SBq), r / p), xpow(RBpV, r / p), SBq), r),
                "F3": _root(s.outer(xpow(s.Wx, r / p),
                                    xpow(suffix_max(xmul(SEp, s.Vm)), r / p)), r),
                "F4": _root(s.outer(xpow(s.tail(SE), r / p), SE, xpow(s.Vx, r / p)), r),
            }
        raise DispatchError(f"unknown regime {regime!r}")

    def weak(self, p: float, w_sup: np.ndarray) -> Dict[str, float]:
        s = self.s
        sigma_B = suffix_max(xmul(w_sup, self.kB))
        if p > 1 and not _is_one(p):
            pp = p / (p - 1)
            sigma_V = suffix_max(xmul(w_sup, xdiv(self.u, s.Vm ** 2)))
            return {
                "G1": _sup(xmul(sigma_B, xpow(s.inner_v(xpow(xdiv(s.Bm, s.Vm), pp)), 1 / pp))),
                "G2": _sup(xmul(sigma_V, xpow(s.inner_v(xpow(s.Vm, pp)), 1 / pp))),
            }
        return {
            "H1": _sup(xmul(prefix_max(xmul(s.Bm, sigma_B)), xpow(s.Vx, -1 / p))),
            "H2": _sup(xmul(sigma_B, xdiv(s.Bx, xpow(s.Vx, 1 / p)))),
        }


def _scans_for(spec: SupOpSpec, v: WeightSpec, w: WeightSpec, ack: bool) -> _Scans:
    return _Scans(spec.b, v, w, ack, B=spec.B)


def constants_T(spec: SupOpSpec, v: WeightSpec, w: WeightSpec, p: float, q: float,
                regime: Optional[str] = None, cap: Optional[float] = None,
                acknowledge_truncation: bool = False) -> ConstantReport:
    """Constants of ||T_{u,b} f||_{q,w} <= c ||f||_{p,v} on the monotone cone."""
    selected = regime_select(p, q)
    if regime is not None and regime != selected:
        raise DispatchError(f"(p, q) = ({p}, {q}) belongs to regime ({selected}), not ({regime})")
    scans = _scans_for(spec, v, w, acknowledge_truncation)
    parts = _OperatorParts(spec, scans).strong(selected, p, q)
    cap = config.cap() if cap is None else cap
    warnings = []
    if selected in ("v", "vi"):
        warnings.append("regime guard p < 1 inferred for cases (v)/(vi)")
    return ConstantReport.build(selected, parts, scans.provenance(), cap, warnings)


def constants_T_weak(spec: SupOpSpec, v: WeightSpec, w: WeightSpec, p: float,
                     cap: Optional[float] = None, acknowledge_truncation: bool = False) -> ConstantReport:
    """Constants of ||T_{u,b} f||_{inf,w} <= c ||f||_{p,v}: G1, G2 for p > 1, H1, H2 otherwise."""
    if not p > 0:
        raise ParameterError(f"need p > 0, got {p}")
    scans = _scans_for(spec, v, w, acknowledge_truncation)
    parts = _OperatorParts(spec, scans).weak(p, prefix_max(w.values))
    cap = config.cap() if cap is None else cap
    return ConstantReport.build("G" if "G1" in parts else "H", parts, scans.provenance(), cap)


def constant_I(spec: SupOpSpec, v: WeightSpec, w: WeightSpec, cap: Optional[float] = None,
               acknowledge_truncation: bool = False) -> ConstantReport:
    """I = sup_x (int_0^x b / ess sup_{(0,y)} v) [sup_{tau <= x} w] u(x)/B(x)."""
    scans = _scans_for(spec, v, w, acknowledge_truncation)
    ess_v = prefix_max(v.values)
    inner = np.cumsum(xdiv(spec.b.cell_masses, ess_v)) + xdiv(spec.B.head, ess_v[0])
    value = _sup(xmul(xmul(inner, prefix_max(w.values)), spec.kernel))
    cap = config.cap() if cap is None else cap
    return ConstantReport.build("I", {"I": value}, scans.provenance(), cap)


# ---------------------------------------------------------------------------
# Maximal operator families
# ---------------------------------------------------------------------------


def maximal_hypotheses(phi: WeightSpec, alpha: float, b: WeightSpec,
                       r_est: Optional[float] = None, cap: Optional[float] = None,
                       seed: int = 0) -> List[str]:
    """Warnings for every failing hypothesis of the reduction (never raises)."""
    r = alpha if r_est is None else r_est
    warnings = []
    checks = [check_quasi_monotone(phi, "increasing", cap)]
    if phi.descriptor is not None:
        checks.append(check_Qr_structural(phi, r, cap))
    else:
        checks.append(check_Qr(phi, r, trials=200, seed=seed, cap=cap))
    try:
        B = cumulative(b)
        checks.append(check_delta2(B, cap))
        checks.append(check_lower_r_estimate(alpha, b, r, cap))
        if not B.prefix[-1] > 100 * B.prefix[0]:
            warnings.append(
                f"B(t_max)={B.prefix[-1]:.3g} is not much larger than B(t_min)={B.prefix[0]:.3g};"
                " B(inf)=inf is doubtful"
            )
    except ParameterError as e:
        warnings.append(f"hypothesis check skipped: {e}")
    for result in checks:
        if not result.verdict:
            warnings.append(f"hypothesis {result.name} fails (constant {result.constant:.6g})")
    for message in warnings:
        logger.warning(message)
    return warnings


class _MaximalParts:
    def __init__(self, phi: WeightSpec, alpha: float, scans: _Scans):
        self.s = scans
        self.a = alpha
        self.phi = np.asarray(phi.values, dtype=float)

    def strong(self, regime: str, p: float, q: float) -> Dict[str, float]:
        s, a, phi = self.s, self.a, self.phi
        phi_q = xpow(phi, -q)
        phi_a = xpow(phi, -a)
        S2 = suffix_max(xdiv(s.Bm, xmul(xpow(phi, a), s.Vm ** 2)))
        S2q = xpow(S2, q / a)
        BV = xdiv(s.Bm, s.Vm)
        if regime in ("i", "iii"):
            e_in = p / (p - a)
            IvB = s.inner_v(xpow(BV, e_in))
            IvV = s.inner_v(xpow(s.Vm, e_in))
        if regime == "i":
            e = (p - a) / (p * a)
            return {
                "MA1": _sup(xmul(xpow(s.sup_block(phi_q), 1 / q), xpow(IvB, e))),
                "MA2": _sup(xmul(xpow(s.sup_block(S2q), 1 / q), xpow(IvV, e))),
            }
        if regime == "ii":
            return {
                "MB1": _sup(xmul(xpow(s.sup_block(phi_q), 1 / q), xpow(prefix_max(BV), 1 / a))),
                "MB2": _sup(xmul(xpow(s.sup_block(S2q), 1 / q), xpow(s.Vx, 1 / a))),
            }
        S3 = suffix_max(xdiv(xpow(s.Bm, 1 / a), xmul(phi, xpow(s.Vm, 2 / p))))
        if regime == "v":
            return {
                "ME1": _sup(xmul(xpow(s.sup_block(phi_q), 1 / q),
                                 prefix_max(xdiv(xpow(s.Bm, 1 / a), xpow(s.Vm, 1 / p))))),
                "ME2": _sup(xmul(xpow(s.sup_block(xpow(S3, q)), 1 / q), xpow(s.Vx, 1 / p))),
            }

        rho = q / (p - q)
        big = p * q / (a * (p - q))
        out = (p - q) / (p * q)

        def integral(*factors) -> float:
            return float(xpow(s.outer(*factors), out))

        if regime == "iii":
            e_mid = q * (p - a) / (a * (p - q))
            e_in = (p - a) / p
            return {
                "MC1": integral(xpow(s.tail(phi_q), rho), phi_q, xpow(IvB, e_mid)),
                "MC2": integral(xpow(s.Wx, rho), xpow(suffix_max(xmul(phi_a, xpow(IvB, e_in))), big)),
                "MC3": integral(xpow(s.tail(S2q), rho), S2q, xpow(IvV, e_mid)),
                "MC4": integral(xpow(s.Wx, rho), xpow(suffix_max(xmul(S2, xpow(IvV, e_in))), big)),
            }
        if regime == "iv":
            RBV = prefix_max(BV)
            return {
                "MD1": integral(xpow(s.tail(phi_q), rho), phi_q, xpow(RBV, big)),
                "MD2": integral(xpow(s.Wx, rho), xpow(suffix_max(xmul(phi_a, RBV)), big)),
                "MD3": integral(xpow(s.tail(S2q), rho), S2q, xpow(s.Vx, big)),
                "MD4": integral(xpow(s.Wx, rho), xpow(suffix_max(xmul(S2, s.Vm)), big)),
            }
        if regime == "vi":
            RB = prefix_max(xdiv(s.Bm, xpow(s.Vm, a / p)))
            S3q = xpow(S3, q)
            return {
                "MF1": integral(xpow(s.Wx, rho), xpow(suffix_max(xmul(phi_a, RB)), big)),
                "MF2": integral(xpow(s.tail(phi_q), rho), xpow(RB, big), phi_q),
                "MF3": integral(xpow(s.Wx, rho),
                                xpow(suffix_max(xmul(S3, xpow(s.Vm, 1 / p))), p * q / (p - q))),
                "MF4": integral(xpow(s.tail(S3q), rho), S3q, xpow(s.Vx, rho)),
            }
        raise DispatchError(f"unknown regime {regime!r}")

    def weak(self, p: float, q: float) -> Dict[str, float]:
        s, a, phi = self.s, self.a, self.phi
        Wq = xpow(s.Wm, 1 / q)
        sigma = suffix_max(xdiv(Wq, phi))
        if a < p and not _is_one(p / a):
            e_in = p / (p - a)
            e = (p - a) / (p * a)
            sigma2 = suffix_max(xdiv(xmul(Wq, xpow(s.Bm, 1 / a)), xmul(phi, xpow(s.Vm, 2 / a))))
            return {
                "MG1": _sup(xmul(sigma, xpow(s.inner_v(xpow(xdiv(s.Bm, s.Vm), e_in)), e))),
                "MG2": _sup(xmul(sigma2, xpow(s.inner_v(xpow(s.Vm, e_in)), e))),
            }
        return {
            "MH1": _sup(xmul(prefix_max(xmul(xpow(s.Bm, 1 / a), sigma)), xpow(s.Vx, -1 / p))),
            "MH2": _sup(xmul(sigma, xdiv(xpow(s.Bx, 1 / a), xpow(s.Vx, 1 / p)))),
        }

    def weak_weak(self, p: float, q: float) -> Dict[str, float]:
        s, a, phi = self.s, self.a, self.phi
        Va = xpow(s.Vm, a / p)
        inner = np.cumsum(xdiv(s.b.cell_masses, Va)) + xdiv(s.B.head, Va[0])
        return {"MI": _sup(xmul(xpow(inner, 1 / a), xdiv(xpow(s.Wm, 1 / q), phi)))}


def constants_maximal(phi: WeightSpec, alpha: float, b: WeightSpec, v: WeightSpec, w: WeightSpec,
                      p: float, q: float, target: str = "strong", r_est: Optional[float] = None,
                      cap: Optional[float] = None, check_hypotheses: bool = True,
                      acknowledge_truncation: bool = False, seed: int = 0) -> ConstantReport:
    """Constants for M_{phi, Lambda^alpha(b)} from Lambda^p(v) (or its weak space) to Lambda^q(w)."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if target not in TARGETS:
        raise ParameterError(f"target must be one of {TARGETS}, got {target!r}")
    RegimeParams(p, q, alpha, r_est)
    if np.any(phi.values <= 0):
        raise ParameterError("phi must be strictly positive")
    scans = _Scans(b, v, w, acknowledge_truncation)
    parts = _MaximalParts(phi, alpha, scans)
    warnings = maximal_hypotheses(phi, alpha, b, r_est, cap, seed) if check_hypotheses else []
    if target == "strong":
        regime = maximal_regime(p, q, alpha)
        values = parts.strong(regime, p, q)
        if regime in ("v", "vi"):
            warnings.append("regime guard p < alpha inferred for cases (v)/(vi)")
    elif target == "weak":
        values = parts.weak(p, q)
        regime = "G" if "MG1" in values else "H"
    else:
        values = parts.weak_weak(p, q)
        regime = "I"
    cap = config.cap() if cap is None else cap
    prov = scans.provenance()
    prov["alpha"] = alpha
    return ConstantReport.build(regime, values, prov, cap, warnings)
