"""Total arithmetic on the extended half-line [0, +inf].

Conventions: 0 * inf = 0, inf / inf = 0, 0 / 0 = 0 and c / 0 = inf for c > 0.
All helpers accept scalars or numpy arrays and return float64 arrays (or
numpy scalars for scalar input).
"""

import numpy as np


def xmul(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = a * b
    return np.where((a == 0) | (b == 0), 0.0, out)


def xdiv(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = a / b
    out = np.where((a == 0) | (np.isinf(a) & np.isinf(b)), 0.0, out)
    return np.where((b == 0) & (a > 0), np.inf, out)


def xpow(a, e):
    """a**e for a >= 0; 0**e is 0 for e > 0, 1 for e == 0 and inf for e < 0."""
    a = np.asarray(a, dtype=float)
    e = np.asarray(e, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.power(a, e)
    out = np.where((a == 0) & (e > 0), 0.0, out)
    out = np.where((a == 0) & (e < 0), np.inf, out)
    return np.where(e == 0, 1.0, out)


def xsum(values) -> float:
    """Sum of nonnegative extended reals; inf wins, NaN never appears."""
    values = np.asarray(values, dtype=float)
    if np.isinf(values).any():
        return float("inf")
    return float(values.sum())


def below_cap(value, cap: float) -> bool:
    return bool(np.isfinite(value) and value < cap)
