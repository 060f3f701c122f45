"""Shared least-squares helper for log-log rate and exponent fits."""

from __future__ import annotations

import numpy as np

__all__ = ["loglog_fit"]


def loglog_fit(x, y) -> tuple[float, float, float]:
    """Least squares of log(y) on log(x); returns (slope, intercept, r_squared).

    All inputs must be strictly positive; the intercept is returned in log
    space (exp it for the multiplicative constant).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equal-length 1-D arrays with at least 2 points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(resid @ resid)
    centered = ly - ly.mean()
    ss_tot = float(centered @ centered)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(r2)
