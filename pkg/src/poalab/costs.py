"""Parametric arc-cost families.

Every family is a non-decreasing, non-negative, continuous function on
[0, inf), guaranteed by parameter sign constraints at construction time.
Each family exposes evaluation, the (right-)derivative, the antiderivative
from 0, an interval Lipschitz constant that is never an underestimate, a
lower bound on the derivative, and marginal costs for social-optimum
gradients.  ``sup_distance`` computes certified sup-norm distances between
two costs on a compact interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "CostFunction",
    "Constant",
    "Affine",
    "Polynomial",
    "BPR",
    "MonomialLog",
    "PiecewiseLinear",
    "ScaledCost",
    "TruncatedCost",
    "TangentCost",
    "MarginalCost",
    "IntervalBound",
    "interval_bound",
    "sup_distance",
]

_TINY = 1e-300


def _domain(x):
    """Common argument handling: costs are defined for x >= 0."""
    xs = np.asarray(x, dtype=float)
    if xs.size and float(np.min(xs)) < 0.0:
        raise ValueError("cost functions are defined for x >= 0")
    return xs


def _require_nonneg(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be finite and >= 0, got {value}")
    return value


class CostFunction:
    """Base class for arc cost functions."""

    def __call__(self, x):
        raise NotImplementedError

    def derivative(self, x):
        """Right-derivative; at kinks and at 0 the right limit is used."""
        raise NotImplementedError

    def antiderivative(self, x):
        """Integral of the cost from 0 to x."""
        raise NotImplementedError

    def lipschitz_on(self, hi: float) -> float:
        """Upper bound on sup |f'| over [0, hi]; math.inf if not Lipschitz."""
        raise NotImplementedError

    def deriv_min_on(self, hi: float) -> float:
        """Lower bound on inf f' over [0, hi]."""
        raise NotImplementedError

    def as_polynomial(self) -> np.ndarray | None:
        """Ascending coefficients if the cost is a polynomial, else None."""
        return None

    def scaled_by(self, factor: float) -> "CostFunction":
        """The cost with all values multiplied by factor > 0."""
        raise NotImplementedError

    def with_argument_scale(self, factor: float) -> "CostFunction":
        """The cost x -> f(factor * x) for factor > 0.

        Families closed under argument scaling override this; the default
        stores the composition in a wrapper.
        """
        return ScaledCost(self, factor)

    def marginal(self) -> "MarginalCost":
        return MarginalCost(self)


@dataclass(frozen=True)
class Constant(CostFunction):
    c: float

    def __post_init__(self):
        object.__setattr__(self, "c", _require_nonneg("c", self.c))

    def __call__(self, x):
        x = _domain(x)
        return np.full_like(x, self.c) if x.ndim else float(self.c)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x) if x.ndim else 0.0

    def antiderivative(self, x):
        return self.c * np.asarray(x, dtype=float) if np.ndim(x) else self.c * float(x)

    def lipschitz_on(self, hi):
        return 0.0

    def deriv_min_on(self, hi):
        return 0.0

    def as_polynomial(self):
        return np.array([self.c])

    def scaled_by(self, factor):
        return Constant(self.c * factor)

    def with_argument_scale(self, factor):
        return Constant(self.c)


@dataclass(frozen=True)
class Affine(CostFunction):
    slope: float
    intercept: float

    def __post_init__(self):
        object.__setattr__(self, "slope", _require_nonneg("slope", self.slope))
        object.__setattr__(self, "intercept", _require_nonneg("intercept", self.intercept))

    def __call__(self, x):
        xs = _domain(x)
        val = self.slope * xs + self.intercept
        return val if xs.ndim else float(val)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return np.full_like(x, self.slope) if x.ndim else float(self.slope)

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        return 0.5 * self.slope * x * x + self.intercept * x

    def lipschitz_on(self, hi):
        return self.slope

    def deriv_min_on(self, hi):
        return self.slope

    def as_polynomial(self):
        return np.array([self.intercept, self.slope])

    def scaled_by(self, factor):
        return Affine(self.slope * factor, self.intercept * factor)

    def with_argument_scale(self, factor):
        return Affine(self.slope * factor, self.intercept)


@dataclass(frozen=True)
class Polynomial(CostFunction):
    """Polynomial with non-negative ascending coefficients (monotone on [0, inf))."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(_require_nonneg(f"coefficients[{i}]", c)
                       for i, c in enumerate(self.coefficients))
        if not coeffs:
            raise ValueError("polynomial needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    def _c(self):
        return np.asarray(self.coefficients)

    def __call__(self, x):
        xs = _domain(x)
        val = np.polyval(self._c()[::-1], xs)
        return val if xs.ndim else float(val)

    def derivative(self, x):
        c = self._c()
        dc = c[1:] * np.arange(1, len(c))
        if dc.size == 0:
            x = np.asarray(x, dtype=float)
            return np.zeros_like(x) if x.ndim else 0.0
        return np.polyval(dc[::-1], x)

    def antiderivative(self, x):
        c = self._c()
        ac = np.concatenate([[0.0], c / np.arange(1, len(c) + 1)])
        return np.polyval(ac[::-1], x)

    def lipschitz_on(self, hi):
        return float(self.derivative(hi))  # derivative is non-decreasing

    def deriv_min_on(self, hi):
        return float(self.derivative(0.0))

    def as_polynomial(self):
        return self._c().copy()

    def scaled_by(self, factor):
        return Polynomial(tuple(c * factor for c in self.coefficients))

    def with_argument_scale(self, factor):
        return Polynomial(tuple(c * factor**n for n, c in enumerate(self.coefficients)))


@dataclass(frozen=True)
class BPR(CostFunction):
    """q * x**beta + p, the standard traffic latency family."""

    q: float
    beta: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "q", _require_nonneg("q", self.q))
        object.__setattr__(self, "beta", _require_nonneg("beta", self.beta))
        object.__setattr__(self, "p", _require_nonneg("p", self.p))

    def __call__(self, x):
        xs = _domain(x)
        val = self.q * xs**self.beta + self.p
        return val if xs.ndim else float(val)

    def derivative(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        b = self.beta
        if b == 0 or self.q == 0:
            out = np.zeros_like(x)
        elif b >= 1:
            out = self.q * b * x ** (b - 1.0)
        else:
            # derivative diverges at 0 for beta < 1
            out = np.where(x > 0, self.q * b * np.maximum(x, _TINY) ** (b - 1.0), np.inf)
        return float(out[0]) if scalar else out

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        return self.q * x ** (self.beta + 1.0) / (self.beta + 1.0) + self.p * x

    def lipschitz_on(self, hi):
        b = self.beta
        if b == 0 or self.q == 0:
            return 0.0
        if b >= 1:
            return float(self.q * b * hi ** (b - 1.0))
        return math.inf

    def deriv_min_on(self, hi):
        b = self.beta
        if b == 0 or self.q == 0:
            return 0.0
        if b == 1:
            return float(self.q)
        if b > 1:
            return 0.0
        return float(self.q * b * hi ** (b - 1.0))  # decreasing derivative

    def as_polynomial(self):
        b = self.beta
        if b != int(b):
            return None
        coeffs = np.zeros(int(b) + 1)
        coeffs[0] = self.p
        coeffs[int(b)] += self.q
        return coeffs

    def scaled_by(self, factor):
        return BPR(self.q * factor, self.beta, self.p * factor)

    def with_argument_scale(self, factor):
        return BPR(self.q * factor**self.beta, self.beta, self.p)


@dataclass(frozen=True)
class MonomialLog(CostFunction):
    """zeta * x**beta * ln(x+1)**alpha, a regularly varying non-polynomial."""

    zeta: float
    beta: float
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "zeta", _require_nonneg("zeta", self.zeta))
        object.__setattr__(self, "beta", _require_nonneg("beta", self.beta))
        object.__setattr__(self, "alpha", _require_nonneg("alpha", self.alpha))

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(_domain(x))
        lg = np.log1p(x)
        val = self.zeta * x**self.beta * lg**self.alpha
        return float(val[0]) if scalar else val

    def derivative(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z, b, a = self.zeta, self.beta, self.alpha
        if a == 0:
            return BPR(z, b, 0.0).derivative(x[0] if scalar else x)
        pos = np.maximum(x, _TINY)
        lg = np.log1p(pos)
        out = z * (b * pos ** (b - 1.0) * lg**a + a * pos**b * lg ** (a - 1.0) / (pos + 1.0))
        # right limit at 0: x**(b-1)*ln(x+1)**a ~ x**(a+b-1)
        lim0 = 0.0 if a + b > 1 else (z * (a + b) if a + b == 1 else math.inf)
        out = np.where(x > 0, out, lim0)
        return float(out[0]) if scalar else out

    def antiderivative(self, x):
        # no elementary antiderivative for real alpha; adaptive quadrature
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(xs)
        for i, xi in enumerate(xs):
            if xi == 0.0 or self.zeta == 0.0:
                out[i] = 0.0
            else:
                val, _ = integrate.quad(self, 0.0, xi, epsabs=1e-14, epsrel=1e-12, limit=200)
                out[i] = val
        return float(out[0]) if scalar else out

    def lipschitz_on(self, hi):
        z, b, a = self.zeta, self.beta, self.alpha
        if z == 0 or hi == 0:
            return 0.0
        if a == 0:
            return BPR(z, b, 0.0).lipschitz_on(hi)
        if b < 1:
            return math.inf
        lg = math.log1p(hi)
        if a >= 1:
            return float(self.derivative(hi))  # derivative is non-decreasing
        # 0 < a < 1: ln(x+1)**(a-1) <= (x/(x+1))**(a-1) gives a sound bound
        return float(z * (b * hi ** (b - 1.0) * lg**a + a * hi ** (b + a - 1.0)))

    def deriv_min_on(self, hi):
        if self.alpha == 0:
            return BPR(self.zeta, self.beta, 0.0).deriv_min_on(hi)
        return 0.0  # derivative vanishes at 0 for beta >= 1, and we never certify b < 1

    def scaled_by(self, factor):
        return MonomialLog(self.zeta * factor, self.beta, self.alpha)


@dataclass(frozen=True)
class PiecewiseLinear(CostFunction):
    """Linear interpolation through (breakpoints, values), constant beyond the last one."""

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        vals = tuple(_require_nonneg(f"values[{i}]", v) for i, v in enumerate(self.values))
        if len(bps) != len(vals) or len(bps) < 1:
            raise ValueError("breakpoints and values must match and be non-empty")
        if bps[0] != 0.0:
            raise ValueError("first breakpoint must be 0")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(v2 < v1 for v1, v2 in zip(vals, vals[1:])):
            raise ValueError("values must be non-decreasing")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    def _slopes(self):
        b, v = np.asarray(self.breakpoints), np.asarray(self.values)
        if len(b) == 1:
            return np.array([0.0])
        return np.diff(v) / np.diff(b)

    def __call__(self, x):
        xs = _domain(x)
        val = np.interp(xs, self.breakpoints, self.values)
        return float(val) if xs.ndim == 0 else val

    def derivative(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        slopes = np.concatenate([self._slopes(), [0.0]])  # constant extension
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        idx = np.clip(idx, 0, len(slopes) - 1)
        out = slopes[idx]
        return float(out[0]) if scalar else out

    def antiderivative(self, x):
        b = np.asarray(self.breakpoints)
        v = np.asarray(self.values)
        seg = np.concatenate([[0.0], np.cumsum(0.5 * (v[:-1] + v[1:]) * np.diff(b))]) \
            if len(b) > 1 else np.array([0.0])
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.clip(np.searchsorted(b, xs, side="right") - 1, 0, len(b) - 1)
        dx = xs - b[idx]
        mid = self(b[idx]) + 0.5 * self.derivative(b[idx]) * dx
        out = seg[idx] + mid * dx
        return float(out[0]) if scalar else out

    def lipschitz_on(self, hi):
        slopes = self._slopes()
        cover = [s for b, s in zip(self.breakpoints[:-1], slopes) if b < hi] if len(
            self.breakpoints) > 1 else []
        return float(max(cover)) if cover else 0.0

    def deriv_min_on(self, hi):
        slopes = list(self._slopes()) if len(self.breakpoints) > 1 else [0.0]
        cover = [s for b, s in zip(self.breakpoints[:-1], slopes) if b < hi]
        if hi > self.breakpoints[-1]:
            cover.append(0.0)
        return float(min(cover)) if cover else 0.0

    def scaled_by(self, factor):
        return PiecewiseLinear(self.breakpoints, tuple(v * factor for v in self.values))

    def with_argument_scale(self, factor):
        return PiecewiseLinear(tuple(b / factor for b in self.breakpoints), self.values)


@dataclass(frozen=True)
class ScaledCost(CostFunction):
    """Argument-scaled wrapper x -> inner(factor * x) for families not closed under it."""

    inner: CostFunction
    factor: float

    def __post_init__(self):
        if self.factor <= 0:
            raise ValueError("argument scale factor must be > 0")

    def __call__(self, x):
        return self.inner(np.asarray(x, dtype=float) * self.factor) if np.ndim(x) \
            else self.inner(float(x) * self.factor)

    def derivative(self, x):
        xs = np.asarray(x, dtype=float) * self.factor if np.ndim(x) else float(x) * self.factor
        return self.factor * self.inner.derivative(xs)

    def antiderivative(self, x):
        xs = np.asarray(x, dtype=float) * self.factor if np.ndim(x) else float(x) * self.factor
        return self.inner.antiderivative(xs) / self.factor

    def lipschitz_on(self, hi):
        return self.factor * self.inner.lipschitz_on(self.factor * hi)

    def deriv_min_on(self, hi):
        return self.factor * self.inner.deriv_min_on(self.factor * hi)

    def as_polynomial(self):
        inner = self.inner.as_polynomial()
        if inner is None:
            return None
        return inner * self.factor ** np.arange(len(inner))

    def scaled_by(self, factor):
        return ScaledCost(self.inner.scaled_by(factor), self.factor)

    def with_argument_scale(self, factor):
        return ScaledCost(self.inner, self.factor * factor)


@dataclass(frozen=True)
class TruncatedCost(CostFunction):
    """inner on [0, anchor], frozen at inner(anchor) beyond."""

    inner: CostFunction
    anchor: float

    def __post_init__(self):
        if self.anchor <= 0:
            raise ValueError("anchor must be > 0")

    def __call__(self, x):
        xs = np.minimum(np.asarray(x, dtype=float), self.anchor)
        val = self.inner(xs)
        return float(val) if np.ndim(x) == 0 else val

    def derivative(self, x):
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.where(xs < self.anchor, self.inner.derivative(np.minimum(xs, self.anchor)), 0.0)
        return float(out[0]) if scalar else out

    def antiderivative(self, x):
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        base = self.inner.antiderivative(np.minimum(xs, self.anchor))
        tail = np.maximum(xs - self.anchor, 0.0) * self.inner(self.anchor)
        out = base + tail
        return float(out[0]) if scalar else out

    def lipschitz_on(self, hi):
        return self.inner.lipschitz_on(min(hi, self.anchor))

    def deriv_min_on(self, hi):
        if hi > self.anchor:
            return 0.0
        return self.inner.deriv_min_on(hi)

    def scaled_by(self, factor):
        return TruncatedCost(self.inner.scaled_by(factor), self.anchor)

    def with_argument_scale(self, factor):
        return TruncatedCost(self.inner.with_argument_scale(factor), self.anchor / factor)


@dataclass(frozen=True)
class TangentCost(CostFunction):
    """inner on [0, anchor], extended by its tangent line at the anchor beyond."""

    inner: CostFunction
    anchor: float

    def __post_init__(self):
        if self.anchor <= 0:
            raise ValueError("anchor must be > 0")

    def _slope(self):
        return float(self.inner.derivative(self.anchor))

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        base = self.inner(np.minimum(xs, self.anchor))
        out = base + np.maximum(xs - self.anchor, 0.0) * self._slope()
        return float(out[0]) if scalar else out

    def derivative(self, x):
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.where(xs < self.anchor,
                       self.inner.derivative(np.minimum(xs, self.anchor)), self._slope())
        return float(out[0]) if scalar else out

    def antiderivative(self, x):
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        base = self.inner.antiderivative(np.minimum(xs, self.anchor))
        dx = np.maximum(xs - self.anchor, 0.0)
        out = base + dx * self.inner(self.anchor) + 0.5 * self._slope() * dx * dx
        return float(out[0]) if scalar else out

    def lipschitz_on(self, hi):
        return self.inner.lipschitz_on(min(hi, self.anchor))

    def deriv_min_on(self, hi):
        return self.inner.deriv_min_on(min(hi, self.anchor))

    def scaled_by(self, factor):
        return TangentCost(self.inner.scaled_by(factor), self.anchor)

    def with_argument_scale(self, factor):
        return TangentCost(self.inner.with_argument_scale(factor), self.anchor / factor)


class MarginalCost:
    """Marginal cost x * f'(x) + f(x) of a cost function f."""

    def __init__(self, cost: CostFunction):
        self.cost = cost

    def __call__(self, x):
        xs = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        return xs * self.cost.derivative(xs) + self.cost(xs)

    def is_nondecreasing_on(self, hi: float, samples: int = 512, slack: float = 1e-12) -> bool:
        """Convexity probe for x * f(x): samples the marginal on [0, hi]."""
        if isinstance(self.cost, (Constant, Affine, Polynomial)):
            return True
        if isinstance(self.cost, BPR):
            return True  # (beta+1) q x**beta + p is non-decreasing
        xs = np.linspace(0.0, hi, samples)
        vals = self(xs)
        return bool(np.all(np.diff(vals) >= -slack * max(1.0, float(np.max(np.abs(vals)))))) \
            if samples > 1 else True


@dataclass(frozen=True)
class IntervalBound:
    """Lipschitz data of a cost on [lo, hi]; M is sound, never an underestimate."""

    lo: float
    hi: float
    lipschitz: float
    deriv_min: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("lo must be <= hi")
        if self.deriv_min < 0 or self.lipschitz < self.deriv_min:
            raise ValueError("need lipschitz >= deriv_min >= 0")

    def clamped_lipschitz(self) -> float:
        """Lipschitz constant clamped up to 1 (a Lipschitz constant stays valid)."""
        return max(1.0, self.lipschitz)


def interval_bound(cost: CostFunction, lo: float, hi: float) -> IntervalBound:
    if lo != 0.0:
        raise ValueError("interval bounds are computed from 0")
    return IntervalBound(lo, hi, cost.lipschitz_on(hi), cost.deriv_min_on(hi))


def _poly_sup(coeffs: np.ndarray, hi: float) -> float:
    """Exact max of |p(x)| on [0, hi] for polynomials of degree <= 3."""
    coeffs = np.trim_zeros(coeffs, "b")
    if coeffs.size == 0:
        return 0.0
    candidates = [0.0, hi]
    if coeffs.size > 1:
        dc = coeffs[1:] * np.arange(1, coeffs.size)
        roots = np.roots(dc[::-1]) if dc.size > 1 else np.array([])
        for r in roots:
            if abs(r.imag) < 1e-12 and 0.0 < r.real < hi:
                candidates.append(float(r.real))
    return float(max(abs(np.polyval(coeffs[::-1], c)) for c in candidates))


def sup_distance(f: CostFunction, g: CostFunction, hi: float,
                 grid_n: int = 4097) -> tuple[float, float]:
    """Max of |f - g| on [0, hi] with a certified error bound.

    Returns (estimate, error_bound) so that the true sup lies in
    [estimate, estimate + error_bound].  Exact (error 0) when the difference
    has closed-form extrema: polynomial differences of degree <= 3, piecewise
    linear pairs, and same-shape BPR / MonomialLog pairs.
    """
    if hi < 0:
        raise ValueError("hi must be >= 0")
    if f == g:
        return 0.0, 0.0
    if repr(g) < repr(f):
        f, g = g, f  # canonical order: |f-g| is symmetric, but the critical
        # points of the difference polynomial are found by an eigensolver
        # whose roots can differ in the last ulp under sign flips
    if hi == 0:
        return float(abs(f(0.0) - g(0.0))), 0.0

    pf, pg = f.as_polynomial(), g.as_polynomial()
    if pf is not None and pg is not None:
        n = max(len(pf), len(pg))
        diff = np.zeros(n)
        diff[: len(pf)] += pf
        diff[: len(pg)] -= pg
        if np.trim_zeros(diff, "b").size <= 4:
            return _poly_sup(diff, hi), 0.0

    if isinstance(f, PiecewiseLinear) and isinstance(g, PiecewiseLinear):
        knots = np.unique(np.concatenate([
            np.asarray(f.breakpoints), np.asarray(g.breakpoints), [0.0, hi]]))
        knots = knots[(knots >= 0.0) & (knots <= hi)]
        return float(np.max(np.abs(f(knots) - g(knots)))), 0.0

    if (isinstance(f, MonomialLog) and isinstance(g, MonomialLog)
            and f.beta == g.beta and f.alpha == g.alpha):
        # difference is (zf - zg) x**b ln(x+1)**a, monotone in |.|
        return float(abs(f(hi) - g(hi))), 0.0

    if (isinstance(f, BPR) and isinstance(g, BPR) and f.beta == g.beta):
        # difference dq x**b + dp is monotone
        return float(max(abs(f(0.0) - g(0.0)), abs(f(hi) - g(hi)))), 0.0

    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    xs = np.linspace(0.0, hi, grid_n)
    est = float(np.max(np.abs(np.asarray(f(xs), dtype=float) - np.asarray(g(xs), dtype=float))))
    m = f.lipschitz_on(hi) + g.lipschitz_on(hi)
    err = m * hi / (2.0 * (grid_n - 1))
    return est, float(err)
