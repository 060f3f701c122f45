"""The metric on the space of games with a fixed structure.

Distance between two games is the max of the L-infinity demand distance, the
per-arc sup distance of the costs on the shared demand interval, and the
L-infinity distance of the cost vectors evaluated at the respective total
demands.  Grid-based cost comparisons carry a certified error bound so that
downstream consumers can reason soundly.  The module also provides the
deliberately wrong variant that compares costs on the union interval (it
violates the triangle inequality) and an epsilon-ball sampler used by the
sensitivity sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .costs import (
    BPR,
    Affine,
    Constant,
    CostFunction,
    MonomialLog,
    PiecewiseLinear,
    Polynomial,
    ScaledCost,
    sup_distance,
)
from .games import Game, GameValidationError, StructureMismatchError, games_equivalent

__all__ = [
    "MetricValue",
    "dist",
    "naive_max_interval_dist",
    "MetricAxiomReport",
    "check_metric_axioms",
    "Perturbation",
    "sample_ball",
]

DEFAULT_GRID = 4097

MIN_TOTAL_DEMAND = 1e-6


@dataclass(frozen=True)
class MetricValue:
    """Distance between two games, split into its demand and cost parts."""

    value: float
    demand_part: float
    cost_part: float
    error_bound: float

    def upper(self) -> float:
        return self.value + self.error_bound


def dist(g1: Game, g2: Game, grid_n: int = DEFAULT_GRID) -> MetricValue:
    """Metric distance between two games on the same structure."""
    if g1.structure != g2.structure:
        raise StructureMismatchError("games have different structures")
    demand_part = float(np.max(np.abs(g1.demands - g2.demands)))
    t1, t2 = g1.total_demand, g2.total_demand
    tmin = min(t1, t2)
    sup_est = 0.0
    sup_hi = 0.0
    for c1, c2 in zip(g1.costs, g2.costs):
        est, err = sup_distance(c1, c2, tmin, grid_n)
        sup_est = max(sup_est, est)
        sup_hi = max(sup_hi, est + err)
    endpoint = max(abs(float(c1(t1)) - float(c2(t2)))
                   for c1, c2 in zip(g1.costs, g2.costs))
    cost_part = max(sup_est, endpoint)
    cost_hi = max(sup_hi, endpoint)
    value = max(demand_part, cost_part)
    return MetricValue(
        value=value,
        demand_part=demand_part,
        cost_part=cost_part,
        error_bound=max(demand_part, cost_hi) - value,
    )


def naive_max_interval_dist(g1: Game, g2: Game, grid_n: int = DEFAULT_GRID) -> float:
    """Cost comparison on [0, max(T, T')] instead of the shared interval.

    Kept only as a negative example: this operator is inconsistent with game
    equivalence and violates the triangle inequality.
    """
    if g1.structure != g2.structure:
        raise StructureMismatchError("games have different structures")
    demand_part = float(np.max(np.abs(g1.demands - g2.demands)))
    tmax = max(g1.total_demand, g2.total_demand)
    sup_est = max(sup_distance(c1, c2, tmax, grid_n)[0]
                  for c1, c2 in zip(g1.costs, g2.costs))
    return max(demand_part, sup_est)


@dataclass(frozen=True)
class MetricAxiomReport:
    symmetry_ok: bool
    nonnegative_ok: bool
    identity_ok: bool
    triangle_ok: bool
    triangle_slack: float

    @property
    def all_ok(self) -> bool:
        return (self.symmetry_ok and self.nonnegative_ok
                and self.identity_ok and self.triangle_ok)


def check_metric_axioms(g1: Game, g2: Game, g3: Game,
                        grid_n: int = DEFAULT_GRID,
                        equivalence_tol: float = 1e-12) -> MetricAxiomReport:
    """Symmetry, non-negativity, identity-iff-equivalent, triangle inequality.

    All checks hold within the certified grid error carried by the distances.
    """
    pairs = [(g1, g2), (g1, g3), (g3, g2)]
    fwd = [dist(a, b, grid_n) for a, b in pairs]
    bwd = [dist(b, a, grid_n) for a, b in pairs]
    symmetry = all(f.value == b.value for f, b in zip(fwd, bwd))
    nonneg = all(f.value >= 0.0 for f in fwd)
    identity = True
    for (a, b), d in zip(pairs, fwd):
        if games_equivalent(a, b, tol=equivalence_tol):
            identity &= d.value <= d.error_bound + equivalence_tol
        else:
            identity &= d.upper() > 0.0
    d12, d13, d32 = fwd
    slack = d13.value + d32.value - d12.value
    triangle = slack >= -(d12.error_bound + d13.error_bound + d32.error_bound + 1e-12)
    return MetricAxiomReport(
        symmetry_ok=symmetry,
        nonnegative_ok=nonneg,
        identity_ok=identity,
        triangle_ok=triangle,
        triangle_slack=float(slack),
    )


@dataclass(frozen=True)
class Perturbation:
    """A sampled game at certified distance <= target from its base game."""

    kind: str
    target: float
    seed: int
    game: Game
    realized: MetricValue
    shrunk: bool


def _perturb_cost(cost: CostFunction, shift: float, stretch: float,
                  horizon: float) -> CostFunction:
    """Family-parameter perturbation with sup change <= |shift| + |stretch| on [0, horizon].

    `shift` moves the intercept-like parameter, `stretch` scales the flow-
    dependent part so that its value change at the horizon is |stretch|.
    Monotonicity is preserved by construction; constants grow an affine term
    so that cost-side balls are not degenerate around constant-cost games.
    """
    if isinstance(cost, Constant):
        slope = abs(stretch) / max(horizon, 1e-12)
        new_c = max(cost.c + shift, cost.c * 0.5)
        if slope == 0.0:
            return Constant(new_c)
        return Affine(slope, new_c)
    if isinstance(cost, Affine):
        slope = max(cost.slope + stretch / max(horizon, 1e-12), 0.0)
        return Affine(slope, max(cost.intercept + shift, 0.0))
    if isinstance(cost, Polynomial):
        coeffs = np.asarray(cost.coefficients, dtype=float)
        rest = coeffs.copy()
        rest[0] = 0.0
        denom = float(np.polyval(rest[::-1], horizon))
        scale = max(1.0 + stretch / max(denom, 1e-12), 0.0) if denom > 0 else 1.0
        new = coeffs * scale
        new[0] = max(coeffs[0] + shift, 0.0)
        return Polynomial(tuple(new))
    if isinstance(cost, BPR):
        denom = cost.q * horizon**cost.beta
        scale = max(1.0 + stretch / max(denom, 1e-12), 0.0) if denom > 0 else 1.0
        return BPR(cost.q * scale, cost.beta, max(cost.p + shift, 0.0))
    if isinstance(cost, MonomialLog):
        denom = float(cost(horizon))
        scale = max(1.0 + (shift + stretch) / max(denom, 1e-12), 0.0) if denom > 0 else 1.0
        return MonomialLog(cost.zeta * scale, cost.beta, cost.alpha)
    if isinstance(cost, PiecewiseLinear):
        vals = np.asarray(cost.values, dtype=float)
        spread = float(vals[-1] - vals[0])
        scale = max(1.0 + stretch / max(spread, 1e-12), 0.0) if spread > 0 else 1.0
        base = max(vals[0] + shift, 0.0)
        new = base + (vals - vals[0]) * scale
        return PiecewiseLinear(cost.breakpoints, tuple(new))
    if isinstance(cost, ScaledCost):
        return ScaledCost(
            _perturb_cost(cost.inner, shift, stretch, horizon * cost.factor),
            cost.factor)
    raise TypeError(f"cannot perturb cost family {type(cost).__name__}")


# relative weights of the (demand, intercept, stretch) components per kind;
# joint leans on the cost side so the PoA response cannot cancel between the
# demand and cost contributions, which would poison log-log exponent fits
_WEIGHTS = {
    "demand": (1.0, 0.0, 0.0),
    "cost": (0.0, 0.2, 0.8),
    "joint": (0.2, 0.16, 0.64),
}


def sample_ball(base: Game, radius: float, kind: str = "joint",
                seed: int = 0, grid_n: int = DEFAULT_GRID) -> Perturbation:
    """Sample a game at certified metric distance in [radius/2, radius].

    Demand draws are symmetric uniforms; cost draws use per-arc alternating
    signs with magnitudes bounded away from zero so the realized distance
    responds linearly to the scaling knob.  The knob is set by bisection so
    the recomputed distance (including its grid error) lands inside the
    target band; if clipping prevents that, the sample is flagged shrunk.
    """
    if kind not in _WEIGHTS:
        raise ValueError(f"unknown perturbation kind {kind!r}")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    zero = MetricValue(0.0, 0.0, 0.0, 0.0)
    if radius == 0.0:
        return Perturbation(kind, 0.0, seed, base, zero, False)

    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0xBA11)))
    n_k = len(base.structure.od_pairs)
    n_a = len(base.structure.arcs)
    u_dem = rng.uniform(-1.0, 1.0, size=n_k)
    mag_int = rng.uniform(0.5, 1.0, size=n_a)
    sign_int = np.where(np.arange(n_a) % 2 == 0, 1.0, -1.0)
    mag_str = rng.uniform(0.5, 1.0, size=n_a)
    w_dem, w_int, w_str = _WEIGHTS[kind]
    horizon = base.total_demand

    def realize(t: float) -> Game | None:
        demands = base.demands + t * w_dem * u_dem
        demands = np.maximum(demands, 0.0)
        if demands.sum() <= MIN_TOTAL_DEMAND:
            return None
        costs = base.costs
        if w_int or w_str:
            costs = tuple(
                _perturb_cost(c, t * w_int * sign_int[i] * mag_int[i],
                              t * w_str * mag_str[i], horizon)
                for i, c in enumerate(base.costs))
        try:
            return Game(base.structure, costs, demands)
        except GameValidationError:
            return None

    def measure(t: float):
        game = realize(t)
        if game is None:
            return None, None
        return game, dist(base, game, grid_n)

    lo_band, hi_band = 0.5 * radius, 0.95 * radius

    t = radius
    game, mv = measure(t)
    grow = 0
    while game is not None and mv.upper() < lo_band and grow < 60:
        t *= 2.0
        cand_game, cand_mv = measure(t)
        if cand_game is None:
            t *= 0.5
            break
        game, mv = cand_game, cand_mv
        grow += 1

    t_lo, t_hi = 0.0, t
    best = (game, mv) if game is not None and mv.upper() <= radius else (None, None)
    for _ in range(80):
        if best[0] is not None and lo_band <= best[1].upper() <= radius:
            break
        mid = 0.5 * (t_lo + t_hi)
        cand_game, cand_mv = measure(mid)
        if cand_game is not None and cand_mv.upper() <= hi_band:
            t_lo = mid
            best = (cand_game, cand_mv)
        else:
            t_hi = mid
    if best[0] is None:
        return Perturbation(kind, radius, seed, base, zero, True)
    game, mv = best
    shrunk = mv.upper() < lo_band
    return Perturbation(kind, radius, seed, game, mv, shrunk)
