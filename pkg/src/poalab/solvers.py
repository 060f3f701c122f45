"""Wardrop equilibrium and social optimum solvers, PoA, approximation checks.

Both solvers are Frank-Wolfe schemes on path flows.  The linear subproblem
assigns each O/D pair's demand wholly to its current min-cost path (ties
broken by lowest path index), and the resulting duality gap is exactly the
approximation threshold of the current flow, which gives the stopping
certificate.  Descent steps swap mass between each O/D pair's most expensive
used path and its cheapest path with an exact line search on the directional
derivative, which converges far faster than 2/(i+2) averaging on desk-scale
instances; 2/(i+2) remains as a fallback when the line search fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .costs import MarginalCost
from .games import (
    Game,
    PathFlow,
    check_feasible,
    path_cost_vector,
    total_cost,
)

__all__ = [
    "UnconvergedError",
    "SolveReport",
    "solve_we",
    "solve_so",
    "poa",
    "approximation_threshold",
    "potential",
    "check_approximation_bounds",
    "ApproximationBoundsReport",
    "total_cost_sandwich",
    "poa_upper_bound",
]

_USED_EPS = 1e-15


class UnconvergedError(RuntimeError):
    def __init__(self, report: "SolveReport"):
        super().__init__(
            f"solver stopped at duality gap {report.duality_gap:.3e} "
            f"after {report.iterations} iterations")
        self.report = report


@dataclass(frozen=True, eq=False)
class SolveReport:
    flow: PathFlow
    total_cost: float
    user_costs: np.ndarray
    duality_gap: float
    iterations: int
    converged: bool
    optimality_certified: bool

    def to_dict(self) -> dict:
        return {
            "flow": [float(v) for v in self.flow.values],
            "total_cost": self.total_cost,
            "user_costs": [float(v) for v in self.user_costs],
            "duality_gap": self.duality_gap,
            "iterations": self.iterations,
            "converged": self.converged,
            "optimality_certified": self.optimality_certified,
        }


def _initial_flow(game: Game, start) -> np.ndarray:
    st = game.structure
    if start is not None:
        flow = start.values if isinstance(start, PathFlow) else np.asarray(start, dtype=float)
        pf = PathFlow(np.array(flow))
        check_feasible(game, pf)
        return pf.values.copy()
    f = np.zeros(st.n_paths)
    for k, (lo, _hi) in enumerate(st.path_slices):
        f[lo] = game.demands[k]
    return f


def _gap_and_targets(game: Game, path_costs: np.ndarray, f: np.ndarray):
    """FW duality gap (= approximation threshold) and per-O/D min-cost path."""
    st = game.structure
    gap = 0.0
    targets = []
    for k, (lo, hi) in enumerate(st.path_slices):
        pc = path_costs[lo:hi]
        j = lo + int(np.argmin(pc))
        targets.append(j)
        gap += float(path_costs[lo:hi] @ f[lo:hi]) - float(game.demands[k]) * float(path_costs[j])
    return max(gap, 0.0), targets


def _line_search(arc_eval, arc_f, h, fallback, lo=0.0, hi=1.0):
    """Step choice for a convex 1-D slice: root of the directional derivative."""

    def dphi(alpha):
        return float(h @ arc_eval(arc_f + alpha * h))

    d_hi = dphi(hi)
    if d_hi <= 0.0:
        return hi
    d_lo = dphi(lo)
    if d_lo >= 0.0:
        return lo
    try:
        return float(optimize.brentq(dphi, lo, hi, xtol=1e-16, rtol=8.9e-16, maxiter=200))
    except (ValueError, RuntimeError):
        return fallback


def _descend(game: Game, arc_eval, tol: float, max_iter: int, start,
             objective=None) -> tuple[np.ndarray, float, int, bool]:
    """Shared FW loop; arc_eval maps arc flows to per-arc gradient values.

    When `objective` is given (non-certified optimum search) every step is
    validated against it, since the directional-derivative root is only the
    minimizer of a convex slice.  The loop exits early when no O/D pair has
    an improving swap left; with discontinuous gradients (piecewise-linear
    marginals) the gap can stay positive at the optimum, and spinning on it
    would never terminate.
    """
    st = game.structure
    inc = st.incidence
    f = _initial_flow(game, start)
    arc_f = inc @ f
    it = 0
    for it in range(1, max_iter + 1):
        path_costs = inc.T @ arc_eval(arc_f)
        gap, _targets = _gap_and_targets(game, path_costs, f)
        if gap <= tol:
            return f, gap, it, True
        progressed = False
        for k, (lo, hi) in enumerate(st.path_slices):
            if game.demands[k] <= 0.0:
                continue
            seg = (inc.T @ arc_eval(arc_f))[lo:hi]
            dst = lo + int(np.argmin(seg))
            used = np.where(f[lo:hi] > _USED_EPS * max(1.0, game.total_demand))[0]
            if used.size == 0:
                continue
            src = lo + int(used[np.argmax(seg[used])])
            if src == dst or seg[src - lo] <= seg[dst - lo]:
                continue
            mass = f[src]
            h = mass * (inc[:, dst] - inc[:, src])
            if not np.any(h):
                continue
            alpha = _line_search(arc_eval, arc_f, h, fallback=2.0 / (it + 2.0))
            if objective is not None and alpha > 0.0:
                # nonconvex slice: accept the best of a few candidates, or nothing
                cands = [a for a in (alpha, 1.0, 0.5, 2.0 / (it + 2.0)) if 0.0 < a <= 1.0]
                base_val = objective(arc_f)
                vals = [objective(arc_f + a * h) for a in cands]
                best = int(np.argmin(vals))
                alpha = cands[best] if vals[best] < base_val - 1e-15 else 0.0
            if alpha <= 0.0:
                continue
            moved = alpha * mass
            f[src] -= moved
            f[dst] += moved
            if f[src] < 0.0:
                f[src] = 0.0
            arc_f = inc @ f
            progressed = True
        if not progressed:
            break
    path_costs = inc.T @ arc_eval(arc_f)
    gap, _ = _gap_and_targets(game, path_costs, f)
    return f, gap, it, gap <= tol


def _report(game: Game, f: np.ndarray, gap: float, iters: int,
            conv: bool, certified: bool) -> SolveReport:
    flow = PathFlow(f)
    pc = path_cost_vector(game, flow)
    st = game.structure
    user = np.array([float(np.min(pc[lo:hi])) for lo, hi in st.path_slices])
    return SolveReport(
        flow=flow,
        total_cost=total_cost(game, flow),
        user_costs=user,
        duality_gap=gap,
        iterations=iters,
        converged=conv,
        optimality_certified=certified,
    )


def solve_we(game: Game, tol: float = 1e-10, max_iter: int = 100_000,
             start=None) -> SolveReport:
    """Wardrop equilibrium by potential minimization.

    The returned flow satisfies approximation_threshold(game, flow) <= tol
    when converged; otherwise an unconverged report is returned (no raise).
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")

    def arc_eval(arc_f):
        return game.arc_cost_values(arc_f)

    f, gap, iters, conv = _descend(game, arc_eval, tol, max_iter, start)
    return _report(game, f, gap, iters, conv, certified=True)


def solve_so(game: Game, tol: float = 1e-10, max_iter: int = 100_000,
             start=None, multistarts: int = 8, seed: int = 0) -> SolveReport:
    """Social optimum by total-cost minimization with marginal-cost gradients.

    optimality_certified is True iff every marginal cost is non-decreasing on
    [0, T(d)] (convex objective); otherwise the best of `multistarts` random
    restarts is reported with certified=False.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    T = game.total_demand
    marginals = [MarginalCost(c) for c in game.costs]
    certified = all(m.is_nondecreasing_on(T) for m in marginals)

    def arc_eval(arc_f):
        return np.array([m(x) for m, x in zip(marginals, arc_f)])

    def objective(arc_f):
        return float(arc_f @ game.arc_cost_values(arc_f))

    f, gap, iters, conv = _descend(game, arc_eval, tol, max_iter, start,
                                   objective=None if certified else objective)
    best = _report(game, f, gap, iters, conv, certified)
    if certified:
        return best
    rng = np.random.default_rng(seed)
    st = game.structure
    for _ in range(multistarts):
        f0 = np.zeros(st.n_paths)
        for k, (lo, hi) in enumerate(st.path_slices):
            w = rng.dirichlet(np.ones(hi - lo))
            f0[lo:hi] = game.demands[k] * w
        f, gap, iters, conv = _descend(game, arc_eval, tol, max_iter, f0,
                                       objective=objective)
        cand = _report(game, f, gap, iters, conv, certified)
        if cand.total_cost < best.total_cost:
            best = cand
    return best


def approximation_threshold(game: Game, flow: PathFlow) -> float:
    """Smallest eps for which the flow is an eps-approximate equilibrium."""
    check_feasible(game, flow)
    pc = path_cost_vector(game, flow)
    st = game.structure
    out = 0.0
    for lo, hi in st.path_slices:
        seg = pc[lo:hi]
        out += float((seg - np.min(seg)) @ flow.values[lo:hi])
    return max(out, 0.0)


def potential(game: Game, flow: PathFlow) -> float:
    """Sum over arcs of the cost antiderivative at the arc flow."""
    check_feasible(game, flow)
    arc_f = game.structure.incidence @ flow.values
    return float(sum(c.antiderivative(x) for c, x in zip(game.costs, arc_f)))


def poa_upper_bound(game: Game) -> float:
    """Finite a priori PoA bound |A| |S| max tau(T) / min tau(T/|S|)."""
    T = game.total_demand
    n_s = game.structure.n_paths
    hi = max(float(c(T)) for c in game.costs)
    lo = min(float(c(T / n_s)) for c in game.costs)
    return len(game.structure.arcs) * n_s * hi / lo


def total_cost_sandwich(game: Game, so_cost: float, we_cost: float,
                    slack: float = 1e-9) -> tuple[bool, float, float]:
    """Sandwich 0 < (T/|S|) min tau(T/|S|) <= C* <= WE cost <= |A| T max tau(T)."""
    T = game.total_demand
    n_s = game.structure.n_paths
    lower = (T / n_s) * min(float(c(T / n_s)) for c in game.costs)
    upper = len(game.structure.arcs) * T * max(float(c(T)) for c in game.costs)
    ok = (0.0 < lower <= so_cost + slack
          and so_cost <= we_cost + slack
          and we_cost <= upper + slack)
    return ok, lower, upper


def poa(game: Game, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """PoA = WE total cost over SO total cost; raises on unconverged solves."""
    we = solve_we(game, tol=tol, max_iter=max_iter)
    if not we.converged:
        raise UnconvergedError(we)
    so = solve_so(game, tol=tol, max_iter=max_iter)
    if not so.converged:
        raise UnconvergedError(so)
    rho = we.total_cost / so.total_cost
    assert rho >= 1.0 - 10.0 * tol, f"PoA {rho} fell below 1"
    assert rho <= poa_upper_bound(game) * (1.0 + 1e-9), "PoA exceeds its a priori bound"
    return rho


@dataclass(frozen=True)
class ApproximationBoundsReport:
    """Which approximation inequalities hold for an eps-approximate flow."""

    per_od_gap_ok: bool
    cost_between_user_costs_ok: bool
    potential_chain_ok: bool
    cross_term_ok: bool
    arc_cost_diff_ok: bool
    user_cost_diff_ok: bool
    total_cost_diff_ok: bool
    total_cost_diff: float
    total_cost_diff_bound: float

    @property
    def all_ok(self) -> bool:
        return all((self.per_od_gap_ok, self.cost_between_user_costs_ok,
                    self.potential_chain_ok, self.cross_term_ok,
                    self.arc_cost_diff_ok, self.user_cost_diff_ok,
                    self.total_cost_diff_ok))


def check_approximation_bounds(game: Game, f: PathFlow, f_we: PathFlow, eps: float,
                 lipschitz: float, slack: float = 1e-9) -> ApproximationBoundsReport:
    """Verify the eps-approximate equilibrium inequalities against a solved WE."""
    st = game.structure
    inc = st.incidence
    pc_f = path_cost_vector(game, f)
    arc_f = inc @ f.values
    arc_we = inc @ f_we.values
    tau_f = game.arc_cost_values(arc_f)
    tau_we = game.arc_cost_values(arc_we)
    T = game.total_demand
    n_arcs = len(st.arcs)

    per_od = True
    cost_bounds = True
    c_f = total_cost(game, f)
    user_sum = 0.0
    for k, (lo, hi) in enumerate(st.path_slices):
        seg = pc_f[lo:hi]
        l_k = float(np.min(seg))
        gap_k = float(seg @ f.values[lo:hi]) - float(game.demands[k]) * l_k
        per_od &= (-slack <= gap_k < eps + slack)
        user_sum += float(game.demands[k]) * l_k
    cost_bounds = (user_sum - slack <= c_f <= user_sum + eps + slack)

    lhs = float(tau_we @ (arc_f - arc_we))
    mid = potential(game, f) - potential(game, f_we)
    rhs = float(tau_f @ (arc_f - arc_we))
    chain = (-slack <= lhs <= mid + slack <= rhs + 2 * slack) and rhs < eps + slack
    cross = float(np.abs(tau_f - tau_we) @ np.abs(arc_f - arc_we))
    cross_ok = cross < eps + slack

    bound_c = float(np.sqrt(lipschitz * eps))
    arc_ok = bool(np.all(np.abs(tau_f - tau_we) < bound_c + slack))
    pc_we = inc.T @ tau_we
    user_ok = True
    for lo, hi in st.path_slices:
        l_we = float(np.min(pc_we[lo:hi]))
        l_f = float(np.min(pc_f[lo:hi]))
        user_ok &= abs(l_we - l_f) <= n_arcs * bound_c + slack
    c_diff = abs(c_f - total_cost(game, f_we))
    c_bound = n_arcs * bound_c * T + eps
    return ApproximationBoundsReport(
        per_od_gap_ok=per_od,
        cost_between_user_costs_ok=cost_bounds,
        potential_chain_ok=chain,
        cross_term_ok=cross_ok,
        arc_cost_diff_ok=arc_ok,
        user_cost_diff_ok=user_ok,
        total_cost_diff_ok=c_diff <= c_bound + slack,
        total_cost_diff=c_diff,
        total_cost_diff_bound=c_bound,
    )
