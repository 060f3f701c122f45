"""PoA-invariant rescalings and auxiliary-game constructions.

Cost normalization divides every cost function by a positive factor; demand
normalization divides the demands and rescales the cost arguments to match.
Both leave the PoA unchanged.  On same-demand pairs, cost normalization
scales the metric by exactly 1/factor, which is the engine behind the
non-existence of uniform Hoelder constants: repeated normalization shrinks
distances at will while PoA differences stay fixed.
"""

from __future__ import annotations

import numpy as np

from .games import Game
from .costs import PiecewiseLinear, TangentCost, TruncatedCost

__all__ = [
    "cost_normalize",
    "demand_normalize",
    "truncate_extend",
    "metric_shrinking_trace",
]


def cost_normalize(game: Game, factor: float) -> Game:
    """Divide every cost function by factor > 0; demands unchanged."""
    if factor <= 0:
        raise ValueError("factor must be > 0")
    if factor == 1.0:
        return game
    return game.with_costs(c.scaled_by(1.0 / factor) for c in game.costs)


def demand_normalize(game: Game, factor: float) -> Game:
    """Divide demands by factor > 0 and rescale cost arguments: new(x) = old(factor*x)."""
    if factor <= 0:
        raise ValueError("factor must be > 0")
    if factor == 1.0:
        return game
    costs = tuple(c.with_argument_scale(factor) for c in game.costs)
    return Game(game.structure, costs, game.demands / factor)


def truncate_extend(game: Game, new_total: float, mode: str = "constant") -> Game:
    """Auxiliary game at total demand new_total with extended cost functions.

    mode="constant" freezes each cost at min(T(d), new_total) and beyond;
    mode="tangent" continues each cost past T(d) along its tangent there.
    Demands keep their ratios and are rescaled to sum to new_total.
    """
    if new_total <= 0:
        raise ValueError("new_total must be > 0")
    t_base = game.total_demand
    demands = game.demands * (new_total / t_base)
    if mode == "constant":
        anchor = min(t_base, new_total)
        costs = tuple(TruncatedCost(c, anchor) for c in game.costs)
    elif mode == "tangent":
        if new_total <= t_base:
            costs = game.costs
        else:
            bad = [type(c).__name__ for c in game.costs
                   if isinstance(c, (PiecewiseLinear, TruncatedCost))]
            if bad:
                raise ValueError(
                    f"tangent extension needs differentiable costs, got {bad}")
            costs = tuple(TangentCost(c, t_base) for c in game.costs)
    else:
        raise ValueError(f"unknown extension mode {mode!r}")
    return Game(game.structure, costs, demands)


def metric_shrinking_trace(g1: Game, g2: Game, factor: float, steps: int,
                           tol: float = 1e-12):
    """Distances and PoA gaps along repeated cost normalization of a pair.

    Returns a list of (distance, |poa difference|) for 0..steps applications.
    The distance shrinks by 1/factor each step on same-demand pairs while the
    PoA gap stays fixed.
    """
    from .metric import dist
    from .solvers import poa

    out = []
    a, b = g1, g2
    for _ in range(steps + 1):
        out.append((dist(a, b).value, abs(poa(a, tol=tol) - poa(b, tol=tol))))
        a = cost_normalize(a, factor)
        b = cost_normalize(b, factor)
    return out
