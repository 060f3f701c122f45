"""Pointwise Hoelder continuity probes for the PoA.

Closed-form certificates bound |poa(base) - poa(perturbed)| by
H * max(dist**gamma, dist) inside a validity radius around the base game:

* ``certificate_demand_slice`` (exponent 1/2) covers perturbations that keep
  the demands fixed, for Lipschitz costs.
* ``certificate_cost_slice`` (exponent 1/2) covers perturbations that keep
  the cost functions fixed and do not raise the total demand.
* ``certificate_exponent_one`` (exponent 1) covers joint perturbations when
  all costs are constant, or when all are continuously differentiable with
  derivative bounded away from zero.

``sweep`` samples metric balls around a base game, solves every sample, and
attaches the applicable certificate bound; ``fit_hoelder`` estimates the
empirical exponent from the records.  Fitted exponents are lower-confidence
estimates: the certificates are upper bounds, so a larger fitted exponent is
consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .games import Game
from .metric import MetricValue, sample_ball
from .regression import loglog_fit
from .costs import PiecewiseLinear
from .solvers import poa, solve_so, solve_we, UnconvergedError

__all__ = [
    "HoelderCertificate",
    "certificate_demand_slice",
    "certificate_cost_slice",
    "certificate_exponent_one",
    "SweepRecord",
    "sweep",
    "HoelderFit",
    "fit_hoelder",
    "max_delta_by_radius",
]


@dataclass(frozen=True)
class HoelderCertificate:
    """Certified local bound on the PoA change around a base game.

    |poa(base) - poa(other)| <= constant * max(dist**exponent,
    linear_factor * dist) whenever dist <= radius.  The linear factor is 1
    except for the cost-slice certificate, whose linear branch carries the
    square root of the (clamped) Lipschitz constant.
    """

    which: str
    constant: float
    exponent: float
    radius: float
    linear_factor: float = 1.0

    def __post_init__(self):
        if self.constant <= 0 or self.radius <= 0:
            raise ValueError("certificate needs positive constant and radius")

    def bound(self, distance: float) -> float:
        return self.constant * max(distance**self.exponent,
                                   self.linear_factor * distance)


def _base_quantities(game: Game, tol: float):
    we = solve_we(game, tol=tol)
    so = solve_so(game, tol=tol)
    if not (we.converged and so.converged):
        raise UnconvergedError(we if not we.converged else so)
    rho = we.total_cost / so.total_cost
    return rho, so.total_cost


def certificate_demand_slice(game: Game, tol: float = 1e-10) -> HoelderCertificate | None:
    """Exponent-1/2 certificate for same-demand comparisons (Lipschitz costs)."""
    T = game.total_demand
    m = max(c.lipschitz_on(T) for c in game.costs)
    if not math.isfinite(m):
        return None
    rho, c_star = _base_quantities(game, tol)
    n_a = len(game.structure.arcs)
    constant = 2.0 * (rho + math.sqrt(m * n_a * T) + 2.0) / c_star * n_a * T
    radius = c_star / (2.0 * n_a * T)
    return HoelderCertificate("demand-slice", constant, 0.5, radius)


def certificate_cost_slice(game: Game, tol: float = 1e-10) -> HoelderCertificate | None:
    """Exponent-1/2 certificate for same-cost comparisons with total demand <= T(d).

    The Lipschitz constant is clamped up to 1, which keeps it valid.
    """
    T = game.total_demand
    m_raw = max(c.lipschitz_on(T) for c in game.costs)
    if not math.isfinite(m_raw):
        return None
    m = max(1.0, m_raw)
    rho, c_star = _base_quantities(game, tol)
    n_a = len(game.structure.arcs)
    n_k = len(game.structure.od_pairs)
    pi_max = max(float(c(T)) for c in game.costs)
    m_tilde = 2.0 * ((math.sqrt(m * n_a * T) + 2.0) * n_a * T
                     + n_a * n_k * pi_max) * math.sqrt(m)
    m_star = 2.0 * (n_a * n_k * pi_max + n_a * T * m)
    constant = (2.0 * rho * m_star + 2.0 * m_tilde) / c_star
    radius = min(T / n_k, c_star / (2.0 * m_star))
    return HoelderCertificate("cost-slice", constant, 0.5, radius,
                              linear_factor=math.sqrt(m))


def certificate_exponent_one(game: Game, tol: float = 1e-10) -> HoelderCertificate | None:
    """Exponent-1 certificate for constant or strictly-increasing C1 costs.

    Returns None when neither regime applies.  The validity radii are
    conservative consequences of the same chain of estimates that yields the
    constants (auxiliary game well-posedness plus keeping every denominator
    above half its base value).
    """
    T = game.total_demand
    n_a = len(game.structure.arcs)
    n_k = len(game.structure.od_pairs)
    lips = [c.lipschitz_on(T) for c in game.costs]

    if max(lips) == 0.0:  # constant on [0, T]
        rho, c_star = _base_quantities(game, tol)
        tau_max0 = max(float(c(0.0)) for c in game.costs)
        constant = 8.0 * n_a * T * (n_k + 1.0) / c_star
        radius = min(T / n_k,
                     c_star / (2.0 * (n_a * n_k * tau_max0 + 2.0 * n_a * T * (n_k + 1.0))))
        return HoelderCertificate("constant-costs", constant, 1.0, radius)

    if any(isinstance(c, PiecewiseLinear) for c in game.costs):
        return None  # kinks: not continuously differentiable
    m_lo = min(c.deriv_min_on(T) for c in game.costs)
    m_hi = max(lips)
    if m_lo <= 0.0 or not math.isfinite(m_hi):
        return None
    rho, c_star = _base_quantities(game, tol)
    tau_max = max(float(c(T)) for c in game.costs)
    blow = 1.0 + n_k * m_hi
    # demand-slice part and cost-slice part of the perturbation are bounded
    # separately; their sum bounds the full change via the auxiliary game.
    h_demand = (4.0 + 4.0 * (2.0 + m_hi / m_lo) * rho) / c_star * n_a * T * blow
    w_cost = (2.0 * (2.0 + m_hi / m_lo) * n_a * T * blow
              + 2.0 * n_a * tau_max * n_k * blow)
    s_cost = 4.0 * (n_a * n_k * tau_max + n_a * T * m_hi) * blow
    h_cost = 2.0 * (rho * s_cost + w_cost) / c_star
    constant = h_demand + h_cost
    radius = min(T / (2.0 * n_k), c_star / (4.0 * s_cost))
    return HoelderCertificate("increasing-costs", constant, 1.0, radius)


@dataclass(frozen=True)
class SweepRecord:
    seed: int
    kind: str
    radius: float
    dist: MetricValue
    base_poa: float
    pert_poa: float
    delta: float
    certificate_bound: float | None
    solve_tol: float
    shrunk: bool = False

    @property
    def slice_name(self) -> str:
        """Subspace name by the quantity held fixed (kind names the varied one)."""
        return {"demand": "cost-slice", "cost": "demand-slice"}.get(self.kind, "joint")


def _sweep_tol(radius: float) -> float:
    # keep solver error well below the PoA changes being measured
    return max(min(1e-10, radius * radius / 100.0), 1e-14)


def sweep(base: Game, kind: str, radii, samples_per_radius: int,
          seed: int = 0, max_iter: int = 200_000) -> list[SweepRecord]:
    """Perturbation sweep around a base game.

    For each radius, draws samples from the metric ball of that radius
    (respecting `kind`), solves each sample, and emits one record per sample
    with the applicable certificate bound attached.  Per-sample solver
    failures are recorded as NaN PoA rather than raised.
    """
    radii = [float(r) for r in radii]
    tol_base = min(_sweep_tol(r) for r in radii)
    base_poa = poa(base, tol=tol_base, max_iter=max_iter)
    cert_demand = certificate_demand_slice(base, tol_base)
    cert_cost = certificate_cost_slice(base, tol_base)
    cert_one = certificate_exponent_one(base, tol_base)
    t_base = base.total_demand

    records: list[SweepRecord] = []
    for r_idx, radius in enumerate(radii):
        tol = _sweep_tol(radius)
        for i in range(samples_per_radius):
            sample_seed = seed * 1_000_000 + r_idx * 10_000 + i
            pert = sample_ball(base, radius, kind=kind, seed=sample_seed)
            try:
                pert_poa = poa(pert.game, tol=tol, max_iter=max_iter)
            except UnconvergedError:
                pert_poa = math.nan
            delta = abs(pert_poa - base_poa) if math.isfinite(pert_poa) else math.nan

            cert = None
            if kind == "cost":
                cert = cert_demand  # demands fixed: demand-slice certificate
            elif kind == "demand":
                if pert.game.total_demand <= t_base:
                    cert = cert_cost  # costs fixed: cost-slice certificate
            else:
                cert = cert_one
            bound = None
            if cert is not None and pert.realized.upper() <= cert.radius:
                bound = cert.bound(pert.realized.value)
            records.append(SweepRecord(
                seed=sample_seed, kind=kind, radius=radius, dist=pert.realized,
                base_poa=base_poa, pert_poa=pert_poa, delta=delta,
                certificate_bound=bound, solve_tol=tol, shrunk=pert.shrunk))
    records.sort(key=lambda rec: rec.seed)
    return records


@dataclass(frozen=True)
class HoelderFit:
    gamma: float
    constant: float
    r_squared: float
    n_used: int


def fit_hoelder(records, min_delta: float | None = None) -> HoelderFit:
    """Empirical Hoelder exponent: slope of log(delta) against log(dist).

    Records whose delta is below the numerical floor (solver tolerance, or
    `min_delta` when given) or whose distance is inside its own grid error
    are censored; at least 8 usable records are required.
    """
    xs, ys = [], []
    for rec in records:
        delta = rec.delta
        if not math.isfinite(delta):
            continue
        floor = min_delta if min_delta is not None else max(
            1e-12, 20.0 * getattr(rec, "solve_tol", 0.0))
        d = getattr(rec.dist, "value", None)
        err = getattr(rec.dist, "error_bound", 0.0)
        if d is None:
            d, err = float(rec.dist), 0.0
        if delta <= floor or d <= err or d <= 0.0:
            continue
        xs.append(d)
        ys.append(delta)
    if len(xs) < 8:
        raise ValueError(f"only {len(xs)} usable records, need at least 8")
    slope, intercept, r2 = loglog_fit(xs, ys)
    return HoelderFit(gamma=slope, constant=math.exp(intercept),
                      r_squared=r2, n_used=len(xs))


def max_delta_by_radius(records) -> dict[float, float]:
    """Largest observed PoA change per sweep radius (continuity diagnostics)."""
    out: dict[float, float] = {}
    for rec in records:
        if math.isfinite(rec.delta):
            out[rec.radius] = max(out.get(rec.radius, 0.0), rec.delta)
    return out
