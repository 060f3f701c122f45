"""Equilibrium and optimum solvers against oracles and approximation bounds."""

import math

import numpy as np
import pytest

from poalab import (
    BPR,
    Affine,
    Constant,
    Game,
    PathFlow,
    PiecewiseLinear,
    approximation_threshold,
    check_approximation_bounds,
    poa,
    poa_upper_bound,
    potential,
    solve_so,
    solve_we,
    total_cost,
)

from conftest import make_two_link_affine, random_game

TOL = 1e-12


def so_grid_oracle_two_link(game, resolution=1e-6):
    """1-D grid minimizer of the total cost for a two-parallel-link game."""
    t = np.arange(0.0, 1.0 + resolution, resolution) * game.total_demand
    c0 = np.asarray(game.costs[0](t), dtype=float)
    c1 = np.asarray(game.costs[1](game.total_demand - t), dtype=float)
    costs = t * c0 + (game.total_demand - t) * c1
    i = int(np.argmin(costs))
    return float(costs[i]), float(t[i])


class TestWardrop:
    def test_pigou(self, pigou):
        rep = solve_we(pigou, tol=TOL)
        assert rep.converged
        assert np.allclose(rep.flow.values, [1.0, 0.0], atol=1e-9)
        assert rep.total_cost == pytest.approx(1.0, abs=1e-9)
        assert rep.duality_gap <= TOL

    def test_two_link_affine_split(self, fig3a):
        rep = solve_we(fig3a, tol=TOL)
        eps = 0.01
        assert np.allclose(rep.flow.values, [(1 + eps) / 2, (1 - eps) / 2], atol=1e-10)

    def test_identical_links_equal_costs(self, fig3b):
        rep = solve_we(fig3b, tol=TOL)
        arc = fig3b.structure.incidence @ rep.flow.values
        costs = fig3b.arc_cost_values(arc)
        assert costs[0] == pytest.approx(costs[1], abs=1e-9)
        assert costs[0] == pytest.approx(0.5, abs=1e-9)

    def test_gap_equals_threshold(self, shared_arc):
        rng = np.random.default_rng(3)
        g = random_game(shared_arc, rng, families=["affine", "bpr", "affine", "poly"])
        rep = solve_we(g, tol=1e-11)
        assert rep.duality_gap == pytest.approx(
            approximation_threshold(g, rep.flow), abs=1e-13)

    def test_unconverged_report_not_exception(self, fig3a):
        rep = solve_we(fig3a, tol=1e-14, max_iter=0)
        assert not rep.converged

    def test_zero_demand_od_pair(self, shared_arc):
        g = Game(shared_arc,
                 (Affine(1, 0.2), Affine(1, 0.2), Affine(1, 0.2), Affine(1, 0.2)),
                 np.array([1.0, 0.0]))
        rep = solve_we(g, tol=TOL)
        assert rep.converged
        lo, hi = shared_arc.path_slices[1]
        assert np.all(rep.flow.values[lo:hi] == 0.0)


class TestSocialOptimum:
    def test_pigou_against_grid_oracle(self, pigou):
        oracle_cost, oracle_split = so_grid_oracle_two_link(pigou)
        rep = solve_so(pigou, tol=TOL)
        assert rep.optimality_certified
        assert rep.total_cost == pytest.approx(oracle_cost, abs=1e-6)
        assert rep.total_cost == pytest.approx(0.75, abs=1e-9)
        assert np.allclose(rep.flow.values, [0.5, 0.5], atol=1e-6)
        assert abs(rep.flow.values[0] - oracle_split) < 1e-5

    def test_equal_degree_monomials_so_equals_we(self, two_link):
        g = Game(two_link, (BPR(1.0, 2.0, 0.0), BPR(3.0, 2.0, 0.0)), np.array([1.0]))
        we = solve_we(g, tol=TOL)
        so = solve_so(g, tol=TOL)
        arc_we = g.arc_cost_values(g.structure.incidence @ we.flow.values)
        arc_so = g.arc_cost_values(g.structure.incidence @ so.flow.values)
        assert np.allclose(arc_we, arc_so, atol=1e-8)
        assert we.total_cost == pytest.approx(so.total_cost, abs=1e-10)

    def test_constant_costs_any_flow_optimal(self, two_link):
        g = Game(two_link, (Constant(2.0), Constant(2.0)), np.array([1.5]))
        rep = solve_so(g, tol=TOL)
        assert rep.total_cost == pytest.approx(1.5 * 2.0, abs=1e-10)

    def test_nonconvex_marginal_downgrades_certificate(self, two_link):
        bumpy = PiecewiseLinear((0.0, 1.0, 3.0), (0.1, 3.0, 3.2))
        g = Game(two_link, (bumpy, Constant(2.0)), np.array([1.0]))
        rep = solve_so(g, tol=1e-9)
        assert not rep.optimality_certified


class TestPoA:
    def test_pigou_four_thirds(self, pigou):
        assert poa(pigou, tol=TOL) == pytest.approx(4.0 / 3.0, abs=1e-9)

    def test_constant_costs_poa_one(self, two_link):
        g = Game(two_link, (Constant(1.0), Constant(1.0)), np.array([1.0]))
        assert poa(g, tol=TOL) == pytest.approx(1.0, abs=1e-10)

    def test_equal_degree_monomials_poa_one(self, two_link):
        g = Game(two_link, (BPR(2.0, 3.0, 0.0), BPR(0.5, 3.0, 0.0)), np.array([1.0]))
        assert poa(g, tol=TOL) == pytest.approx(1.0, abs=1e-9)

    def test_within_a_priori_bound(self, shared_arc):
        rng = np.random.default_rng(11)
        for _ in range(5):
            g = random_game(shared_arc, rng)
            assert poa(g, tol=1e-11) <= poa_upper_bound(g) + 1e-9


class TestApproximationThreshold:
    def test_pigou_sqrt_eps_flow(self, pigou):
        for eps in (1e-2, 1e-4):
            s = math.sqrt(eps)
            thr = approximation_threshold(pigou, PathFlow([1 - s, s]))
            assert thr == pytest.approx(eps, abs=1e-12)

    def test_half_half_in_near_tie_game(self, fig3a):
        thr = approximation_threshold(fig3a, PathFlow([0.5, 0.5]))
        assert thr == pytest.approx(0.5 * 0.01, abs=1e-12)

    def test_solved_we_has_zero_threshold(self, fig3a):
        rep = solve_we(fig3a, tol=TOL)
        assert approximation_threshold(fig3a, rep.flow) <= TOL


class TestApproximationBounds:
    def test_pigou_eps_chain(self, pigou):
        eps = 0.01
        s = math.sqrt(eps)
        f = PathFlow([1 - s, s])
        we = solve_we(pigou, tol=TOL)
        rep = check_approximation_bounds(pigou, f, we.flow, eps, lipschitz=1.0)
        assert rep.all_ok
        assert rep.total_cost_diff == pytest.approx(s - eps, abs=1e-12)
        assert rep.total_cost_diff_bound == pytest.approx(2 * math.sqrt(eps) * 1.0 + eps)

    def test_exact_we_has_zero_lhs(self, fig3a):
        we = solve_we(fig3a, tol=TOL)
        rep = check_approximation_bounds(fig3a, we.flow, we.flow, 1e-9, lipschitz=1.0)
        assert rep.all_ok
        assert rep.total_cost_diff == 0.0

    def test_three_path_grid_oracle(self, three_link):
        rng = np.random.default_rng(29)
        g = random_game(three_link, rng, families=["affine", "affine", "bpr"])
        t = g.total_demand
        # brute-force potential minimizer on the 3-path simplex, step 1e-3;
        # parallel links make the potential separable, so vectorize per arc
        step = 1e-3 * t
        grid = np.arange(0.0, t + step / 2, step)
        anti = [np.asarray(c.antiderivative(grid), dtype=float) for c in g.costs]
        best, best_flow = math.inf, None
        for i, a in enumerate(grid):
            n_b = len(grid) - i
            pots = anti[0][i] + anti[1][:n_b] + anti[2][: n_b][::-1]
            j = int(np.argmin(pots))
            if pots[j] < best:
                best = float(pots[j])
                best_flow = PathFlow([a, grid[j], t - a - grid[j]])
        eps = approximation_threshold(g, best_flow) + 1e-12
        we = solve_we(g, tol=1e-12)
        lip = max(c.lipschitz_on(t) for c in g.costs)
        rep = check_approximation_bounds(g, best_flow, we.flow, eps, lip)
        assert rep.all_ok


class TestEquilibriumProperties:
    def _random_feasible(self, game, rng):
        parts = []
        for k, (lo, hi) in enumerate(game.structure.path_slices):
            parts.append(game.demands[k] * rng.dirichlet(np.ones(hi - lo)))
        return PathFlow(np.concatenate(parts))

    def test_variational_inequality(self, shared_arc):
        rng = np.random.default_rng(41)
        g = random_game(shared_arc, rng, families=["affine", "bpr", "poly", "affine"])
        we = solve_we(g, tol=1e-12)
        arc_we = g.structure.incidence @ we.flow.values
        tau = g.arc_cost_values(arc_we)
        for _ in range(100):
            other = self._random_feasible(g, rng)
            arc_g = g.structure.incidence @ other.values
            assert float(tau @ (arc_g - arc_we)) >= -1e-10

    def test_essential_uniqueness(self, shared_arc):
        rng = np.random.default_rng(43)
        g = random_game(shared_arc, rng, families=["affine", "bpr", "affine", "poly"])
        rep1 = solve_we(g, tol=1e-12)
        rep2 = solve_we(g, tol=1e-12, start=self._random_feasible(g, rng))
        c1 = g.arc_cost_values(g.structure.incidence @ rep1.flow.values)
        c2 = g.arc_cost_values(g.structure.incidence @ rep2.flow.values)
        assert np.max(np.abs(c1 - c2)) <= 1e-11

    def test_we_minimizes_potential(self, three_link):
        rng = np.random.default_rng(47)
        g = random_game(three_link, rng, families=["affine", "bpr", "poly"])
        we = solve_we(g, tol=1e-12)
        phi_we = potential(g, we.flow)
        for _ in range(50):
            assert phi_we <= potential(g, self._random_feasible(g, rng)) + 1e-12

    def test_we_cost_is_demand_weighted_user_cost(self, shared_arc):
        rng = np.random.default_rng(53)
        g = random_game(shared_arc, rng, families=["affine", "affine", "bpr", "affine"])
        rep = solve_we(g, tol=1e-12)
        assert rep.total_cost == pytest.approx(
            float(rep.user_costs @ g.demands), abs=1e-9)

    def test_so_never_exceeds_we(self, shared_arc):
        rng = np.random.default_rng(59)
        for _ in range(10):
            g = random_game(shared_arc, rng)
            we = solve_we(g, tol=1e-10)
            so = solve_so(g, tol=1e-10)
            assert so.total_cost <= we.total_cost + 1e-9
