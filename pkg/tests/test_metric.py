"""Metric axioms, certified distances, and the ball sampler."""

import numpy as np
import pytest

from poalab import (
    BPR,
    Affine,
    Constant,
    Game,
    PiecewiseLinear,
    StructureMismatchError,
    check_metric_axioms,
    dist,
    games_equivalent,
    naive_max_interval_dist,
    sample_ball,
)

from conftest import MIXED_FAMILIES, random_game


class TestDist:
    def test_self_distance_zero(self, pigou):
        mv = dist(pigou, pigou)
        assert mv.value == 0.0
        assert mv.error_bound == 0.0

    def test_near_tie_pair_distance_is_eps(self, fig3a, fig3b):
        mv = dist(fig3a, fig3b)
        assert mv.value == pytest.approx(0.01, abs=1e-15)
        assert mv.demand_part == 0.0

    def test_demand_scaling_closed_form(self, two_link):
        # same affine costs, demands scaled by 1 + delta: demand part is
        # delta * max d_k, endpoint part is slope * delta * T
        slope, delta = 1.4, 0.3
        g1 = Game(two_link, (Affine(slope, 0.2), Affine(slope, 0.2)), np.array([1.0]))
        g2 = g1.with_demands([1.0 + delta])
        mv = dist(g1, g2)
        assert mv.demand_part == pytest.approx(delta)
        assert mv.cost_part == pytest.approx(slope * delta * 1.0)
        assert mv.value == pytest.approx(max(delta, slope * delta))

    def test_symmetry_exact(self, shared_arc):
        rng = np.random.default_rng(7)
        for _ in range(20):
            g1 = random_game(shared_arc, rng, families=list(MIXED_FAMILIES)[:4])
            g2 = random_game(shared_arc, rng)
            assert dist(g1, g2).value == dist(g2, g1).value

    def test_structure_mismatch(self, pigou, three_link):
        g = Game(three_link, (Constant(1.0),) * 3, np.array([1.0]))
        with pytest.raises(StructureMismatchError):
            dist(pigou, g)

    def test_tail_equivalent_game_at_distance_zero(self, two_link):
        g1 = Game(two_link,
                  (PiecewiseLinear((0.0, 1.0), (0.5, 1.0)), Constant(1.0)),
                  np.array([1.0]))
        g2 = Game(two_link,
                  (PiecewiseLinear((0.0, 1.0, 1.5), (0.5, 1.0, 7.0)), Constant(1.0)),
                  np.array([1.0]))
        assert games_equivalent(g1, g2)
        mv = dist(g1, g2)
        assert mv.value <= mv.error_bound  # zero up to certification

    def test_equivalent_games_same_distance_to_third(self, two_link):
        g1 = Game(two_link,
                  (PiecewiseLinear((0.0, 1.0), (0.5, 1.0)), Constant(1.0)),
                  np.array([1.0]))
        g2 = Game(two_link,
                  (PiecewiseLinear((0.0, 1.0, 1.5), (0.5, 1.0, 7.0)), Constant(1.0)),
                  np.array([1.0]))
        g3 = Game(two_link, (Affine(0.7, 0.3), Constant(1.2)), np.array([1.0]))
        d1, d2 = dist(g1, g3), dist(g2, g3)
        assert d1.value == pytest.approx(d2.value, abs=d1.error_bound + d2.error_bound + 1e-12)


class TestAxioms:
    def test_random_triples(self, two_link):
        rng = np.random.default_rng(13)
        for _ in range(60):
            g1 = random_game(two_link, rng, families=[rng.choice(MIXED_FAMILIES)] * 2)
            g2 = random_game(two_link, rng, families=[rng.choice(MIXED_FAMILIES)] * 2)
            g3 = random_game(two_link, rng, families=[rng.choice(MIXED_FAMILIES)] * 2)
            rep = check_metric_axioms(g1, g2, g3)
            assert rep.all_ok, rep

    def test_union_interval_operator_breaks_triangle(self, two_link):
        # costs equal on [0, 1], diverging on (1, 1.2]: the union-interval
        # operator sees distance 0 between the first two games but a large
        # distance to the third, violating the triangle inequality
        tau = PiecewiseLinear((0.0, 1.0, 1.2), (0.1, 1.0, 1.2))
        sigma = PiecewiseLinear((0.0, 1.0, 1.2), (0.1, 1.0, 3.0))
        g = Game(two_link, (tau, Constant(1.0)), np.array([1.0]))
        g_prime = Game(two_link, (sigma, Constant(1.0)), np.array([1.0]))
        g_second = Game(two_link, (sigma, Constant(1.0)), np.array([1.2]))
        d_ab = naive_max_interval_dist(g, g_prime)
        d_bc = naive_max_interval_dist(g_prime, g_second)
        d_ac = naive_max_interval_dist(g, g_second)
        assert d_ac > d_ab + d_bc + 0.5  # clear violation
        # the proper metric is fine on the same triple
        rep = check_metric_axioms(g, g_prime, g_second)
        assert rep.triangle_ok


class TestSampleBall:
    def test_radius_zero_returns_base(self, pigou):
        p = sample_ball(pigou, 0.0, kind="joint", seed=1)
        assert p.game is pigou
        assert p.realized.value == 0.0

    def test_demand_only_bounds(self, pigou):
        p = sample_ball(pigou, 0.1, kind="demand", seed=2)
        assert 0.9 <= p.game.demands[0] <= 1.1
        assert p.realized.upper() <= 0.1
        assert p.realized.value >= 0.05 or p.shrunk
        # costs untouched
        assert p.game.costs == pigou.costs

    def test_cost_only_keeps_demands(self, pigou):
        p = sample_ball(pigou, 0.02, kind="cost", seed=3)
        assert np.array_equal(p.game.demands, pigou.demands)
        assert p.realized.upper() <= 0.02

    def test_certificate_on_many_draws(self, shared_arc):
        rng = np.random.default_rng(31)
        base = random_game(shared_arc, rng, families=["affine", "bpr", "poly", "affine"])
        for seed in range(25):
            for kind in ("demand", "cost", "joint"):
                p = sample_ball(base, 0.05, kind=kind, seed=seed)
                recomputed = dist(base, p.game)
                assert recomputed.upper() <= 0.05 + 1e-12
                if not p.shrunk:
                    assert recomputed.upper() >= 0.025 - 1e-12

    def test_deterministic_given_seed(self, pigou):
        a = sample_ball(pigou, 0.03, kind="joint", seed=77)
        b = sample_ball(pigou, 0.03, kind="joint", seed=77)
        assert np.array_equal(a.game.demands, b.game.demands)
        assert a.game.costs == b.game.costs

    def test_oversized_radius_flags_shrunk(self, pigou):
        # demand ball of radius 5 around demand 1 cannot be filled while
        # keeping the demand non-negative
        p = sample_ball(pigou, 5.0, kind="demand", seed=4)
        assert p.shrunk or p.realized.upper() >= 2.5
