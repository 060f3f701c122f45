import numpy as np
import pytest

from poalab import (
    BPR,
    Affine,
    Constant,
    Game,
    MonomialLog,
    PiecewiseLinear,
    Polynomial,
    Structure,
)


@pytest.fixture(scope="session")
def two_link():
    return Structure(("u", "l"), ("od0",), ((("u",), ("l",)),))


@pytest.fixture(scope="session")
def three_link():
    return Structure(("x", "y", "z"), ("od0",), ((("x",), ("y",), ("z",)),))


@pytest.fixture(scope="session")
def shared_arc():
    return Structure(
        ("a", "b", "c", "d"),
        ("k1", "k2"),
        ((("a",), ("c", "d")), (("b",), ("c",))),
    )


@pytest.fixture()
def pigou(two_link):
    """Upper arc costs x, lower arc costs 1, one unit of demand."""
    return Game(two_link, (BPR(1.0, 1.0, 0.0), Constant(1.0)), np.array([1.0]))


def make_two_link_affine(two_link, eps):
    return Game(two_link, (BPR(1.0, 1.0, 0.0), Affine(1.0, eps)), np.array([1.0]))


@pytest.fixture()
def fig3a(two_link):
    """x versus x + 0.01: both arcs strictly increasing, near-degenerate."""
    return make_two_link_affine(two_link, 0.01)


@pytest.fixture()
def fig3b(two_link):
    """Two identical x links."""
    return Game(two_link, (BPR(1.0, 1.0, 0.0), BPR(1.0, 1.0, 0.0)), np.array([1.0]))


# default draw pool for games that get solved; piecewise-linear costs have
# discontinuous marginals (the SO gap need not vanish at kink optima), so
# they are opt-in via an explicit family list
_FAMILIES = ("affine", "bpr", "poly", "monolog", "constant")

MIXED_FAMILIES = ("affine", "bpr", "poly", "pwl", "monolog", "constant")


def random_cost(rng, family=None):
    family = family or rng.choice(_FAMILIES)
    if family == "affine":
        return Affine(rng.uniform(0.2, 2.0), rng.uniform(0.1, 1.5))
    if family == "bpr":
        return BPR(rng.uniform(0.2, 2.0), float(rng.integers(1, 4)), rng.uniform(0.1, 1.0))
    if family == "poly":
        return Polynomial((rng.uniform(0.1, 1.0), rng.uniform(0.0, 1.0),
                           rng.uniform(0.0, 1.0)))
    if family == "pwl":
        jumps = np.cumsum(rng.uniform(0.0, 1.0, size=3))
        return PiecewiseLinear((0.0, 0.7, 1.6, 2.5),
                               tuple(rng.uniform(0.1, 0.5) + jumps[0] + np.concatenate([[0], jumps])[:4]))
    if family == "monolog":
        return MonomialLog(rng.uniform(0.3, 2.0), float(rng.integers(1, 3)), 1.0)
    return Constant(rng.uniform(0.2, 2.0))


def random_game(structure, rng, families=None):
    n_arcs = len(structure.arcs)
    costs = tuple(random_cost(rng, families[i] if families else None)
                  for i in range(n_arcs))
    demands = rng.uniform(0.4, 1.6, size=len(structure.od_pairs))
    return Game(structure, costs, demands)
