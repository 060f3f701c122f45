#!/usr/bin/env python3
"""Why no uniform Hoelder pair (H, gamma) can exist.

Takes a same-demand pair of games whose PoA values differ by a fixed amount
and repeatedly divides both games' costs by a factor.  The PoA gap is exactly
invariant while the metric distance shrinks geometrically, so the empirical
ratio |poa gap| / dist**gamma blows up for every fixed gamma.
"""

import argparse

import numpy as np

from poalab import BPR, Constant, Game, Structure, metric_shrinking_trace


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--factor", type=float, default=10.0)
    parser.add_argument("--steps", type=int, default=6)
    args = parser.parse_args()

    st = Structure(("u", "l"), ("od0",), ((("u",), ("l",)),))
    steep = Game(st, (BPR(1.0, 1.0, 0.0), Constant(1.0)), np.array([1.0]))
    flat = Game(st, (Constant(1.0), Constant(1.0)), np.array([1.0]))

    trace = metric_shrinking_trace(steep, flat, args.factor, args.steps)
    print(f"{'n':>3} {'dist':>12} {'|poa gap|':>12} "
          f"{'gap/dist^0.5':>14} {'gap/dist':>14}")
    for n, (d, delta) in enumerate(trace):
        print(f"{n:3d} {d:12.4e} {delta:12.6f} {delta / d**0.5:14.4e} "
              f"{delta / d:14.4e}")
    print("\nThe gap never moves; every fixed-exponent ratio diverges.")


if __name__ == "__main__":
    main()
