#!/usr/bin/env python3
"""PoA convergence as the total demand tends to 0 and to infinity.

The light-traffic run uses a two-link game with strictly positive costs tied
at the origin; the heavy-traffic run uses the monomial-times-log family.
Writes both rate tables to CSV and prints log-log rate fits.
"""

import argparse
from pathlib import Path

import numpy as np

from poalab import (
    Affine,
    DemandSchedule,
    Game,
    MonomialLog,
    Polynomial,
    Structure,
    converge_down,
    converge_up,
    fit_rate,
)
from poalab.io import write_rate_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="convergence_out")
    args = parser.parse_args()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    st = Structure(("u", "l"), ("od0",), ((("u",), ("l",)),))

    down_game = Game(st, (Affine(1.0, 1.0), Polynomial((1.0, 1.0, 1.0))),
                     np.array([1.0]))
    totals_down = tuple(10.0 ** (-e) for e in (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0))
    down = converge_down(down_game, DemandSchedule((1.0,), totals_down), tol=1e-14)
    write_rate_csv(down, out_dir / "rate_down.csv")
    fit = fit_rate(down, "down", censor=1e-12)
    print("decreasing totals (poa-1 vs T):")
    for p in down:
        print(f"  T={p.total_demand:9.3e}  poa-1={p.poa_minus_one:10.3e}  "
              f"bound={p.bound:9.3e}")
    print(f"  log-log slope {fit.slope:.2f} (r2={fit.r_squared:.4f})\n")

    up_game = Game(st, (MonomialLog(1.0, 1.0, 1.0), MonomialLog(2.0, 1.0, 1.0)),
                   np.array([1.0]))
    totals_up = tuple(10.0 ** k for k in range(1, 7))
    up = converge_up(up_game, DemandSchedule((1.0,), totals_up), tol=1e-12)
    write_rate_csv(up, out_dir / "rate_up.csv")
    print("growing totals (poa-1 vs T, log-factor costs):")
    for p in up:
        bound = f"{p.bound:9.3e}" if p.bound is not None else "   (outside radius)"
        print(f"  T={p.total_demand:9.3e}  poa-1={p.poa_minus_one:10.3e}  "
              f"bound={bound}  w={p.w:8.4f}  w_ln_bound={p.w_closed_form:8.4f}")
    fit_up = fit_rate(up, "up", censor=1e-12)
    print(f"  log-log slope vs 1/ln(T+1): {fit_up.slope:.2f} "
          f"(r2={fit_up.r_squared:.4f})")


if __name__ == "__main__":
    main()
