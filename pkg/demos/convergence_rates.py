#!/usr/bin/env python3
"""Convergence-rate studies: measure the slopes the theory promises.

Two studies, both on the circle:
  * per-index coefficient MSE, reference slope -1 (parametric rate);
  * whole-density L2 error with the m^(2/(2s+d)) cutoff schedule,
    reference slope -2s/(2s+d) = -0.8 for s=2, d=1.

The knobs are deliberately small so the script finishes in under a minute;
bump REPLICATES and the grid for tighter fits.  The same studies run from
the command line via `decompound study-coeff` / `decompound study-density`,
which also write results.csv / fit.json / plotdata.csv into --out.
"""

import argparse

from decompound import StudyConfig, run_coefficient_study, run_convergence_study


def show(result, title: str) -> None:
    print(f"\n== {title} ==")
    key = "mse" if result.kind == "coefficient" else "mean_error"
    for row in result.rows:
        extra = ""
        if result.kind == "density":
            extra = (f"  (variance {row['variance_term']:.2e}"
                     f" + bias {row['bias_term']:.2e})")
        print(f"  m={row['m']:>7}  {key}={row[key]:.3e}{extra}")
    fit = result.fit
    print(f"  slope {fit.slope:+.3f}  ci [{fit.ci_low:+.3f}, {fit.ci_high:+.3f}]"
          f"  reference {result.reference:+.3f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicates", type=int, default=40)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    grid = (100, 1000, 10_000)
    coeff = run_coefficient_study(StudyConfig(
        space="circle", law="wn:sigma=0.7", index="1",
        m_grid=grid, replicates=args.replicates, seed=args.seed))
    show(coeff, "coefficient MSE at n=1 (circle, wrapped normal)")

    dens = run_convergence_study(StudyConfig(
        space="circle", law="wn:sigma=0.55", s=2.0,
        m_grid=grid, replicates=args.replicates, seed=args.seed))
    show(dens, "density L2 error, s=2 cutoff schedule")


if __name__ == "__main__":
    main()
