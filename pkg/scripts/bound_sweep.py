"""Sweep η against its 2Ω/π ceiling over the line width and write a CSV.

Default: Ω = 1 rad/s box broad factor, γ_fg from 10⁻² Ω to 10³ Ω.  The
f_EPP column approaches 2 as the line outgrows the support.
"""
import argparse
import sys

import numpy as np

from etpa.sweep import bound_sweep, rows_to_csv


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--omega-cap", type=float, default=1.0)
    p.add_argument("--psi-n-width", type=float, default=0.01)
    p.add_argument("--psi-b-shape", default="box", choices=["box", "gaussian", "sinc"])
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--method", default="auto", choices=["auto", "jsa", "factors"])
    p.add_argument("--jobs", type=int, default=4)
    p.add_argument("--output", default=None, help="CSV path (default stdout)")
    args = p.parse_args()

    gammas = args.omega_cap * np.logspace(-2, 3, args.points)
    rows = bound_sweep([args.omega_cap], list(gammas), [args.psi_n_width],
                       psi_b_shape=args.psi_b_shape, method=args.method, jobs=args.jobs)
    text = rows_to_csv(rows)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    worst = max(r.eta / r.eta_max for r in rows)
    print(f"max eta/eta_max = {worst:.9f}, max f_EPP = {max(r.f_EPP for r in rows):.6f}",
          file=sys.stderr)


if __name__ == "__main__":
    main()
