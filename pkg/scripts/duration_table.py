"""Peak-normalized durations of the reference pulse shapes, analytic against quadrature."""
import argparse

from etpa.conventions import duration_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sigma", type=float, default=1.0)
    args = p.parse_args()
    print(f"{'shape':<12}{'FWHM':>12}{'analytic':>14}{'numeric':>14}{'rel error':>12}")
    for r in duration_table(args.sigma):
        print(f"{r.name:<12}{r.fwhm:>12.6f}{r.analytic:>14.8f}{r.numeric:>14.8f}"
              f"{r.rel_error:>12.2e}")


if __name__ == "__main__":
    main()
