"""||T*f||_inf / ||f||_inf on the bounded family, with an r-grid refinement column."""

import argparse

import numpy as np

from genou.maximal import RGrid, linf_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, nargs="+", default=[-0.4, -0.25, -0.1, 0.0, 0.5, 2.0])
    ap.add_argument("--n-r", type=int, default=72)
    args = ap.parse_args()
    rg = RGrid.default(args.n_r)
    print(f"{'mu':>6} {'ratio':>12} {'refined':>12}  worst function")
    for mu in args.mu:
        sup, recs = linf_check(mu, rg=rg)
        fine, _ = linf_check(mu, rg=rg.refine(), x_grid=np.linspace(-4, 4, 321))
        worst = max(recs, key=lambda r: r.ratio)
        print(f"{mu:6.2f} {sup:12.8f} {fine:12.8f}  {worst.name} at x={worst.x_at_sup:g}, r={worst.r_at_sup:.4g}")


if __name__ == "__main__":
    main()
