"""Half-line operator against h(x) ||f||_1 + M f(x) for normalized bumps of shrinking width."""

import argparse

import numpy as np

from genou.maximal import RGrid, majorant_sweep, normalized_bump


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, nargs="+", default=[0.0, 0.5, 2.0])
    ap.add_argument("--center", type=float, default=1.0)
    ap.add_argument("--widths", type=float, nargs="+", default=[0.2, 0.05, 0.0125])
    args = ap.parse_args()
    xs = np.linspace(0.25, 5.0, 16)
    rg = RGrid.default(24)
    for mu in args.mu:
        for w in args.widths:
            sup, recs = majorant_sweep(mu, normalized_bump(mu, args.center, w), xs, rg)
            top = max(recs, key=lambda r: r.ratio)
            print(f"mu={mu:5.2f} width={w:<7g} sup ratio {sup:.5f} at x={top.x:.3g}, r={top.r:.4g}")


if __name__ == "__main__":
    main()
