"""||T*f||_p / ||f||_p for a few p and mu on the default L^p family."""

import argparse

from genou.maximal import RGrid, lp_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, nargs="+", default=[-0.25, 0.0, 0.5, 2.0])
    ap.add_argument("--p", type=float, nargs="+", default=[1.25, 1.5, 2.0, 4.0])
    ap.add_argument("--n-r", type=int, default=36)
    args = ap.parse_args()
    rg = RGrid.default(args.n_r)
    print(f"{'mu':>6} {'p':>5}  ratios")
    for mu in args.mu:
        for p in args.p:
            sup, out = lp_experiment(mu, p, rg=rg)
            print(f"{mu:6.2f} {p:5.2f}  " + "  ".join(f"{name}={r:.5f}" for name, r in out))


if __name__ == "__main__":
    main()
