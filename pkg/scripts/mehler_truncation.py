"""Relative error of the truncated Mehler series against the closed form, by term count.

Splits the grid by the sign of x*y*z: with xyz < 0 the terms alternate and the
partial sums lose everything to cancellation long before the tail is small.
"""

import argparse

from genou.verify import mehler_errors


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--terms", type=int, nargs="+", default=[20, 40, 60, 90, 120])
    ap.add_argument("--z", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.7])
    ap.add_argument("--npts", type=int, default=13)
    args = ap.parse_args()
    print(f"{'terms':>6} {'xyz>=0':>10} {'xyz<0':>10}")
    for n in args.terms:
        pos, neg = mehler_errors(n_terms=n, zs=tuple(args.z), npts=args.npts)
        print(f"{n:6d} {pos:10.2e} {neg:10.2e}")


if __name__ == "__main__":
    main()
