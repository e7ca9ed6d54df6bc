"""Weak-type ratio eta * lambda{T*f > eta} / ||f||_1 over the bump family, per mu.

Writes one CSV per mu plus a summary line showing how the family sup moves as
the bumps narrow. The full default family takes a few minutes per mu on one core.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from genou.maximal import RGrid, weak_type_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, nargs="+", default=[-0.25, 0.0, 0.5, 2.0])
    ap.add_argument("--n-r", type=int, default=72)
    ap.add_argument("--n-eta", type=int, default=40)
    ap.add_argument("--out-dir", type=Path, default=Path("results/weak_type"))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    etas = np.geomspace(1e-2, 1e6, args.n_eta)
    for mu in args.mu:
        rep = weak_type_experiment(mu, etas=etas, rg=RGrid.default(args.n_r))
        path = args.out_dir / f"mu_{mu:+.3f}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["center", "width", "eta", "mass", "ratio"])
            w.writerows([[format(v, ".17g") for v in row] for row in rep.rows])
        by_w = rep.sup_by_width()
        widths = " ".join(f"w={w:g}:{by_w[w]:.4f}" for w in sorted(by_w, reverse=True))
        print(f"mu={mu:+.3f}  sup={rep.sup_ratio:.4f}  {widths}  "
              f"max change {max(rep.width_change()):.2%}  -> {path}")


if __name__ == "__main__":
    main()
