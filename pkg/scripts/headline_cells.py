"""Print mean accuracy for a handful of headline conditions.

    python scripts/headline_cells.py --reps 200
    python scripts/headline_cells.py --noise per_group --connected-caveman
"""

import argparse

import numpy as np

from groupnet.experiment import DEFAULT_MULTIPLIERS, DEFAULT_P_VALUES, cell_seed, run_cell
from groupnet.generators import NetworkSpec

CELLS = [
    ("random", 5.0, 1.0, "projection"),
    ("random", 5.0, 1.0, "sdsm"),
    ("random", 50.0, 0.5, "sdsm"),
    ("random", 50.0, 0.5, "projection"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--noise", default="per_slot", choices=("per_slot", "per_group"))
    ap.add_argument("--replacement", default="outside_clique", choices=("outside_clique", "any"))
    ap.add_argument("--connected-caveman", action="store_true")
    args = ap.parse_args()
    kw = dict(replacement=args.replacement, noise=args.noise)

    for kind, m, p, method in CELLS:
        r = run_cell(NetworkSpec.default(kind), m, p, method, args.reps,
                     cell_seed(args.seed, kind, m, p), **kw)
        print(f"{kind:8s} {m:>4g}N p={p:.1f} {method:10s} r={r.mean_r:.3f} sd={r.sd_r:.3f}")

    cave = NetworkSpec("caveman", {**NetworkSpec.default("caveman").params,
                                   "connected": args.connected_caveman})
    reps = max(1, args.reps // 4)
    means = [run_cell(cave, m, p, "sdsm", reps, cell_seed(args.seed, "caveman", m, p),
                      **kw).mean_r
             for m in DEFAULT_MULTIPLIERS for p in DEFAULT_P_VALUES]
    variant = "connected" if args.connected_caveman else "disconnected"
    print(f"caveman ({variant}) SDSM grand mean over 36 cells, {reps} reps: "
          f"{np.nanmean(means):.3f}")


if __name__ == "__main__":
    main()
