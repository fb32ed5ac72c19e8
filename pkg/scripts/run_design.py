"""Run a design config to a results CSV, then write regression and figure tables.

    python scripts/run_design.py scripts/available.cfg results/available
"""

import argparse
import sys
import time
from pathlib import Path

from groupnet.cli import main as cli_main
from groupnet.experiment import default_threads


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("outdir")
    ap.add_argument("--threads", type=int, default=default_threads())
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    argv = ["experiment", "--config", args.config, "--threads", str(args.threads),
            "--out", str(csv_path)]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    t0 = time.time()
    code = cli_main(argv)
    if code:
        return code
    print(f"experiment finished in {time.time() - t0:.0f}s -> {csv_path}", file=sys.stderr)
    return cli_main(["report", "--results", str(csv_path), "--out-dir", str(out)])


if __name__ == "__main__":
    sys.exit(main())
