"""Run every figure sweep and write CSV/JSON results under results/."""

import argparse
import time
from pathlib import Path

from codedcomp import experiments as ex


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--figures", nargs="+", default=["fig4", "fig5", "fig6", "fig7", "fig8"])
    p.add_argument("--trials", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-dir", default="results")
    args = p.parse_args()

    cache = {}
    for fig in args.figures:
        start = time.time()
        cfg = ex.preset(fig, trials=args.trials, seed=args.seed, threads=args.threads,
                        out=str(Path(args.out_dir) / f"{fig}.csv"))
        rows = ex.run(cfg, cache)
        print(f"{fig}: {len(rows)} rows -> {cfg.out} ({time.time() - start:.0f}s)")


if __name__ == "__main__":
    main()
