"""Command line entry point: ``codedcomp {run,verify,demo-encode}``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import experiments
from .mds import worked_example_generator
from .scheduling import KINDS
from .simulator import SCHEMES
from .vector_matrix import assign_blocks, run_trial


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--figure", choices=experiments.FIGURES)
    p.add_argument("--scheme", action="append", choices=SCHEMES + ("sub_blocked", "baseline"),
                   help="restrict to this scheme (repeatable)")
    p.add_argument("--order", action="append", choices=KINDS, help="product-code order (repeatable)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="CSV path for run, output directory for verify")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codedcomp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one figure sweep or a JSON config")
    _add_common(p_run)
    p_run.add_argument("--config", help="JSON file with ExperimentConfig fields")

    p_ver = sub.add_parser("verify", help="run figures and compare against an expectations file")
    _add_common(p_ver)
    p_ver.add_argument("--expectations", help="defaults to the shipped published coordinates")

    sub.add_parser("demo-encode", help="walk the n=3, k=4, L=6 coded vector-matrix example")
    return parser


def _overrides(args) -> dict:
    return {
        "schemes": tuple(args.scheme) if args.scheme else None,
        "orders": tuple(args.order) if args.order else None,
        "trials": args.trials,
        "seed": args.seed,
        "threads": args.threads,
    }


def cmd_run(args) -> int:
    if args.config:
        cfg = experiments.ExperimentConfig.from_json(args.config)
        cfg = cfg.replace(figure=args.figure, **_overrides(args), out=args.out)
    elif args.figure:
        cfg = experiments.preset(args.figure, **_overrides(args), out=args.out)
    else:
        print("run needs --figure or --config", file=sys.stderr)
        return 2
    try:
        rows = experiments.run(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not cfg.out:
        sys.stdout.write(experiments.csv_body(rows))
    else:
        print(f"wrote {len(rows)} rows to {cfg.out} (config {cfg.content_hash()[:12]})")
    return 0


def cmd_verify(args) -> int:
    path = args.expectations or experiments.default_expectations()
    over = _overrides(args)
    # the expectation keys pin schemes and orders, so only run-size knobs apply
    over = {k: over[k] for k in ("trials", "seed", "threads")}
    try:
        report = experiments.verify(path, args.figure, out=args.out, **over)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for line in report.lines():
        print(line)
    n_fail = sum(not c.passed for c in report.comparisons)
    print(f"{len(report.comparisons) - n_fail}/{len(report.comparisons)} comparisons passed")
    return report.exit_code


def cmd_demo(args) -> int:
    np.set_printoptions(precision=4, suppress=True)
    G = worked_example_generator()
    rng = np.random.default_rng(0)
    A = rng.integers(-3, 4, size=(8, 5)).astype(float)
    x = rng.integers(-3, 4, size=5).astype(float)
    print("A (8 x 5) split into k=4 blocks of 2 rows; generator G (6 x 4):")
    print(G.entries)
    for i, row in enumerate(G.entries):
        terms = " + ".join(f"{c:g}*A{j + 1}" for j, c in enumerate(row) if c)
        print(f"  coded block {i + 1} = {terms}")
    assignments = assign_blocks(3, 6)
    for a in assignments:
        print(f"  worker {a.worker_id + 1} holds blocks {[b + 1 for b in a.block_indices]}")
    times = [(1.0, 2.0), (1.0, 2.0), (10.0, 20.0)]
    print("worker finish times per block:", times)
    res = run_trial(A, x, G, assignments, times)
    print(f"master decodes at t={res.completion_time:g} from blocks {sorted(b + 1 for b in res.blocks_used)}")
    print("decoded y  =", res.result)
    print("direct A x =", A @ x)
    err = np.linalg.norm(res.result - A @ x) / np.linalg.norm(A @ x)
    print(f"relative error {err:.2e}")
    return 0 if err <= 1e-8 else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return {"run": cmd_run, "verify": cmd_verify, "demo-encode": cmd_demo}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
