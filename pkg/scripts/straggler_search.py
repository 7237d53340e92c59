"""Enumerate placements of slow workers on the 3x3 product-code example.

Prints the (diagonal, column) finishing times for every placement of four
T=4 workers among nine T=1 workers (n=3, k=2, r=4), grouped by outcome.
"""

import argparse
from collections import defaultdict

from codedcomp.scenarios import straggler_placements


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--slow", type=float, default=4.0)
    p.add_argument("--orders", nargs="+", default=["diagonal", "column"])
    args = p.parse_args()

    groups = defaultdict(list)
    for o in straggler_placements(count=args.count, slow=args.slow, orders=args.orders):
        groups[tuple(o.finish[k] for k in args.orders)].append(o.stragglers)
    print(" / ".join(args.orders), "-> placements")
    for key in sorted(groups):
        print(f"{key}: {len(groups[key])} e.g. {groups[key][:3]}")


if __name__ == "__main__":
    main()
