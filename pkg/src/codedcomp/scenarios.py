"""Small deterministic straggler scenarios on the product-code grid."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .simulator import LatencyModel, simulate_trial


@dataclass(frozen=True)
class PlacementOutcome:
    stragglers: tuple[int, ...]
    finish: dict[str, float]


def straggler_placements(n: int = 3, k: int = 2, r: int = 4, count: int = 4, slow: float = 4.0,
                         fast: float = 1.0, orders=("diagonal", "column")) -> list[PlacementOutcome]:
    """Finishing time of every placement of ``count`` slow workers among ``n*n``."""
    out = []
    W = n * n
    for slow_set in combinations(range(W), count):
        times = [slow if w in slow_set else fast for w in range(W)]
        model = LatencyModel.deterministic(times)
        finish = {o: simulate_trial("product", W, k, r, o, model, seed=0).finish_time for o in orders}
        out.append(PlacementOutcome(slow_set, finish))
    return out


def witnesses(outcomes, target: dict[str, float], tol: float = 1e-12) -> list[PlacementOutcome]:
    return [o for o in outcomes if all(abs(o.finish[k] - v) <= tol for k, v in target.items())]
