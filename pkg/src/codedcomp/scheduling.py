"""Processing orders for the r x r tile of subtasks a worker owns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("column", "row", "diagonal", "random")


@dataclass(frozen=True)
class ScheduleOrder:
    """``sequence[j]`` is the tile-local ``(a, b)`` cell computed j-th."""

    kind: str
    r: int
    sequence: tuple[tuple[int, int], ...]
    seed: int | None = None

    def __post_init__(self):
        if sorted(self.sequence) != [(a, b) for a in range(self.r) for b in range(self.r)]:
            raise ValueError("sequence must visit every tile cell exactly once")

    def __len__(self):
        return len(self.sequence)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        seq = np.array(self.sequence, dtype=np.int64).reshape(-1, 2)
        return seq[:, 0], seq[:, 1]


def _column(r):
    return [(a, b) for b in range(r) for a in range(r)]


def _row(r):
    return [(a, b) for a in range(r) for b in range(r)]


def _diagonal(r):
    # wrapped diagonals, main diagonal first
    return [(i, (i + d) % r) for d in range(r) for i in range(r)]


def random_sequence(r: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    cells = _column(r)
    return [cells[i] for i in rng.permutation(r * r)]


def make_order(kind: str, r: int, seed: int | None = None) -> ScheduleOrder:
    if r < 1:
        raise ValueError(f"tile side r must be >= 1, got {r}")
    if kind == "column":
        seq = _column(r)
    elif kind == "row":
        seq = _row(r)
    elif kind == "diagonal":
        seq = _diagonal(r)
    elif kind == "random":
        seq = random_sequence(r, np.random.default_rng(seed))
    else:
        raise ValueError(f"unknown order kind {kind!r}; expected one of {KINDS}")
    return ScheduleOrder(kind, r, tuple(seq), seed if kind == "random" else None)
