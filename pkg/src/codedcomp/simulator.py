"""Monte Carlo finishing-time simulation for coded straggler schemes.

Schemes
-------
``product``
    ``(n r, k r)^2`` product code with ``n = floor(sqrt(N))``; worker ``w``
    owns the ``r x r`` tile at ``(w // n, w % n)`` of the ``nr x nr`` grid and
    walks it in the chosen order.  Decodable once peeling recovers the grid.
``multiple_mds``
    ``k r`` independent ``(N r / k, k r)`` column codes.  Worker ``w`` sits in
    code group ``w % k`` and tile row ``g = w // k``; its ``j``-th subtask is
    symbol ``g r + j // r`` of code ``(w % k) r + (g + j) % r``, i.e. it cycles
    across its ``r`` codes starting from an offset that rotates with ``g``.
    The ``order`` argument is not used.
``single_mds``
    one ``(N r^2, (k r)^2)`` code: any ``(k r)^2`` subtasks.
``vector_mds``
    sub-blocked vector-matrix code: ``N`` workers with ``r`` blocks each, any
    ``k`` blocks.

Time model: worker ``i`` needs ``T_i`` for its whole load and reports its
``j``-th subtask (1-based) at ``j T_i / R``.  Ties are broken by worker index,
then by position in the worker's order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _engine
from .scheduling import KINDS, ScheduleOrder, make_order

SCHEMES = ("product", "multiple_mds", "single_mds", "vector_mds")


@dataclass(frozen=True)
class LatencyModel:
    kind: str = "exponential"
    rate: float = 1.0
    times: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "exponential":
            if not self.rate > 0:
                raise ValueError(f"rate must be positive, got {self.rate}")
        elif self.kind == "deterministic":
            if not self.times or min(self.times) < 0:
                raise ValueError("deterministic model needs non-negative worker times")
            object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        else:
            raise ValueError(f"unknown latency model {self.kind!r}")

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "LatencyModel":
        return cls("exponential", rate)

    @classmethod
    def deterministic(cls, times: Sequence[float]) -> "LatencyModel":
        return cls("deterministic", times=tuple(times))

    def sample(self, rng: np.random.Generator, workers: int) -> np.ndarray:
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.rate, workers)
        if len(self.times) != workers:
            raise ValueError(f"deterministic model has {len(self.times)} times for {workers} workers")
        return np.array(self.times)


@dataclass(frozen=True)
class Layout:
    """Everything the event loop needs for one (scheme, N, k, r, order)."""

    scheme: str
    workers: int
    subtasks: int
    mode: int
    n_rows: int
    n_cols: int
    kr: int
    need: int
    tile_row: np.ndarray = field(repr=False)
    tile_col: np.ndarray = field(repr=False)
    local_a: np.ndarray | None = field(repr=False, default=None)
    local_b: np.ndarray | None = field(repr=False, default=None)
    r: int = 1
    random_order: bool = False

    def cells(self, rng: np.random.Generator | None = None):
        """Per-worker ``(rows, cols, local_a, local_b)``, each ``(W, R)``."""
        if not self.random_order:
            return self._fixed_cells
        flat = np.argsort(rng.random((self.workers, self.subtasks)), axis=1)
        a, b = flat % self.r, flat // self.r
        return self.tile_row[:, None] + a, self.tile_col[:, None] + b, a, b

    @cached_property
    def _fixed_cells(self):
        a = np.ascontiguousarray(self.local_a, dtype=np.int64)
        b = np.ascontiguousarray(self.local_b, dtype=np.int64)
        return self.tile_row[:, None] + a, self.tile_col[:, None] + b, a, b


def _resolve_order(order, r: int):
    if isinstance(order, ScheduleOrder):
        if order.r != r:
            raise ValueError(f"order is for r={order.r}, simulation uses r={r}")
        return order, False
    if order not in KINDS:
        raise ValueError(f"unknown order {order!r}")
    if order == "random":
        return None, True
    return make_order(order, r), False


def make_layout(scheme: str, N: int, k: int, r: int, order="diagonal") -> Layout:
    """Validate parameters and build the worker-to-cell map for a scheme.

    ``order`` is a kind name or a :class:`ScheduleOrder`.  The name
    ``"random"`` draws an independent permutation per worker and per trial;
    a ScheduleOrder is applied identically by every worker.
    """
    if min(N, k, r) < 1:
        raise ValueError("N, k and r must be positive")
    if scheme == "product":
        n = math.isqrt(N)
        if n < k:
            raise ValueError(f"product code needs floor(sqrt(N)) >= k, got n={n}, k={k}")
        fixed, is_random = _resolve_order(order, r)
        W, R = n * n, r * r
        w = np.arange(W)
        a = b = None
        if fixed is not None:
            sa, sb = fixed.as_arrays()
            a, b = np.broadcast_to(sa, (W, R)), np.broadcast_to(sb, (W, R))
        return Layout(scheme, W, R, _engine.PEELING, n * r, n * r, k * r, (k * r) ** 2,
                      (w // n) * r, (w % n) * r, a, b, r, is_random)
    if scheme == "multiple_mds":
        if N % k:
            raise ValueError(f"multiple MDS needs k | N, got N={N}, k={k}")
        R = r * r
        w = np.arange(N)[:, None]
        j = np.arange(R)[None, :]
        g = w // k
        a = np.broadcast_to(j // r, (N, R))
        b = (g + j) % r
        return Layout(scheme, N, R, _engine.COLUMNS, N * r // k, k * r, k * r, k * r,
                      (g[:, 0] * r), (w[:, 0] % k) * r, a, b, r)
    if scheme == "single_mds":
        if N * r * r < (k * r) ** 2:
            raise ValueError(f"single MDS needs N >= k^2, got N={N}, k={k}")
        R = r * r
        zeros = np.zeros(N, np.int64)
        return Layout(scheme, N, R, _engine.COUNT, 1, 1, k * r, (k * r) ** 2,
                      np.arange(N), zeros, np.zeros((N, R), np.int64),
                      np.broadcast_to(np.arange(R), (N, R)), r)
    if scheme == "vector_mds":
        if N * r < k:
            raise ValueError(f"vector MDS needs N*r >= k, got N={N}, r={r}, k={k}")
        zeros = np.zeros(N, np.int64)
        return Layout(scheme, N, r, _engine.COUNT, 1, 1, k, k, np.arange(N), zeros,
                      np.zeros((N, r), np.int64), np.broadcast_to(np.arange(r), (N, r)), r)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


@dataclass(frozen=True, eq=False)
class CompletionTimeline:
    """Merged event stream of one trial.

    Event ``e`` is worker ``workers[e]`` finishing its ``positions[e]``-th
    subtask (tile cell ``local[e]``, grid cell ``cells[e]``) at ``times[e]``.
    For the two single-code schemes the grid cell is ``(worker, position)``.
    """

    scheme: str
    times: np.ndarray
    workers: np.ndarray
    positions: np.ndarray
    local: np.ndarray
    cells: np.ndarray
    finish_index: int
    finish_time: float
    worker_times: np.ndarray

    @property
    def decodable(self) -> bool:
        return self.finish_index >= 0

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class TrialStats:
    trials: int
    mean: float
    standard_error: float
    undecodable_count: int = 0


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _run(layout: Layout, T: np.ndarray, rng, record: bool):
    rows, cols, a, b = layout.cells(rng)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    cols = np.ascontiguousarray(cols, dtype=np.int64)
    T = np.ascontiguousarray(T[: layout.workers], dtype=np.float64)
    size = layout.workers * layout.subtasks if record else 0
    out_w = np.empty(size, np.int64)
    out_j = np.empty(size, np.int64)
    finish_event, finish_time, n = _engine.run_events(
        T, layout.subtasks, rows, cols, layout.mode, layout.n_rows, layout.n_cols,
        layout.kr, layout.need, record, out_w, out_j,
    )
    return finish_event, finish_time, (rows, cols, a, b, out_w[:n], out_j[:n], T)


def simulate_trial(scheme: str, N: int, k: int, r: int, order, model: LatencyModel, seed: int,
                   trial: int = 0) -> CompletionTimeline:
    """One trial with its full event stream recorded."""
    layout = make_layout(scheme, N, k, r, order)
    rng = trial_rng(seed, trial)
    T = model.sample(rng, N)
    finish_event, finish_time, (rows, cols, a, b, ew, ej, Tw) = _run(layout, T, rng, True)
    return CompletionTimeline(
        scheme=scheme,
        times=Tw[ew] * (ej + 1) / layout.subtasks,
        workers=ew,
        positions=ej,
        local=np.stack([a[ew, ej], b[ew, ej]], axis=1),
        cells=np.stack([rows[ew, ej], cols[ew, ej]], axis=1),
        finish_index=int(finish_event),
        finish_time=float(finish_time),
        worker_times=Tw,
    )


def finish_times(scheme: str, N: int, k: int, r: int, order, model: LatencyModel, trials: int,
                 seed: int, threads: int = 1, worker_times: np.ndarray | None = None) -> np.ndarray:
    """Per-trial finishing times; ``inf`` marks an undecodable trial.

    Trial ``t`` draws from ``default_rng([seed, t])``: first the ``N`` worker
    times, then any random orders.  Two calls with the same seed therefore
    see the same worker times whatever ``r`` is.  ``worker_times`` (shape
    ``(trials, N)``) overrides the sampled times.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    layout = make_layout(scheme, N, k, r, order)
    out = np.empty(trials)

    def work(idx):
        for t in idx:
            rng = trial_rng(seed, int(t))
            T = model.sample(rng, N)
            if worker_times is not None:
                T = np.asarray(worker_times[t], dtype=np.float64)
            out[t] = _run(layout, T, rng, False)[1]

    chunks = np.array_split(np.arange(trials), max(1, min(threads, trials)))
    if threads <= 1:
        work(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, chunks))
    return out


def summarize(samples: np.ndarray) -> TrialStats:
    samples = np.asarray(samples, dtype=np.float64)
    ok = np.isfinite(samples)
    good = samples[ok]
    n = len(samples)
    if len(good) == 0:
        return TrialStats(n, float("nan"), float("nan"), n)
    se = float(good.std(ddof=1) / math.sqrt(len(good))) if len(good) > 1 else 0.0
    return TrialStats(n, float(good.mean()), se, int(n - len(good)))


def estimate_mean(scheme: str, N: int, k: int, r: int, order, model: LatencyModel, trials: int,
                  seed: int, threads: int = 1) -> TrialStats:
    return summarize(finish_times(scheme, N, k, r, order, model, trials, seed, threads))
