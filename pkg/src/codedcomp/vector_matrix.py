"""Sub-blocked MDS vector-matrix multiplication, master and workers in one process.

Each worker holds a contiguous run of coded blocks and reports them one at a
time; the master decodes as soon as ``k`` distinct products have arrived.
"""

from __future__ import annotations

import csv
import heapq
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .mds import GeneratorMatrix, PartitionedMatrix, decode, encode


class UndecodableTrial(RuntimeError):
    """Fewer than k block results ever reach the master."""


@dataclass(frozen=True)
class WorkerAssignment:
    worker_id: int
    block_indices: tuple[int, ...]

    @property
    def load(self) -> int:
        return len(self.block_indices)


def assign_blocks(n: int, L: int, policy: str = "contiguous") -> list[WorkerAssignment]:
    """Worker ``i`` gets blocks ``i*L/n ... (i+1)*L/n - 1`` in processing order."""
    if policy != "contiguous":
        raise ValueError(f"unknown assignment policy {policy!r}")
    if n < 1 or L % n:
        raise ValueError(f"n={n} must divide L={L}")
    per = L // n
    if per < 2:
        raise ValueError(f"each worker needs at least two blocks, got L/n={per}")
    return [WorkerAssignment(i, tuple(range(i * per, (i + 1) * per))) for i in range(n)]


@dataclass
class MasterCollector:
    needed: int
    received: dict[int, np.ndarray] = field(default_factory=dict)
    completion_time: float | None = None

    @property
    def done(self) -> bool:
        return self.completion_time is not None

    def receive(self, time: float, index: int, payload: np.ndarray) -> bool:
        """Store one block result; returns True once k distinct blocks are in."""
        if self.done or index in self.received:
            return self.done
        self.received[index] = payload
        if len(self.received) == self.needed:
            self.completion_time = time
        return self.done


@dataclass(frozen=True)
class TrialResult:
    result: np.ndarray
    completion_time: float
    blocks_used: frozenset[int]


def _event_stream(assignments: Sequence[WorkerAssignment], worker_times: Sequence[Sequence[float]]):
    """Yield ``(time, worker_id, block_index)`` in lexicographic order."""
    streams = []
    for a, times in zip(assignments, worker_times):
        times = [float(t) for t in times]
        if len(times) != a.load:
            raise ValueError(f"worker {a.worker_id}: {len(times)} finish times for {a.load} blocks")
        if any(t1 > t2 for t1, t2 in zip(times, times[1:])):
            raise ValueError(f"worker {a.worker_id}: finish times must be nondecreasing")
        streams.append([(t, a.worker_id, b) for t, b in zip(times, a.block_indices)])
    return heapq.merge(*streams)


def run_trial(
    A: np.ndarray,
    x: np.ndarray,
    G: GeneratorMatrix,
    assignments: Sequence[WorkerAssignment],
    worker_times: Sequence[Sequence[float]],
) -> TrialResult:
    """Encode ``A``, replay the workers' per-block arrivals and decode at the k-th one."""
    if len(assignments) != len(worker_times):
        raise ValueError("one finish-time sequence per worker is required")
    k = G.cols
    coded = encode(PartitionedMatrix.from_matrix(A, k), G)
    x = np.asarray(x, dtype=np.float64)
    master = MasterCollector(k)
    for time, _, block in _event_stream(assignments, worker_times):
        # the worker's computation happens when its result is consumed
        if master.receive(time, block, coded[block] @ x):
            break
    if not master.done:
        raise UndecodableTrial(f"only {len(master.received)} of k={k} blocks arrived")
    y = decode(master.received.items(), G, k)
    return TrialResult(y, master.completion_time, frozenset(master.received))


def completion_time(assignments: Sequence[WorkerAssignment], worker_times: Sequence[Sequence[float]], k: int) -> float:
    """Time of the k-th distinct arrival, without doing any arithmetic on payloads."""
    seen = set()
    for time, _, block in _event_stream(assignments, worker_times):
        seen.add(block)
        if len(seen) == k:
            return time
    raise UndecodableTrial(f"only {len(seen)} of k={k} blocks arrived")


def traces_csv(results: Sequence[TrialResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial_id", "completion_time", "blocks_used"])
    for i, r in enumerate(results):
        writer.writerow([i, repr(r.completion_time), " ".join(map(str, sorted(r.blocks_used)))])
    return buf.getvalue()
