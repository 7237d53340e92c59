"""Real-valued MDS-like coding of partitioned matrices.

A generator ``G`` of shape ``(L, k)`` turns ``k`` row-blocks of a matrix ``A``
into ``L`` coded blocks ``Abar_i = sum_j G[i, j] A_j``.  Any ``k`` of the coded
products ``Abar_i x`` suffice to recover ``A x``.

Block indices are 0-based throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

SINGULAR_RATIO = 1e-9
EXHAUSTIVE_LIMIT = 10_000
SAMPLED_SUBSETS = 1_000
MAX_ATTEMPTS = 100


class GeneratorError(ValueError):
    """Raised when a generator cannot be built or fails its invertibility check."""


def _row_subsets(L: int, k: int, rng: np.random.Generator) -> np.ndarray:
    if math.comb(L, k) <= EXHAUSTIVE_LIMIT:
        return np.array(list(combinations(range(L), k)), dtype=np.int64).reshape(-1, k)
    picks = np.argsort(rng.random((SAMPLED_SUBSETS, L)), axis=1)[:, :k]
    return np.sort(picks, axis=1)


def _min_singular_ratio(entries: np.ndarray, subsets: np.ndarray) -> float:
    sv = np.linalg.svd(entries[subsets], compute_uv=False)
    return float(np.min(sv[:, -1] / sv[:, 0]))


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    entries: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise GeneratorError("generator entries must be a 2-D array")
        L, k = entries.shape
        if not L >= k >= 1:
            raise GeneratorError(f"need L >= k >= 1, got L={L}, k={k}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    L = rows
    k = cols

    def submatrix(self, indices: Sequence[int]) -> np.ndarray:
        return self.entries[np.asarray(indices, dtype=np.int64)]

    def min_singular_ratio(self, seed: int = 0) -> float:
        """Worst smallest/largest singular value ratio over k-row subsets.

        Exhaustive when there are at most 10^4 subsets, otherwise 10^3
        random subsets drawn from ``seed``.
        """
        subsets = _row_subsets(self.rows, self.cols, np.random.default_rng(seed))
        return _min_singular_ratio(self.entries, subsets)

    def is_mds(self, seed: int = 0) -> bool:
        return self.min_singular_ratio(seed) > SINGULAR_RATIO

    def __eq__(self, other):
        if not isinstance(other, GeneratorMatrix):
            return NotImplemented
        return self.seed == other.seed and np.array_equal(self.entries, other.entries)

    def to_json(self) -> str:
        return json.dumps(
            {"L": self.rows, "k": self.cols, "seed": self.seed, "entries": self.entries.ravel().tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "GeneratorMatrix":
        doc = json.loads(text)
        L, k = int(doc["L"]), int(doc["k"])
        entries = np.asarray(doc["entries"], dtype=np.float64)
        if entries.size != L * k:
            raise GeneratorError(f"expected {L * k} entries, got {entries.size}")
        return cls(entries.reshape(L, k), doc.get("seed"))


def make_generator(L: int, k: int, seed: int, systematic: bool = False) -> GeneratorMatrix:
    """Sample an ``L x k`` Gaussian generator whose every k-row subset is invertible.

    With ``systematic=True`` the top ``k`` rows are the identity and only the
    parity rows are random.  A failed check resamples with the next sub-seed;
    after 100 failures a :class:`GeneratorError` is raised.
    """
    if L < k or k < 1:
        raise GeneratorError(f"need L >= k >= 1, got L={L}, k={k}")
    check_rng = np.random.default_rng([seed, 0xC0DE])
    subsets = _row_subsets(L, k, check_rng)
    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng([seed, attempt])
        if systematic:
            entries = np.vstack([np.eye(k), rng.standard_normal((L - k, k))])
        else:
            entries = rng.standard_normal((L, k))
        if _min_singular_ratio(entries, subsets) > SINGULAR_RATIO:
            return GeneratorMatrix(entries, seed)
    raise GeneratorError(f"no invertible generator for L={L}, k={k} after {MAX_ATTEMPTS} attempts")


@dataclass(frozen=True, eq=False)
class PartitionedMatrix:
    """``k`` equal row-blocks of an ``m x q`` matrix, stored as a ``(k, m/k, q)`` array."""

    blocks: np.ndarray

    @classmethod
    def from_matrix(cls, A: np.ndarray, k: int) -> "PartitionedMatrix":
        A = np.asarray(A, dtype=np.float64)
        if A.ndim == 1:
            A = A[:, None]
        m, q = A.shape
        if k < 1 or m % k:
            raise ValueError(f"k={k} must divide the row count m={m}")
        return cls(A.reshape(k, m // k, q))

    @property
    def k(self) -> int:
        return self.blocks.shape[0]

    @property
    def original_rows(self) -> int:
        return self.blocks.shape[0] * self.blocks.shape[1]

    @property
    def original_cols(self) -> int:
        return self.blocks.shape[2]

    def to_matrix(self) -> np.ndarray:
        return self.blocks.reshape(self.original_rows, self.original_cols)


@dataclass(frozen=True, eq=False)
class CodedBlockSet:
    blocks: np.ndarray
    generator: GeneratorMatrix

    def __len__(self):
        return self.blocks.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.blocks[i]


def encode(A: PartitionedMatrix, G: GeneratorMatrix) -> CodedBlockSet:
    """Coded blocks ``Abar_i = sum_j G[i, j] A_j``, without forming ``G kron I``."""
    if G.cols != A.k:
        raise ValueError(f"generator has {G.cols} columns but the partition has {A.k} blocks")
    return CodedBlockSet(np.einsum("ij,jab->iab", G.entries, A.blocks), G)


def kronecker_encode(A: np.ndarray, G: GeneratorMatrix) -> np.ndarray:
    """Dense ``(G kron I_{m/k}) A``; only meant as a reference on small inputs."""
    A = np.asarray(A, dtype=np.float64)
    return np.kron(G.entries, np.eye(A.shape[0] // G.cols)) @ A


def decode(received: Iterable[tuple[int, np.ndarray]], G: GeneratorMatrix, k: int | None = None) -> np.ndarray:
    """Recover ``A x`` from exactly ``k`` coded products ``(index, Abar_index x)``.

    Solves ``G(I) Y = W`` with LU rather than forming ``G(I)^{-1}``.
    """
    k = G.cols if k is None else k
    if k != G.cols:
        raise ValueError(f"k={k} does not match generator with {G.cols} columns")
    received = list(received)
    if len(received) != k:
        raise ValueError(f"need exactly k={k} received blocks, got {len(received)}")
    indices = [int(i) for i, _ in received]
    if len(set(indices)) != k:
        raise ValueError(f"duplicate block indices in {indices}")
    if min(indices) < 0 or max(indices) >= G.rows:
        raise ValueError(f"block indices must lie in [0, {G.rows})")
    sub = G.submatrix(indices)
    sv = np.linalg.svd(sub, compute_uv=False)
    if sv[-1] <= SINGULAR_RATIO * sv[0]:
        raise GeneratorError(f"generator rows {indices} are numerically singular")
    payloads = np.stack([np.asarray(w, dtype=np.float64) for _, w in received])
    shape = payloads.shape
    solved = np.linalg.solve(sub, payloads.reshape(k, -1))
    return solved.reshape(shape).reshape(k * shape[1], *shape[2:])


def worked_example_generator() -> GeneratorMatrix:
    """The six-block, k=4 toy code: four systematic rows plus [1,1,1,1] and [1,2,3,4]."""
    return GeneratorMatrix(np.vstack([np.eye(4), np.ones(4), np.arange(1.0, 5.0)]), seed=None)
