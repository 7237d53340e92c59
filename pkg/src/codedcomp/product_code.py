"""Product-coded matrix-matrix multiplication ``A^T B``.

``A`` and ``B`` (both ``d x q``) are cut into ``k*r`` column pieces.  The
``(kr) x (kr)`` array of raw products ``A_s^T B_t`` is extended to an
``(nr) x (nr)`` array by systematic row and column MDS codes; worker ``w`` of
the ``n*n`` workers owns the ``r x r`` tile at tile position ``(w // n, w % n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .mds import SINGULAR_RATIO, GeneratorError, GeneratorMatrix, make_generator


class NotDecodable(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TwoLevelPartition:
    """``pieces[s]`` is column piece ``s = i*r + a`` (outer block i, inner piece a)."""

    pieces: np.ndarray
    outer: int
    inner: int

    @classmethod
    def from_matrix(cls, A: np.ndarray, k: int, r: int) -> "TwoLevelPartition":
        A = np.asarray(A, dtype=np.float64)
        d, q = A.shape
        if k < 1 or r < 1 or q % (k * r):
            raise ValueError(f"k*r={k * r} must divide the column count q={q}")
        width = q // (k * r)
        return cls(A.reshape(d, k * r, width).transpose(1, 0, 2).copy(), k, r)

    def to_matrix(self) -> np.ndarray:
        return np.concatenate(list(self.pieces), axis=1)


@dataclass(frozen=True, eq=False)
class ErasurePattern:
    known: np.ndarray

    def __post_init__(self):
        known = np.array(self.known, dtype=bool)
        if known.ndim != 2:
            raise ValueError("erasure pattern must be 2-D")
        object.__setattr__(self, "known", known)

    @property
    def count(self) -> int:
        return int(self.known.sum())

    def to_text(self) -> str:
        return "\n".join("".join("1" if c else "0" for c in row) for row in self.known) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ErasurePattern":
        rows = [line.strip() for line in text.strip().splitlines() if line.strip()]
        if not rows or any(set(row) - {"0", "1"} for row in rows):
            raise ValueError("bit grid must contain only 0/1 rows")
        if len({len(row) for row in rows}) != 1:
            raise ValueError("bit grid rows must have equal length")
        return cls(np.array([[c == "1" for c in row] for row in rows]))


@dataclass(frozen=True, eq=False)
class CodedTaskGrid:
    n: int
    k: int
    r: int
    row_generator: GeneratorMatrix
    col_generator: GeneratorMatrix
    coded_a: np.ndarray  # (nr, d, width)
    coded_b: np.ndarray

    @property
    def side(self) -> int:
        return self.n * self.r

    @property
    def kr(self) -> int:
        return self.k * self.r

    @property
    def workers(self) -> int:
        return self.n * self.n

    @property
    def subtasks_per_worker(self) -> int:
        return self.r * self.r

    def tile(self, worker: int) -> tuple[slice, slice]:
        """Grid rows and columns of the worker's tile."""
        if not 0 <= worker < self.workers:
            raise IndexError(f"worker {worker} out of range")
        u0, v0 = (worker // self.n) * self.r, (worker % self.n) * self.r
        return slice(u0, u0 + self.r), slice(v0, v0 + self.r)

    def tile_map(self) -> dict[int, list[tuple[int, int]]]:
        out = {}
        for w in range(self.workers):
            rs, cs = self.tile(w)
            out[w] = [(u, v) for u in range(rs.start, rs.stop) for v in range(cs.start, cs.stop)]
        return out

    def cell(self, u: int, v: int) -> np.ndarray:
        """The worker-side subtask ``Atilde_u^T Btilde_v``."""
        return self.coded_a[u].T @ self.coded_b[v]

    def all_cells(self) -> np.ndarray:
        return np.einsum("uda,vdb->uvab", self.coded_a, self.coded_b)


def build_grid(A: np.ndarray, B: np.ndarray, n: int, k: int, r: int, seed: int) -> CodedTaskGrid:
    if n < k:
        raise ValueError(f"need n >= k, got n={n}, k={k}")
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise ValueError(f"A and B must have the same shape, got {A.shape} and {B.shape}")
    pa = TwoLevelPartition.from_matrix(A, k, r)
    pb = TwoLevelPartition.from_matrix(B, k, r)
    gr = make_generator(n * r, k * r, seed, systematic=True)
    gc = make_generator(n * r, k * r, seed + 1, systematic=True)
    coded_a = np.einsum("us,sdw->udw", gr.entries, pa.pieces)
    coded_b = np.einsum("vt,tdw->vdw", gc.entries, pb.pieces)
    return CodedTaskGrid(n, k, r, gr, gc, coded_a, coded_b)


def peel_decodable(pattern: ErasurePattern | np.ndarray, kr: int) -> tuple[bool, np.ndarray]:
    """Iterative row/column peeling on the 0/1 pattern.

    Any row or column with at least ``kr`` known cells becomes fully known;
    repeat until nothing changes.  Returns ``(whole grid known, known mask)``.
    """
    known = np.array(pattern.known if isinstance(pattern, ErasurePattern) else pattern, dtype=bool)
    rows, cols = known.shape
    if kr > min(rows, cols):
        raise ValueError(f"kr={kr} exceeds the grid side")
    while True:
        rc = known.sum(axis=1)
        fill_rows = (rc >= kr) & (rc < cols)
        known[fill_rows] = True
        cc = known.sum(axis=0)
        fill_cols = (cc >= kr) & (cc < rows)
        known[:, fill_cols] = True
        if not (fill_rows.any() or fill_cols.any()):
            break
    return bool(known.all()), known


def _solve_symbols(gen: np.ndarray, idx: np.ndarray, values: np.ndarray) -> np.ndarray:
    sub = gen[idx]
    sv = np.linalg.svd(sub, compute_uv=False)
    if sv[-1] <= SINGULAR_RATIO * sv[0]:
        raise GeneratorError(f"sub-generator on rows {idx.tolist()} is numerically singular")
    shape = values.shape
    return np.linalg.solve(sub, values.reshape(len(idx), -1)).reshape(shape)


def peel_decode(grid: CodedTaskGrid, received: Mapping[tuple[int, int], np.ndarray]) -> np.ndarray:
    """Recover ``A^T B`` (``q x q``) from received cells by numeric peeling.

    Rows are codewords of the column generator and columns of the row
    generator, so each recovery is one MDS solve on matrix-valued symbols.
    """
    side, kr = grid.side, grid.kr
    width = grid.coded_a.shape[2]
    cells = np.zeros((side, side, width, width))
    known = np.zeros((side, side), dtype=bool)
    for (u, v), payload in received.items():
        cells[u, v] = payload
        known[u, v] = True
    if not peel_decodable(known, kr)[0]:
        raise NotDecodable("received cells are not peeling-decodable")
    gr, gc = grid.row_generator.entries, grid.col_generator.entries
    corner = np.s_[:kr, :kr]
    while not known[corner].all():
        progressed = False
        for u in np.nonzero((known.sum(axis=1) >= kr) & ~known.all(axis=1))[0]:
            idx = np.nonzero(known[u])[0][:kr]
            symbols = _solve_symbols(gc, idx, cells[u, idx])
            cells[u] = np.einsum("vt,tab->vab", gc, symbols)
            known[u] = True
            progressed = True
        for v in np.nonzero((known.sum(axis=0) >= kr) & ~known.all(axis=0))[0]:
            idx = np.nonzero(known[:, v])[0][:kr]
            symbols = _solve_symbols(gr, idx, cells[idx, v])
            cells[:, v] = np.einsum("us,sab->uab", gr, symbols)
            known[:, v] = True
            progressed = True
        if not progressed:  # pragma: no cover - excluded by the decodability check
            raise NotDecodable("peeling stalled")
    raw = cells[corner]
    return raw.transpose(0, 2, 1, 3).reshape(kr * width, kr * width)


def multiple_mds_decodable(pattern: np.ndarray, kr: int, per_code_length: int | None = None) -> bool:
    """``pattern`` is ``(code length) x (number of codes)``; each column code needs kr symbols."""
    known = np.asarray(pattern.known if isinstance(pattern, ErasurePattern) else pattern, dtype=bool)
    if per_code_length is not None and known.shape[0] != per_code_length:
        raise ValueError(f"pattern has {known.shape[0]} rows, expected {per_code_length}")
    return bool((known.sum(axis=0) >= kr).all())


def single_mds_decodable(received_count: int, k: int, r: int) -> bool:
    return received_count >= (k * r) ** 2
