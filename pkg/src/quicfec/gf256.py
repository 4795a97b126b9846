"""Arithmetic over GF(2^8) and dense linear algebra for erasure codes.

The field is generated by the primitive polynomial 0x11D.  Multiplication
goes through a 256x256 product table built once at import time from
log/antilog tables, so per-symbol work on 1000-byte payloads reduces to
numpy gathers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

PRIMITIVE_POLY = 0x11D

# antilog table doubled so log-sum indexing never needs a mod
_EXP = np.zeros(510, dtype=np.uint8)
_LOG = np.zeros(256, dtype=np.int32)


def _build_tables() -> None:
    x = 1
    for i in range(255):
        _EXP[i] = x
        _LOG[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIMITIVE_POLY
    _EXP[255:510] = _EXP[0:255]


_build_tables()

MUL = np.zeros((256, 256), dtype=np.uint8)
_nz = np.arange(1, 256)
MUL[1:, 1:] = _EXP[_LOG[_nz][:, None] + _LOG[_nz][None, :]]

INV = np.zeros(256, dtype=np.uint8)
INV[_nz] = _EXP[255 - _LOG[_nz]]


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    return int(MUL[a, b])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse in GF(2^8)")
    return int(INV[a])


def vec_mul(c: int, v: np.ndarray) -> np.ndarray:
    """Scale a uint8 vector by the field element c."""
    return MUL[c][v]


def vec_addmul(acc: np.ndarray, c: int, v: np.ndarray) -> None:
    """acc ^= c * v, in place."""
    if c:
        acc ^= MUL[c][v]


_MUL_FLAT = np.ascontiguousarray(MUL).reshape(-1)


def coeffs_payload_mul(coeffs: np.ndarray, payloads: np.ndarray) -> np.ndarray:
    """XOR_j coeffs[j] * payloads[j] over byte-vector payloads, one gather.

    coeffs is a length-k uint8 vector, payloads a (k, E) uint8 matrix.
    """
    idx = (coeffs.astype(np.int32)[:, None] << 8) | payloads
    return np.bitwise_xor.reduce(_MUL_FLAT[idx], axis=0)


def matrix_payload_mul(coeff_rows: np.ndarray, payloads: np.ndarray) -> np.ndarray:
    """Row i of the result is XOR_j coeff_rows[i, j] * payloads[j]."""
    idx = (coeff_rows.astype(np.int32)[:, :, None] << 8) | payloads[None, :, :]
    return np.bitwise_xor.reduce(_MUL_FLAT[idx], axis=1)


class Matrix:
    """Dense matrix over GF(2^8), row-major uint8 storage."""

    def __init__(self, rows: int, cols: int, cells: Sequence[int] | None = None):
        if cells is None:
            self.data = np.zeros((rows, cols), dtype=np.uint8)
        else:
            cells = np.asarray(cells, dtype=np.uint8)
            if cells.size != rows * cols:
                raise ValueError(f"need {rows * cols} cells, got {cells.size}")
            self.data = cells.reshape(rows, cols).copy()

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Matrix":
        m = cls.__new__(cls)
        m.data = np.asarray(arr, dtype=np.uint8).copy()
        return m

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def cells(self) -> list[int]:
        return self.data.reshape(-1).tolist()

    def __getitem__(self, idx):
        return self.data[idx]

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and np.array_equal(self.data, other.data)

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols})"

    def mat_vec(self, x: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Multiply by a column of byte-vectors: out[i] = sum_j self[i][j]*x[j]."""
        if len(x) != self.cols:
            raise ValueError("dimension mismatch")
        out = []
        for i in range(self.rows):
            row = self.data[i]
            acc = np.zeros(len(x[0]), dtype=np.uint8)
            for j in range(self.cols):
                vec_addmul(acc, int(row[j]), x[j])
            out.append(acc)
        return out

    def mat_mul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        out = np.zeros((self.rows, other.cols), dtype=np.uint8)
        for i in range(self.rows):
            acc = out[i]
            row = self.data[i]
            for l in range(self.cols):
                vec_addmul(acc, int(row[l]), other.data[l])
        return Matrix.from_array(out)


@dataclass(frozen=True)
class LinearSolveResult:
    """Outcome of Gaussian elimination.

    solution is None when the system lacks full column rank, in which case
    undetermined lists the unknown indices that could not be pinned down.
    """

    solution: list[np.ndarray] | None
    undetermined: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.solution is not None


def _rref(a: np.ndarray, b: np.ndarray) -> dict[int, int]:
    """In-place reduced row echelon form; returns pivot row per column.

    Pivoting picks the first nonzero entry in the column, lowest row index
    first; there is no magnitude to compare in a finite field.
    """
    m, n = a.shape
    pivot_row_of_col: dict[int, int] = {}
    rank = 0
    for col in range(n):
        pivot = -1
        for r in range(rank, m):
            if a[r, col]:
                pivot = r
                break
        if pivot < 0:
            continue
        if pivot != rank:
            a[[rank, pivot]] = a[[pivot, rank]]
            b[[rank, pivot]] = b[[pivot, rank]]
        inv = int(INV[a[rank, col]])
        if inv != 1:
            a[rank] = MUL[inv][a[rank]]
            b[rank] = MUL[inv][b[rank]]
        for r in range(m):
            if r != rank and a[r, col]:
                f = int(a[r, col])
                a[r] ^= MUL[f][a[rank]]
                b[r] ^= MUL[f][b[rank]]
        pivot_row_of_col[col] = rank
        rank += 1
    return pivot_row_of_col


def _prepare(coeffs, rhs) -> tuple[np.ndarray, np.ndarray]:
    a = coeffs.data if isinstance(coeffs, Matrix) else np.asarray(coeffs, dtype=np.uint8)
    a = a.copy()
    m = a.shape[0]
    if len(rhs) != m:
        raise ValueError(f"coeffs has {m} rows but rhs has {len(rhs)} vectors")
    vecs = [
        np.frombuffer(v, dtype=np.uint8).copy()
        if isinstance(v, (bytes, bytearray))
        else np.asarray(v, dtype=np.uint8).copy()
        for v in rhs
    ]
    if m and any(len(v) != len(vecs[0]) for v in vecs):
        raise ValueError("rhs vectors must share one length")
    b = np.array(vecs, dtype=np.uint8) if m else np.zeros((0, 0), dtype=np.uint8)
    return a, b


def solve_linear_system(
    coeffs: Matrix | np.ndarray, rhs: Sequence[np.ndarray | bytes]
) -> LinearSolveResult:
    """Solve coeffs * x = rhs symbol-wise over GF(2^8).

    coeffs is m x n with m >= n allowed (consistent overdetermined systems
    solve fine).  rhs holds m byte-vectors of one common length.
    """
    a, b = _prepare(coeffs, rhs)
    m, n = a.shape
    pivot_row_of_col = _rref(a, b)
    free = [c for c in range(n) if c not in pivot_row_of_col]
    if free:
        # a pivot variable tied to a free column is just as undetermined
        undet = set(free)
        for col, row in pivot_row_of_col.items():
            if any(a[row, f] for f in free):
                undet.add(col)
        return LinearSolveResult(None, tuple(sorted(undet)))
    # rows beyond the rank must have vanished for a consistent system
    for r in range(n, m):
        if b[r].any():
            raise ValueError("inconsistent linear system")
    return LinearSolveResult([b[pivot_row_of_col[c]] for c in range(n)])


def partial_solve(
    coeffs: Matrix | np.ndarray, rhs: Sequence[np.ndarray | bytes]
) -> dict[int, np.ndarray]:
    """Pin whatever unknowns the system determines, rank-deficient or not.

    After reduction, a pivot variable whose row touches no free column is
    fully determined even when others are not.  Returns column -> value.
    """
    a, b = _prepare(coeffs, rhs)
    n = a.shape[1]
    pivot_row_of_col = _rref(a, b)
    free = [c for c in range(n) if c not in pivot_row_of_col]
    out = {}
    for col, row in pivot_row_of_col.items():
        if all(not a[row, f] for f in free):
            out[col] = b[row]
    return out
