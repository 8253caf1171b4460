"""Coordinate (COO) and compressed sparse row (CSR) containers.

Both are kept canonical: entries sorted row-major, no duplicate positions
and no stored zeros.
"""

from __future__ import annotations

import numpy as np

from .base import Blackbox, DimensionError, as_field_array


def _canonical_triplets(F, m, n, rows, cols, vals):
    rows = np.asarray(rows, dtype=np.int64).reshape(-1)
    cols = np.asarray(cols, dtype=np.int64).reshape(-1)
    if rows.shape != cols.shape:
        raise DimensionError("row and column index arrays differ in length")
    vals = np.asarray(vals).reshape(-1)
    if vals.dtype == object:
        vals = np.array([int(v) % F.p for v in vals], dtype=np.int64)
    else:
        vals = np.mod(vals.astype(np.int64), F.p)
    if vals.shape != rows.shape:
        raise DimensionError("value array length differs from index arrays")
    if rows.size:
        if rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n:
            raise IndexError(f"entry index outside a {m}x{n} matrix")
    key = rows * n + cols
    order = np.argsort(key, kind="stable")
    key, vals = key[order], vals[order]
    uniq, start = np.unique(key, return_index=True)
    if uniq.size != key.size:
        # partial sums of at most nnz canonical values fit int64
        vals = np.add.reduceat(vals, start) % F.p if vals.size else vals
        key = uniq
    keep = vals != 0
    key, vals = key[keep], vals[keep]
    if n:
        return key // n, key % n, vals
    return key, key, vals


class SparseCOO(Blackbox):
    """Parallel ``(row, col, value)`` arrays, 0-based indices."""

    def __init__(self, F, m: int, n: int, rows=(), cols=(), vals=()):
        self.field = F
        self._shape = (int(m), int(n))
        self.rows, self.cols, self.vals = _canonical_triplets(F, *self._shape, rows, cols, vals)

    @property
    def shape(self):
        return self._shape

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    def storage_slots(self) -> int:
        return 3 * self.nnz

    def entries(self):
        return {(int(i), int(j)): int(v) for i, j, v in zip(self.rows, self.cols, self.vals)}

    def to_dense(self) -> np.ndarray:
        D = np.zeros(self._shape, dtype=np.int64)
        D[self.rows, self.cols] = self.vals
        return D

    def transpose(self) -> "SparseCOO":
        m, n = self._shape
        return SparseCOO(self.field, n, m, self.cols, self.rows, self.vals)

    def __eq__(self, other):
        if not isinstance(other, SparseCOO):
            return NotImplemented
        return (
            self.field == other.field
            and self._shape == other._shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.vals, other.vals)
        )

    __hash__ = None

    def __repr__(self):
        return f"SparseCOO({self.field}, {self._shape[0]}x{self._shape[1]}, nnz={self.nnz})"

    def _apply(self, y, x, side, alpha, beta):
        from ..sparse_apply import coo_apply

        return coo_apply(self, y, x, side, alpha, beta)


class SparseCSR(Blackbox):
    """``row_ptr`` (m+1 offsets), ``col_idx`` and ``values``."""

    def __init__(self, F, m: int, n: int, row_ptr, col_idx, values, check: bool = True):
        self.field = F
        self._shape = (int(m), int(n))
        self.row_ptr = np.asarray(row_ptr, dtype=np.int64)
        self.col_idx = np.asarray(col_idx, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.int64)
        if check:
            self._check()

    @classmethod
    def from_triplets(cls, F, m, n, rows, cols, vals) -> "SparseCSR":
        r, c, v = _canonical_triplets(F, m, n, rows, cols, vals)
        ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(np.bincount(r, minlength=m), out=ptr[1:])
        return cls(F, m, n, ptr, c, v, check=False)

    @classmethod
    def from_dense(cls, F, D) -> "SparseCSR":
        D = as_field_array(F, D)
        r, c = np.nonzero(D)
        return cls.from_triplets(F, D.shape[0], D.shape[1], r, c, D[r, c])

    def _check(self):
        m, n = self._shape
        ptr = self.row_ptr
        if ptr.shape != (m + 1,) or ptr[0] != 0 or ptr[-1] != self.col_idx.size:
            raise ValueError("row_ptr must have m+1 entries from 0 to nnz")
        if np.any(np.diff(ptr) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if self.values.shape != self.col_idx.shape:
            raise ValueError("col_idx and values differ in length")
        if self.col_idx.size:
            if self.col_idx.min() < 0 or self.col_idx.max() >= n:
                raise IndexError("column index out of range")
            inner = np.diff(self.col_idx) > 0
            row_start = np.zeros(self.col_idx.size, dtype=bool)
            row_start[ptr[:-1][np.diff(ptr) > 0]] = True
            if not np.all(inner | row_start[1:]):
                raise ValueError("column indices must increase strictly within a row")
        if np.any(self.values <= 0) or np.any(self.values >= self.field.p):
            raise ValueError("values must be nonzero canonical field elements")

    @property
    def shape(self):
        return self._shape

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def storage_slots(self) -> int:
        return 2 * self.nnz + self._shape[0] + 1

    def row_indices(self) -> np.ndarray:
        return np.repeat(np.arange(self._shape[0], dtype=np.int64), np.diff(self.row_ptr))

    def to_dense(self) -> np.ndarray:
        D = np.zeros(self._shape, dtype=np.int64)
        D[self.row_indices(), self.col_idx] = self.values
        return D

    def transpose(self) -> "SparseCSR":
        m, n = self._shape
        return SparseCSR.from_triplets(self.field, n, m, self.col_idx, self.row_indices(), self.values)

    def __eq__(self, other):
        if not isinstance(other, SparseCSR):
            return NotImplemented
        return (
            self.field == other.field
            and self._shape == other._shape
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.col_idx, other.col_idx)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return f"SparseCSR({self.field}, {self._shape[0]}x{self._shape[1]}, nnz={self.nnz})"

    def _apply(self, y, x, side, alpha, beta):
        from ..sparse_apply import csr_apply

        return csr_apply(self, y, x, side, alpha, beta)


def slot_ratio(m: int, nnz: int) -> float:
    """CSR storage slots over COO storage slots for equal-width slots."""
    return (2 * nnz + m + 1) / (3 * nnz)
