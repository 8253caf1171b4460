"""Sparse matrix-vector (and matrix-block) products over Z/pZ.

Row sums are accumulated in unsigned 64-bit words without reduction, in
row segments of at most ``k_max`` products, and reduced once per segment.
The HYB format pulls the +1 and -1 entries into value-free patterns that
are applied with additions and subtractions only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bench import config as _config
from .containers.base import Blackbox, DimensionError, Side, as_field_array
from .containers.sparse import SparseCOO, SparseCSR
from .field_arith import PrimeField

DEFAULT_HYB_FRACTION = 0.25


@dataclass
class MultCounter:
    """Field multiplications performed by the sparse kernels."""

    pattern: int = 0
    general: int = 0

    def reset(self):
        self.pattern = self.general = 0


#: process-wide tally; tests reset it around the call they inspect
COUNTER = MultCounter()


def segment_starts(row_ptr: np.ndarray, limit: int):
    """Start offsets and owning rows of the segments of length ``<= limit``
    that tile every nonempty row."""
    lengths = np.diff(row_ptr)
    per_row = -(-lengths // limit)
    total = int(per_row.sum())
    rows = np.repeat(np.arange(lengths.size, dtype=np.int64), per_row)
    first = np.repeat(np.cumsum(per_row) - per_row, per_row)
    j = np.arange(total, dtype=np.int64) - first
    return row_ptr[rows] + j * limit, rows


def _segmented_row_sums(terms: np.ndarray, row_ptr: np.ndarray, m: int, p: int, limit: int) -> np.ndarray:
    """``sum`` of ``terms`` (uint64) per row, reduced mod ``p``."""
    out = np.zeros((m,) + terms.shape[1:], dtype=np.int64)
    if terms.shape[0] == 0:
        return out
    starts, rows = segment_starts(row_ptr, limit)
    seg = np.add.reduceat(terms, starts, axis=0) % np.uint64(p)
    np.add.at(out, rows, seg.astype(np.int64))
    return out % p


def _products(vals: np.ndarray, gathered: np.ndarray, counter: MultCounter | None) -> np.ndarray:
    v = vals.astype(np.uint64)
    if gathered.ndim == 2:
        v = v[:, None]
    if counter is not None:
        counter.general += int(gathered.size)
    return v * gathered.astype(np.uint64)


def _finish(p: int, s: np.ndarray, y: np.ndarray, alpha: int, beta: int) -> np.ndarray:
    if alpha != 1:
        s = s * alpha % p
    if beta == 0:
        return s
    return (s + y * beta % p) % p


def _check_side(shape, x, side):
    m, n = shape
    want = n if side is Side.RIGHT else m
    if x.shape[0] != want:
        raise DimensionError(f"x has {x.shape[0]} rows, expected {want}")


def _csr_right(F, row_ptr, col_idx, vals, m, x, limit, counter):
    prods = _products(vals, x[col_idx], counter)
    return _segmented_row_sums(prods, row_ptr, m, F.p, limit)


def _csr_left_scatter(F, row_ptr, col_idx, vals, n, x, counter):
    m = row_ptr.size - 1
    rows = np.repeat(np.arange(m, dtype=np.int64), np.diff(row_ptr))
    prods = (_products(vals, x[rows], counter) % np.uint64(F.p)).astype(np.int64)
    out = np.zeros((n,) + x.shape[1:], dtype=np.int64)
    # each term is reduced, so a column sum stays below m*p
    np.add.at(out, col_idx, prods)
    return out % F.p


def csr_apply(A: SparseCSR, y, x, side=Side.RIGHT, alpha=1, beta=0, transpose: SparseCSR | None = None,
              counter: MultCounter | None = COUNTER):
    """``y <- alpha*A*x + beta*y`` (``A^T`` on ``Side.LEFT``) on numpy operands.

    A precomputed ``transpose`` turns a left apply into a row-sum pass;
    without it the left apply scatters into the output columns.
    """
    F = A.field
    side = Side.parse(side)
    x = np.asarray(x)
    _check_side(A.shape, x, side)
    m, n = A.shape
    if side is Side.RIGHT:
        s = _csr_right(F, A.row_ptr, A.col_idx, A.values, m, x, F.k_max, counter)
    elif transpose is not None:
        s = _csr_right(F, transpose.row_ptr, transpose.col_idx, transpose.values, n, x, F.k_max, counter)
    else:
        s = _csr_left_scatter(F, A.row_ptr, A.col_idx, A.values, n, x, counter)
    return _finish(F.p, s, np.asarray(y), F.normalize(alpha), F.normalize(beta))


def coo_apply(A: SparseCOO, y, x, side=Side.RIGHT, alpha=1, beta=0, counter: MultCounter | None = COUNTER):
    """Same contract as :func:`csr_apply`; COO entries are row-major sorted."""
    m, _ = A.shape
    ptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(np.bincount(A.rows, minlength=m), out=ptr[1:])
    csr = SparseCSR(A.field, *A.shape, ptr, A.cols, A.vals, check=False)
    return csr_apply(csr, y, x, side, alpha, beta, counter=counter)


class PatternCSR:
    """CSR sparsity pattern with implicit unit values (no value array)."""

    def __init__(self, m: int, n: int, row_ptr, col_idx):
        self.shape = (int(m), int(n))
        self.row_ptr = np.asarray(row_ptr, dtype=np.int64)
        self.col_idx = np.asarray(col_idx, dtype=np.int64)

    @property
    def nnz(self) -> int:
        return int(self.col_idx.size)

    def storage_slots(self) -> int:
        return self.nnz + self.shape[0] + 1

    def row_indices(self) -> np.ndarray:
        return np.repeat(np.arange(self.shape[0], dtype=np.int64), np.diff(self.row_ptr))

    def to_dense(self) -> np.ndarray:
        D = np.zeros(self.shape, dtype=np.int64)
        D[self.row_indices(), self.col_idx] = 1
        return D

    def transpose(self) -> "PatternCSR":
        m, n = self.shape
        rows = self.row_indices()
        order = np.lexsort((rows, self.col_idx))
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.col_idx, minlength=n), out=ptr[1:])
        return PatternCSR(n, m, ptr, rows[order])

    def row_sums(self, x: np.ndarray, p: int) -> np.ndarray:
        """``sum x[j]`` over each row's columns: additions only."""
        gathered = x[self.col_idx].astype(np.uint64)
        # canonical addends: (p-1) per term against the 64-bit capacity
        limit = max(1, (2**64 - 1) // max(p - 1, 1))
        return _segmented_row_sums(gathered, self.row_ptr, self.shape[0], p, limit)

    def col_scatter(self, x: np.ndarray, p: int) -> np.ndarray:
        out = np.zeros((self.shape[1],) + x.shape[1:], dtype=np.int64)
        np.add.at(out, self.col_idx, x[self.row_indices()])
        return out % p


def _pattern_from(m, n, rows, cols) -> PatternCSR:
    ptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=m), out=ptr[1:])
    return PatternCSR(m, n, ptr, cols)


class SparseHYB(Blackbox):
    """``A = plus_ones - minus_ones + general`` with disjoint patterns."""

    def __init__(self, F: PrimeField, plus_ones: PatternCSR, minus_ones: PatternCSR, general: SparseCSR):
        self.field = F
        self.plus_ones = plus_ones
        self.minus_ones = minus_ones
        self.general = general

    @property
    def shape(self):
        return self.general.shape

    @property
    def nnz(self) -> int:
        return self.plus_ones.nnz + self.minus_ones.nnz + self.general.nnz

    def storage_slots(self) -> int:
        return self.plus_ones.storage_slots() + self.minus_ones.storage_slots() + self.general.storage_slots()

    def to_csr(self) -> SparseCSR:
        F = self.field
        m, n = self.shape
        rows = np.concatenate([self.plus_ones.row_indices(), self.minus_ones.row_indices(), self.general.row_indices()])
        cols = np.concatenate([self.plus_ones.col_idx, self.minus_ones.col_idx, self.general.col_idx])
        vals = np.concatenate([
            np.ones(self.plus_ones.nnz, dtype=np.int64),
            np.full(self.minus_ones.nnz, F.p - 1, dtype=np.int64),
            self.general.values,
        ])
        return SparseCSR.from_triplets(F, m, n, rows, cols, vals)

    def to_dense(self) -> np.ndarray:
        return self.to_csr().to_dense()

    def transpose(self) -> "SparseHYB":
        return SparseHYB(self.field, self.plus_ones.transpose(), self.minus_ones.transpose(), self.general.transpose())

    def _apply(self, y, x, side, alpha, beta):
        return hyb_apply(self, y, x, side, alpha, beta)


def hyb_split(A: SparseCSR) -> SparseHYB:
    F = A.field
    m, n = A.shape
    rows = A.row_indices()
    plus = A.values == 1
    minus = (A.values == F.p - 1) & ~plus
    rest = ~(plus | minus)
    return SparseHYB(
        F,
        _pattern_from(m, n, rows[plus], A.col_idx[plus]),
        _pattern_from(m, n, rows[minus], A.col_idx[minus]),
        SparseCSR.from_triplets(F, m, n, rows[rest], A.col_idx[rest], A.values[rest]),
    )


def hyb_apply(H: SparseHYB, y, x, side=Side.RIGHT, alpha=1, beta=0, transpose: SparseHYB | None = None,
              counter: MultCounter | None = COUNTER):
    F = H.field
    p = F.p
    side = Side.parse(side)
    x = np.asarray(x)
    _check_side(H.shape, x, side)
    m, n = H.shape
    if side is Side.RIGHT or transpose is not None:
        src = H if side is Side.RIGHT else transpose
        s = src.plus_ones.row_sums(x, p) - src.minus_ones.row_sums(x, p)
        g = _csr_right(F, src.general.row_ptr, src.general.col_idx, src.general.values,
                       src.shape[0], x, F.k_max, counter)
    else:
        s = H.plus_ones.col_scatter(x, p) - H.minus_ones.col_scatter(x, p)
        g = _csr_left_scatter(F, H.general.row_ptr, H.general.col_idx, H.general.values, n, x, counter)
    s = (s + g) % p
    return _finish(p, s, np.asarray(y), F.normalize(alpha), F.normalize(beta))


class SpmvPlan(Blackbox):
    """A sparse matrix prepared for repeated applies.

    ``segments`` holds the start offsets of the row segments (at most
    ``k_max`` entries each) used by the unreduced accumulation.
    """

    def __init__(self, format: str, matrix, transpose_cache=None, k_max: int = 0,
                 segments: np.ndarray | None = None, stats: dict | None = None):
        self.format = format
        self.matrix = matrix
        self.transpose_cache = transpose_cache
        self.k_max = k_max
        self.segments = segments
        self.stats = stats or {}

    def __repr__(self):
        return f"SpmvPlan(format={self.format!r}, transpose_cached={self.transpose_cache is not None}, stats={self.stats})"

    @property
    def field(self):
        return self.matrix.field

    @property
    def shape(self):
        return self.matrix.shape

    def to_dense(self):
        return self.matrix.to_dense()

    def storage_slots(self) -> int:
        extra = self.transpose_cache.storage_slots() if self.transpose_cache is not None else 0
        return self.matrix.storage_slots() + extra

    def _apply(self, y, x, side, alpha, beta):
        if self.format == "hyb":
            return hyb_apply(self.matrix, y, x, side, alpha, beta, transpose=self.transpose_cache)
        if self.format == "coo":
            return coo_apply(self.matrix, y, x, side, alpha, beta)
        return csr_apply(self.matrix, y, x, side, alpha, beta, transpose=self.transpose_cache)


def optimize_plan(A, F: PrimeField | None = None, allow_transpose_cache: bool = True,
                  memory_budget: int | None = None, format: str | None = None,
                  hyb_fraction: float | None = None) -> SpmvPlan:
    """Pick a storage format and transpose policy by fixed rules.

    HYB when the share of +-1 entries exceeds ``hyb_fraction`` (tuned
    ``spmv.hyb_min_pm1_fraction``, else 0.25), CSR otherwise; COO only on
    request. The transpose is cached when allowed and its storage (in
    slots) fits ``memory_budget`` (``None`` means unlimited).
    """
    from .containers.convert import rebind, to_csr

    S = to_csr(A)
    if F is not None and F != S.field:
        S = rebind(S, F)
    F = S.field
    if hyb_fraction is None:
        hyb_fraction = float(_config.tuned_config().get("spmv.hyb_min_pm1_fraction", DEFAULT_HYB_FRACTION))
    pm1 = int(np.count_nonzero((S.values == 1) | (S.values == F.p - 1)))
    frac = pm1 / S.nnz if S.nnz else 0.0
    fmt = format.lower() if format else ("hyb" if frac > hyb_fraction else "csr")
    if fmt == "hyb":
        M = hyb_split(S)
    elif fmt == "csr":
        M = S
    elif fmt == "coo":
        M = SparseCOO(F, *S.shape, S.row_indices(), S.col_idx, S.values)
    else:
        raise ValueError(f"unknown spmv format {fmt!r}")
    T = None
    if allow_transpose_cache and fmt != "coo":
        extra = M.storage_slots() if fmt == "hyb" else S.storage_slots() - S.shape[0] + S.shape[1]
        if memory_budget is None or extra <= memory_budget:
            T = M.transpose()
    starts, _ = segment_starts(S.row_ptr, F.k_max)
    stats = {"nnz": S.nnz, "pm1_fraction": frac, "rows": S.shape[0]}
    return SpmvPlan(fmt, M, T, F.k_max, starts, stats)


def spmv(A, x, side=Side.RIGHT, alpha=1, beta=0, y=None):
    """Convenience: plan ``A`` with default rules and apply once."""
    return optimize_plan(A).apply(y, as_field_array(A.field, x), side, alpha, beta)
