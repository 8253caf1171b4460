"""Multimodular (CRT) multiplication of integer matrices.

Operands are reduced modulo a basis of word-size primes, multiplied prime
by prime through the ``mul`` controller, and rebuilt entry-wise by Chinese
remaindering in the balanced range.

Reduction has two strategies that must agree:

``PerEntry``
    ``x mod q`` with Python big integers, entry by entry.
``MatrixProduct``
    ``|A|`` is cut into base-``2**16`` digits, laid out as an
    ``(m*n) x d`` digit matrix ``D`` (row = entry in row-major order,
    column ``j`` = digit of weight ``2**(16*j)``). One integer product
    ``D @ W`` with the ``d x L`` table ``W[j, i] = 2**(16*j) mod q_i``
    gives every residue at once; signs are reapplied afterwards.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .containers.base import DimensionError
from .field_arith import ACC_CAPACITY_U64, DEFAULT_PRIME_BITS, PrimeField, RnsBasis, rns_build
from .matmul import MulHelper, MulProblem, mul_controller

DIGIT_BITS = 16


class ReduceStrategy(enum.Enum):
    PER_ENTRY = "per-entry"
    MATRIX_PRODUCT = "matrix-product"


class IntegerMatrix:
    """Dense matrix of Python integers with a cached magnitude bound."""

    def __init__(self, entries):
        arr = entries.array if hasattr(entries, "array") else entries
        arr = np.array(arr, dtype=object)
        if arr.ndim != 2:
            raise DimensionError("IntegerMatrix needs a 2-d array")
        if arr.size:
            arr = np.vectorize(int, otypes=[object])(arr)
        self.entries = arr
        self.max_abs = max((abs(v) for v in arr.flat), default=0)

    @property
    def shape(self):
        return self.entries.shape

    def __eq__(self, other):
        if not isinstance(other, IntegerMatrix):
            return NotImplemented
        return self.shape == other.shape and bool((self.entries == other.entries).all())

    __hash__ = None

    def __repr__(self):
        return f"IntegerMatrix({self.shape[0]}x{self.shape[1]}, max_abs bits={self.max_abs.bit_length()})"


def _as_int_matrix(X) -> IntegerMatrix:
    return X if isinstance(X, IntegerMatrix) else IntegerMatrix(X)


def result_bound(A, B) -> int:
    """``k * max|A| * max|B|``, a bound on every entry of ``A*B``."""
    A, B = _as_int_matrix(A), _as_int_matrix(B)
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"inner dimensions differ: {A.shape} x {B.shape}")
    return A.shape[1] * A.max_abs * B.max_abs


@dataclass
class DigitDecomposition:
    """Base ``2**beta`` digits of ``|A|`` with a separate sign mask."""

    digits: np.ndarray  # (m*n, d) uint64, row-major entries
    negative: np.ndarray  # (m*n,) bool
    shape: tuple
    beta: int = DIGIT_BITS

    @classmethod
    def of(cls, A, beta: int = DIGIT_BITS) -> "DigitDecomposition":
        if beta != 16:
            raise ValueError("only 16-bit digits are implemented")
        A = _as_int_matrix(A)
        flat = list(A.entries.flat)
        d = max(1, -(-A.max_abs.bit_length() // beta))
        nbytes = 2 * d
        raw = b"".join(abs(v).to_bytes(nbytes, "little") for v in flat)
        digits = np.frombuffer(raw, dtype="<u2").reshape(len(flat), d).astype(np.uint64)
        negative = np.fromiter((v < 0 for v in flat), dtype=bool, count=len(flat))
        return cls(digits, negative, A.shape, beta)

    @property
    def count(self) -> int:
        return self.digits.shape[1]

    def recombine(self) -> np.ndarray:
        out = []
        for row, neg in zip(self.digits.tolist(), self.negative.tolist()):
            v = 0
            for j in reversed(row):
                v = (v << self.beta) | j
            out.append(-v if neg else v)
        return np.array(out, dtype=object).reshape(self.shape)


def _power_table(basis: RnsBasis, d: int, beta: int) -> np.ndarray:
    return np.array(
        [[pow(2, beta * j, q) for q in basis.primes] for j in range(d)], dtype=np.uint64
    )


def multimodular_reduce(A, basis: RnsBasis, strategy=ReduceStrategy.MATRIX_PRODUCT) -> list:
    """Residue matrices ``A mod q_i`` (int64, canonical), one per basis prime."""
    A = _as_int_matrix(A)
    strategy = ReduceStrategy(strategy)
    m, n = A.shape
    if strategy is ReduceStrategy.PER_ENTRY:
        return [
            np.array([v % q for v in A.entries.flat], dtype=np.int64).reshape(m, n)
            for q in basis.primes
        ]
    dec = DigitDecomposition.of(A)
    d = dec.count
    if d * ((1 << dec.beta) - 1) * (max(basis.primes) - 1) > ACC_CAPACITY_U64:
        raise OverflowError("digit product does not fit the 64-bit accumulator")
    R = dec.digits @ _power_table(basis, d, dec.beta)
    out = []
    for i, q in enumerate(basis.primes):
        r = (R[:, i] % np.uint64(q)).astype(np.int64)
        r = np.where(dec.negative & (r != 0), q - r, r)
        out.append(r.reshape(m, n))
    return out


def crt_matrix(residues: list, basis: RnsBasis) -> np.ndarray:
    """Entry-wise balanced CRT reconstruction of a list of residue matrices."""
    if len(residues) != len(basis.primes):
        raise ValueError(f"expected {len(basis.primes)} residue matrices, got {len(residues)}")
    shape = residues[0].shape
    M = basis.M
    acc = np.zeros(shape, dtype=object)
    for R, q, c, cof in zip(residues, basis.primes, basis.crt_coeffs, basis.cofactors):
        t = (R.astype(np.int64) * c) % q
        acc = acc + t.astype(object) * cof
    acc = acc % M
    half = M // 2
    return np.where(acc > half, acc - M, acc)


def mul_crt(A, B, helper: MulHelper | None = None, prime_bits: int = DEFAULT_PRIME_BITS,
            strategy=ReduceStrategy.MATRIX_PRODUCT) -> np.ndarray:
    """Exact ``A*B`` for integer matrices (object array of Python ints)."""
    A, B = _as_int_matrix(A), _as_int_matrix(B)
    bound = result_bound(A, B)
    m, n = A.shape[0], B.shape[1]
    if bound == 0:
        return np.zeros((m, n), dtype=object)
    basis = rns_build(bound, prime_bits)
    RA = multimodular_reduce(A, basis, strategy)
    RB = multimodular_reduce(B, basis, strategy)
    H = MulHelper() if helper is None else helper
    sub = MulHelper(H.method, H.threshold, 1, 0, H.counters)
    res = []
    for q, a, b in zip(basis.primes, RA, RB):
        C = np.zeros((m, n), dtype=np.int64)
        mul_controller(MulProblem(C, a, b, PrimeField(q, max_bits=prime_bits)), sub)
        res.append(C)
    return crt_matrix(res, basis)

