"""Matrices of polynomials over Z/pZ multiplied by evaluation/interpolation.

Each entry polynomial is evaluated at the ``N``-th roots of unity with a
radix-2 NTT, the ``N`` evaluated matrices are multiplied through the ``mul``
controller (as one batch), and the products are interpolated back. Fields
without a large enough 2-power root of unity go through CRT over
NTT-friendly primes and reduce at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .containers.base import DimensionError, as_field_array
from .field_arith import DEFAULT_PRIME_BITS, PrimeField, RnsBasis, invert, is_prime
from .integer_mul import crt_matrix
from .matmul import MulHelper, mul_batched


class NoRootError(ValueError):
    """The field has no primitive root of unity of the requested order."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def find_root(F: PrimeField, N: int) -> int:
    """An element of multiplicative order exactly ``N`` (a power of two)."""
    p = F.p
    if not _is_pow2(N):
        raise ValueError(f"transform length {N} is not a power of two")
    if (p - 1) % N:
        raise NoRootError(f"{N} does not divide {p} - 1")
    if N == 1:
        return 1
    e = (p - 1) // N
    for g in range(2, p):
        w = pow(g, e, p)
        # for N = 2^s the order is exactly N iff w^(N/2) != 1
        if pow(w, N // 2, p) != 1:
            return w
    raise NoRootError(f"no element of order {N} mod {p}")


@dataclass(eq=False)
class NttPlan:
    """Length-``N`` transform data: per-stage twiddles and ``N^-1``."""

    field: PrimeField
    N: int
    omega: int
    twiddles: tuple = field(repr=False)
    inv_twiddles: tuple = field(repr=False)
    n_inv: int = field(repr=False)
    bitrev: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, F: PrimeField, N: int) -> "NttPlan":
        return _plan(F, N)


@lru_cache(maxsize=64)
def _plan(F: PrimeField, N: int) -> NttPlan:
    p = F.p
    w = find_root(F, N)
    w_inv = invert(w, F) if N > 1 else 1
    tw, itw = [], []
    length = 2
    while length <= N:
        half = length // 2
        step = pow(w, N // length, p)
        istep = pow(w_inv, N // length, p)
        tw.append(_powers(step, half, p))
        itw.append(_powers(istep, half, p))
        length *= 2
    bits = N.bit_length() - 1
    idx = np.arange(N)
    rev = np.zeros(N, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return NttPlan(F, N, w, tuple(tw), tuple(itw), invert(N % p, F), rev)


def _powers(base: int, count: int, p: int) -> np.ndarray:
    out = np.empty(count, dtype=np.int64)
    v = 1
    for i in range(count):
        out[i] = v
        v = v * base % p
    return out


def _transform(v: np.ndarray, plan: NttPlan, tables) -> np.ndarray:
    p = plan.field.p
    N = plan.N
    a = v[..., plan.bitrev].copy()
    lead = a.shape[:-1]
    length = 2
    for w in tables:
        half = length // 2
        a = a.reshape(lead + (N // length, 2, half))
        even = a[..., 0, :]
        odd = a[..., 1, :] * w % p
        top = (even + odd) % p
        bot = (even - odd) % p
        a = np.stack([top, bot], axis=-2)
        length *= 2
    return a.reshape(lead + (N,))


def ntt_forward(v, plan: NttPlan) -> np.ndarray:
    """``out[j] = sum_i v[i] * omega^(i*j)`` along the last axis."""
    v = as_field_array(plan.field, v)
    if v.shape[-1] != plan.N:
        raise DimensionError(f"expected length {plan.N}, got {v.shape[-1]}")
    return _transform(v, plan, plan.twiddles)


def ntt_inverse(v, plan: NttPlan) -> np.ndarray:
    v = as_field_array(plan.field, v)
    if v.shape[-1] != plan.N:
        raise DimensionError(f"expected length {plan.N}, got {v.shape[-1]}")
    return _transform(v, plan, plan.inv_twiddles) * plan.n_inv % plan.field.p


class PolyMatrix:
    """Polynomial matrix stored as ``degree + 1`` coefficient matrices.

    ``coeffs`` has shape ``(d + 1, m, n)``; ``coeffs[t]`` multiplies ``x**t``.
    """

    def __init__(self, F: PrimeField, coeffs):
        self.field = F
        c = as_field_array(F, coeffs)
        if c.ndim != 3 or c.shape[0] < 1:
            raise DimensionError("coefficients must have shape (d+1, m, n)")
        self.coeffs = c

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __repr__(self):
        m, n = self.shape
        return f"PolyMatrix({self.field}, {m}x{n}, degree={self.degree})"


def _eval_mul_interp(F: PrimeField, A: np.ndarray, B: np.ndarray, N: int, helper) -> np.ndarray:
    plan = _plan(F, N)
    dA, dB = A.shape[0], B.shape[0]
    pa = np.zeros((N,) + A.shape[1:], dtype=np.int64)
    pb = np.zeros((N,) + B.shape[1:], dtype=np.int64)
    pa[:dA], pb[:dB] = A, B
    # entry-wise transforms along the coefficient axis
    ea = np.moveaxis(ntt_forward(np.moveaxis(pa, 0, -1), plan), -1, 0)
    eb = np.moveaxis(ntt_forward(np.moveaxis(pb, 0, -1), plan), -1, 0)
    ec = mul_batched(F, ea, eb, helper)
    return np.moveaxis(ntt_inverse(np.moveaxis(ec, 0, -1), plan), -1, 0)


@lru_cache(maxsize=64)
def ntt_primes(N: int, count: int, bits: int = DEFAULT_PRIME_BITS) -> tuple:
    """The ``count`` largest primes ``c*N + 1 < 2**bits``."""
    out = []
    c = ((1 << bits) - 2) // N
    while c > 0 and len(out) < count:
        q = c * N + 1
        if is_prime(q):
            out.append(q)
        c -= 1
    if len(out) < count:
        raise ValueError(f"not enough {bits}-bit primes with {N} | q - 1")
    return tuple(out)


def poly_mul(Af: PolyMatrix, Bf: PolyMatrix, helper: MulHelper | None = None) -> PolyMatrix:
    """Exact product; the result has storage degree ``dA + dB``."""
    F = Af.field
    if Bf.field != F:
        raise ValueError("operands live in different fields")
    if Af.shape[1] != Bf.shape[0]:
        raise DimensionError(f"inner dimensions differ: {Af.shape} x {Bf.shape}")
    dC = Af.degree + Bf.degree
    N = 1
    while N < dC + 1:
        N *= 2
    if (F.p - 1) % N == 0:
        C = _eval_mul_interp(F, Af.coeffs, Bf.coeffs, N, helper)
        return PolyMatrix(F, C[: dC + 1])

    # NTT-hostile field: product over Z, then reduce
    k = Af.shape[1]
    bound = k * (F.p - 1) ** 2 * (min(Af.degree, Bf.degree) + 1)
    primes = []
    M = 1
    pool = ntt_primes(N, max(1, (2 * bound).bit_length() // (DEFAULT_PRIME_BITS - 2) + 2))
    for q in pool:
        primes.append(q)
        M *= q
        if M > 2 * bound:
            break
    if M <= 2 * bound:
        raise ValueError("CRT basis too small for the coefficient bound")
    basis = RnsBasis(tuple(primes))
    parts = [
        _eval_mul_interp(PrimeField(q), Af.coeffs, Bf.coeffs, N, helper)[: dC + 1]
        for q in primes
    ]
    C = crt_matrix(parts, basis)
    return PolyMatrix(F, np.mod(C, F.p).astype(np.int64))

