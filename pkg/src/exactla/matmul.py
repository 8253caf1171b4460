"""The ``mul`` solution: a controller choosing between plugins.

The controller looks at ``min(m, k, n)`` and either runs the classic
delayed-reduction product or one Strassen-Winograd step. The Winograd
plugin never multiplies on its own: it hands its seven half-size products
back to the controller, which picks again at the next level.

Internally every product is *batched*: operands carry a leading axis of
independent problems of one shape. The seven sub-products of a Winograd
step are stacked on that axis and issued as one call back to the
controller, so the whole recursion tree costs a handful of numpy calls per
level instead of one Python call per node. Counters count problems, not
calls.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .bench import config as _config
from .containers.base import DimensionError, Side, as_field_array
from .field_arith import PrimeField

DEFAULT_THRESHOLD = 64

# tile edge for the integer kernel; numpy's integer matmul degrades past this
_TILE = 256


class Method(enum.Enum):
    AUTO = "auto"
    BASE = "base"
    WINOGRAD = "winograd"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        if v in ("recursive", "basecase", "base_case"):
            v = "winograd" if v == "recursive" else "base"
        return cls(v)


@dataclass
class MulCounters:
    base_cases: int = 0
    winograd_steps: int = 0
    peel_updates: int = 0

    def reset(self):
        self.base_cases = self.winograd_steps = self.peel_updates = 0


@dataclass
class MulHelper:
    """Caller-side strategy object for the controller.

    ``method=BASE`` skips recursion entirely. ``method=WINOGRAD`` forces a
    Winograd step at the top call; the sub-products then cascade on
    ``threshold``. ``AUTO`` uses ``threshold`` when given, otherwise the
    tuned method table or tuned threshold, otherwise ``DEFAULT_THRESHOLD``.
    """

    method: Method = Method.AUTO
    threshold: int | None = None
    alpha: int = 1
    beta: int = 0
    counters: MulCounters = field(default_factory=MulCounters)

    def __post_init__(self):
        self.method = Method.parse(self.method)
        if self.threshold is not None and int(self.threshold) < 1:
            raise ValueError("threshold must be at least 1")


@dataclass
class MulProblem:
    """``C (m x n) <- alpha*A (m x k) * B (k x n) + beta*C`` over one field."""

    C: object
    A: object
    B: object
    field: PrimeField | None = None

    def __post_init__(self):
        if self.field is None:
            self.field = getattr(self.A, "field", None)
        if self.field is None:
            raise ValueError("MulProblem needs a field")

    @property
    def dims(self):
        m, k = _arr(self.A).shape
        return m, k, _arr(self.B).shape[1]


def _arr(X) -> np.ndarray:
    return X.array if hasattr(X, "array") else np.asarray(X)


class _Plan:
    """Dispatch rule resolved once per public call."""

    def __init__(self, F: PrimeField, H: MulHelper):
        self.p = F.p
        self.k_max = F.k_max
        self.counters = H.counters
        self.table = None
        if H.threshold is not None:
            self.threshold = int(H.threshold)
        else:
            cfg = _config.tuned_config()
            self.threshold = int(cfg.get("mul.threshold", DEFAULT_THRESHOLD))
            if H.method is Method.AUTO:
                self.table = _config.method_table("mul")

    def recurse(self, m: int, k: int, n: int) -> bool:
        d = min(m, k, n)
        if d < 2:
            return False
        if self.table is not None:
            return self.table.lookup(d) == Method.WINOGRAD.value
        return d > self.threshold


def _base_product(p: int, k_max: int, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Batched ``A @ B mod p`` with at most ``k_max`` unreduced products per sum."""
    m, k = A.shape[-2:]
    n = B.shape[-1]
    out = np.empty(A.shape[:-2] + (m, n), dtype=np.int64)
    if k == 0:
        out[...] = 0
        return out
    step = min(k_max, _TILE)
    Au = A.astype(np.uint64)
    Bu = B.astype(np.uint64)
    pu = np.uint64(p)
    for i0 in range(0, m, _TILE):
        for j0 in range(0, n, _TILE):
            acc = None
            for k0 in range(0, k, step):
                blk = np.matmul(Au[..., i0 : i0 + _TILE, k0 : k0 + step], Bu[..., k0 : k0 + step, j0 : j0 + _TILE])
                if acc is not None:
                    # acc < p, so acc + blk <= (p-1) + k_max*(p-1)^2
                    blk += acc
                acc = np.remainder(blk, pu, out=blk)
            out[..., i0 : i0 + _TILE, j0 : j0 + _TILE] = acc
    return out


def _dispatch(plan: _Plan, A: np.ndarray, B: np.ndarray, force: Method | None = None) -> np.ndarray:
    m, k = A.shape[-2:]
    n = B.shape[-1]
    batch = int(np.prod(A.shape[:-2], dtype=np.int64))
    if force is Method.BASE:
        go = False
    elif force is Method.WINOGRAD:
        go = min(m, k, n) >= 2
    else:
        go = plan.recurse(m, k, n)
    if not go:
        plan.counters.base_cases += batch
        return _base_product(plan.p, plan.k_max, A, B)
    plan.counters.winograd_steps += batch
    return _winograd(plan, A, B)


def _winograd(plan: _Plan, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    p = plan.p
    m, k = A.shape[-2:]
    n = B.shape[-1]
    hm, hk, hn = m // 2, k // 2, n // 2
    m2, k2, n2 = 2 * hm, 2 * hk, 2 * hn

    A11, A12 = A[..., :hm, :hk], A[..., :hm, hk:k2]
    A21, A22 = A[..., hm:m2, :hk], A[..., hm:m2, hk:k2]
    B11, B12 = B[..., :hk, :hn], B[..., :hk, hn:n2]
    B21, B22 = B[..., hk:k2, :hn], B[..., hk:k2, hn:n2]

    S1 = (A21 + A22) % p
    S2 = (S1 - A11) % p
    S3 = (A11 - A21) % p
    S4 = (A12 - S2) % p
    T1 = (B12 - B11) % p
    T2 = (B22 - T1) % p
    T3 = (B22 - B12) % p
    T4 = (T2 - B21) % p

    left = np.stack([A11, A12, S4, A22, S1, S2, S3])
    right = np.stack([B11, B21, B22, T4, T1, T2, T3])
    del S1, S2, S3, S4, T1, T2, T3, T4
    P = _dispatch(plan, left, right)
    del left, right
    P1, P2, P3, P4, P5, P6, P7 = P

    C = np.empty(A.shape[:-2] + (m, n), dtype=np.int64)
    U2 = P1 + P6
    U2 %= p
    U3 = U2 + P7
    U3 %= p
    np.add(P1, P2, out=C[..., :hm, :hn])
    U2 += P5
    U2 += P3
    np.remainder(U2, p, out=C[..., :hm, hn:n2])
    np.subtract(U3, P4, out=C[..., hm:m2, :hn])
    U3 += P5
    C[..., hm:m2, hn:n2] = U3
    core = C[..., :m2, :n2]
    core %= p
    del P

    batch = int(np.prod(A.shape[:-2], dtype=np.int64))
    if k2 < k:
        # rank-1 fix-up for the peeled inner index
        core += A[..., :m2, k2:] * B[..., k2:, :n2]
        core %= p
        plan.counters.peel_updates += batch
    if m2 < m:
        C[..., m2:, :] = _base_product(p, plan.k_max, A[..., m2:, :], B)
        plan.counters.peel_updates += batch
    if n2 < n:
        C[..., :m2, n2:] = _base_product(p, plan.k_max, A[..., :m2, :], B[..., :, n2:])
        plan.counters.peel_updates += batch
    return C


def _check(F, A: np.ndarray, B: np.ndarray, C: np.ndarray | None):
    if A.ndim != 2 or B.ndim != 2:
        raise DimensionError("mul expects matrices")
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"inner dimensions differ: {A.shape} x {B.shape}")
    if C is not None:
        if C.shape != (A.shape[0], B.shape[1]):
            raise DimensionError(f"output shape {C.shape} != {(A.shape[0], B.shape[1])}")
        if np.shares_memory(C, A) or np.shares_memory(C, B):
            raise ValueError("output C must not alias A or B")


def _combine(p: int, D: np.ndarray, C: np.ndarray, alpha: int, beta: int) -> np.ndarray:
    if alpha != 1:
        D = D * alpha % p
    if beta == 0:
        return D
    return (D + C.astype(np.int64) * beta % p) % p


def _solve(P: MulProblem, H: MulHelper, force: Method | None) -> object:
    F = P.field
    if F.is_integer_ring:
        raise TypeError("integer matrices go through integer_mul.mul_crt")
    A, B, C = _arr(P.A), _arr(P.B), _arr(P.C)
    _check(F, A, B, C)
    alpha, beta = F.normalize(H.alpha), F.normalize(H.beta)
    plan = _Plan(F, H)
    if alpha == 0:
        D = np.zeros(C.shape, dtype=np.int64)
    else:
        D = _dispatch(plan, as_field_array(F, A), as_field_array(F, B), force)
    C[...] = _combine(F.p, D, C, alpha, beta)
    return P.C


def mul_controller(P: MulProblem, H: MulHelper | None = None):
    """``C <- alpha*A*B + beta*C`` with the method chosen by ``H``."""
    H = MulHelper() if H is None else H
    force = None if H.method is Method.AUTO else H.method
    return _solve(P, H, force)


def base_case_gemm(P: MulProblem, H: MulHelper | None = None):
    """Classic triple loop with blocked delayed reduction."""
    return _solve(P, MulHelper() if H is None else H, Method.BASE)


def winograd_step(P: MulProblem, H: MulHelper | None = None):
    """One Strassen-Winograd level; sub-products go back to the controller."""
    return _solve(P, MulHelper() if H is None else H, Method.WINOGRAD)


def mul_batched(F: PrimeField, A: np.ndarray, B: np.ndarray, helper: MulHelper | None = None) -> np.ndarray:
    """Products of stacked operands ``A[..., m, k] @ B[..., k, n]`` mod ``p``."""
    H = MulHelper() if helper is None else helper
    A = as_field_array(F, A)
    B = as_field_array(F, B)
    if A.shape[:-2] != B.shape[:-2] or A.shape[-1] != B.shape[-2]:
        raise DimensionError(f"cannot multiply stacks {A.shape} and {B.shape}")
    force = None if H.method is Method.AUTO else H.method
    D = _dispatch(_Plan(F, H), A, B, force)
    alpha = F.normalize(H.alpha)
    return D if alpha == 1 else D * alpha % F.p


def mul(F, A, B, helper: MulHelper | None = None) -> np.ndarray:
    """Return ``A*B`` as a fresh array (over ZZ through the CRT path)."""
    if F.is_integer_ring:
        from .integer_mul import mul_crt

        return mul_crt(_arr(A), _arr(B), helper=helper)
    A, B = _arr(A), _arr(B)
    C = np.zeros((A.shape[0], B.shape[1] if B.ndim == 2 else 0), dtype=np.int64)
    H = MulHelper() if helper is None else helper
    mul_controller(MulProblem(C, A, B, F), H)
    return C


def apply_dense(A, y: np.ndarray, x: np.ndarray, side: Side, alpha: int, beta: int, helper: MulHelper | None = None) -> np.ndarray:
    """Dense blackbox apply: vectors become ``n x 1`` (or block) matrices."""
    F = A.field
    M = A.array if side is Side.RIGHT else A.array.T
    X = x.reshape(-1, 1) if x.ndim == 1 else x
    if F.is_integer_ring:
        from .integer_mul import mul_crt

        D = mul_crt(M, X, helper=helper)
        res = alpha * D + beta * (y.reshape(D.shape))
        return res.reshape(y.shape)
    Y = np.array(y.reshape(M.shape[0], -1), dtype=np.int64)
    H = MulHelper() if helper is None else helper
    H = MulHelper(H.method, H.threshold, alpha, beta, H.counters)
    mul_controller(MulProblem(Y, M, X, F), H)
    return Y.reshape(y.shape)
