"""Structured and compound blackboxes: Diagonal, Permutation, Compose."""

from __future__ import annotations

import numpy as np

from .base import Blackbox, DimensionError, Side, as_field_array


class Diagonal(Blackbox):
    def __init__(self, F, diag):
        self.field = F
        self.diag = as_field_array(F, diag).reshape(-1)

    @property
    def shape(self):
        n = self.diag.shape[0]
        return (n, n)

    def to_dense(self):
        return np.diag(self.diag).astype(self.diag.dtype)

    def transpose(self):
        return self

    def _apply(self, y, x, side, alpha, beta):
        d = self.diag if x.ndim == 1 else self.diag[:, None]
        F = self.field
        if F.is_integer_ring:
            return alpha * d * x + beta * y
        return (alpha * (d * x % F.p) + beta * y) % F.p


class Permutation(Blackbox):
    """Row permutation stored as a LAPACK-style pivot array (1-based).

    Applied on the left, step ``i`` (in increasing order) swaps rows ``i``
    and ``ipiv[i]``. The matrix of the permutation is the result of those
    swaps on the identity.
    """

    def __init__(self, F, ipiv):
        self.field = F
        ipiv = np.asarray(ipiv, dtype=np.int64).reshape(-1)
        n = ipiv.shape[0]
        if n and (ipiv.min() < 1 or ipiv.max() > n):
            raise ValueError("pivot entries must lie in 1..n")
        self.ipiv = ipiv

    @property
    def n(self) -> int:
        return int(self.ipiv.shape[0])

    @property
    def shape(self):
        return (self.n, self.n)

    @classmethod
    def identity(cls, F, n: int) -> "Permutation":
        return cls(F, np.arange(1, n + 1))

    def images(self) -> np.ndarray:
        """``pi`` (1-based): row ``i`` of ``P*A`` is row ``pi[i]`` of ``A``."""
        cur = np.arange(1, self.n + 1)
        for i, j in enumerate(self.ipiv):
            cur[[i, j - 1]] = cur[[j - 1, i]]
        return cur

    def cycles(self) -> list:
        """Nontrivial cycles ``(i, pi(i), pi(pi(i)), ...)`` of the row map."""
        pi = self.images()
        seen = np.zeros(self.n + 1, dtype=bool)
        out = []
        for start in range(1, self.n + 1):
            if seen[start] or pi[start - 1] == start:
                continue
            cyc = []
            i = start
            while not seen[i]:
                seen[i] = True
                cyc.append(i)
                i = int(pi[i - 1])
            out.append(tuple(cyc))
        return out

    @classmethod
    def from_images(cls, F, pi) -> "Permutation":
        pi = [int(v) for v in pi]
        n = len(pi)
        if sorted(pi) != list(range(1, n + 1)):
            raise ValueError("not a permutation of 1..n")
        cur = list(range(1, n + 1))
        where = {v: v - 1 for v in cur}
        ipiv = []
        for i in range(n):
            j = where[pi[i]]
            ipiv.append(j + 1)
            a, b = cur[i], cur[j]
            cur[i], cur[j] = b, a
            where[a], where[b] = j, i
        return cls(F, ipiv)

    @classmethod
    def from_cycles(cls, F, n: int, cycles) -> "Permutation":
        pi = list(range(1, n + 1))
        for cyc in cycles:
            cyc = [int(c) for c in cyc]
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                pi[a - 1] = b
        return cls.from_images(F, pi)

    def to_dense(self):
        return (self.images()[:, None] - 1 == np.arange(self.n)[None, :]).astype(np.int64)

    def transpose(self) -> "Permutation":
        pi = self.images()
        inv = np.empty_like(pi)
        inv[pi - 1] = np.arange(1, self.n + 1)
        return Permutation.from_images(self.field, inv)

    def permute(self, X: np.ndarray, side=Side.LEFT) -> np.ndarray:
        """``P*X`` (rows, ``Side.LEFT``) or ``X*P`` (columns, ``Side.RIGHT``)."""
        side = Side.parse(side)
        X = np.array(X, copy=True)
        if side is Side.LEFT:
            if X.shape[0] != self.n:
                raise DimensionError(f"{self.n}x{self.n} permutation vs {X.shape[0]} rows")
            for i, j in enumerate(self.ipiv):
                if j - 1 != i:
                    X[[i, j - 1]] = X[[j - 1, i]]
        else:
            if X.ndim != 2 or X.shape[1] != self.n:
                raise DimensionError(f"{self.n}x{self.n} permutation vs {X.shape} columns")
            for i in range(self.n - 1, -1, -1):
                j = self.ipiv[i] - 1
                if j != i:
                    X[:, [i, j]] = X[:, [j, i]]
        return X

    def _apply(self, y, x, side, alpha, beta):
        if side is Side.RIGHT:
            px = self.permute(x, Side.LEFT)
        else:
            # P^T x undoes the swaps in reverse order
            px = np.array(x, copy=True)
            for i in range(self.n - 1, -1, -1):
                j = self.ipiv[i] - 1
                if j != i:
                    px[[i, j]] = px[[j, i]]
        F = self.field
        if F.is_integer_ring:
            return alpha * px + beta * y
        return (alpha * px + beta * y) % F.p


def perm_apply(P: Permutation, A, side=Side.LEFT):
    """Return ``P*A`` (``Side.LEFT``) or ``A*P`` (``Side.RIGHT``) for a dense matrix."""
    from .dense import DenseMatrix

    arr = A.array if hasattr(A, "array") else np.asarray(A)
    out = P.permute(arr, side)
    if hasattr(A, "array"):
        return DenseMatrix(A.field, out.shape[0], out.shape[1], out)
    return out


class Compose(Blackbox):
    """The product ``A*B`` of two blackboxes, never formed explicitly."""

    def __init__(self, A: Blackbox, B: Blackbox):
        if A.shape[1] != B.shape[0]:
            raise DimensionError(f"cannot compose {A.shape} with {B.shape}")
        if A.field != B.field:
            raise ValueError("composed blackboxes must share a field")
        self.field = A.field
        self.left, self.right = A, B

    @property
    def shape(self):
        return (self.left.shape[0], self.right.shape[1])

    def to_dense(self):
        from ..matmul import mul

        return mul(self.field, self.left.to_dense(), self.right.to_dense())

    def transpose(self):
        return Compose(self.right.transpose(), self.left.transpose())

    def _apply(self, y, x, side, alpha, beta):
        if side is Side.RIGHT:
            t = self.right.apply(None, x)
            return self.left.apply(y, t, Side.RIGHT, alpha, beta)
        t = self.left.apply(None, x, Side.LEFT)
        return self.right.apply(y, t, Side.LEFT, alpha, beta)
