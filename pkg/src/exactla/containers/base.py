"""The blackbox interface shared by every matrix container."""

from __future__ import annotations

import enum

import numpy as np


class Side(enum.Enum):
    """``RIGHT`` computes ``y <- a*A*x + b*y``, ``LEFT`` uses ``A^T``."""

    RIGHT = "right"
    LEFT = "left"

    @classmethod
    def parse(cls, value) -> "Side":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


def element_dtype(F):
    return object if F.is_integer_ring else np.int64


def as_field_array(F, values) -> np.ndarray:
    """Copy ``values`` into a fresh array of canonical elements of ``F``."""
    if hasattr(values, "array"):
        values = values.array
    if F.is_integer_ring:
        arr = np.array(values, dtype=object)
        return np.vectorize(int, otypes=[object])(arr) if arr.size else arr
    arr = np.asarray(values)
    if arr.dtype == object:
        return np.vectorize(lambda v: int(v) % F.p, otypes=[np.int64])(arr) if arr.size else arr.astype(np.int64)
    return np.mod(arr.astype(np.int64, copy=False), F.p)


class Blackbox:
    """A linear map known through ``shape`` and ``apply``.

    Subclasses implement ``_apply`` on prepared numpy operands and
    ``to_dense`` (used as the equivalence oracle in tests).
    """

    field = None

    @property
    def shape(self) -> tuple:
        raise NotImplementedError

    @property
    def rowdim(self) -> int:
        return self.shape[0]

    @property
    def coldim(self) -> int:
        return self.shape[1]

    def apply(self, y, x, side=Side.RIGHT, alpha=1, beta=0):
        """``y <- alpha*A*x + beta*y`` (``A^T`` for ``Side.LEFT``).

        ``x`` may be a vector or a block of column vectors. ``y`` is updated
        in place when it is a writable array or dense container; pass ``None``
        to get a fresh result.
        """
        side = Side.parse(side)
        xa, ya, out = _prepare(self, y, x, side)
        F = self.field
        alpha, beta = F.normalize(alpha), F.normalize(beta)
        if alpha == 0 or xa.size == 0:
            res = _scale(F, ya, beta)
        else:
            res = self._apply(ya, xa, side, alpha, beta)
        if out is not None:
            out[...] = res
            return y
        return res

    def _apply(self, y: np.ndarray, x: np.ndarray, side: Side, alpha: int, beta: int) -> np.ndarray:
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        raise NotImplementedError

    def __matmul__(self, x):
        return self.apply(None, x)


def _scale(F, y, beta):
    if beta == 0:
        return np.zeros_like(y)
    if beta == 1:
        return y.copy()
    if F.is_integer_ring:
        return y * beta
    return y * beta % F.p


def _prepare(A: Blackbox, y, x, side: Side):
    m, n = A.shape
    want_in, want_out = (n, m) if side is Side.RIGHT else (m, n)
    xa = as_field_array(A.field, x)
    if xa.ndim not in (1, 2) or xa.shape[0] != want_in:
        raise DimensionError(
            f"{side.value} apply of a {m}x{n} matrix needs x with {want_in} rows, got {xa.shape}"
        )
    out = None
    if y is None:
        ya = np.zeros((want_out,) + xa.shape[1:], dtype=element_dtype(A.field))
    else:
        target = y.array if hasattr(y, "array") else y
        if not isinstance(target, np.ndarray):
            target = np.asarray(target)
        if target.shape != (want_out,) + xa.shape[1:]:
            raise DimensionError(
                f"y has shape {target.shape}, expected {(want_out,) + xa.shape[1:]}"
            )
        ya = as_field_array(A.field, target)
        if isinstance(y, np.ndarray) or hasattr(y, "array"):
            out = target
    return xa, ya, out
