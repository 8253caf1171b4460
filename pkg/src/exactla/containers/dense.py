"""Dense row-major matrices and vectors: owners and views.

Owners (``DenseMatrix``, ``DenseVector``) allocate their buffer when built
and are the only objects responsible for it. Views (``MatrixView``,
``VectorView``) alias a region of an owner's buffer and hold a reference to
that owner, so the owner's storage stays alive as long as a view does.
"""

from __future__ import annotations

import numpy as np

from .base import Blackbox, DimensionError, Side, as_field_array, element_dtype


class _DenseBase(Blackbox):
    owner = False

    def __init__(self, F, array: np.ndarray):
        self.field = F
        self._array = array

    @property
    def array(self) -> np.ndarray:
        """Logical ``m x n`` numpy view of the entries (shares memory)."""
        return self._array

    @property
    def shape(self):
        return self._array.shape

    @property
    def stride(self) -> int:
        if self._array.dtype == object or self._array.shape[0] == 0:
            return self._array.shape[1]
        return self._array.strides[0] // self._array.itemsize

    def __getitem__(self, idx):
        v = self._array[idx]
        return int(v) if np.ndim(v) == 0 else v

    def __setitem__(self, idx, value):
        self._array[idx] = as_field_array(self.field, value) if np.ndim(value) else self.field.normalize(value)

    def __eq__(self, other):
        if not isinstance(other, _DenseBase):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and bool(np.array_equal(self._array, other._array))
        )

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}({self.field}, {self.shape[0]}x{self.shape[1]})"

    def submatrix(self, r0: int, c0: int, m: int, n: int) -> "MatrixView":
        return MatrixView(self, r0, c0, m, n)

    def copy(self) -> "DenseMatrix":
        return DenseMatrix(self.field, self.shape[0], self.shape[1], self._array)

    def transpose(self) -> "DenseMatrix":
        return DenseMatrix(self.field, self.shape[1], self.shape[0], self._array.T)

    def to_dense(self) -> np.ndarray:
        return self._array.copy()

    def _apply(self, y, x, side, alpha, beta):
        from ..matmul import apply_dense

        return apply_dense(self, y, x, side, alpha, beta)


class DenseMatrix(_DenseBase):
    """Owning dense matrix over ``F`` with row stride ``stride >= n``."""

    owner = True

    def __init__(self, F, m: int, n: int, data=None, stride: int | None = None):
        m, n = int(m), int(n)
        if m < 0 or n < 0:
            raise DimensionError("dimensions must be nonnegative")
        stride = n if stride is None else int(stride)
        if stride < n:
            raise DimensionError(f"stride {stride} < column count {n}")
        buf = np.zeros((m, stride), dtype=element_dtype(F))
        super().__init__(F, buf[:, :n])
        self._buffer = buf
        if data is not None:
            arr = as_field_array(F, data)
            if arr.shape != (m, n):
                raise DimensionError(f"data shape {arr.shape} != ({m}, {n})")
            self._array[...] = arr

    @classmethod
    def from_rows(cls, F, rows) -> "DenseMatrix":
        arr = as_field_array(F, rows)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        return cls(F, arr.shape[0], arr.shape[1], arr)

    @classmethod
    def identity(cls, F, n: int) -> "DenseMatrix":
        return cls(F, n, n, np.eye(n, dtype=np.int64))

    @classmethod
    def zeros(cls, F, m: int, n: int) -> "DenseMatrix":
        return cls(F, m, n)

    @classmethod
    def random(cls, F, m: int, n: int, rng=None) -> "DenseMatrix":
        rng = np.random.default_rng(rng)
        return cls(F, m, n, rng.integers(0, F.p, size=(m, n), dtype=np.int64))


class MatrixView(_DenseBase):
    """Non-owning window ``[r0:r0+m, c0:c0+n]`` of a dense matrix."""

    def __init__(self, parent: _DenseBase, r0: int, c0: int, m: int, n: int):
        M, N = parent.shape
        if min(r0, c0, m, n) < 0 or r0 + m > M or c0 + n > N:
            raise IndexError(
                f"submatrix [{r0}:{r0 + m}, {c0}:{c0 + n}] outside a {M}x{N} matrix"
            )
        super().__init__(parent.field, parent.array[r0 : r0 + m, c0 : c0 + n])
        self.parent = parent
        self.offset = (r0, c0)


def submatrix(A: _DenseBase, r0: int, c0: int, m: int, n: int) -> MatrixView:
    return MatrixView(A, r0, c0, m, n)


class _VectorBase:
    owner = False

    def __init__(self, F, array: np.ndarray):
        self.field = F
        self._array = array

    @property
    def array(self) -> np.ndarray:
        return self._array

    def __len__(self):
        return self._array.shape[0]

    @property
    def increment(self) -> int:
        if self._array.dtype == object or len(self) == 0:
            return 1
        return self._array.strides[0] // self._array.itemsize

    def __getitem__(self, i):
        v = self._array[i]
        return int(v) if np.ndim(v) == 0 else v

    def __setitem__(self, i, value):
        self._array[i] = self.field.normalize(value)

    def __eq__(self, other):
        if not isinstance(other, _VectorBase):
            return NotImplemented
        return self.field == other.field and bool(np.array_equal(self._array, other._array))

    __hash__ = None

    def subvector(self, start: int, n: int, inc: int = 1) -> "VectorView":
        return VectorView(self, start, n, inc)

    def __repr__(self):
        return f"{type(self).__name__}({self.field}, n={len(self)})"


class DenseVector(_VectorBase):
    owner = True

    def __init__(self, F, n: int | None = None, data=None):
        if data is not None:
            arr = as_field_array(F, data).reshape(-1)
            if n is not None and arr.shape[0] != n:
                raise DimensionError(f"data length {arr.shape[0]} != {n}")
            super().__init__(F, arr.copy())
        else:
            super().__init__(F, np.zeros(int(n), dtype=element_dtype(F)))


class VectorView(_VectorBase):
    def __init__(self, parent: _VectorBase, start: int, n: int, inc: int = 1):
        stop = start + (n - 1) * inc
        if n < 0 or inc < 1 or start < 0 or (n > 0 and stop >= len(parent)):
            raise IndexError(f"subvector out of bounds for length {len(parent)}")
        super().__init__(parent.field, parent.array[start : stop + 1 : inc] if n else parent.array[:0])
        self.parent = parent
