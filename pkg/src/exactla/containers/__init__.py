"""Matrix and vector containers sharing the blackbox ``apply`` interface."""

from .base import Blackbox, DimensionError, Side
from .convert import FORMATS, convert, from_csr, rebind, to_csr
from .dense import DenseMatrix, DenseVector, MatrixView, VectorView, submatrix
from .mmio import MatrixMarketError, mm_dumps, mm_loads, mm_read, mm_write
from .sparse import SparseCOO, SparseCSR, slot_ratio
from .structured import Compose, Diagonal, Permutation, perm_apply

__all__ = [
    "Blackbox",
    "Compose",
    "DenseMatrix",
    "DenseVector",
    "Diagonal",
    "DimensionError",
    "FORMATS",
    "MatrixMarketError",
    "MatrixView",
    "Permutation",
    "Side",
    "SparseCOO",
    "SparseCSR",
    "VectorView",
    "convert",
    "from_csr",
    "mm_dumps",
    "mm_loads",
    "mm_read",
    "mm_write",
    "perm_apply",
    "rebind",
    "slot_ratio",
    "submatrix",
    "to_csr",
]
