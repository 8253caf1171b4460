"""Format conversions through CSR (the "star") and field rebinding."""

from __future__ import annotations

import numpy as np

from ..field_arith import PrimeField
from .dense import DenseMatrix, _DenseBase
from .sparse import SparseCOO, SparseCSR
from .structured import Diagonal, Permutation

FORMATS = ("coo", "csr", "dense", "hyb")


def to_csr(A) -> SparseCSR:
    """Any prime-field matrix container to canonical CSR."""
    F = A.field
    if isinstance(A, SparseCSR):
        return A
    if isinstance(A, SparseCOO):
        return SparseCSR.from_triplets(F, *A.shape, A.rows, A.cols, A.vals)
    if isinstance(A, Diagonal):
        n = A.shape[0]
        idx = np.arange(n)
        return SparseCSR.from_triplets(F, n, n, idx, idx, A.diag)
    if isinstance(A, Permutation):
        n = A.n
        return SparseCSR.from_triplets(F, n, n, np.arange(n), A.images() - 1, np.ones(n, dtype=np.int64))
    from ..sparse_apply import SparseHYB

    if isinstance(A, SparseHYB):
        return A.to_csr()
    return SparseCSR.from_dense(F, A.to_dense())


def from_csr(S: SparseCSR, target: str):
    """Build a container of format ``target`` holding the entries of ``S``."""
    target = target.lower()
    if target == "csr":
        return S
    if target == "coo":
        return SparseCOO(S.field, *S.shape, S.row_indices(), S.col_idx, S.values)
    if target == "dense":
        return DenseMatrix(S.field, *S.shape, S.to_dense())
    if target == "hyb":
        from ..sparse_apply import hyb_split

        return hyb_split(S)
    raise ValueError(f"unknown matrix format {target!r}; expected one of {FORMATS}")


def convert(A, target: str):
    return from_csr(to_csr(A), target)


def rebind(A, F_dst):
    """Reinterpret the entries of ``A`` in another field (or in ZZ).

    Entries are lifted to their canonical integers and then reduced; sparse
    patterns lose the entries that vanish in the target field.
    """
    if isinstance(A, _DenseBase):
        src = A.array
        if F_dst.is_integer_ring:
            return DenseMatrix(F_dst, *A.shape, src.astype(object))
        return DenseMatrix(F_dst, *A.shape, src)
    if not isinstance(F_dst, PrimeField):
        raise TypeError("sparse containers over ZZ are not supported")
    if isinstance(A, SparseCOO):
        return SparseCOO(F_dst, *A.shape, A.rows, A.cols, A.vals)
    if isinstance(A, SparseCSR):
        return SparseCSR.from_triplets(F_dst, *A.shape, A.row_indices(), A.col_idx, A.values)
    if isinstance(A, Diagonal):
        return Diagonal(F_dst, A.diag)
    if isinstance(A, Permutation):
        return Permutation(F_dst, A.ipiv)
    from ..sparse_apply import SparseHYB, hyb_split

    if isinstance(A, SparseHYB):
        return hyb_split(rebind(A.to_csr(), F_dst))
    raise TypeError(f"cannot rebind {type(A).__name__}")
