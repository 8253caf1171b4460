"""Independent reference implementations used as test oracles."""

import numpy as np


def gemm_per_step(A, B, p):
    """Schoolbook product reducing after every multiply-add."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    C = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for l in range(A.shape[1]):
        C = (C + A[:, l, None] * B[None, l, :]) % p
    return C


def gemm_bignum(A, B):
    """Exact integer product with Python ints."""
    m, k = len(A), len(A[0]) if len(A) else 0
    n = len(B[0]) if len(B) else 0
    return [[sum(int(A[i][l]) * int(B[l][j]) for l in range(k)) for j in range(n)] for i in range(m)]


def poly_gemm_schoolbook(A, B, p):
    """Coefficient convolution of (d+1, m, k) and (e+1, k, n) stacks mod p."""
    dA, dB = A.shape[0], B.shape[0]
    C = np.zeros((dA + dB - 1, A.shape[1], B.shape[2]), dtype=np.int64)
    for s in range(dA):
        for t in range(dB):
            C[s + t] = (C[s + t] + gemm_per_step(A[s], B[t], p)) % p
    return C

