import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exactla import PrimeField
from exactla.containers import DimensionError
from exactla.matmul import Method, MulHelper, mul
from exactla.poly_matmul import (
    NoRootError,
    NttPlan,
    PolyMatrix,
    find_root,
    ntt_forward,
    ntt_inverse,
    ntt_primes,
    poly_mul,
)
from oracles import poly_gemm_schoolbook


def order(w, p):
    k, v = 1, w % p
    while v != 1:
        v = v * w % p
        k += 1
    return k


def test_find_root_examples():
    w = find_root(PrimeField(17), 4)
    assert pow(w, 4, 17) == 1 and pow(w, 2, 17) == 16
    assert w in [x for x in range(1, 17) if order(x, 17) == 4]
    with pytest.raises(NoRootError):
        find_root(PrimeField(7), 4)
    assert order(find_root(PrimeField(257), 256), 257) == 256
    with pytest.raises(ValueError):
        find_root(PrimeField(17), 3)


def test_transform_examples():
    F = PrimeField(17)
    plan = NttPlan.build(F, 8)
    assert ntt_forward([5, 0, 0, 0, 0, 0, 0, 0], plan).tolist() == [5] * 8
    two = NttPlan.build(F, 2)
    assert ntt_forward([3, 9], two).tolist() == [12, (3 - 9) % 17]
    with pytest.raises(DimensionError):
        ntt_forward([1, 2, 3], plan)


def test_forward_matches_dft_definition():
    F = PrimeField(257)
    rng = np.random.default_rng(0)
    for N in (1, 2, 4, 16, 64):
        plan = NttPlan.build(F, N)
        v = rng.integers(0, 257, size=N)
        want = [sum(int(v[i]) * pow(plan.omega, i * j, 257) for i in range(N)) % 257 for j in range(N)]
        assert ntt_forward(v, plan).tolist() == want


@pytest.mark.parametrize("p, N", [(786433, 4096), (65537, 1024), (257, 256), (17, 16)])
def test_round_trip(p, N):
    F = PrimeField(p)
    v = np.random.default_rng(N).integers(0, p, size=(2, N))
    plan = NttPlan.build(F, N)
    assert np.array_equal(ntt_inverse(ntt_forward(v, plan), plan), v)


def test_constant_polynomials_reduce_to_mul():
    F = PrimeField(257)
    rng = np.random.default_rng(1)
    A, B = rng.integers(0, 257, size=(1, 3, 4)), rng.integers(0, 257, size=(1, 4, 2))
    C = poly_mul(PolyMatrix(F, A), PolyMatrix(F, B))
    assert C.degree == 0
    assert np.array_equal(C.coeffs[0], mul(F, A[0], B[0]))


def test_difference_of_squares():
    F = PrimeField(17)
    I = np.eye(2, dtype=np.int64)
    plus = PolyMatrix(F, np.stack([I, I]))
    minus = PolyMatrix(F, np.stack([-I, I]))
    C = poly_mul(plus, minus)
    assert C == PolyMatrix(F, np.stack([-I, 0 * I, I]))


def test_fallback_path_over_small_prime():
    F = PrimeField(7)
    rng = np.random.default_rng(2)
    A, B = rng.integers(0, 7, size=(8, 3, 3)), rng.integers(0, 7, size=(7, 3, 3))
    C = poly_mul(PolyMatrix(F, A), PolyMatrix(F, B))
    assert np.array_equal(C.coeffs, poly_gemm_schoolbook(A, B, 7))


def test_ntt_primes():
    qs = ntt_primes(64, 3)
    assert len(qs) == 3 and all(q % 64 == 1 and q < 2**26 for q in qs)
    assert list(qs) == sorted(qs, reverse=True)


def test_poly_errors():
    F = PrimeField(17)
    with pytest.raises(DimensionError):
        poly_mul(PolyMatrix(F, np.zeros((1, 2, 3))), PolyMatrix(F, np.zeros((1, 2, 3))))
    with pytest.raises(ValueError):
        poly_mul(PolyMatrix(F, np.zeros((1, 2, 2))), PolyMatrix(PrimeField(257), np.zeros((1, 2, 2))))
    with pytest.raises(DimensionError):
        PolyMatrix(F, np.zeros((2, 2)))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 5), st.integers(1, 5), st.integers(1, 5),
    st.integers(0, 20), st.integers(0, 20),
    st.sampled_from([7, 17, 257, 786433, 67108859]),
    st.integers(0, 2**32 - 1),
)
def test_matches_schoolbook(m, k, n, dA, dB, p, seed):
    F = PrimeField(p)
    rng = np.random.default_rng(seed)
    A, B = rng.integers(0, p, size=(dA + 1, m, k)), rng.integers(0, p, size=(dB + 1, k, n))
    C = poly_mul(PolyMatrix(F, A), PolyMatrix(F, B), MulHelper(Method.AUTO, 1))
    assert np.array_equal(C.coeffs, poly_gemm_schoolbook(A, B, p))
