"""Word-size prime fields, delayed-reduction bounds and RNS/CRT support.

Elements of ``Z/pZ`` are stored as canonical representatives in ``[0, p)``.
The balanced range ``(-M/2, M/2]`` only shows up when an integer is rebuilt
from its residues.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import prod

#: Capacity of the unsigned 64-bit accumulator used by the gemm/spmv kernels.
ACC_CAPACITY_U64 = 2**64 - 1

#: Default width policy for prime moduli (products fit 64 bits with k_max >= 4096).
DEFAULT_PRIME_BITS = 26

# p < 2^31 keeps a sum of two products inside a signed 64-bit word.
_HARD_PRIME_BITS = 31

# Deterministic for every n < 3.3e24, which covers all word-size inputs.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin test for 64-bit inputs."""
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def delayed_bound(F: "PrimeField | int", capacity: int = ACC_CAPACITY_U64) -> int:
    """Number of products of canonical elements that can be accumulated
    on top of one canonical value without exceeding ``capacity``.

    >>> delayed_bound(3, 2**64 - 1)
    4611686018427387903
    """
    p = F.p if isinstance(F, PrimeField) else int(F)
    m = p - 1
    if m == 0:
        raise ValueError("modulus must be at least 2")
    if capacity < m * m + m:
        raise ValueError(
            f"accumulator capacity {capacity} cannot hold a single product mod {p}"
        )
    return (capacity - m) // (m * m)


@dataclass(frozen=True)
class PrimeField:
    """The prime field ``Z/pZ`` with precomputed delayed-reduction capacity."""

    p: int
    acc_capacity: int = ACC_CAPACITY_U64
    max_bits: int = DEFAULT_PRIME_BITS
    k_max: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        p = int(self.p)
        object.__setattr__(self, "p", p)
        if self.max_bits > _HARD_PRIME_BITS:
            raise ValueError(f"prime width is capped at {_HARD_PRIME_BITS} bits")
        if p.bit_length() > self.max_bits:
            raise ValueError(f"{p} exceeds the {self.max_bits}-bit prime policy")
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        object.__setattr__(self, "k_max", delayed_bound(p, self.acc_capacity))

    @property
    def is_integer_ring(self) -> bool:
        return False

    @property
    def name(self) -> str:
        return f"zp:{self.p}"

    def normalize(self, x: int) -> int:
        return int(x) % self.p

    def invert(self, x: int) -> int:
        return invert(x, self)

    def add(self, x: int, y: int) -> int:
        s = x + y
        return s - self.p if s >= self.p else s

    def sub(self, x: int, y: int) -> int:
        d = x - y
        return d + self.p if d < 0 else d

    def mul(self, x: int, y: int) -> int:
        return x * y % self.p

    def neg(self, x: int) -> int:
        return 0 if x == 0 else self.p - x

    def __str__(self):
        return f"Z/{self.p}Z"


class IntegerRing:
    """Tag for the ring of integers (arbitrary precision entries)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    p = None
    is_integer_ring = True
    name = "int"

    def normalize(self, x: int) -> int:
        return int(x)

    def __repr__(self):
        return "IntegerRing()"

    def __str__(self):
        return "ZZ"

    def __reduce__(self):
        return (IntegerRing, ())


ZZ = IntegerRing()


def normalize(x: int, F: PrimeField) -> int:
    return int(x) % F.p


def invert(x: int, F: PrimeField) -> int:
    """Inverse of ``x`` modulo ``F.p`` by the extended Euclidean algorithm."""
    p = F.p if isinstance(F, PrimeField) else int(F)
    a = int(x) % p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse modulo {p}")
    r0, r1 = p, a
    s0, s1 = 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    # r0 == 1 since p is prime
    return s0 % p


def primes_below(bits: int):
    """Yield primes below ``2**bits`` in decreasing order."""
    if bits < 2:
        raise ValueError("prime_bits must be at least 2")
    n = (1 << bits) - 1
    while n >= 2:
        if is_prime(n):
            yield n
        n -= 2 if n > 3 and n % 2 else 1


@lru_cache(maxsize=32)
def _prime_list(bits: int, count: int) -> tuple:
    out = []
    for q in primes_below(bits):
        out.append(q)
        if len(out) == count:
            break
    return tuple(out)


@dataclass(frozen=True)
class RnsBasis:
    """Pairwise-distinct primes with precomputed Lagrange CRT constants.

    ``crt_coeffs[i]`` is the inverse of ``M / q_i`` modulo ``q_i``.
    """

    primes: tuple
    M: int = field(init=False)
    cofactors: tuple = field(init=False, repr=False)
    crt_coeffs: tuple = field(init=False, repr=False)

    def __post_init__(self):
        primes = tuple(int(q) for q in self.primes)
        if not primes:
            raise ValueError("an RNS basis needs at least one prime")
        if len(set(primes)) != len(primes):
            raise ValueError("RNS primes must be pairwise distinct")
        M = prod(primes)
        cof = tuple(M // q for q in primes)
        coeffs = tuple(invert(c % q, q) for c, q in zip(cof, primes))
        object.__setattr__(self, "primes", primes)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "cofactors", cof)
        object.__setattr__(self, "crt_coeffs", coeffs)

    def __len__(self):
        return len(self.primes)

    def reduce(self, x: int) -> tuple:
        return tuple(int(x) % q for q in self.primes)


def rns_build(bound: int, prime_bits: int = DEFAULT_PRIME_BITS) -> RnsBasis:
    """Smallest basis of the largest primes below ``2**prime_bits`` whose
    product exceeds ``2 * bound`` (room for signed reconstruction)."""
    if prime_bits < 2:
        raise ValueError("prime_bits must be at least 2")
    bound = max(int(bound), 1)
    target = 2 * bound
    # over-estimate the count so the prime scan is cached in one go
    guess = target.bit_length() // max(prime_bits - 1, 1) + 2
    primes: list = []
    M = 1
    while M <= target:
        avail = _prime_list(prime_bits, guess)
        if len(primes) == len(avail):
            if len(avail) < guess:
                raise ValueError(
                    f"not enough {prime_bits}-bit primes to exceed {target}"
                )
            guess *= 2
            continue
        q = avail[len(primes)]
        primes.append(q)
        M *= q
    return RnsBasis(tuple(primes))


def crt_reconstruct(residues, basis: RnsBasis) -> int:
    """Integer in ``(-M/2, M/2]`` congruent to ``residues[i]`` mod each prime."""
    if len(residues) != len(basis.primes):
        raise ValueError(
            f"expected {len(basis.primes)} residues, got {len(residues)}"
        )
    M = basis.M
    r = 0
    for x, q, c, cof in zip(residues, basis.primes, basis.crt_coeffs, basis.cofactors):
        r += (int(x) * c % q) * cof
    r %= M
    return r - M if r > M // 2 else r
