"""Exact arithmetic in prime fields F_p and dense linear algebra over them.

Residues are plain Python ints in [0, p).  Vectors are tuples of residues
and matrices are tuples of row tuples; :class:`PrimeField` carries the
modulus and all modular arithmetic.  Rank computation uses Gaussian
elimination with a fixed pivot rule (first nonzero entry in column
order), with a word-parallel bitset path for p = 2 that must agree
bit-for-bit with the generic path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .rng import SplitMix64

# Largest accepted modulus: keeps a*b inside a 64-bit word on any backend
# that stores residues in machine words.
MAX_MODULUS = 1 << 31

Vector = tuple[int, ...]
Matrix = tuple[Vector, ...]


def is_prime(n: int) -> bool:
    """Primality by trial division (moduli here are small by contract)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    """The prime field F_p; all elements are residues in [0, p)."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int):
            raise TypeError("modulus must be an int")
        if self.p >= MAX_MODULUS:
            raise ValueError(f"modulus {self.p} exceeds limit {MAX_MODULUS}")
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")

    def check(self, a: int) -> int:
        if not isinstance(a, int) or not 0 <= a < self.p:
            raise ValueError(f"{a!r} is not a residue mod {self.p}")
        return a

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        """Multiplicative inverse by Fermat's little theorem."""
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of 0 in a prime field")
        return pow(a, self.p - 2, self.p)

    def elements(self) -> range:
        return range(self.p)

    def __str__(self) -> str:
        return f"F_{self.p}"


# ---------------------------------------------------------------------------
# Vectors
# ---------------------------------------------------------------------------

def vector(field: PrimeField, entries: Iterable[int]) -> Vector:
    """Validated residue vector."""
    return tuple(field.check(a) for a in entries)


def vec_add(field: PrimeField, u: Sequence[int], v: Sequence[int]) -> Vector:
    if len(u) != len(v):
        raise ValueError("vector length mismatch")
    p = field.p
    return tuple((a + b) % p for a, b in zip(u, v))


def zero_vector(n: int) -> Vector:
    return (0,) * n


def unit_vector(n: int, i: int) -> Vector:
    if not 0 <= i < n:
        raise ValueError(f"unit index {i} out of range for length {n}")
    return tuple(1 if j == i else 0 for j in range(n))


def random_vector(field: PrimeField, n: int, gen: SplitMix64) -> Vector:
    return tuple(gen.below(field.p) for _ in range(n))


# ---------------------------------------------------------------------------
# Matrices and rank
# ---------------------------------------------------------------------------

def transpose(rows: Sequence[Sequence[int]]) -> Matrix:
    if not rows:
        return ()
    return tuple(zip(*rows))


def row_reduce(field: PrimeField, rows: Sequence[Sequence[int]]) -> tuple[Matrix, int, tuple[int, ...]]:
    """Reduced row echelon form, rank, and pivot columns.

    Pivot rule: scan columns left to right, take the first row (at or
    below the current one) with a nonzero entry.  Deterministic, so the
    reduced form is reproducible.
    """
    p = field.p
    work = [list(r) for r in rows]
    nrows = len(work)
    ncols = len(work[0]) if nrows else 0
    pivots = []
    rank = 0
    for col in range(ncols):
        pivot_row = None
        for r in range(rank, nrows):
            if work[r][col] % p != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        work[rank], work[pivot_row] = work[pivot_row], work[rank]
        inv = field.inv(work[rank][col])
        work[rank] = [(x * inv) % p for x in work[rank]]
        for r in range(nrows):
            if r != rank and work[r][col] % p != 0:
                factor = work[r][col]
                work[r] = [(a - factor * b) % p for a, b in zip(work[r], work[rank])]
        pivots.append(col)
        rank += 1
        if rank == nrows:
            break
    return tuple(tuple(r) for r in work), rank, tuple(pivots)


def _row_reduce_gf2(rows: Sequence[Sequence[int]], ncols: int) -> tuple[Matrix, int, tuple[int, ...]]:
    """GF(2) path: rows packed into ints, elimination by word-wide XOR.

    Mirrors the generic pivot rule exactly (bit j = column j).
    """
    work = []
    for r in rows:
        acc = 0
        for j, x in enumerate(r):
            if x & 1:
                acc |= 1 << j
        work.append(acc)
    nrows = len(work)
    pivots = []
    rank = 0
    for col in range(ncols):
        bit = 1 << col
        pivot_row = None
        for r in range(rank, nrows):
            if work[r] & bit:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        work[rank], work[pivot_row] = work[pivot_row], work[rank]
        for r in range(nrows):
            if r != rank and (work[r] & bit):
                work[r] ^= work[rank]
        pivots.append(col)
        rank += 1
        if rank == nrows:
            break
    unpacked = tuple(tuple((w >> j) & 1 for j in range(ncols)) for w in work)
    return unpacked, rank, tuple(pivots)


def matrix_rank(field: PrimeField, rows: Sequence[Sequence[int]]) -> int:
    """Exact rank over F_p.  Empty matrices have rank 0."""
    rows = [tuple(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    ncols = len(rows[0])
    for r in rows:
        if len(r) != ncols:
            raise ValueError("ragged matrix")
    if field.p == 2:
        return _row_reduce_gf2(rows, ncols)[1]
    return row_reduce(field, rows)[1]


def matrix_rref(field: PrimeField, rows: Sequence[Sequence[int]]) -> tuple[Matrix, int, tuple[int, ...]]:
    """Reduced form dispatch used by tests to compare the GF(2) fast path."""
    rows = [tuple(r) for r in rows]
    if not rows or not rows[0]:
        return ((), 0, ()) if not rows else (tuple(rows), 0, ())
    if field.p == 2:
        return _row_reduce_gf2(rows, len(rows[0]))
    return row_reduce(field, rows)


def random_matrix(field: PrimeField, nrows: int, ncols: int, gen: SplitMix64) -> Matrix:
    return tuple(tuple(gen.below(field.p) for _ in range(ncols)) for _ in range(nrows))


def random_full_rank_basis(field: PrimeField, n: int, k: int, gen: SplitMix64) -> tuple[Vector, ...]:
    """k linearly independent vectors in F_p^n, by rejection."""
    if k > n:
        raise ValueError("cannot pick more independent vectors than the dimension")
    while True:
        cand = tuple(random_vector(field, n, gen) for _ in range(k))
        if matrix_rank(field, cand) == k:
            return cand
