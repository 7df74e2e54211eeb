"""Exact dense linear algebra over prime fields F_q.

Values are machine-integer residues reduced mod q after every operation;
the modulus is restricted to primes below 2**16 so that int64 accumulation
never overflows for any realistic dimension.  All container types are
immutable after construction and safe to share across threads; the
elimination routines mutate local scratch copies only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

MAX_MODULUS = 1 << 16


class SingularTopLeftError(Exception):
    """The leading square block is not invertible; re-randomize the permutation."""


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q < 4:
        return True
    if q % 2 == 0:
        return False
    d = 3
    while d * d <= q:
        if q % d == 0:
            return False
        d += 2
    return True


def validate_modulus(q: int) -> int:
    """Check that q is a prime suitable for this library and return it."""
    if not isinstance(q, (int, np.integer)):
        raise TypeError(f"modulus must be an integer, got {type(q).__name__}")
    q = int(q)
    if q >= MAX_MODULUS:
        raise ValueError(f"modulus {q} too large (must be < 2**16)")
    if not is_prime(q):
        raise ValueError(f"modulus {q} is not prime")
    return q


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.int64, copy=True)
    out.setflags(write=False)
    return out


def _check_range(values: np.ndarray, q: int) -> None:
    if values.size and (values.min() < 0 or values.max() >= q):
        raise ValueError(f"entries must lie in [0, {q})")


@dataclass(frozen=True, eq=False)
class FqVector:
    """Immutable vector with entries in [0, q)."""

    q: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", validate_modulus(self.q))
        vals = _freeze(np.atleast_1d(self.values))
        if vals.ndim != 1:
            raise ValueError("vector must be one-dimensional")
        _check_range(vals, self.q)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_ints(cls, q: int, seq) -> "FqVector":
        """Build from arbitrary integers, reducing mod q."""
        return cls(q, np.asarray(seq, dtype=np.int64) % q)

    @classmethod
    def zeros(cls, q: int, n: int) -> "FqVector":
        return cls(q, np.zeros(n, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FqVector)
            and self.q == other.q
            and np.array_equal(self.values, other.values)
        )

    def __add__(self, other: "FqVector") -> "FqVector":
        self._compat(other)
        return FqVector(self.q, (self.values + other.values) % self.q)

    def __sub__(self, other: "FqVector") -> "FqVector":
        self._compat(other)
        return FqVector(self.q, (self.values - other.values) % self.q)

    def scale(self, c: int) -> "FqVector":
        return FqVector(self.q, (self.values * (c % self.q)) % self.q)

    def _compat(self, other: "FqVector") -> None:
        if self.q != other.q:
            raise ValueError(f"modulus mismatch: {self.q} vs {other.q}")
        if len(self) != len(other):
            raise ValueError(f"length mismatch: {len(self)} vs {len(other)}")

    def tolist(self) -> list[int]:
        return [int(x) for x in self.values]


@dataclass(frozen=True, eq=False)
class FqMatrix:
    """Immutable row-major matrix with entries in [0, q)."""

    q: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", validate_modulus(self.q))
        vals = _freeze(np.atleast_2d(self.values))
        if vals.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        _check_range(vals, self.q)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_ints(cls, q: int, rows) -> "FqMatrix":
        return cls(q, np.asarray(rows, dtype=np.int64) % q)

    @classmethod
    def identity(cls, q: int, n: int) -> "FqMatrix":
        return cls(q, np.eye(n, dtype=np.int64))

    @classmethod
    def zeros(cls, q: int, rows: int, cols: int) -> "FqMatrix":
        return cls(q, np.zeros((rows, cols), dtype=np.int64))

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def cols(self) -> int:
        return int(self.values.shape[1])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FqMatrix)
            and self.q == other.q
            and np.array_equal(self.values, other.values)
        )

    def tolist(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self.values]


@dataclass(frozen=True, eq=False)
class Permutation:
    """A bijection on n positions, stored as 0-based images."""

    images: np.ndarray

    def __post_init__(self):
        imgs = _freeze(self.images)
        n = imgs.shape[0]
        if imgs.ndim != 1 or not np.array_equal(np.sort(imgs), np.arange(n)):
            raise ValueError("images must be a permutation of 0..n-1")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.int64))

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "Permutation":
        imgs = list(range(n))
        rng.shuffle(imgs)
        return cls(np.asarray(imgs, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.images.shape[0])

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.images, other.images)

    def inverse(self) -> "Permutation":
        inv = np.empty(len(self), dtype=np.int64)
        inv[self.images] = np.arange(len(self), dtype=np.int64)
        return Permutation(inv)


def apply_permutation(obj, perm: Permutation):
    """Reorder a vector's coordinates or a matrix's columns.

    For a vector v, result[i] = v[perm.images[i]]; for a matrix the same
    rule is applied to columns.  Applying a permutation and then its
    inverse restores the input.
    """
    if isinstance(obj, FqVector):
        if len(obj) != len(perm):
            raise ValueError("permutation size does not match vector length")
        return FqVector(obj.q, obj.values[perm.images])
    if isinstance(obj, FqMatrix):
        if obj.cols != len(perm):
            raise ValueError("permutation size does not match column count")
        return FqMatrix(obj.q, obj.values[:, perm.images])
    raise TypeError(f"cannot permute {type(obj).__name__}")


def mat_vec_mul(m: FqMatrix, v: FqVector) -> FqVector:
    """Matrix-vector product over F_q."""
    if m.q != v.q:
        raise ValueError(f"modulus mismatch: {m.q} vs {v.q}")
    if m.cols != len(v):
        raise ValueError(f"dimension mismatch: {m.rows}x{m.cols} times length {len(v)}")
    return FqVector(m.q, (m.values @ v.values) % m.q)


def mat_mat_mul(a: FqMatrix, b: FqMatrix) -> FqMatrix:
    if a.q != b.q:
        raise ValueError(f"modulus mismatch: {a.q} vs {b.q}")
    if a.cols != b.rows:
        raise ValueError("dimension mismatch")
    return FqMatrix(a.q, (a.values @ b.values) % a.q)


def rank(m: FqMatrix) -> int:
    """Rank over F_q via full Gaussian elimination."""
    a = np.array(m.values, dtype=np.int64)
    q = m.q
    r = 0
    for col in range(a.shape[1]):
        if r == a.shape[0]:
            break
        piv = None
        for row in range(r, a.shape[0]):
            if a[row, col] != 0:
                piv = row
                break
        if piv is None:
            continue
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, col]), q - 2, q)
        a[r] = (a[r] * inv) % q
        rest = a[r + 1 :, col].copy()
        a[r + 1 :] = (a[r + 1 :] - np.outer(rest, a[r])) % q
        r += 1
    return r


def random_full_rank_matrix(q: int, rows: int, cols: int, rng: random.Random) -> FqMatrix:
    """Uniformly random matrix conditioned on full row rank (rejection sampling)."""
    validate_modulus(q)
    if rows > cols:
        raise ValueError("rows must not exceed cols for a full row-rank matrix")
    while True:
        vals = np.array(
            [rng.randrange(q) for _ in range(rows * cols)], dtype=np.int64
        ).reshape(rows, cols)
        m = FqMatrix(q, vals)
        if rank(m) == rows:
            return m


@dataclass(frozen=True, eq=False)
class PartialEchelon:
    """Output blocks of partial Gaussian elimination.

    An invertible row operation S brings the input to the block form
    [[I, h_prime], [0, h_second]] and maps the syndrome to
    (s_prime, s_second).  S itself is not materialized.
    """

    h_prime: FqMatrix
    h_second: FqMatrix
    s_prime: FqVector
    s_second: FqVector


def partial_gaussian_elim(h: FqMatrix, ell: int, s: FqVector) -> PartialEchelon:
    """Reduce the first (rows - ell) columns of h to the identity.

    Pivoting is plain row swapping restricted to the top block: if the
    leading (rows - ell) square submatrix is singular the reduction fails
    with SingularTopLeftError and the caller must pick a new column
    permutation.  Row operations are carried into s simultaneously.

    Args:
        h: (n - k) x n matrix.
        ell: number of bottom rows left unreduced, 0 <= ell <= n - k.
        s: syndrome of length n - k.

    Returns:
        PartialEchelon with blocks of shapes (n-k-ell) x (k+ell) and
        ell x (k+ell), plus the transformed syndrome halves.
    """
    if h.q != s.q:
        raise ValueError("modulus mismatch between matrix and syndrome")
    r, n = h.rows, h.cols
    if len(s) != r:
        raise ValueError("syndrome length must equal matrix row count")
    if not 0 <= ell <= r:
        raise ValueError(f"ell must lie in [0, {r}]")
    q = h.q
    lead = r - ell
    a = np.concatenate([h.values, s.values[:, None]], axis=1).astype(np.int64)
    for c in range(lead):
        piv = None
        for row in range(c, lead):
            if a[row, c] != 0:
                piv = row
                break
        if piv is None:
            raise SingularTopLeftError(f"no pivot available in column {c}")
        if piv != c:
            a[[c, piv]] = a[[piv, c]]
        inv = pow(int(a[c, c]), q - 2, q)
        a[c] = (a[c] * inv) % q
        col = a[:, c].copy()
        col[c] = 0
        a = (a - np.outer(col, a[c])) % q
    return PartialEchelon(
        h_prime=FqMatrix(q, a[:lead, lead:n]),
        h_second=FqMatrix(q, a[lead:, lead:n]),
        s_prime=FqVector(q, a[:lead, n]),
        s_second=FqVector(q, a[lead:, n]),
    )
