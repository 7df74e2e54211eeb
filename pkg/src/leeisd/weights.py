"""Additive per-symbol weight functions and sphere geometry over F_q^n.

A weight function assigns each symbol x in {0, .., q-1} a nonnegative
rational cost with cost 0 for the zero symbol; the weight of a vector is
the sum of its per-symbol costs.  This module computes exact sphere
surface areas (number of vectors of a given weight), their asymptotic
per-coordinate exponents via maximum-entropy optimization, typical symbol
frequency patterns, and exactly uniform samples from a sphere.

Rational weights are handled by rescaling to a common integer denominator;
all counting is exact big-integer arithmetic.
"""

from __future__ import annotations

import json
import math
import random
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .fieldlin import FqVector, validate_modulus

_BETA_BRACKET = 50.0
_WEIGHT_TOL = 1e-12


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    raise TypeError(f"cannot interpret {x!r} as a rational weight")


@dataclass(frozen=True)
class WeightFunction:
    """Per-symbol weight table wt with wt[0] = 0.

    The table fixes the metric: lee uses min(x, q - x), hamming charges 1
    for every nonzero symbol, and custom tables may hold any nonnegative
    rationals.
    """

    q: int
    table: tuple[Fraction, ...]
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "q", validate_modulus(self.q))
        tab = tuple(_to_fraction(x) for x in self.table)
        if len(tab) != self.q:
            raise ValueError(f"table must have exactly q={self.q} entries")
        if tab[0] != 0:
            raise ValueError("weight of the zero symbol must be 0")
        if any(x < 0 for x in tab):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "table", tab)

    @classmethod
    def lee(cls, q: int) -> "WeightFunction":
        return cls(q, tuple(Fraction(min(x, q - x)) for x in range(q)), name="lee")

    @classmethod
    def hamming(cls, q: int) -> "WeightFunction":
        return cls(q, (Fraction(0),) + (Fraction(1),) * (q - 1), name="hamming")

    @classmethod
    def from_json(cls, doc) -> "WeightFunction":
        """Load a custom table from a JSON document {"q": ..., "table": [...]}."""
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        if not isinstance(doc, dict) or "q" not in doc or "table" not in doc:
            raise ValueError('weight JSON must be an object with "q" and "table"')
        return cls(int(doc["q"]), tuple(doc["table"]), name=str(doc.get("name", "custom")))

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "table": [x.numerator if x.denominator == 1 else str(x) for x in self.table],
            "name": self.name,
        }

    # -- derived integer-scaled view -------------------------------------

    @property
    def denominator(self) -> int:
        """Common denominator used to rescale the table to integers."""
        return _scaled(self)[0]

    @property
    def int_table(self) -> tuple[int, ...]:
        return _scaled(self)[1]

    def int_table_array(self) -> np.ndarray:
        return np.asarray(self.int_table, dtype=np.int64)

    @property
    def max_weight(self) -> Fraction:
        return max(self.table)

    @property
    def average_weight(self) -> Fraction:
        """Mean weight of a uniformly random symbol; for lee, (q^2-1)/(4q)."""
        return sum(self.table, Fraction(0)) / self.q

    def weight_classes(self) -> tuple[np.ndarray, np.ndarray]:
        """(distinct weights as floats, multiplicities) for entropy solves."""
        return _classes(self)

    def scaled(self, w) -> int | None:
        """Weight value in integer-scaled units, or None if not representable."""
        f = _to_fraction(w) * self.denominator
        if f.denominator != 1:
            return None
        return int(f)


@lru_cache(maxsize=64)
def _scaled(wf: WeightFunction) -> tuple[int, tuple[int, ...]]:
    den = 1
    for x in wf.table:
        den = den * x.denominator // math.gcd(den, x.denominator)
    return den, tuple(int(x * den) for x in wf.table)


@lru_cache(maxsize=64)
def _classes(wf: WeightFunction) -> tuple[np.ndarray, np.ndarray]:
    tab = np.asarray([float(x) for x in wf.table])
    uniq, inv = np.unique(tab, return_inverse=True)
    mult = np.bincount(inv).astype(float)
    uniq.setflags(write=False)
    mult.setflags(write=False)
    return uniq, mult


def vector_weight(v: FqVector, wf: WeightFunction) -> Fraction:
    """Sum of per-symbol weights of v."""
    if v.q != wf.q:
        raise ValueError(f"modulus mismatch: vector q={v.q}, weight table q={wf.q}")
    total = int(wf.int_table_array()[v.values].sum())
    return Fraction(total, wf.denominator)


# -- exact sphere counting ------------------------------------------------


@lru_cache(maxsize=32)
def _count_row(int_table: tuple[int, ...], n: int) -> tuple[int, ...]:
    """Counts of vectors of each scaled weight 0..n*max, length-n, exact.

    Computed as the coefficient list of (sum_x z^{wt_x})^n using Kronecker
    substitution: the polynomial is packed into one big integer with
    byte-aligned slots wide enough that coefficients (all <= q^n) never
    carry across slots, and the power is taken on the integer.
    """
    q = len(int_table)
    if n == 0:
        return (1,)
    maxw = max(int_table)
    slot_bits = n * max(1, q.bit_length()) + 1
    slot_bytes = (slot_bits + 7) // 8
    slot_bits = slot_bytes * 8
    base = 0
    for w in int_table:
        base += 1 << (w * slot_bits)
    val = base**n
    nslots = n * maxw + 1
    raw = val.to_bytes(nslots * slot_bytes, "little")
    return tuple(
        int.from_bytes(raw[j * slot_bytes : (j + 1) * slot_bytes], "little")
        for j in range(nslots)
    )


def sphere_counts_all(wf: WeightFunction, n: int) -> tuple[int, ...]:
    """Exact counts indexed by integer-scaled weight; sums to q**n."""
    if n < 0:
        raise ValueError("length must be nonnegative")
    return _count_row(wf.int_table, n)


def sphere_count_exact(wf: WeightFunction, n: int, w) -> int:
    """Number of vectors in F_q^n of weight exactly w (0 if unreachable)."""
    if n < 0:
        raise ValueError("length must be nonnegative")
    ws = wf.scaled(w)
    if ws is None or ws < 0:
        return 0
    row = _count_row(wf.int_table, n)
    if ws >= len(row):
        return 0
    return row[ws]


# -- sphere enumeration, ranking and sampling ------------------------------

_dp_lock = threading.Lock()
_dp_cache: dict[tuple[tuple[int, ...], int], list[tuple[int, ...]]] = {}


def _dp_rows(int_table: tuple[int, ...], n: int) -> list[tuple[int, ...]]:
    """Rows 0..n of the suffix-count table: row[i][j] = #length-i vectors of weight j."""
    key = (int_table, n)
    with _dp_lock:
        cached = _dp_cache.get(key)
    if cached is not None:
        return cached
    maxw = max(int_table) if int_table else 0
    hist: dict[int, int] = {}
    for w in int_table:
        hist[w] = hist.get(w, 0) + 1
    rows = [(1,)]
    for i in range(1, n + 1):
        prev = rows[-1]
        cur = [0] * (i * maxw + 1)
        for w, c in hist.items():
            for j, v in enumerate(prev):
                if v:
                    cur[j + w] += c * v
        rows.append(tuple(cur))
    with _dp_lock:
        _dp_cache[key] = rows
    return rows


class SphereEnumerator:
    """Rank/unrank interface to {v in F_q^n : wt(v) = w}.

    Vectors are ordered by reading coordinates left to right with symbols
    in increasing order, so rank 0 is the lexicographically smallest
    element of the sphere.
    """

    def __init__(self, wf: WeightFunction, n: int, w):
        self.wf = wf
        self.n = n
        ws = wf.scaled(w)
        self.w_scaled = -1 if ws is None or ws < 0 else ws
        self._rows = _dp_rows(wf.int_table, n)
        self._tab = wf.int_table

    @property
    def count(self) -> int:
        if self.w_scaled < 0 or self.w_scaled >= len(self._rows[self.n]):
            return 0
        return self._rows[self.n][self.w_scaled]

    def unrank(self, r: int) -> np.ndarray:
        if not 0 <= r < self.count:
            raise IndexError(f"rank {r} out of range for sphere of size {self.count}")
        out = np.zeros(self.n, dtype=np.int64)
        budget = self.w_scaled
        for i in range(self.n):
            rem = self.n - i - 1
            row = self._rows[rem]
            for x in range(self.wf.q):
                left = budget - self._tab[x]
                c = row[left] if 0 <= left < len(row) else 0
                if r < c:
                    out[i] = x
                    budget = left
                    break
                r -= c
        return out

    def rank(self, v: np.ndarray) -> int:
        r = 0
        budget = self.w_scaled
        for i in range(self.n):
            rem = self.n - i - 1
            row = self._rows[rem]
            for x in range(int(v[i])):
                left = budget - self._tab[x]
                if 0 <= left < len(row):
                    r += row[left]
            budget -= self._tab[int(v[i])]
        return r

    def __iter__(self):
        for r in range(self.count):
            yield self.unrank(r)

    def all_vectors(self) -> np.ndarray:
        """Dense (count, n) array of every sphere element, in rank order."""
        cnt = self.count
        out = np.zeros((cnt, self.n), dtype=np.int64)
        if cnt == 0:
            return out
        self._fill(out, 0, cnt, 0, self.w_scaled)
        return out

    def _fill(self, out, lo, hi, pos, budget):
        if pos == self.n:
            return
        rem = self.n - pos - 1
        row = self._rows[rem]
        at = lo
        for x in range(self.wf.q):
            left = budget - self._tab[x]
            c = row[left] if 0 <= left < len(row) else 0
            if c:
                out[at : at + c, pos] = x
                self._fill(out, at, at + c, pos + 1, left)
                at += c


def sample_uniform_weight_w(wf: WeightFunction, n: int, w, rng: random.Random) -> FqVector:
    """Exactly uniform draw from the weight-w sphere in F_q^n."""
    enum = SphereEnumerator(wf, n, w)
    if enum.count == 0:
        raise ValueError(f"empty sphere: no vectors of weight {w} in length {n}")
    return FqVector(wf.q, enum.unrank(rng.randrange(enum.count)))


# -- asymptotic sphere exponent (maximum entropy) ---------------------------


@dataclass(frozen=True, eq=False)
class EntropyProfile:
    """Maximizer of the sphere-area exponent at mean weight omega.

    lam holds the per-symbol frequencies (summing to 1), s the entropy
    exponent in log_q units, and beta the dual multiplier enforcing the
    mean-weight constraint (+-inf at the weight boundaries).
    """

    lam: np.ndarray
    s: float
    beta: float

    def __post_init__(self):
        arr = np.array(self.lam, dtype=float, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "lam", arr)


def _class_state(uniq: np.ndarray, mult: np.ndarray, beta: float, lnq: float):
    z = -beta * uniq * lnq + np.log(mult)
    z = z - z.max()
    e = np.exp(z)
    lam = e / e.sum()
    mean = float((lam * uniq).sum())
    per = lam / mult
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = -float(np.where(lam > 0, lam * np.log(per), 0.0).sum()) / lnq
    return lam, mean, ent


def sphere_exponent(wf: WeightFunction, omega: float) -> EntropyProfile:
    """Entropy-maximizing symbol distribution with mean weight omega.

    Solved in Lagrangian dual form: frequencies proportional to
    q^(-beta * wt(x)) with beta found by bisection so the mean weight
    matches omega; the mean is strictly decreasing in beta, so the root
    is unique.  Boundary targets (omega = 0 or omega = max weight)
    concentrate exactly on the extreme-weight symbols.
    """
    uniq, mult = wf.weight_classes()
    wmax = float(uniq[-1])
    lnq = math.log(wf.q)
    tab = np.asarray([float(x) for x in wf.table])
    if not -_WEIGHT_TOL <= omega <= wmax + _WEIGHT_TOL:
        raise ValueError(f"target weight {omega} outside [0, {wmax}]")
    if omega <= _WEIGHT_TOL:
        lam = np.where(tab == 0, 1.0, 0.0)
        lam /= lam.sum()
        return EntropyProfile(lam, math.log(lam.max() ** -1, wf.q) if lam.max() < 1 else 0.0, math.inf)
    if omega >= wmax - _WEIGHT_TOL:
        lam = np.where(tab == wmax, 1.0, 0.0)
        k = lam.sum()
        return EntropyProfile(lam / k, math.log(k) / lnq, -math.inf)

    lo, hi = -_BETA_BRACKET, _BETA_BRACKET
    # widen if the target is outside the bracketed mean range (extreme tables)
    for _ in range(8):
        if _class_state(uniq, mult, lo, lnq)[1] >= omega >= _class_state(uniq, mult, hi, lnq)[1]:
            break
        lo *= 2.0
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        _, mean, _ = _class_state(uniq, mult, mid, lnq)
        if abs(mean - omega) <= _WEIGHT_TOL and hi - lo < 1e-9:
            break
        if mean > omega:
            lo = mid
        else:
            hi = mid
    beta = 0.5 * (lo + hi)
    lam_c, _, ent = _class_state(uniq, mult, beta, lnq)
    lam = (lam_c / mult)[np.searchsorted(uniq, tab)]
    return EntropyProfile(lam, min(max(ent, 0.0), 1.0), beta)


def sphere_exponent_many(wf: WeightFunction, omegas, iters: int = 72) -> np.ndarray:
    """Vectorized entropy exponents for an array of mean-weight targets."""
    uniq, mult = wf.weight_classes()
    wmax = float(uniq[-1])
    lnq = math.log(wf.q)
    om = np.clip(np.atleast_1d(np.asarray(omegas, dtype=float)), 0.0, wmax)
    w_row = uniq[None, :]
    logm = np.log(mult)[None, :]
    lo = np.full(om.shape, -2.0 * _BETA_BRACKET)
    hi = np.full(om.shape, 2.0 * _BETA_BRACKET)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        z = -mid[:, None] * w_row * lnq + logm
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        lam = e / e.sum(axis=1, keepdims=True)
        mean = (lam * w_row).sum(axis=1)
        gt = mean > om
        lo = np.where(gt, mid, lo)
        hi = np.where(gt, hi, mid)
    mid = 0.5 * (lo + hi)
    z = -mid[:, None] * w_row * lnq + logm
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    lam = e / e.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        per = np.log(lam) - logm
        ent = -np.where(lam > 0, lam * per, 0.0).sum(axis=1) / lnq
    ent = np.clip(ent, 0.0, 1.0)
    # exact values at the weight boundaries (uniform over extreme symbols)
    s_lo = math.log(float(mult[0])) / lnq
    s_hi = math.log(float(mult[-1])) / lnq
    ent = np.where(om <= 0.0, s_lo, ent)
    ent = np.where(om >= wmax, s_hi, ent)
    return ent


def typical_pattern(wf: WeightFunction, omega: float) -> np.ndarray:
    """Symbol frequencies (fractions of n) of typical weight-omega*n words."""
    return sphere_exponent(wf, omega).lam


def normalized_weight(wf: WeightFunction, omega: float) -> float:
    """omega rescaled by the largest per-symbol weight, mapping onto [0, 1]."""
    return float(omega) / float(wf.max_weight)
