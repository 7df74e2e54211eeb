import math
import random
from fractions import Fraction

import numpy as np
import pytest

from leeisd.fieldlin import FqVector, Permutation, apply_permutation
from leeisd.weights import (
    SphereEnumerator,
    WeightFunction,
    normalized_weight,
    sample_uniform_weight_w,
    sphere_count_exact,
    sphere_counts_all,
    sphere_exponent,
    sphere_exponent_many,
    typical_pattern,
    vector_weight,
)


def brute_counts(wf, n):
    q = wf.q
    out = {}
    for idx in range(q**n):
        v = np.array([(idx // q**i) % q for i in range(n)], dtype=np.int64)
        w = vector_weight(FqVector(q, v), wf)
        out[w] = out.get(w, 0) + 1
    return out


def test_table_construction():
    lee = WeightFunction.lee(5)
    assert [float(x) for x in lee.table] == [0, 1, 2, 2, 1]
    ham = WeightFunction.hamming(5)
    assert [float(x) for x in ham.table] == [0, 1, 1, 1, 1]
    with pytest.raises(ValueError):
        WeightFunction(3, (1, 1, 1))  # nonzero cost at symbol 0
    with pytest.raises(ValueError):
        WeightFunction(3, (0, -1, 1))
    with pytest.raises(ValueError):
        WeightFunction(3, (0, 1))  # wrong length


def test_custom_table_json_roundtrip():
    wf = WeightFunction.from_json('{"q": 7, "table": [0, 1, 2, 3, 3, 2, 1]}')
    assert wf.q == 7 and wf.table == WeightFunction.lee(7).table
    rational = WeightFunction(3, (0, Fraction(1, 2), Fraction(3, 2)))
    back = WeightFunction.from_json(rational.to_json())
    assert back.table == rational.table
    assert rational.denominator == 2 and rational.int_table == (0, 1, 3)


def test_vector_weight_examples():
    lee5 = WeightFunction.lee(5)
    ham5 = WeightFunction.hamming(5)
    assert vector_weight(FqVector(5, [0, 0, 0]), lee5) == 0
    assert vector_weight(FqVector(5, [1, 4, 2]), lee5) == 4
    assert vector_weight(FqVector(5, [1, 4, 2]), ham5) == 3
    with pytest.raises(ValueError):
        vector_weight(FqVector(3, [1, 2]), lee5)


def test_weight_permutation_invariant():
    rng = random.Random(5)
    for wf in (WeightFunction.lee(7), WeightFunction.hamming(7)):
        for _ in range(50):
            v = FqVector.from_ints(7, [rng.randrange(7) for _ in range(10)])
            perm = Permutation.random(10, rng)
            assert vector_weight(v, wf) == vector_weight(apply_permutation(v, perm), wf)


def test_sphere_count_examples():
    assert sphere_count_exact(WeightFunction.lee(5), 7, 0) == 1
    assert sphere_count_exact(WeightFunction.lee(5), 2, 2) == 8
    assert sphere_count_exact(WeightFunction.hamming(3), 4, 2) == 24
    # unreachable weights count zero
    assert sphere_count_exact(WeightFunction.lee(3), 4, Fraction(1, 2)) == 0
    assert sphere_count_exact(WeightFunction.lee(3), 4, 5) == 0


def test_sphere_counts_match_enumeration_small():
    for q in (2, 3, 5):
        for wf in (WeightFunction.lee(q), WeightFunction.hamming(q)):
            for n in (1, 2, 3, 4):
                brute = brute_counts(wf, n)
                total = 0
                for w, cnt in brute.items():
                    assert sphere_count_exact(wf, n, w) == cnt
                    total += cnt
                assert total == q**n


def test_sphere_partition_invariant():
    for q, n in ((3, 9), (5, 6), (7, 5)):
        for wf in (WeightFunction.lee(q), WeightFunction.hamming(q)):
            assert sum(sphere_counts_all(wf, n)) == q**n


def test_rational_table_counts():
    wf = WeightFunction(3, (0, Fraction(1, 2), Fraction(3, 2)))
    # n=2: weights: 0, 1/2(x2), 1(x1: 1+1... wait) enumerate to be sure
    brute = brute_counts(wf, 2)
    for w, cnt in brute.items():
        assert sphere_count_exact(wf, 2, w) == cnt


def test_sphere_exponent_uniform_at_mean():
    prof = sphere_exponent(WeightFunction.lee(5), 1.2)  # (q^2-1)/(4q)
    assert abs(prof.s - 1.0) < 1e-9
    assert np.allclose(prof.lam, 0.2, atol=1e-9)
    assert abs(prof.beta) < 1e-6


def test_sphere_exponent_boundaries():
    prof0 = sphere_exponent(WeightFunction.hamming(7), 0.0)
    assert prof0.s == 0.0 and prof0.lam[0] == 1.0 and math.isinf(prof0.beta)
    top = sphere_exponent(WeightFunction.lee(5), 2.0)
    assert abs(top.s - math.log(2, 5)) < 1e-12
    assert np.allclose(top.lam, [0, 0, 0.5, 0.5, 0])


def test_sphere_exponent_hamming_closed_form():
    # independent oracle: -(1-w)log_q(1-w) - w log_q(w/(q-1))
    q = 3
    for omega in (0.2, 0.5, 0.66):
        expect = -(1 - omega) * math.log(1 - omega, q) - omega * math.log(
            omega / (q - 1), q
        )
        got = sphere_exponent(WeightFunction.hamming(q), omega).s
        assert abs(got - expect) < 1e-9
    assert abs(sphere_exponent(WeightFunction.hamming(3), 0.5).s - 0.946395) < 1e-5


def test_sphere_exponent_vs_exact_count_n2000():
    wf = WeightFunction.hamming(3)
    n, omega = 2000, 0.5
    exact = sphere_count_exact(wf, n, int(omega * n))
    assert abs(math.log(exact, 3) / n - sphere_exponent(wf, omega).s) < 0.005


def test_dual_solver_beats_feasible_mixtures():
    # random feasible points: convex mixtures of two-symbol distributions
    rng = random.Random(17)
    wf = WeightFunction.lee(7)
    tab = [float(x) for x in wf.table]
    for omega in (0.5, 1.3, 2.1):
        prof = sphere_exponent(wf, omega)
        for _ in range(60):
            mix = np.zeros(7)
            for _ in range(3):
                lo = rng.choice([x for x in range(7) if tab[x] <= omega])
                hi = rng.choice([x for x in range(7) if tab[x] >= omega])
                if tab[hi] == tab[lo]:
                    t = 1.0
                else:
                    t = (tab[hi] - omega) / (tab[hi] - tab[lo])
                two = np.zeros(7)
                two[lo] += t
                two[hi] += 1.0 - t
                mix += rng.random() * two
            mix /= mix.sum()
            assert abs(float((mix * tab).sum()) - omega) < 1e-9
            ent = -sum(p * math.log(p, 7) for p in mix if p > 0)
            assert ent <= prof.s + 1e-9


def test_lee_symmetry_of_maximizer():
    wf = WeightFunction.lee(11)
    for omega in (0.7, 1.9, 2.4):
        lam = sphere_exponent(wf, omega).lam
        for x in range(1, 11):
            assert abs(lam[x] - lam[11 - x]) < 1e-9


def test_exponent_concave_with_peak_at_mean():
    wf = WeightFunction.lee(7)
    mean = float(wf.average_weight)
    grid = np.linspace(0.05, float(wf.max_weight) - 0.05, 41)
    s = sphere_exponent_many(wf, grid)
    second = s[2:] - 2 * s[1:-1] + s[:-2]
    assert (second <= 1e-8).all()
    assert abs(sphere_exponent(wf, mean).s - 1.0) < 1e-9


def test_typical_pattern_examples():
    assert np.allclose(typical_pattern(WeightFunction.hamming(3), 2 / 3), [1 / 3] * 3)
    assert np.allclose(typical_pattern(WeightFunction.lee(5), 2.0), [0, 0, 0.5, 0.5, 0])
    lam = typical_pattern(WeightFunction.lee(5), 1.0)
    assert abs(lam[1] - lam[4]) < 1e-9 and abs(lam[2] - lam[3]) < 1e-9
    tab = np.array([0, 1, 2, 2, 1], dtype=float)
    assert abs(float((lam * tab).sum()) - 1.0) < 1e-9


def test_normalized_weight():
    assert normalized_weight(WeightFunction.hamming(7), 0.3) == pytest.approx(0.3)
    assert normalized_weight(WeightFunction.lee(13), 6.0) == pytest.approx(1.0)
    assert normalized_weight(WeightFunction.lee(13), 5.742) == pytest.approx(0.957)


def test_enumerator_rank_roundtrip():
    wf = WeightFunction.lee(5)
    enum = SphereEnumerator(wf, 4, 3)
    assert enum.count == sphere_count_exact(wf, 4, 3)
    seen = set()
    for r in range(enum.count):
        v = enum.unrank(r)
        assert enum.rank(v) == r
        assert vector_weight(FqVector(5, v), wf) == 3
        seen.add(v.tobytes())
    assert len(seen) == enum.count
    dense = enum.all_vectors()
    assert dense.shape == (enum.count, 4)
    for r in range(enum.count):
        assert np.array_equal(dense[r], enum.unrank(r))


def test_sampling_weight_zero_and_postcondition():
    rng = random.Random(3)
    wf = WeightFunction.lee(5)
    assert sample_uniform_weight_w(wf, 6, 0, rng).tolist() == [0] * 6
    for _ in range(50):
        v = sample_uniform_weight_w(wf, 8, 5, rng)
        assert vector_weight(v, wf) == 5
    with pytest.raises(ValueError):
        sample_uniform_weight_w(wf, 2, 100, rng)


def test_sampling_uniformity_chi_square():
    rng = random.Random(123)
    wf = WeightFunction.lee(5)
    draws = 8000
    hits: dict[bytes, int] = {}
    for _ in range(draws):
        v = sample_uniform_weight_w(wf, 2, 2, rng)
        hits[v.values.tobytes()] = hits.get(v.values.tobytes(), 0) + 1
    assert len(hits) == 8
    expected = draws / 8
    chi2 = sum((c - expected) ** 2 / expected for c in hits.values())
    assert chi2 < 18.48  # df=7 critical value at p=0.01
