import itertools
from fractions import Fraction

import numpy as np
import pytest

from threeway.oracle import (
    EnumLimits,
    LimitExceeded,
    brute_3dm,
    brute_count,
    brute_count_bounded,
    brute_entry_attains,
    brute_entry_set,
    brute_exists,
    brute_real_halfint_check,
    iter_bounded_tables,
    iter_tables,
    permutation_permanent,
    ryser_permanent,
)
from threeway.reductions import (
    example21_instance,
    lift_embedded,
    reduce_3dm,
    vlach_halfint_source,
    vlach_instance,
)
from threeway.tables import (
    OneMarginals,
    Table3,
    TwoMarginals,
    dominated,
    frechet_upper,
    marginals1_of,
    marginals2_of,
    satisfies,
)

from conftest import random_table


def product_enumeration(m, max_entry):
    """Every array with entries in 0..max_entry whose 2-marginals are m."""
    dims = tuple(m.dims)
    for vals in itertools.product(range(max_entry + 1), repeat=int(np.prod(dims))):
        t = Table3(np.array(vals).reshape(dims))
        if marginals2_of(t) == m:
            yield t


def test_zero_marginals_have_one_table():
    for dims in [(1, 1, 1), (2, 3, 2), (3, 1, 2)]:
        assert brute_count(TwoMarginals.zeros(dims)) == 1


def test_matching_reductions_feasible_and_infeasible():
    m21, _ = reduce_3dm(example21_instance()[1])
    assert brute_count(m21) == 1
    m22, _ = reduce_3dm(vlach_instance()[1])
    assert brute_count(m22) == 0
    assert not brute_exists(m22)


def test_exists_basic():
    t = Table3(np.arange(8).reshape(2, 2, 2))
    assert brute_exists(marginals2_of(t))
    assert not brute_exists(TwoMarginals([[1]], [[2]], [[1]]))


def test_entry_set_examples():
    m21, _ = reduce_3dm(example21_instance()[1])
    assert brute_entry_set(m21, (1, 1, 1)) == {1}
    assert brute_entry_set(reduce_3dm(vlach_instance()[1])[0], (1, 1, 1)) == set()
    ones = marginals2_of(Table3(np.ones((2, 2, 2), int)))
    # independent: scan all 3^8 arrays with entries 0..2
    expected = {t[1, 1, 1] for t in product_enumeration(ones, 2)}
    assert expected == {0, 1, 2}
    assert brute_entry_set(ones, (1, 1, 1)) == expected


def test_enumeration_matches_product_scan(rng):
    for _ in range(25):
        t = random_table(rng, (2, 2, 2), 1)
        m = marginals2_of(t)
        hi = max(v for v in m.ij.ravel())
        expected = sorted(x.tolist() for x in product_enumeration(m, hi))
        got = sorted(x.tolist() for x in iter_tables(m))
        assert got == expected
        assert all(satisfies(x, m) for x in iter_tables(m))


def test_exists_iff_count_and_entry_sets(rng):
    for _ in range(40):
        t = random_table(rng, (2, 3, 3), 2)
        m = marginals2_of(t)
        n = brute_count(m)
        assert brute_exists(m) == (n > 0)
        e = (rng.randint(1, t.dims.r), rng.randint(1, t.dims.c), rng.randint(1, t.dims.h))
        vals = brute_entry_set(m, e)
        assert vals and max(vals) <= frechet_upper(m, e)
        for v in range(frechet_upper(m, e) + 1):
            assert brute_entry_attains(m, e, v) == (v in vals)


def test_limits():
    m = marginals2_of(Table3(np.full((3, 3, 3), 3, int)))
    with pytest.raises(LimitExceeded):
        brute_count(m, EnumLimits(max_tables=10**9, max_nodes=50))
    with pytest.raises(LimitExceeded):
        brute_count(m, EnumLimits(max_tables=5, max_nodes=10**9))
    with pytest.raises(ValueError):
        EnumLimits(max_tables=0)


def test_permanent_examples():
    assert ryser_permanent(np.eye(4, dtype=int)) == 1
    assert ryser_permanent([[1, 1], [0, 0]]) == 0
    assert ryser_permanent(np.ones((3, 3), int)) == 6
    with pytest.raises(ValueError):
        ryser_permanent([[1, 0, 1], [0, 1, 1]])


def direct_permanent(a):
    n = len(a)
    return sum(int(np.prod([a[i][s[i]] for i in range(n)])) for s in itertools.permutations(range(n)))


def test_permanent_exhaustive_small():
    for n in range(1, 4):
        for bits in itertools.product((0, 1), repeat=n * n):
            a = np.array(bits).reshape(n, n).tolist()
            assert ryser_permanent(a) == direct_permanent(a)


def test_permanent_random_n4(rng):
    for _ in range(200):
        a = [[rng.randint(0, 1) for _ in range(4)] for _ in range(4)]
        assert ryser_permanent(a) == direct_permanent(a)


def test_inclusion_exclusion_path_matches_enumeration(rng):
    from threeway.oracle import _ryser

    for n in range(1, 7):
        for _ in range(15):
            a = [[int(rng.random() < 0.6) for _ in range(n)] for _ in range(n)]
            assert _ryser(a) == permutation_permanent(a)
    # beyond the enumeration threshold: all-ones n x n has permanent n!
    assert ryser_permanent(np.ones((10, 10), int)) == 3628800


def test_brute_3dm_examples():
    assert brute_3dm(example21_instance()[1])
    assert not brute_3dm(vlach_instance()[1])
    assert brute_3dm(Table3(np.ones((3, 3, 3), int)))
    with pytest.raises(ValueError):
        brute_3dm(Table3(np.full((2, 2, 2), 2)))


def test_brute_3dm_matches_bounded_count():
    for bits in itertools.product((0, 1), repeat=8):
        p = Table3(np.array(bits).reshape(2, 2, 2))
        assert brute_3dm(p) == (brute_count_bounded(OneMarginals.ones(2), p) > 0)


def test_bounded_enumeration_against_product_scan(rng):
    for _ in range(30):
        p = random_table(rng, (2, 2, 2), 2)
        x0 = Table3(np.array([rng.randint(0, v) for v in p.entries.ravel()]).reshape(p.dims))
        u = marginals1_of(x0)
        expected = set()
        for vals in itertools.product(*(range(int(v) + 1) for v in p.entries.ravel())):
            x = Table3(np.array(vals).reshape(p.dims))
            if marginals1_of(x) == u:
                expected.add(tuple(vals))
        got = {tuple(x.entries.ravel()) for x in iter_bounded_tables(u, p)}
        assert got == expected
        assert all(dominated(x, p) for x in iter_bounded_tables(u, p))


def test_real_check():
    t = Table3(np.arange(8).reshape(2, 2, 2))
    assert brute_real_halfint_check(marginals2_of(t), t.as_rational())
    m22, spec = reduce_3dm(vlach_instance()[1])
    y = lift_embedded(vlach_halfint_source(), spec)
    assert brute_real_halfint_check(m22, y)
    assert set(y.entries.ravel()) == {Fraction(0), Fraction(1, 2)}
    assert not brute_real_halfint_check(marginals2_of(t), Table3.zeros((2, 2, 2)).as_rational())
    with pytest.raises(ValueError):
        brute_real_halfint_check(m22, t.as_rational())
