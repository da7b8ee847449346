import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threeway.oracle import (
    brute_3dm,
    brute_count,
    brute_count_bounded,
    brute_entry_attains,
    brute_entry_set,
    brute_exists,
    iter_bounded_tables,
    iter_tables,
    ryser_permanent,
)
from threeway.reductions import (
    EmbeddingSpec,
    canonical_gadget_table,
    embed_bounds,
    example21_instance,
    frechet_extension,
    lift_embedded,
    permanent_marginals,
    project_embedded,
    reduce_3dm,
    secure_frechet_gadget,
    secure_zero_gadget,
    spoke_table,
    vlach_halfint_source,
    vlach_instance,
)
from threeway.tables import (
    OneMarginals,
    RealTable3,
    Table3,
    TwoMarginals,
    check_consistency,
    dominated,
    marginals1_of,
    marginals2_of,
    satisfies,
)
from threeway.transfer import count_tables

from conftest import MATCH_X, matching_lift_y, random_bounded_system, table_from_cells


def ones_at(dims, cells):
    return table_from_cells(dims, {c: 1 for c in cells})


def test_generators():
    u, p = vlach_instance()
    assert p == ones_at((2, 2, 2), [(1, 1, 1), (2, 2, 1), (1, 2, 2), (2, 1, 2)])
    u2, q = example21_instance()
    zeros = {(i, j, k) for i, j, k in itertools.product((1, 2), repeat=3) if q[i, j, k] == 0}
    assert zeros == {(2, 1, 1), (2, 2, 1), (2, 1, 2)}
    for w in (u, u2):
        assert list(w.i) == list(w.j) == list(w.k) == [1, 1]


def test_embed_single_cell_by_hand():
    t = 5
    m, spec = embed_bounds(OneMarginals([t], [t], [t]), Table3([[[t]]]))
    assert spec.U == t and tuple(spec.target_dims) == (3, 1, 3)
    assert m.ij.tolist() == [[t], [t], [t]]
    # third axis: dom 1, row 1, col 1
    assert m.ik[:, 0].tolist() == [t, 0, 0]
    assert m.ik[:, 1].tolist() == [0, 0, t]
    assert m.ik[:, 2].tolist() == [0, t, 0]
    assert m.jk.tolist() == [[t, t, t]]


def test_embed_layout_helpers():
    _, spec = embed_bounds(*vlach_instance())
    assert tuple(spec.target_dims) == (3, 4, 6)
    assert [spec.pair(i, j) for i in (1, 2) for j in (1, 2)] == [1, 2, 3, 4]
    assert (spec.dom(2), spec.row(1), spec.col(2)) == (2, 3, 6)
    assert spec.third_axis_labels() == ["dom 1", "dom 2", "row 1", "row 2", "col 1", "col 2"]
    assert EmbeddingSpec.from_dict(spec.to_dict()) == spec


def test_embed_rejects_bad_input():
    with pytest.raises(ValueError):
        embed_bounds(OneMarginals([1], [1], [2]), Table3([[[3]]]))
    with pytest.raises(ValueError):
        # layer bound total 1 below the 1-marginal 2
        embed_bounds(OneMarginals([2], [2], [2]), Table3([[[1]]]))
    with pytest.raises(ValueError):
        embed_bounds(OneMarginals.ones(2), Table3(np.ones((2, 2, 3), int)))


def test_embedded_marginals_are_consistent(rng):
    for _ in range(50):
        u, p = random_bounded_system(rng)
        m, _ = embed_bounds(u, p)
        assert check_consistency(m).consistent


def test_vlach_embedding():
    m, spec = embed_bounds(*vlach_instance())
    assert check_consistency(m).consistent
    assert set(v for face in (m.ij, m.ik, m.jk) for v in face.ravel()) <= {0, 1}
    assert brute_count(m) == 0 == count_tables(m)
    y = lift_embedded(vlach_halfint_source(), spec)
    assert isinstance(y, RealTable3) and satisfies(y, m)
    assert set(y.entries.ravel()) == {Fraction(0), Fraction(1, 2)}
    assert project_embedded(y, spec) == vlach_halfint_source()


def test_matching_lift_matches_reference_blocks():
    m, spec = reduce_3dm(example21_instance()[1])
    x = table_from_cells((2, 2, 2), MATCH_X)
    y = lift_embedded(x, spec)
    assert y == matching_lift_y()
    assert project_embedded(y, spec) == x
    assert list(iter_tables(m)) == [y]


def test_zero_source_lift():
    p = Table3(np.array([[[2, 1], [0, 1]], [[1, 0], [3, 0]]]))
    u = OneMarginals([0, 0], [0, 0], [0, 0])
    m, spec = embed_bounds(u, p)
    assert spec.U == 0
    y = lift_embedded(Table3.zeros((2, 2, 2)), spec)
    assert not y.entries[0, :, :2].any()
    assert y.entries[1, :, :2].tolist() == p.entries.reshape(4, 2).tolist()
    assert not y.entries[:, :, 2:].any()
    assert satisfies(y, m)


def test_lift_rejects_invalid_source():
    u, p = vlach_instance()
    _, spec = embed_bounds(u, p)
    with pytest.raises(ValueError):
        lift_embedded(Table3(np.ones((2, 2, 2), int)), spec)
    # right 1-marginals but above the bound at (1,1,2)
    with pytest.raises(ValueError):
        lift_embedded(ones_at((2, 2, 2), [(1, 1, 2), (2, 2, 1)]), spec)
    with pytest.raises(ValueError):
        project_embedded(Table3.zeros((3, 4, 6)), spec)


def outcome(f, *args):
    try:
        return f(*args)
    except ValueError as err:
        return str(err)


def test_reduce_3dm_is_unit_specialization():
    rejected = 0
    for bits in itertools.product((0, 1), repeat=8):
        p = Table3(np.array(bits).reshape(2, 2, 2))
        got, want = outcome(reduce_3dm, p), outcome(embed_bounds, OneMarginals.ones(2), p)
        assert got == want
        if isinstance(got, str):
            # an empty layer would need a negative dom marginal
            assert any(not p.entries[:, :, k].any() for k in range(2))
            assert not brute_3dm(p)
            rejected += 1
    # each layer has 15 nonempty binary 2x2 patterns
    assert rejected == 2**8 - 15**2


def test_reduce_3dm_unit_specialization_n3(rng):
    for _ in range(30):
        p = Table3(np.array([rng.randint(0, 1) for _ in range(27)]).reshape(3, 3, 3))
        assert outcome(reduce_3dm, p) == outcome(embed_bounds, OneMarginals.ones(3), p)


def test_reduce_3dm_examples():
    assert brute_count(reduce_3dm(example21_instance()[1])[0]) == 1
    assert brute_count(reduce_3dm(vlach_instance()[1])[0]) == 0
    full = Table3(np.ones((2, 2, 2), int))
    assert brute_exists(reduce_3dm(full)[0]) == brute_3dm(full) is True
    with pytest.raises(ValueError):
        reduce_3dm(Table3(np.full((2, 2, 2), 2)))


def test_embedded_tables_project_to_bounded_tables():
    u, p = vlach_instance()
    p = Table3(np.ones((2, 2, 2), int))
    m, spec = embed_bounds(u, p)
    ys = list(iter_tables(m))
    xs = {project_embedded(y, spec) for y in ys}
    assert len(xs) == len(ys) == brute_count_bounded(u, p)
    for x in xs:
        assert dominated(x, p) and marginals1_of(x) == u


def test_bijection_random(rng):
    for _ in range(40):
        u, p = random_bounded_system(rng)
        m, spec = embed_bounds(u, p)
        xs = list(iter_bounded_tables(u, p))
        assert brute_count(m) == len(xs)
        for x in xs:
            y = lift_embedded(x, spec)
            assert satisfies(y, m)
            assert project_embedded(y, spec) == x
            assert lift_embedded(project_embedded(y, spec), spec) == y


@settings(max_examples=40, deadline=None)
@given(st.fractions(0, 1, max_denominator=12))
def test_rational_convex_combination_round_trip(w):
    # two integral points of one system; a rational combination stays exact
    p = Table3(np.full((2, 2, 2), 2))
    a = ones_at((2, 2, 2), [(1, 1, 1), (2, 2, 2)])
    b = ones_at((2, 2, 2), [(1, 2, 2), (2, 1, 1)])
    u = marginals1_of(a)
    assert marginals1_of(b) == u
    x = RealTable3(a.as_rational().entries * w + b.as_rational().entries * (1 - w))
    m, spec = embed_bounds(u, p)
    y = lift_embedded(x, spec)
    assert satisfies(y, m)
    assert project_embedded(y, spec) == x
    assert all(isinstance(v, Fraction) for v in y.entries.ravel())


def test_permanent_marginals_examples():
    assert count_tables(permanent_marginals(np.eye(2, dtype=int))) == 1
    m = permanent_marginals(np.ones((3, 3), int))
    assert tuple(m.dims) == (2, 3, 3)
    assert count_tables(m) == brute_count(m) == 6
    assert permanent_marginals([[1, 1], [0, 0]]) is None
    assert permanent_marginals([[1, 0], [1, 0]]) is None
    with pytest.raises(ValueError):
        permanent_marginals([[2, 0], [0, 1]])


def test_permanent_identity_exhaustive_n2():
    for bits in itertools.product((0, 1), repeat=4):
        a = np.array(bits).reshape(2, 2)
        m = permanent_marginals(a)
        n = 0 if m is None else brute_count(m)
        assert n == ryser_permanent(a)


def test_canonical_gadget_table_examples():
    ones = marginals2_of(Table3(np.ones((2, 2, 2), int)))
    R = canonical_gadget_table(ones)
    assert tuple(R.dims) == (3, 3, 3) and R[1, 1, 1] == 8
    assert R.entries[1:, 0, 1:].tolist() == ones.ik.tolist()
    assert R.entries[0, 1:, 1:].tolist() == ones.jk.tolist()
    assert R.entries[1:, 1:, 0].tolist() == ones.ij.tolist()
    g, spec = secure_zero_gadget(ones)
    assert satisfies(R, g) and spec.T == 8
    assert canonical_gadget_table(TwoMarginals.zeros((2, 1, 3))) == Table3.zeros((3, 2, 4))
    eye = np.eye(2, dtype=int)
    R2 = canonical_gadget_table(TwoMarginals(eye, eye, eye))
    assert R2[1, 1, 1] == 2
    assert R2.entries[1:, 0, 1:].tolist() == eye.tolist()
    assert int(R2.entries.sum()) == 2 + 3 * 2
    with pytest.raises(ValueError):
        canonical_gadget_table(TwoMarginals([[1]], [[2]], [[1]]))


def test_zero_gadget_examples():
    t = Table3(np.array([[[1, 0], [2, 1]], [[0, 1], [1, 1]]]))
    g, spec = secure_zero_gadget(marginals2_of(t))
    assert tuple(spec.target_dims) == (3, 3, 3)
    assert brute_entry_attains(g, (1, 1, 1), 0)
    z, _ = secure_zero_gadget(TwoMarginals.zeros((2, 2, 2)))
    assert z == TwoMarginals.zeros((3, 3, 3))
    assert brute_entry_set(z, (1, 1, 1)) == {0}


def test_zero_gadget_on_vlach():
    m, _ = reduce_3dm(vlach_instance()[1])
    g, spec = secure_zero_gadget(m)
    assert tuple(g.dims) == (4, 5, 7)
    assert satisfies(canonical_gadget_table(m), g)
    assert not brute_entry_attains(g, (1, 1, 1), 0)


def test_frechet_extension_layout():
    u, q = frechet_extension(example21_instance()[1])
    assert list(u.i) == [1, 1, 4]
    assert q[3, 3, 3] == 4 and q[1, 3, 3] == q[3, 3, 1] == q[3, 1, 3] == 1
    assert q[1, 1, 3] == q[1, 3, 1] == q[3, 1, 1] == 0
    x = spoke_table(2)
    assert marginals1_of(x) == u and dominated(x, q)


def test_frechet_gadget_examples():
    g, spec = secure_frechet_gadget(example21_instance()[1])
    assert tuple(g.dims) == (3, 9, 9) and spec.target_value == 4
    assert tuple(spec.target_entry) == (1, 9, 3)
    assert brute_entry_attains(g, spec.target_entry, 4)
    gv, sv = secure_frechet_gadget(vlach_instance()[1])
    assert not brute_entry_attains(gv, sv.target_entry, 4)
    y = lift_embedded(spoke_table(2), sv.embedding)
    assert satisfies(y, gv)
    g1, s1 = secure_frechet_gadget(Table3([[[1]]]))
    assert s1.target_value == 2 and tuple(g1.dims) == (3, 4, 6)
    assert brute_entry_attains(g1, s1.target_entry, 2)
    g0, s0 = secure_frechet_gadget(Table3([[[0]]]))
    assert not brute_entry_attains(g0, s0.target_entry, 2)
    assert brute_exists(g0)
