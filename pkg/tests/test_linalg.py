import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liepowers.linalg import (
    GFScalar,
    GroupAction,
    Mat,
    SpanBuilder,
    Subspace,
    affine_projection_family,
    check_prime,
    format_subspace,
    index_to_word,
    is_direct_sum,
    parse_subspace,
    rref,
    solve_equivariant_projection,
    word_to_index,
    word_weight,
)


def test_check_prime():
    for p in (2, 3, 5, 7, 11):
        assert check_prime(p) == p
    for bad in (1, 4, 6, 9, -3):
        with pytest.raises(ValueError):
            check_prime(bad)


def test_scalar_arithmetic():
    a = GFScalar(2, 5)
    b = GFScalar(4, 5)
    assert (a + b).value == 1
    assert (a * b).value == 3
    assert (a - b).value == 3
    assert a.inverse().value == 3
    assert (b / a).value == 2
    with pytest.raises(ZeroDivisionError):
        GFScalar(0, 5).inverse()


def test_rref_keeps_shape_and_rank():
    m = Mat.from_rows(2, [[1, 1], [1, 1]])
    r, rank = rref(m)
    assert rank == 1
    assert r.to_lists() == [[1, 1], [0, 0]]

    m = Mat.from_rows(5, [[2, 4], [1, 2], [0, 3]])
    r, rank = rref(m)
    assert rank == 2
    assert r.to_lists() == [[1, 0], [0, 1], [0, 0]]


def test_rref_is_canonical_mod3():
    # same row space, different presentations
    a = Mat.from_rows(3, [[1, 2, 0], [0, 1, 1]])
    b = Mat.from_rows(3, [[2, 1, 0], [1, 2, 0], [0, 2, 2]])
    ra, ka = rref(a)
    rb, kb = rref(b)
    assert ka == kb == 2
    assert ra.to_lists()[:2] == rb.to_lists()[:2]


def test_matmul_and_identity():
    for p in (2, 3, 5):
        a = Mat.from_rows(p, [[1, 2, 0], [0, 1, 1]])
        i3 = Mat.identity(p, 3)
        assert (a @ i3) == a
        i2 = Mat.identity(p, 2)
        assert (i2 @ a) == a


def test_matmul_matches_numpy_reference():
    rng = np.random.default_rng(7)
    for p in (2, 3, 7):
        a = rng.integers(0, p, size=(13, 17))
        b = rng.integers(0, p, size=(17, 9))
        ma = Mat.from_rows(p, a.tolist())
        mb = Mat.from_rows(p, b.tolist())
        want = (a @ b) % p
        assert (ma @ mb).to_lists() == want.tolist()


def test_mat_apply_row_vector():
    m = Mat.from_rows(3, [[1, 1], [0, 2]])
    assert list(m.apply([1, 1])) == [1, 0]
    m2 = Mat.from_rows(2, [[0, 1], [1, 0]])
    assert m2.apply([1, 0]) == [0, 1]


def test_rational_mode_small():
    m = Mat.from_rows(0, [[1, 2], [3, 4]])
    r, rank = rref(m)
    assert rank == 2
    assert r.to_lists() == [[1, 0], [0, 1]]


def test_subspace_membership_enumerated_gf2():
    # span over F_2^3; compare canonical membership with brute force
    vecs = [[1, 1, 0], [0, 1, 1]]
    s = Subspace.from_vectors(2, 3, vecs)
    assert s.dim == 2
    expect = set()
    for c1, c2 in itertools.product((0, 1), repeat=2):
        v = tuple((c1 * a + c2 * b) % 2 for a, b in zip(*vecs))
        expect.add(v)
    for v in itertools.product((0, 1), repeat=3):
        assert s.contains(list(v)) == (v in expect)


def test_subspace_equality_is_presentation_free():
    s1 = Subspace.from_vectors(3, 4, [[1, 2, 0, 1], [0, 0, 1, 1]])
    s2 = Subspace.from_vectors(3, 4, [[1, 2, 1, 2], [0, 0, 2, 2], [1, 2, 2, 0]])
    assert s1 == s2
    assert hash(s1) == hash(s2)


def test_subspace_coords_roundtrip():
    s = Subspace.from_vectors(5, 4, [[1, 2, 3, 4], [0, 1, 1, 1]])
    for co in itertools.product(range(5), repeat=2):
        v = np.zeros(4, dtype=np.int64)
        for c, row in zip(co, s.packed_rows()):
            v = (v + c * row) % 5
        got = s.coords(v)
        assert got is not None
        back = np.zeros(4, dtype=np.int64)
        for c, row in zip(got, s.packed_rows()):
            back = (back + c * row) % 5
        assert np.array_equal(back, v)
    assert s.coords([0, 0, 0, 1]) is None


def _brute_intersection(p, amb, s1, s2):
    # enumerate all of F_p^amb; fine for tiny ambients
    pts = []
    for v in itertools.product(range(p), repeat=amb):
        if s1.contains(list(v)) and s2.contains(list(v)):
            pts.append(list(v))
    return Subspace.from_vectors(p, amb, pts)


def test_intersection_matches_enumeration():
    s1 = Subspace.from_vectors(2, 4, [[1, 0, 1, 0], [0, 1, 1, 1], [1, 1, 1, 0]])
    s2 = Subspace.from_vectors(2, 4, [[1, 1, 0, 1], [0, 0, 1, 1]])
    assert s1.intersect(s2) == _brute_intersection(2, 4, s1, s2)

    t1 = Subspace.from_vectors(3, 3, [[1, 0, 2], [0, 1, 1]])
    t2 = Subspace.from_vectors(3, 3, [[1, 1, 0], [0, 0, 1]])
    assert t1.intersect(t2) == _brute_intersection(3, 3, t1, t2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 1).map(lambda i: (2, 3)[i]),
       st.lists(st.lists(st.integers(0, 6), min_size=5, max_size=5), max_size=4),
       st.lists(st.lists(st.integers(0, 6), min_size=5, max_size=5), max_size=4))
def test_intersection_properties(p, rows1, rows2):
    a = Subspace.from_vectors(p, 5, [[x % p for x in r] for r in rows1])
    b = Subspace.from_vectors(p, 5, [[x % p for x in r] for r in rows2])
    i = a.intersect(b)
    assert i == b.intersect(a)
    assert a.contains_space(i) and b.contains_space(i)
    # dim formula
    assert a.sum(b).dim == a.dim + b.dim - i.dim


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(0, 2), min_size=4, max_size=4),
                min_size=1, max_size=5),
       st.integers(0, 4))
def test_canonical_form_stable_under_shuffle(rows, seed):
    rows = [[x % 3 for x in r] for r in rows]
    s1 = Subspace.from_vectors(3, 4, rows)
    rng = np.random.default_rng(seed)
    alt = [list(r) for r in rows]
    rng.shuffle(alt)
    # also throw in random combinations of the originals
    if len(rows) >= 2:
        comb = [(a + 2 * b) % 3 for a, b in zip(rows[0], rows[1])]
        alt.append(comb)
    s2 = Subspace.from_vectors(3, 4, alt)
    assert s1 == s2


def test_span_builder_agrees_with_batch():
    rng = np.random.default_rng(3)
    for p in (2, 7):
        vecs = rng.integers(0, p, size=(8, 6)).tolist()
        sb = SpanBuilder(p, 6)
        grew = [sb.add(v) for v in vecs]
        batch = Subspace.from_vectors(p, 6, vecs)
        assert sb.subspace() == batch
        assert sum(grew) == batch.dim
        for v in vecs:
            assert sb.contains(v)


def test_direct_sum_check():
    a = Subspace.from_vectors(2, 4, [[1, 0, 0, 0]])
    b = Subspace.from_vectors(2, 4, [[0, 1, 1, 0]])
    c = Subspace.from_vectors(2, 4, [[0, 0, 0, 1]])
    whole = Subspace.from_vectors(2, 4, [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 0, 1]])
    assert is_direct_sum([a, b, c], whole)
    overlap = Subspace.from_vectors(2, 4, [[1, 0, 0, 0], [0, 1, 1, 0]])
    assert not is_direct_sum([a, overlap], whole)
    assert not is_direct_sum([a, b], whole)


def test_group_action_validates_generators():
    sing = Mat.from_rows(2, [[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        GroupAction(2, 2, [sing])


def test_equivariant_projection_infeasible_swap_gf2():
    # C_2 swapping coordinates of F_2^2; image = span{(1,1)}.
    # The only candidate sends both basis vectors to (1,1)+c(1,1); over F_2
    # idempotence and equivariance cannot both hold, and the solver's linear
    # system is inconsistent.
    swap = Mat.from_rows(2, [[0, 1], [1, 0]])
    act = GroupAction(2, 2, [swap])
    dom = Subspace.from_vectors(2, 2, [[1, 0], [0, 1]])
    img = Subspace.from_vectors(2, 2, [[1, 1]])
    assert solve_equivariant_projection(act, img, dom) is None
    assert affine_projection_family(act, img, dom) is None


def test_equivariant_projection_swap_gf3():
    # same setup over F_3 succeeds: pi = [[2,2],[2,2]]
    swap = Mat.from_rows(3, [[0, 1], [1, 0]])
    act = GroupAction(3, 2, [swap])
    dom = Subspace.from_vectors(3, 2, [[1, 0], [0, 1]])
    img = Subspace.from_vectors(3, 2, [[1, 1]])
    pi = solve_equivariant_projection(act, img, dom)
    assert pi is not None
    assert pi.to_lists() == [[2, 2], [2, 2]]
    assert (pi @ pi) == pi
    assert (pi @ swap) == (swap @ pi)
    # kernel of pi is the complementary line span{(1,2)}
    assert list(pi.apply([1, 2])) == [0, 0]


def test_equivariant_projection_respects_preconditions():
    swap = Mat.from_rows(3, [[0, 1], [1, 0]])
    act = GroupAction(3, 2, [swap])
    dom = Subspace.from_vectors(3, 2, [[1, 1]])
    img = Subspace.from_vectors(3, 2, [[1, 0]])
    with pytest.raises(ValueError):
        solve_equivariant_projection(act, img, dom)  # image outside domain
    bad_dom = Subspace.from_vectors(3, 2, [[1, 0]])  # not swap-invariant
    with pytest.raises(ValueError):
        solve_equivariant_projection(act, Subspace.zero(3, 2), bad_dom)


def test_equivariant_projection_block_diagonal_action():
    # direct sum of a 2-dim swap module and a fixed line over F_5;
    # projecting onto the fixed line must kill the swap summand
    g = Mat.from_rows(5, [[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    act = GroupAction(5, 3, [g])
    dom = Subspace.from_vectors(5, 3, np.eye(3, dtype=int).tolist())
    img = Subspace.from_vectors(5, 3, [[0, 0, 1]])
    pi = solve_equivariant_projection(act, img, dom)
    assert pi is not None
    assert (pi @ pi) == pi
    assert (pi @ g) == (g @ pi)
    assert list(pi.apply([0, 0, 1])) == [0, 0, 1]
    # (1,1,0) spans the trivial part of the swap module; several equivariant
    # projections exist, every one of them keeps image = the fixed line
    assert list(pi.apply([1, 4, 0])) == [0, 0, 0]


def test_projection_with_weight_labels():
    # two one-dimensional label blocks; the labelled solve pins the
    # off-block entries to zero
    g = Mat.from_rows(3, [[2, 0], [0, 1]])
    act = GroupAction(3, 2, [g])
    dom = Subspace.from_vectors(3, 2, [[1, 0], [0, 1]])
    img = Subspace.from_vectors(3, 2, [[1, 0]])
    pi = solve_equivariant_projection(act, img, dom, labels=["a", "b"])
    assert pi is not None
    assert pi.to_lists() == [[1, 0], [0, 0]]


def test_affine_family_spans_all_solutions():
    # trivial action: every idempotent with the given image solves the
    # system; family dimension = dim(image) * codim
    ident = Mat.identity(2, 3)
    act = GroupAction(2, 3, [ident])
    dom = Subspace.from_vectors(2, 3, np.eye(3, dtype=int).tolist())
    img = Subspace.from_vectors(2, 3, [[1, 0, 0]])
    base, dirs = affine_projection_family(act, img, dom)
    assert (base @ base) == base
    assert len(dirs) == 2
    seen = set()
    for bits in itertools.product((0, 1), repeat=len(dirs)):
        m = base
        for b, d in zip(bits, dirs):
            if b:
                m = m + d
        seen.add(tuple(tuple(r) for r in m.to_lists()))
        # all family members are projections onto the same image here
        assert (m @ m) == m
    assert len(seen) == 4


def test_word_index_roundtrip():
    n, r = 3, 4
    for idx in range(n ** r):
        w = index_to_word(idx, n, r)
        assert word_to_index(w, n) == idx
    assert word_to_index((1, 1, 1, 2), 3) == 1
    assert word_to_index((2, 1, 1, 1), 3) == 27
    assert word_weight((1, 3, 1, 2), 3) == (2, 1, 1)


def test_subspace_text_roundtrip():
    s = Subspace.from_vectors(2, 8, [[1, 0, 1, 0, 0, 0, 0, 0],
                                     [0, 1, 0, 0, 0, 0, 0, 1]])
    txt = format_subspace(s, 2, 3, comment="demo")
    assert txt.startswith("# demo\n2 2 3\n")
    back, n, r = parse_subspace(txt)
    assert (n, r) == (2, 3)
    assert back == s


def test_subspace_text_accepts_comments_and_blank_lines():
    txt = "# header comment\n\n3 2 2\n1 11 2 22  # trailing note\n"
    s, n, r = parse_subspace(txt)
    assert (n, r) == (2, 2)
    assert s.dim == 1
    assert s.contains([1, 0, 0, 2])


def test_parse_rejects_bad_words():
    with pytest.raises(ValueError):
        parse_subspace("2 2 3\n1 12\n")  # word too short
    with pytest.raises(ValueError):
        parse_subspace("2 2 3\n1 132\n")  # letter outside alphabet
