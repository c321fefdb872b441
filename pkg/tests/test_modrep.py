import random

import numpy as np
import pytest

from liepowers.combinat import partitions
from liepowers.descent import (
    apply_place_permutation,
    element_action_matrix,
    lift_idempotents,
)
from liepowers.freelie import filtration_subspace, lie_power
from liepowers.linalg import Mat, Subspace, word_to_index
from liepowers.modrep import (
    TensorAction,
    generated_group_order,
    gl_generators,
    group_order_formula,
    induce_on_tensor_power,
    is_invariant,
    module_closure,
    primitive_root,
)


def test_gl2_f2_generator_matrices():
    gens = gl_generators(2, 2)
    assert len(gens) == 2
    assert gens[0].to_lists() == [[0, 1], [1, 0]]
    assert gens[1].to_lists() == [[1, 1], [0, 1]]


@pytest.mark.parametrize("n,p,order", [
    (2, 2, 6),
    (2, 3, 48),
    (3, 2, 168),
    (3, 3, 11232),
])
def test_generated_group_orders(n, p, order):
    assert group_order_formula(n, p) == order
    assert generated_group_order(gl_generators(n, p)) == order


def test_gl1_is_cyclic():
    gens = gl_generators(1, 5)
    assert len(gens) == 1
    assert gens[0].to_lists() == [[2]]
    assert generated_group_order(gens) == 4 == group_order_formula(1, 5)


def test_primitive_roots():
    assert primitive_root(2) == 1
    assert primitive_root(3) == 2
    assert primitive_root(5) == 2
    assert primitive_root(7) == 3


def test_identity_action():
    act = induce_on_tensor_power([Mat.identity(2, 2)], 3)
    for v in [0, 1, 5, 255, 1 << 7]:
        assert act.apply(0, v) == v
    assert act.induced_matrix(0) == Mat.identity(2, 8)


def test_swap_exchanges_letters():
    act = induce_on_tensor_power(gl_generators(2, 2), 2)
    i12 = word_to_index((1, 2), 2)
    i21 = word_to_index((2, 1), 2)
    assert act.apply(0, 1 << i12) == 1 << i21
    assert act.apply(0, 1 << i21) == 1 << i12


@pytest.mark.parametrize("n,p", [(2, 2), (2, 3), (3, 2)])
@pytest.mark.parametrize("r", [2, 3])
def test_induced_matrix_matches_apply(n, p, r):
    act = induce_on_tensor_power(gl_generators(n, p), r)
    rng = random.Random(11)
    dim = n ** r
    for gi in range(len(act.generators)):
        m = act.induced_matrix(gi)
        vecs = [[1 if i == j else 0 for i in range(dim)] for j in range(dim)]
        vecs += [[rng.randrange(p) for _ in range(dim)] for _ in range(5)]
        for v in vecs:
            got = act.apply(gi, v if p != 2 else sum(b << i for i, b in enumerate(v)))
            want = m.apply(v)
            if p == 2:
                assert got == sum(b << i for i, b in enumerate(want)) \
                    if isinstance(got, int) else got == want
            else:
                assert np.array_equal(np.asarray(got), np.asarray(want))


def test_action_is_multiplicative():
    g, h, _ = gl_generators(2, 3)
    act = TensorAction([g, h, g @ h], 3)
    rng = random.Random(5)
    for _ in range(10):
        v = [rng.randrange(3) for _ in range(8)]
        two_step = act.apply(1, act.apply(0, v))
        assert np.array_equal(np.asarray(two_step), np.asarray(act.apply(2, v)))


@pytest.mark.parametrize("p,n,rmax", [(2, 2, 6), (3, 2, 5), (2, 3, 4)])
def test_lie_power_invariant(p, n, rmax):
    gens = gl_generators(n, p)
    for r in range(1, rmax + 1):
        act = induce_on_tensor_power(gens, r)
        assert is_invariant(lie_power(p, n, r), act)


def test_module_closure_fixed_point():
    act = induce_on_tensor_power(gl_generators(2, 2), 3)
    lp = lie_power(2, 2, 3)
    assert module_closure(lp, act) == lp


def test_module_closure_of_a_single_word():
    act = induce_on_tensor_power(gl_generators(2, 2), 2)
    seed = Subspace.from_packed(2, 4, [1 << word_to_index((1, 2), 2)])
    closed = module_closure(seed, act)
    assert closed.dim == 4
    assert closed.contains_space(seed)


def test_module_closure_monotone():
    act = induce_on_tensor_power(gl_generators(2, 3), 3)
    rng = random.Random(23)
    for _ in range(5):
        vecs = [[rng.randrange(3) for _ in range(8)] for _ in range(2)]
        seed = Subspace.from_vectors(3, 8, vecs)
        closed = module_closure(seed, act)
        assert closed.contains_space(seed)
        assert is_invariant(closed, act)


@pytest.mark.parametrize("p,n,r", [(2, 2, 3), (3, 2, 3), (2, 3, 3)])
def test_substitution_commutes_with_place_permutations(p, n, r):
    act = induce_on_tensor_power(gl_generators(n, p), r)
    rng = random.Random(7)
    transpositions = []
    for i in range(r - 1):
        sig = list(range(1, r + 1))
        sig[i], sig[i + 1] = sig[i + 1], sig[i]
        transpositions.append(tuple(sig))
    dim = n ** r
    for _ in range(8):
        if p == 2:
            v = rng.randrange(1 << dim)
        else:
            v = np.array([rng.randrange(p) for _ in range(dim)], dtype=np.int64)
        for gi in range(len(act.generators)):
            for sig in transpositions:
                a = apply_place_permutation(p, n, r, act.apply(gi, v), sig)
                b = act.apply(gi, apply_place_permutation(p, n, r, v, sig))
                if p == 2:
                    assert a == b
                else:
                    assert np.array_equal(a, b)


def test_pbw_filtration_invariant():
    act = induce_on_tensor_power(gl_generators(2, 2), 4)
    for lam in partitions(4):
        assert is_invariant(filtration_subspace(2, 2, 4, lam), act)


@pytest.mark.parametrize("p,n,r", [(2, 2, 4), (3, 2, 3)])
def test_class_idempotent_images_invariant(p, n, r):
    act = induce_on_tensor_power(gl_generators(n, p), r)
    fam = lift_idempotents(r, p)
    for cls, e in fam.items():
        em = element_action_matrix(n, e)
        rows = em._d if p == 2 else list(em._d)
        image = Subspace.from_packed(p, n ** r, rows)
        assert is_invariant(image, act)
