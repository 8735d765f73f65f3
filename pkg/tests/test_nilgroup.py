import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import elementary, mat_comm, mat_id, mat_mul, mat_pow
from nilpoly.nilgroup import (
    NilGroup,
    NotNilpotentError,
    PresentationError,
    Subgroup,
    abelian,
    builtin,
    collect_product,
    commutator,
    constant_filtration,
    derive_filtration,
    finite_index_test,
    free_nilpotent_class3_rank2,
    heisenberg,
    hirsch_length,
    infinite_dihedral,
    lower_central_series,
    trivial_filtration,
    unitriangular,
)
from nilpoly.nilgroup.io import (
    element_from_json,
    filtration_from_json,
    filtration_to_json,
    group_from_json,
    group_to_json,
    parse_word,
)

H = heisenberg()
F3 = free_nilpotent_class3_rank2()

# Faithful matrix model of the Heisenberg group: x, y, c = [x, y].
HX = elementary(3, {(0, 1): 1})
HY = elementary(3, {(1, 2): 1})
HC = mat_comm(HX, HY)

# A homomorphic image of the free class-3 group in UT(4, Z): the images of
# a, b determine everything by the universal property of free nilpotent groups.
FA = elementary(4, {(0, 1): 1, (2, 3): 1})
FB = elementary(4, {(1, 2): 1, (2, 3): 2, (0, 1): 3})
FC = mat_comm(FA, FB)
FD = mat_comm(FC, FA)
FE = mat_comm(FC, FB)


def heis_matrix(v):
    return mat_mul(mat_mul(mat_pow(HX, v[0]), mat_pow(HY, v[1])), mat_pow(HC, v[2]))


def free3_matrix(v):
    out = mat_id(4)
    for m, e in zip((FA, FB, FC, FD, FE), v):
        out = mat_mul(out, mat_pow(m, e))
    return out


letters = st.lists(st.tuples(st.integers(0, 1), st.integers(-3, 3)), max_size=8)


@given(letters)
def test_heisenberg_collection_matches_matrix_word(word):
    collected = H.identity
    mat = mat_id(3)
    for k, e in word:
        collected = H.mul(collected, H.gen(k, e))
        mat = mat_mul(mat, mat_pow((HX, HY)[k], e))
    assert heis_matrix(collected) == mat


@given(letters)
def test_free_class3_collection_matches_matrix_image(word):
    collected = F3.identity
    mat = mat_id(4)
    for k, e in word:
        collected = F3.mul(collected, F3.gen(k, e))
        mat = mat_mul(mat, mat_pow((FA, FB)[k], e))
    assert free3_matrix(collected) == mat


elements3 = st.tuples(*[st.integers(-4, 4)] * 3)
elements5 = st.tuples(*[st.integers(-3, 3)] * 5)


@given(elements3, elements3, elements3)
def test_heisenberg_group_laws(a, b, c):
    assert H.mul(H.mul(a, b), c) == H.mul(a, H.mul(b, c))
    assert H.mul(a, H.inv(a)) == H.identity
    assert H.mul(H.identity, a) == a


@given(elements5, elements5, elements5)
def test_free_class3_group_laws(a, b, c):
    assert F3.mul(F3.mul(a, b), c) == F3.mul(a, F3.mul(b, c))
    assert F3.mul(F3.inv(a), a) == F3.identity


@given(elements5, elements5)
def test_commutator_convention(a, b):
    lhs = F3.comm(a, b)
    assert lhs == F3.prod(F3.inv(a), F3.inv(b), a, b)
    assert commutator(a, b, F3) == lhs


def test_small_products():
    assert collect_product((1, 0, 0), (0, 1, 0), H) == (1, 1, 0)
    assert H.mul((0, 1, 0), (1, 0, 0)) == (1, 1, -1)
    assert H.comm((1, 0, 0), (1, 0, 0)) == H.identity
    assert H.comm((1, 0, 0), (0, 1, 0)) == (0, 0, 1)


def test_commutator_of_xy_and_y():
    xy = H.mul(H.gen(0), H.gen(1))
    got = H.comm(xy, H.gen(1))
    assert heis_matrix(got) == mat_comm(heis_matrix(xy), HY)
    assert got == (0, 0, 1)


def test_pow_and_conj():
    a = (2, -1, 3)
    assert H.pow(a, 3) == H.prod(a, a, a)
    assert H.pow(a, -2) == H.inv(H.prod(a, a))
    b = (0, 1, 0)
    assert H.conj(a, b) in (H.prod(b, a, H.inv(b)), H.prod(H.inv(b), a, b))


def test_finite_orders_reduce():
    Hp = heisenberg(5)
    assert Hp.mul((4, 0, 0), (1, 0, 0)) == (0, 0, 0)
    assert Hp.order() == 125
    assert len(list(Hp.elements())) == 125


def test_presentation_validation():
    with pytest.raises(PresentationError):
        NilGroup(2, commutators={(1, 0): (0, 0)})
    with pytest.raises(PresentationError):
        NilGroup(2, commutators={(0, 1): (1, 0)})
    with pytest.raises(PresentationError):
        NilGroup(2, orders=[0, None])


def test_lower_central_series():
    Z2 = lower_central_series(abelian(2))
    assert Z2.length == 1
    F = lower_central_series(H)
    assert F.length == 2
    assert F.level(2) == Subgroup(H, [(0, 0, 1)])
    assert F.level(3).is_trivial()
    assert not F.check()
    G = lower_central_series(F3)
    assert G.length == 3
    assert not G.check()


def test_dihedral_lcs_layers_are_powers_of_two():
    G = infinite_dihedral()
    with pytest.raises(NotNilpotentError) as info:
        lower_central_series(G, 4)
    layers = info.value.layers
    for i, gens in enumerate(layers[1:], start=1):
        assert Subgroup(G, gens) == Subgroup(G, [(0, 2**i)])


def test_filtration_operations():
    F = lower_central_series(H)
    assert derive_filtration(F, "shift", 3).length is None
    assert derive_filtration(F, "shift", 1).length == 1
    q = derive_filtration(F, "quotient", 2)
    assert q.length == 1
    assert q.is_trivial_element((0, 0, 7))
    r = derive_filtration(F, "reindex", 2)
    assert r.length == 4
    assert [r.level(i) for i in range(5)] == [F.level(0), F.level(1), F.level(1), F.level(2), F.level(2)]
    with pytest.raises(ValueError):
        F.reindex([0, 2, 3])
    with pytest.raises(ValueError):
        derive_filtration(F, "rotate", 1)


def test_filtration_commutator_condition():
    for G in (H, F3, unitriangular(4)):
        F = lower_central_series(G)
        for i in range(F.length + 1):
            for j in range(F.length + 1):
                for a in F.level(i).igs():
                    for b in F.level(j).igs():
                        assert F.contains(min(i + j, F.length + 1), G.comm(a, b))


def test_hirsch_lengths():
    assert hirsch_length([abelian(3).gen(i) for i in range(3)], abelian(3)) == 3
    assert hirsch_length([H.gen(0), H.gen(1)], H) == 3
    assert hirsch_length([(2,)], abelian(1)) == 1
    assert hirsch_length([F3.gen(0), F3.gen(1)], F3) == 5


def test_finite_index_examples():
    assert finite_index_test([(2,)], abelian(1))
    assert not finite_index_test([(1, 0, 0)], H)
    assert finite_index_test([(2, 0, 0), (0, 2, 0), (0, 0, 1)], H)
    assert Subgroup(H, [(2, 0, 0), (0, 2, 0), (0, 0, 1)]).index() == 4


@given(st.lists(elements3, min_size=1, max_size=3))
def test_hirsch_monotone(gens):
    assert 0 <= hirsch_length(gens, H) <= 3


def test_random_subgroup_membership_of_generators():
    rng = random.Random(0)
    for _ in range(20):
        gens = [H.random_element(rng, 3) for _ in range(2)]
        S = Subgroup(H, gens)
        for g in gens:
            assert S.contains(g)
        assert S.contains(H.comm(gens[0], gens[1]))


def test_json_roundtrip():
    for name in ("heisenberg", "free3", "Z^2", "UT4", "heisenberg/3"):
        G = builtin(name) if "/" not in name else group_from_json(name)
        G2 = group_from_json(group_to_json(G))
        rng = random.Random(1)
        for _ in range(10):
            a, b = G.random_element(rng), G.random_element(rng)
            assert G.mul(a, b) == G2.mul(a, b)
    F = lower_central_series(H)
    F2 = filtration_from_json(H, filtration_to_json(F))
    assert F2.length == F.length
    assert all(F.level(i) == F2.level(i) for i in range(F.length + 2))
    assert parse_word(H, "x^2*y^-1") == H.mul((2, 0, 0), (0, -1, 0))
    assert element_from_json(H, "y*x") == (1, 1, -1)


def test_trivial_and_constant_filtrations():
    assert trivial_filtration(H).length is None
    C = constant_filtration(abelian(1), 3)
    assert C.length == 3
    assert C.contains(3, (5,))
