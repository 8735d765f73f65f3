import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_vip_spec
from nilpoly.errors import CapExceededError
from nilpoly.ipcore import card, nonempty_subsets, subsets
from nilpoly.nilgroup import abelian, constant_filtration, heisenberg, lower_central_series
from nilpoly.polymap import (
    MonomialSpec,
    NoLevelError,
    WeightVector,
    cardinality_power,
    commutator,
    conjugate,
    constant_map,
    derivative,
    equivalence_classes,
    equivalent,
    from_function,
    identity_map,
    inverse,
    ip_system,
    level,
    monomial_map,
    pet_step,
    product,
    random_monomial_spec,
    scalar_map,
    set_monomial_spec,
    symmetric_derivative,
    verify_polynomial,
    weight_vector,
)

Z = abelian(1)
Z2 = constant_filtration(Z, 2)
FULL = 0b1111
H = heisenberg()
LCS = lower_central_series(H)


def square(coeff=1, lin=0):
    return scalar_map(Z, FULL, lambda a: coeff * card(a) ** 2 + lin * card(a), filtration=Z2)


def test_derivative_tables():
    g = square()
    for beta in nonempty_subsets(FULL):
        D = derivative(g, beta)
        sD = symmetric_derivative(g, beta)
        for a in subsets(D.support):
            assert D(a) == (2 * card(a) * card(beta) + card(beta) ** 2,)
            assert sD(a) == (2 * card(a) * card(beta),)
            assert sD(a)[0] == D(a)[0] - g(beta)[0]
    assert derivative(g, 1).shift == 1


def test_additive_systems():
    n = {0: 3, 1: 5, 2: 7, 3: 11}
    g = ip_system(Z, FULL, {i: (v,) for i, v in n.items()}, constant_filtration(Z, 1))
    for beta in nonempty_subsets(FULL):
        D = derivative(g, beta)
        assert set(D.table.values()) == {(sum(n[i] for i in range(4) if beta >> i & 1),)}
        assert symmetric_derivative(g, beta).is_identity()
    assert verify_polynomial(g)
    assert not verify_polynomial(g, constant_filtration(Z, 0))


def test_constant_and_identity_maps():
    c = constant_map(H, FULL, (1, 2, 3), constant_filtration(H, 0))
    assert verify_polynomial(c)
    assert all(v == H.identity for v in derivative(c, 0b1).table.values())
    assert product(c, inverse(c)).is_identity()
    with pytest.raises(ValueError):
        symmetric_derivative(c, 0b1)


def test_homomorphism_images_are_polynomial():
    rng = random.Random(0)
    for _ in range(10):
        gens = {i: H.random_element(rng, 2) for i in range(4)}
        g = ip_system(H, FULL, gens, LCS)
        assert verify_polynomial(g)


def test_verification_cap():
    g = identity_map(Z, (1 << 6) - 1, Z2)
    with pytest.raises(CapExceededError):
        verify_polynomial(g)


def test_levels_and_equivalence():
    lin = cardinality_power(Z, FULL, 1, 1, Z2)
    dbl = cardinality_power(Z, FULL, 1, 2, Z2)
    sq = cardinality_power(Z, FULL, 2, 1, Z2)
    sq_lin = square(1, 1)
    assert level(lin, Z2) == 1
    assert level(sq, Z2) == 0
    assert equivalent(sq, sq_lin, Z2)
    assert not equivalent(lin, dbl, Z2)
    with pytest.raises(NoLevelError):
        level(identity_map(Z, FULL, Z2), Z2)


def test_weight_vectors():
    lin = cardinality_power(Z, FULL, 1, 1, Z2)
    dbl = cardinality_power(Z, FULL, 1, 2, Z2)
    sq = cardinality_power(Z, FULL, 2, 1, Z2)
    assert weight_vector([lin], Z2).as_dict() == {1: 1}
    assert weight_vector([lin, dbl, sq], Z2).as_dict() == {1: 2, 0: 1}
    assert weight_vector([]) == WeightVector()
    # a class at a lower level outweighs any number of classes above it
    assert WeightVector.from_dict({1: 5}) < WeightVector.from_dict({0: 1})
    assert WeightVector.from_dict({0: 1, 1: 1}) < WeightVector.from_dict({0: 1, 1: 2})


def test_pet_step_examples():
    lin = cardinality_power(Z, FULL, 1, 1, Z2)
    assert pet_step([lin], lin, [Z.identity], [0b1], Z2) == []
    sq = cardinality_power(Z, FULL, 2, 1, Z2)
    out = pet_step([sq], sq, [Z.identity], [0b1], Z2)
    assert len(out) == 1
    assert all(out[0](a) == (2 * card(a),) for a in out[0].table)
    assert weight_vector(out, Z2).as_dict() == {1: 1}
    with pytest.raises(ValueError):
        pet_step([sq, lin], sq, [Z.identity], [0b1], Z2)


def test_pet_step_rejects_bad_input():
    sq = cardinality_power(Z, FULL, 2, 1, Z2)
    with pytest.raises(ValueError):
        pet_step([sq], sq, [Z.identity], [0], Z2)


def test_conjugation_keeps_weight():
    rng = random.Random(1)
    for _ in range(10):
        g = monomial_map(random_vip_spec(rng, LCS, 3), LCS, 0b111)
        if g.is_identity():
            continue
        b = H.random_element(rng, 2)
        assert weight_vector([conjugate(g, b)], LCS) == weight_vector([g], LCS)
        assert equivalent(g, conjugate(g, b), LCS)


def test_monomial_maps():
    additive = MonomialSpec(((), (0,)), {((i,), 0): (i + 1,) for i in range(4)})
    g = monomial_map(additive, constant_filtration(Z, 1), FULL)
    assert g(0b1011) == (1 + 2 + 4,)
    const = MonomialSpec(((0,),), {((), 0): (3,)})
    c = monomial_map(const, constant_filtration(Z, 0), FULL)
    assert set(c.table.values()) == {(3,)}
    with pytest.raises(ValueError):
        monomial_map(MonomialSpec(((), (), (0,)), {((0, 1), 0): (1, 0, 0)}), LCS, 0b111)


def test_set_monomials_with_reindexed_filtration():
    rng = random.Random(2)
    d = 2
    F = LCS.reindex(d)
    values = {}
    for t in [(i, j) for i in range(3) for j in range(3)]:
        values[t] = (rng.randint(-2, 2), rng.randint(-2, 2), rng.randint(-2, 2))
    spec = set_monomial_spec(H, d, values)
    g = monomial_map(spec, F, 0b111)
    assert verify_polynomial(g, F)


def test_vip_values_in_first_level():
    rng = random.Random(3)
    F = LCS.reindex(2)
    for _ in range(10):
        g = monomial_map(random_vip_spec(rng, F, 3), F, 0b111)
        assert g.is_vip()
        assert all(F.contains(1, v) for v in g.table.values())


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_closure_on_random_maps(seed):
    rng = random.Random(seed)
    F = LCS.reindex(2)
    t0, t1 = rng.randint(0, 2), rng.randint(0, 2)
    g0 = monomial_map(random_monomial_spec(rng, F.shift(t0), 3, 2), F.shift(t0), 0b111).with_label(F, t0)
    g1 = monomial_map(random_monomial_spec(rng, F.shift(t1), 3, 2), F.shift(t1), 0b111).with_label(F, t1)
    assert verify_polynomial(product(g0, g1))
    assert verify_polynomial(inverse(g0))
    assert verify_polynomial(commutator(g0, g1))


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_equivalence_is_transitive_on_generated_families(seed):
    rng = random.Random(seed)
    maps = []
    while len(maps) < 4:
        g = monomial_map(random_vip_spec(rng, Z2, 3, bound=1), Z2, 0b111)
        if not g.is_identity():
            maps.append(g)
    classes = equivalence_classes(maps, Z2)
    for cls in classes:
        for i in cls:
            for j in cls:
                assert i == j or equivalent(maps[i], maps[j], Z2)
    for a in range(len(classes)):
        for b in range(a + 1, len(classes)):
            assert not equivalent(maps[classes[a][0]], maps[classes[b][0]], Z2)


def test_from_function_table():
    g = from_function(Z, 0b11, lambda a: (card(a),))
    assert g(0b11) == (2,)
    with pytest.raises(ValueError):
        g(0b100)
