import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilpoly.errors import CapExceededError
from nilpoly.ipcore import (
    Coloring,
    IPRing,
    card,
    elements,
    hindman_search,
    is_monochrome,
    mask,
    milliken_search,
    nonempty_subsets,
    ordered_tuples,
    precedes,
    ring_enumerate,
    singletons,
    star,
    subsets,
)

masks = st.integers(1, (1 << 10) - 1)


def test_precedes_examples():
    assert precedes(mask([0, 1]), mask([2]))
    assert not precedes(mask([0, 2]), mask([1, 3]))
    assert precedes(0, mask([5])) and precedes(mask([5]), 0)


@given(masks, masks, masks)
def test_precedes_is_transitive_and_irreflexive(a, b, c):
    assert not precedes(a, a)
    if precedes(a, b) and precedes(b, c):
        assert precedes(a, c)


@given(masks, masks, masks)
def test_disjoint_union_associative(a, b, c):
    if a & b or b & c or a & c:
        return
    assert star(star(a, b), c) == star(a, star(b, c))


def test_star_requires_disjoint():
    with pytest.raises(ValueError):
        star(0b11, 0b10)


def test_ring_enumerate_examples():
    assert ring_enumerate(IPRing((1,))) == [1]
    assert ring_enumerate(IPRing((1, 2))) == [1, 2, 3]
    r = IPRing((mask([0, 1]), mask([2, 3]), mask([5])))
    assert len(ring_enumerate(r)) == 7
    with pytest.raises(ValueError):
        IPRing((mask([0, 2]), mask([1])))


def test_subset_enumeration():
    assert sorted(subsets(0b101)) == [0, 1, 4, 5]
    assert len(list(nonempty_subsets(0b1111))) == 15
    pairs = list(ordered_tuples(4, 2))
    brute = [(a, b) for a in range(1, 16) for b in range(1, 16) if precedes(a, b)]
    assert sorted(pairs) == sorted(brute)


def test_hindman_examples():
    const = Coloring(5, 1, rule="constant")
    assert hindman_search(const, 5, 3).chain == (1, 2, 4)
    parity = Coloring(4, 2, rule="parity")
    r = hindman_search(parity, 4, 2)
    assert r is not None and is_monochrome(parity, r)
    assert all(card(a) % 2 == 0 for a in r.chain)


def test_hindman_not_found_is_reported():
    # color by the largest element mod 2 on ground 2: no chain of length 2 can be monochrome
    col = Coloring(2, 2, rule="max_mod", q=2)
    assert hindman_search(col, 2, 2) is None


def test_milliken_reduces_to_hindman():
    col = Coloring(6, 3, rule="card_mod", q=3)
    assert milliken_search(col, 6, 1, 2) == hindman_search(col, 6, 2)


def test_milliken_pairs_parity():
    col = Coloring(6, 2, rule="parity")
    r = milliken_search(col, 6, 2, 2)
    assert r is not None
    assert is_monochrome(col, r, arity=2)
    seen = set()
    for pos in ordered_tuples(r.k, 2):
        sets = tuple(r.union(p) for p in pos)
        seen.add((card(sets[0]) + card(sets[1])) % 2)
    assert len(seen) == 1


@given(st.lists(st.integers(0, 1), min_size=15, max_size=15))
def test_hindman_result_is_monochrome_and_agrees_with_brute_force(values):
    col = Coloring.from_list(4, values)
    r = hindman_search(col, 4, 2)
    if r is not None:
        assert is_monochrome(col, r)
    chains = [c for c in itertools.product(range(1, 16), repeat=2) if precedes(*c)]
    witnesses = [c for c in chains if is_monochrome(col, IPRing(c))]
    assert (r is not None) == bool(witnesses)


def test_parallel_search_matches_serial():
    col = Coloring(6, 2, rule="max_mod", q=3)
    assert hindman_search(col, 6, 2, jobs=2) == hindman_search(col, 6, 2)


def test_cap_and_json():
    with pytest.raises(CapExceededError):
        Coloring(64, 2, rule="parity")
    col = Coloring.from_list(3, [0, 1, 1, 0, 1, 0, 0])
    assert Coloring.from_json(col.to_json())(0b101) == col(0b101)
    assert elements(singletons(3, start=2).support) == [2, 3, 4]
