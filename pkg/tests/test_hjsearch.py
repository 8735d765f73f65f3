from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilpoly.errors import CapExceededError
from nilpoly.hjsearch import (
    ColoringSpace,
    HJWitness,
    MetricSpace,
    check_hj_witness,
    check_metric_witness,
    check_pair_witness,
    hj_search,
    hj_trace,
    identity_in,
    metric_orbit_search,
    pair_color_search,
    right_action_check,
)
from nilpoly.ipcore import card, elements, ordered_tuples
from nilpoly.nilgroup import abelian, heisenberg
from nilpoly.pexpr import from_map, identity_expr, substitute
from nilpoly.polymap import cardinality_power, from_function, ip_system

Z = abelian(1)


def card_expr(ground, degree=1, coeff=1):
    return from_map(cardinality_power(Z, (1 << ground) - 1, degree, coeff))


def test_parity_coloring_least_witness():
    A = [identity_in(Z, 4, 1), card_expr(4)]
    w = hj_search(ColoringSpace.by_coordinate(Z, 0, 2), A, 4, [(0,), (1,)])
    assert w.s == (0,)
    assert [elements(a) for a in w.alphas] == [[0, 1]]
    assert w.color == 0


def test_search_requires_identity():
    with pytest.raises(ValueError):
        hj_search(ColoringSpace.constant(Z), [card_expr(3)], 3, [(0,)])


def test_search_caps():
    A = [identity_in(Z, 9, 1)]
    with pytest.raises(CapExceededError):
        hj_search(ColoringSpace.constant(Z), A, 9, [(0,)])
    with pytest.raises(CapExceededError):
        hj_search(ColoringSpace.constant(Z), [identity_in(Z, 2, 1)], 2, [(i,) for i in range(600)])


@settings(max_examples=40)
@given(st.lists(st.integers(0, 2), min_size=12, max_size=12), st.integers(1, 2))
def test_search_matches_brute_force(colors, degree):
    """Integers colored by a table on [-6, 6), two-term system {e, x^{|a|^d}}."""
    ground = 3
    table = {(i - 6,): c for i, c in enumerate(colors)}
    space = ColoringSpace.from_table(Z, table, default=-1)
    A = [identity_in(Z, ground, 1), card_expr(ground, degree)]
    window = [(s,) for s in range(-6, 0)]
    got = hj_search(space, A, ground, window)
    expected = None
    for (s,) in window:
        for (a,) in ordered_tuples(ground, 1):
            other = s + card(a) ** degree
            if table.get((s,), -1) == table.get((other,), -1):
                expected = ((s,), a)
                break
        if expected:
            break
    if expected is None:
        assert got is None
    else:
        assert (got.s, got.alphas[0]) == expected
        assert check_hj_witness(space, A, got)


def test_heisenberg_coordinate_coloring_replays():
    H = heisenberg(3)
    ground = 3
    sup = (1 << ground) - 1
    g = ip_system(H, sup, {0: H.gen(0), 1: H.gen(1), 2: H.mul(H.gen(0), H.gen(1))})
    A = [identity_in(H, ground, 1), from_map(g)]
    space = ColoringSpace.by_coordinate(H, 2, 3)
    window = list(H.elements())[:9]
    w = hj_search(space, A, ground, window)
    assert w is not None
    assert check_hj_witness(space, A, w)
    assert w == hj_search(space, A, ground, window, jobs=2)


def test_tampered_witness_fails():
    A = [identity_in(Z, 4, 1), card_expr(4)]
    space = ColoringSpace.by_coordinate(Z, 0, 2)
    w = hj_search(space, A, 4, [(0,)])
    assert not check_hj_witness(space, A, HJWitness(w.s, (0b1,), w.color))


def test_right_action_heisenberg():
    H = heisenberg(3)
    space = ColoringSpace.by_coordinate(H, 2, 3)
    elems = list(H.elements())[:6]
    assert right_action_check(space, elems) == []


def rotation_space(N):
    return MetricSpace.discrete(Z, N, [[(i + 1) % N for i in range(N)]])


def test_metric_rotation_returns_on_multiples():
    space = rotation_space(4)
    assert space.validate() == []
    A = [identity_in(Z, 4, 1), card_expr(4)]
    w = metric_orbit_search(space, A, Fraction(1, 2), 4, [(0,)], x=0)
    assert elements(w.alphas[0]) == [0, 1, 2, 3]
    assert check_metric_witness(space, A, Fraction(1, 2), 0, w)
    assert metric_orbit_search(space, A, Fraction(1, 2), 3, [(0,)], x=0) is None


def test_metric_validate_rejects_bad_action():
    bad = MetricSpace(Z, [[0, 1, 2], [1, 0, 1], [2, 1, 0]], [[1, 2, 0]])
    assert any("isometry" in p for p in bad.validate())


def test_trace_pigeonhole():
    space = rotation_space(3)
    g = cardinality_power(Z, 0b1111, 1)
    steps, w = hj_trace(space, g, 0, [1, 2, 4, 8])
    assert [s.point for s in steps] == [1, 2, 0, 1]
    assert card(w.alphas[0]) == 3 and w.distances == [0]


def test_trace_rejects_non_multiplicative():
    with pytest.raises(ValueError):
        hj_trace(rotation_space(3), cardinality_power(Z, 0b111, 2), 0, [1, 2, 4])


def test_pair_search_from_problem_file():
    ground = 3
    length = 2
    R = [identity_expr(Z, ground, 1), card_expr(ground)]
    W = []
    ident2 = identity_expr(Z, ground, 2)
    window = [
        (ident2, ident2),
        (substitute(R[1], [[0]], length), ident2),
        (substitute(R[1], [[1]], length), ident2),
        (substitute(R[1], [[0, 1]], length), ident2),
    ]
    colors = [0, 1, 1, 0]
    w = pair_color_search(R, W, colors.__getitem__, window, length)
    assert w is not None and w.index == 0
    assert [elements(b) for b in w.alphas] == [[0, 1]]
    assert check_pair_witness(R, W, colors.__getitem__, window, length, w)
    assert pair_color_search(R, W, lambda j: j, window, length) is None
