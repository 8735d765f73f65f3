"""Acceptance criteria 1-12, each printed as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import contextlib
import io
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from nilpoly import cli, genpoly, ipcore, pexpr, polymap, recurrence
from nilpoly.ipcore import Coloring, elements, nonempty_subsets, ordered_tuples, singletons, subsets
from nilpoly.nilgroup import (
    NotNilpotentError,
    Subgroup,
    abelian,
    constant_filtration,
    finite_index_test,
    free_nilpotent_class3_rank2,
    heisenberg,
    hirsch_length,
    infinite_dihedral,
    lower_central_series,
)

sys.path.insert(0, str(Path(__file__).parent))
from helpers import random_vip_spec  # noqa: E402

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # direct script run without pytest on the path
    ACCEPTANCE_LINES = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def random_polymaps(rng, F, count, ground=3, shift_choices=(0,)):
    """Verified monomial maps labelled ``F[+t]``."""
    support = (1 << ground) - 1
    out = []
    while len(out) < count:
        t = rng.choice(shift_choices)
        spec = polymap.random_monomial_spec(rng, F.shift(t), ground, min(3, F.length - t), bound=2)
        g = polymap.monomial_map(spec, F.shift(t), support).with_label(F, t)
        out.append(g)
    return out


# -- 1 ------------------------------------------------------------------------------------------


def test_criterion_01_group_laws():
    rng = random.Random(1)
    start = time.perf_counter()
    failures = 0
    checked = 0
    for G in (heisenberg(), free_nilpotent_class3_rank2()):
        e = G.identity
        for _ in range(500):
            a, b, c = (G.random_element(rng, 4) for _ in range(3))
            if G.mul(G.mul(a, b), c) != G.mul(a, G.mul(b, c)):
                failures += 1
            if G.mul(a, e) != a or G.mul(e, a) != a:
                failures += 1
            if G.mul(a, G.inv(a)) != e or G.mul(G.inv(a), a) != e:
                failures += 1
            checked += 1
    elapsed = time.perf_counter() - start
    report(1, failures == 0 and elapsed < 5, f"{checked} triples, {failures} failures, {elapsed:.2f}s (<5s)")


# -- 2 ------------------------------------------------------------------------------------------


def test_criterion_02_leibniz_and_commutator_derivative():
    rng = random.Random(2)
    G = heisenberg()
    F = lower_central_series(G).reindex(2)
    assert F.length == 4
    start = time.perf_counter()
    maps = random_polymaps(rng, F, 40)
    assert all(polymap.verify_polynomial(g) for g in maps)
    mul, comm = G.mul, G.comm
    failures = 0
    pairs = 0
    for _ in range(100):
        g0, g1 = rng.sample(maps, 2)
        pairs += 1
        for beta in nonempty_subsets(g0.support):
            D0 = polymap.derivative(g0, beta)
            D1 = polymap.derivative(g1, beta)
            Dp = polymap.derivative(polymap.product(g0, g1), beta)
            Dc = polymap.derivative(polymap.commutator(g0, g1), beta)
            for a in subsets(D0.support):
                x0, x1, d0, d1 = g0(a), g1(a), D0(a), D1(a)
                if Dp(a) != G.prod(d0, comm(d0, x1), d1):
                    failures += 1
                c01 = comm(x0, x1)
                rhs = G.prod(
                    comm(x0, d1),
                    comm(comm(x0, d1), c01),
                    comm(c01, d1),
                    comm(comm(x0, mul(x1, d1)), d0),
                    comm(d0, mul(x1, d1)),
                )
                if Dc(a) != rhs:
                    failures += 1
    elapsed = time.perf_counter() - start
    report(2, failures == 0 and elapsed < 30, f"{pairs} pairs, {failures} failures, {elapsed:.2f}s (<30s)")


# -- 3 ------------------------------------------------------------------------------------------


def test_criterion_03_closure():
    rng = random.Random(3)
    G = heisenberg()
    F = lower_central_series(G).reindex(2)
    maps = random_polymaps(rng, F, 40, shift_choices=(0, 1, 2))
    failures = 0
    for _ in range(100):
        g0, g1 = rng.sample(maps, 2)
        p = polymap.product(g0, g1)
        assert p.shift == min(g0.shift, g1.shift)
        c = polymap.commutator(g0, g1)
        assert c.shift == g0.shift + g1.shift
        i = polymap.inverse(g0)
        for h in (p, c, i):
            if not polymap.verify_polynomial(h):
                failures += 1
    report(3, failures == 0, f"300 composite maps with labels F[+min], F[+t0+t1], F[+t]; {failures} failures")


# -- 4 ------------------------------------------------------------------------------------------


def test_criterion_04_monomial_maps():
    rng = random.Random(4)
    G = heisenberg()
    failures = 0
    for k in range(50):
        d = 1 + k % 2
        F = lower_central_series(G).reindex(d)
        spec = polymap.random_monomial_spec(rng, F, 3, F.length, bound=2)
        g = polymap.monomial_map(spec, F, 0b111)
        if not polymap.verify_polynomial(g, F):
            failures += 1
    report(4, failures == 0, f"50 specs, d in (1, 2), {failures} failures")


# -- 5 ------------------------------------------------------------------------------------------


def _random_system(rng, F, ground, size):
    support = (1 << ground) - 1
    out = []
    while len(out) < size:
        spec = random_vip_spec(rng, F, ground)
        g = polymap.monomial_map(spec, F, support)
        if not g.is_identity() and not any(g.same_values(h) for h in out):
            out.append(g)
    return out


def test_criterion_05_pet_step():
    rng = random.Random(5)
    checked = failures = 0
    cases = [(constant_filtration(abelian(1), 3), 4), (lower_central_series(heisenberg()), 4)]
    for F, ground in cases:
        G = F.group
        for _ in range(50):
            A = _random_system(rng, F, ground, rng.randint(1, 3))
            levels = [polymap.level(g, F) for g in A]
            h = A[levels.index(max(levels))]
            M = [1 << rng.randrange(ground)]
            B = [G.identity] if rng.random() < 0.5 else [G.identity, G.random_element(rng, 2)]
            before = polymap.weight_vector(A, F)
            try:
                out = polymap.pet_step(A, h, B, M, F)
                after = polymap.weight_vector(out, F)
                ok = after < before
            except polymap.WeightCheckError:
                ok = False
            checked += 1
            failures += not ok
    Zc = constant_filtration(abelian(1), 2)
    Z = Zc.group
    sup = 0b1111
    example = [
        polymap.cardinality_power(Z, sup, 1, 1, Zc),
        polymap.cardinality_power(Z, sup, 1, 2, Zc),
        polymap.cardinality_power(Z, sup, 2, 1, Zc),
    ]
    w = polymap.weight_vector(example, Zc).as_dict()
    ok = failures == 0 and w == {1: 2, 0: 1}
    report(5, ok, f"{checked} systems, {failures} non-decreasing steps; example weight {w} (want {{1: 2, 0: 1}})")


# -- 6 ------------------------------------------------------------------------------------------


def _hindman_oracle_pairs():
    sets = list(range(1, 16))
    pairs = []
    for a in sets:
        for b in sets:
            if a.bit_length() - 1 < (b & -b).bit_length() - 1:
                pairs.append((a - 1, b - 1, (a | b) - 1))
    return pairs


def test_criterion_06_hindman_exhaustive():
    pairs = _hindman_oracle_pairs()
    start = time.perf_counter()
    disagreements = 0
    found_count = 0
    for bits in range(1 << 15):
        values = [(bits >> i) & 1 for i in range(15)]
        oracle = any(values[a] == values[b] == values[c] for a, b, c in pairs)
        got = ipcore.hindman_search(Coloring.from_list(4, values), 4, 2)
        if got is not None:
            found_count += 1
            if not ipcore.is_monochrome(Coloring.from_list(4, values), got):
                disagreements += 1
        if (got is not None) != oracle:
            disagreements += 1
    elapsed = time.perf_counter() - start
    report(6, disagreements == 0 and elapsed < 60,
           f"32768 colorings, {found_count} found, {disagreements} disagreements, {elapsed:.1f}s (<60s)")


# -- 7 ------------------------------------------------------------------------------------------

COSET_CAP = 120


def coset_count(G, H: Subgroup, cap: int = COSET_CAP):
    """Number of right cosets ``H g`` reached from ``H`` by generator steps, or ``None`` past ``cap``."""
    reps = [G.identity]
    queue = [G.identity]
    steps = [G.gen(k, s) for k in range(G.rank) for s in (1, -1)]
    while queue:
        r = queue.pop()
        for g in steps:
            x = G.mul(r, g)
            if any(H.contains(G.mul(x, G.inv(s))) for s in reps):
                continue
            reps.append(x)
            queue.append(x)
            if len(reps) > cap:
                return None
    return len(reps)


def _index_instances(rng):
    out = []
    while len(out) < 14:
        k = 1 + len(out) % 3
        G = abelian(k)
        gens = [tuple(rng.randint(-3, 3) for _ in range(k)) for _ in range(rng.randint(1, k))]
        if len(out) % 4 == 0:
            gens = gens[:-1] or [G.identity]
        out.append((G, gens))
    H = heisenberg()
    out += [
        (H, [(2, 0, 0), (0, 3, 0)]),
        (H, [(1, 0, 0), (0, 1, 0)]),
        (H, [(1, 1, 0), (0, 2, 1), (0, 0, 5)]),
        (H, [(1, 0, 0), (0, 0, 1)]),
        (H, [(2, 2, 0), (1, 1, 3)]),
        (H, [(0, 0, 1)]),
    ]
    return out


def test_criterion_07_finite_index():
    rng = random.Random(7)
    mismatches = 0
    finite = 0
    instances = _index_instances(rng)
    for G, gens in instances:
        H = Subgroup(G, gens)
        n = coset_count(G, H)
        finite += n is not None
        if (n is not None) != finite_index_test(gens, G):
            mismatches += 1
        elif n is not None and H.index() != n:
            mismatches += 1
    hh = hirsch_length([(1, 0, 0), (0, 1, 0)], heisenberg())
    hz = [hirsch_length([abelian(k).gen(i) for i in range(k)], abelian(k)) for k in (1, 2, 3, 4)]
    ok = mismatches == 0 and len(instances) == 20 and hh == 3 and hz == [1, 2, 3, 4]
    report(7, ok, f"{len(instances)} instances ({finite} of finite index), {mismatches} mismatches; h(Heisenberg)={hh}, h(Z^k)={hz}")


# -- 8 ------------------------------------------------------------------------------------------

FVIP_CASES = ["x1^2", "floor(sqrt(2)*x1)", "floor(sqrt(2)*x1)*floor(sqrt(3)*x1)"]


@pytest.mark.parametrize("expression", FVIP_CASES)
def test_criterion_08_fvip_pipeline(expression):
    sysm = genpoly.IPSystem.powers(24)
    start = time.perf_counter()
    res = genpoly.fvip_extract(expression, sysm, singletons(24), depth=4)
    problems = genpoly.replay(res.certificate) if res.found else ["not found"]
    elapsed = time.perf_counter() - start
    p = genpoly.parse(expression)
    shift_ok = res.found and (not p.admissible or res.shift == 0)
    ok = res.found and not problems and shift_ok and elapsed < 120
    report(8, ok, f"{expression}: found={res.found}, shift={res.shift}, admissible={p.admissible}, "
           f"replay problems={len(problems)}, {elapsed:.2f}s (<120s)")


# -- 9 ------------------------------------------------------------------------------------------


def random_arity2_expr(rng, G, F, ground):
    full = (1 << ground) - 1
    first = polymap.monomial_map(random_vip_spec(rng, F, ground), F, full)
    base = pexpr.from_map(first, ground)

    def layer(prefix):
        sup = pexpr.above(ground, prefix)
        return polymap.monomial_map(random_vip_spec(rng, F, ground), F, full).restrict(sup)

    return pexpr.from_layers(G, ground, 2, layer, base)


def random_beta(rng):
    length = rng.randint(2, 3)
    positions = list(range(length))
    cut = rng.randint(1, length - 1)
    b0 = sorted(rng.sample(positions[:cut], rng.randint(1, cut)))
    rest = positions[cut:]
    b1 = sorted(rng.sample(rest, rng.randint(1, len(rest))))
    return [b0, b1], length


def test_criterion_09_substitution_membership():
    rng = random.Random(9)
    G = heisenberg()
    F = lower_central_series(G)
    failures = 0
    for _ in range(50):
        g = random_arity2_expr(rng, G, F, 3)
        beta, length = random_beta(rng)
        h = pexpr.substitute(g, beta, length)
        rep = pexpr.check_pe_membership(h, lambda t: pexpr.substitution_reference(g, beta, t), F)
        failures += not rep.ok
    report(9, failures == 0, f"50 expressions, {failures} failures")


# -- 10 -----------------------------------------------------------------------------------------


def test_criterion_10_recurrence():
    rng = random.Random(10)
    start = time.perf_counter()
    rot = recurrence.rotation(12)
    sysm = genpoly.IPSystem.powers(5)
    chains = [ipcore.IPRing(t) for t in ordered_tuples(5, 3)]
    bad_rings = 0
    for _ in range(6):
        A = set(rng.sample(range(12), 7))
        assert rot.measure(A) == Fraction(7, 12)
        for chain in chains:
            rep = recurrence.recurrence_check(rot, A, [["x1"]], sysm, chain, 3)
            if not rep.positive or rep.minimum < Fraction(1, 6):
                bad_rings += 1
    hz = recurrence.heisenberg_translation(5)
    A = set(rng.sample(range(125), 75))
    rep = recurrence.recurrence_check(hz, A, [["x1"], ["x1^2"]], genpoly.IPSystem.powers(8), singletons(8), 3)
    rechecked = all(recurrence.recheck_witness(hz, A, [["x1"], ["x1^2"]], w) for w in rep.witnesses)
    elapsed = time.perf_counter() - start
    ok = bad_rings == 0 and rep.positive and rechecked and rep.mu_A == Fraction(3, 5) and elapsed < 60
    report(10, ok, f"Z12: {6 * len(chains)} rings, {bad_rings} below 1/6; Heisenberg mod 5: "
           f"min {rep.minimum}, {len(rep.witnesses)} witnesses, {elapsed:.1f}s (<60s)")


# -- 11 -----------------------------------------------------------------------------------------


def test_criterion_11_non_nilpotence():
    G = infinite_dihedral()
    cap = 6
    with pytest.raises(NotNilpotentError) as info:
        lower_central_series(G, cap)
    layers = info.value.layers
    ok = len(layers) == cap + 1
    for i, gens in enumerate(layers[1:], start=1):
        H = Subgroup(G, gens)
        ok &= H.contains(G.gen(1, 2**i)) and not H.contains(G.gen(1, 2 ** (i - 1))) and not H.contains(G.gen(0))
    report(11, ok, f"cap {cap}: layers {[[list(g) for g in l] for l in layers[1:]]} equal 2^i Z")


# -- 12 -----------------------------------------------------------------------------------------

HJ_SYSTEM = json.dumps({"exprs": [
    {"identity": 1},
    {"map": {"group": "Z^1", "ground": 4,
             "backing": {"power": {"base": [1], "genpoly": "x1", "ipsys": "powers:4"}}}},
]})
PAIR_PROBLEM = Path(__file__).parent / "data" / "pair_problem.json"

SEARCH_CORPUS = [
    ["ip", "hindman", "--rule", "parity", "--ground", "4", "--chain", "2"],
    ["ip", "hindman", "--rule", "max_mod", "--q", "3", "--ground", "6", "--chain", "2"],
    ["ip", "hindman", "--rule", "card_mod", "--q", "3", "--ground", "5", "--chain", "3"],
    ["ip", "milliken", "--rule", "max_mod", "--ground", "6", "--chain", "2", "--arity", "2"],
    ["gp", "fvip", "x1^2", "--depth", "4"],
    ["gp", "fvip", "floor(sqrt(2)*x1)", "--depth", "4"],
    ["hj", "search", "--group", "Z^1", "--system", HJ_SYSTEM, "--coloring", '{"coordinate": 0, "modulus": 3}',
     "--ground", "4", "--s-window", "[[0], [1], [2]]"],
    ["hj", "metric", "--group", "Z^1", "--space", '{"discrete": 6, "action": [[1, 2, 3, 4, 5, 0]]}',
     "--system", HJ_SYSTEM, "--eps", "1/2", "--ground", "4"],
    ["hj", "pair", "--problem", str(PAIR_PROBLEM)],
    ["recur", "check", "--system", "rotation:12", "--A", "[0, 1, 2, 3, 4, 5, 6]", "--polys", '[["x1"]]'],
    ["recur", "check", "--system", "heisenberg:5", "--A", json.dumps(list(range(0, 125, 2)) + [1, 3, 5, 7, 9, 11, 13]),
     "--polys", '[["x1"], ["x1^2"]]'],
]


def run_cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.run(argv)
    return code, buf.getvalue()


def test_criterion_12_determinism():
    differing = []
    for argv in SEARCH_CORPUS:
        outs = {run_cli(["--jobs", str(j)] + argv) for j in (1, 2, 8)}
        if len(outs) != 1 or next(iter(outs))[0] not in (0, 1):
            differing.append(" ".join(argv[:2]))
    report(12, not differing, f"{len(SEARCH_CORPUS)} search invocations x workers (1, 2, 8); differing: {differing}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
