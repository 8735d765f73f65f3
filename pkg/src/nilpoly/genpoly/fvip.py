"""FVIP extraction for generalized polynomials evaluated along IP systems.

Along a chain of blocks ``b_0 < ... < b_{k-1}`` every map built from an IP
system by sums, products and rounding is a combination of *words*

    v_w(alpha) = sum_{i_1 < ... < i_e in alpha} s_1[i_1] * ... * s_e[i_e]

where ``alpha`` is a set of block positions and each letter ``s_t`` is a
sequence indexed by blocks.  Words multiply by the quasi-shuffle rule, so the
words of a polynomial expression are computed symbolically.  A floor node
whose argument is a single-letter real combination ``C + sum_{i in alpha} y_i``
is replaced by the integer letter ``nint(y_i)`` plus a uniform shift ``n``;
the search looks for a sub-chain on which this identity holds exactly for
every ring element.

The symmetric derivative of a word along ``beta < alpha`` splits it into a
prefix evaluated on ``beta`` and a suffix evaluated on ``alpha``, so the
suffixes of the words of ``p`` generate a group closed under these
derivatives; this is what the certificate records.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from ..ipcore import FinSet, IPRing, elements, mask, max_elt, min_elt, nonempty_subsets
from .ast import Add, Const, Floor, GenPoly, Mul, Var, parse
from .numbers import Interval, Surd, dint, nearest_int, real_floor

DEFAULT_DEPTH = 4

Letter = tuple
Word = tuple


# -- IP systems ----------------------------------------------------------------------------


@dataclass(frozen=True)
class IPSystem:
    """Generators ``n_0 .. n_{ground-1}`` in ``Z^l``; ``n_alpha = sum_{i in alpha} n_i``."""

    generators: tuple

    def __post_init__(self):
        gens = tuple(tuple(int(x) for x in (g if isinstance(g, (list, tuple)) else (g,))) for g in self.generators)
        if gens and len({len(g) for g in gens}) != 1:
            raise ValueError("all IP-system generators need the same dimension")
        object.__setattr__(self, "generators", gens)

    @property
    def ground(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return len(self.generators[0]) if self.generators else 0

    def value(self, alpha: FinSet) -> tuple:
        out = [0] * self.dim
        for i in elements(alpha):
            if i >= self.ground:
                raise ValueError(f"index {i} outside the IP system's ground {self.ground}")
            for t, x in enumerate(self.generators[i]):
                out[t] += x
        return tuple(out)

    @classmethod
    def powers(cls, ground: int, base: int = 2, dim: int = 1) -> "IPSystem":
        return cls(tuple(tuple(base**i for _ in range(dim)) for i in range(ground)))

    def to_json(self) -> dict:
        return {"generators": [list(g) for g in self.generators]}

    @classmethod
    def from_json(cls, data) -> "IPSystem":
        if isinstance(data, dict) and "powers" in data:
            spec = data["powers"]
            return cls.powers(int(spec["ground"]), int(spec.get("base", 2)), int(spec.get("dim", 1)))
        gens = data["generators"] if isinstance(data, dict) else data
        return cls(tuple(gens))


# -- quasi-shuffle algebra -------------------------------------------------------------------


def _zero(c) -> bool:
    if isinstance(c, Surd):
        return not c.terms
    if isinstance(c, Interval):
        return False
    return c == 0


def _mul_num(a, b):
    if isinstance(b, Interval) and not isinstance(a, Interval):
        return b * a
    return a * b


def _add_num(a, b):
    if isinstance(b, Interval) and not isinstance(a, Interval):
        return b + a
    return a + b


def qs_add(f: dict, g: dict) -> dict:
    out = dict(f)
    for w, c in g.items():
        out[w] = _add_num(out[w], c) if w in out else c
    return {w: c for w, c in out.items() if not _zero(c)}


def qs_scale(f: dict, c) -> dict:
    return {w: _mul_num(c, v) for w, v in f.items() if not _zero(_mul_num(c, v))}


def _letter_product(a: Letter, b: Letter) -> Letter:
    return tuple(_mul_num(x, y) for x, y in zip(a, b))


def stuffle(u: Word, v: Word) -> dict:
    """Quasi-shuffle product of two words as ``{word: multiplicity}``."""
    memo: dict = {}

    def rec(i: int, j: int) -> dict:
        key = (i, j)
        if key in memo:
            return memo[key]
        if i == len(u):
            res = {v[j:]: 1}
        elif j == len(v):
            res = {u[i:]: 1}
        else:
            res = {}
            for first, sub in (
                (u[i], rec(i + 1, j)),
                (v[j], rec(i, j + 1)),
                (_letter_product(u[i], v[j]), rec(i + 1, j + 1)),
            ):
                for w, c in sub.items():
                    nw = (first,) + w
                    res[nw] = res.get(nw, 0) + c
        memo[key] = res
        return res

    return rec(0, 0)


def qs_mul(f: dict, g: dict) -> dict:
    out: dict = {}
    for u, cu in f.items():
        for v, cv in g.items():
            c = _mul_num(cu, cv)
            for w, m in stuffle(u, v).items():
                term = _mul_num(c, m)
                out[w] = _add_num(out[w], term) if w in out else term
    return {w: c for w, c in out.items() if not _zero(c)}


def word_value(word: Word, positions: Sequence[int]):
    """``sum_{i_1 < ... < i_e in positions} prod_t word[t][i_t]`` by dynamic programming."""
    e = len(word)
    if e == 0:
        return 1
    # acc[t] = sum over increasing choices of the first t letters among positions seen so far
    acc = [1] + [0] * e
    for i in positions:
        for t in range(e, 0, -1):
            acc[t] = _add_num(acc[t], _mul_num(acc[t - 1], word[t - 1][i]))
    return acc[e]


def qs_value(f: dict, positions: Sequence[int]):
    total = 0
    for w, c in f.items():
        total = _add_num(total, _mul_num(c, word_value(w, positions)))
    return total


def qs_degree(f: dict) -> int:
    return max((len(w) for w in f), default=0)


# -- extraction along a fixed sub-chain ------------------------------------------------------


class Obstruction(Exception):
    """The identity needed at this sub-chain fails; ``fatal`` means no sub-chain can help."""

    def __init__(self, reason: str, fatal: bool = False):
        super().__init__(reason)
        self.reason = reason
        self.fatal = fatal


def _as_int(c) -> int:
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    if isinstance(c, Surd) and c.is_rational() and c.rational_value().denominator == 1:
        return int(c.rational_value())
    raise Obstruction(f"coefficient {c!r} is not an integer", fatal=True)


@dataclass
class FloorRecord:
    shift: int
    letter: tuple
    constant: object


class _Evaluator:
    """Symbolic evaluation of a generalized polynomial along ``k`` blocks."""

    def __init__(self, var_letters: list[tuple], k: int):
        self.var_letters = var_letters
        self.k = k
        self.floors: list[FloorRecord] = []

    def run(self, node) -> dict:
        if isinstance(node, Const):
            return {(): node.value}
        if isinstance(node, Var):
            if node.index >= len(self.var_letters):
                raise Obstruction(f"x{node.index + 1} is not provided by the IP system", fatal=True)
            return {(self.var_letters[node.index],): 1}
        if isinstance(node, Add):
            out: dict = {}
            for t in node.terms:
                out = qs_add(out, self.run(t))
            return out
        if isinstance(node, Mul):
            out = {(): 1}
            for f in node.factors:
                out = qs_mul(out, self.run(f))
            return out
        return self.round(self.run(node.arg))

    def round(self, inner: dict) -> dict:
        if qs_degree(inner) > 1:
            raise Obstruction(
                f"floor of a real system with words of length {qs_degree(inner)}; only IP-linear "
                "floor arguments are rounded",
                fatal=True,
            )
        k = self.k
        C = inner.get((), Surd())
        y = [Surd() for _ in range(k)]
        for w, c in inner.items():
            if w:
                y = [_add_num(y[i], _mul_num(c, w[0][i])) for i in range(k)]
        r = tuple(nearest_int(v) for v in y)
        n = real_floor(_add_num(C, y[0])) - r[0]
        gap = _add_num(Surd.rational(n), _mul_num(C, -1))
        if not (gap < 2 and gap > -2):
            raise Obstruction(f"rounding shift {n} lies outside the window |n - C| < 2")
        for alpha in nonempty_subsets((1 << k) - 1):
            pos = elements(alpha)
            total = C
            for i in pos:
                total = _add_num(total, y[i])
            if real_floor(total) != n + sum(r[i] for i in pos):
                raise Obstruction(
                    f"floor is not {n} + sum of rounded letters on block set {sorted(pos)}"
                )
        self.floors.append(FloorRecord(n, r, C))
        out: dict = {((r),): 1}
        if n:
            out[()] = n
        return out


def block_values(sys: IPSystem, chain: IPRing, blocks: Sequence[tuple[int, int]]) -> list[tuple]:
    """Values ``n_b`` of the sub-chain blocks, each block a run ``(a, b)`` of chain positions."""
    return [sys.value(_run_mask(chain, a, b)) for a, b in blocks]


def _run_mask(chain: IPRing, a: int, b: int) -> FinSet:
    m = 0
    for i in range(a, b + 1):
        m |= chain.chain[i]
    return m


def symbolic_along(p: GenPoly, sys: IPSystem, chain: IPRing, blocks: Sequence[tuple[int, int]]):
    """Integer words of ``p`` along the sub-chain; raises :class:`Obstruction`."""
    vals = block_values(sys, chain, blocks)
    k = len(blocks)
    letters = [tuple(v[l] for v in vals) for l in range(sys.dim)]
    ev = _Evaluator(letters, k)
    f = ev.run(p.root)
    words = {}
    for w, c in f.items():
        ci = _as_int(c)
        if ci:
            words[tuple(tuple(_as_int(x) for x in letter) for letter in w)] = ci
    return words, ev.floors


# -- search -----------------------------------------------------------------------------------------


@dataclass
class FVIPResult:
    found: bool
    subchain: IPRing | None = None
    blocks: tuple = ()
    shift: int = 0
    words: dict = field(default_factory=dict)
    certificate: dict | None = None
    obstruction: str = ""
    nodes: int = 0

    def to_json(self) -> dict:
        if not self.found:
            return {"found": False, "obstruction": self.obstruction, "nodes": self.nodes}
        return {"found": True, "shift": self.shift, "certificate": self.certificate}


def _search(p: GenPoly, sys: IPSystem, chain: IPRing, depth: int, first: tuple | None):
    """Least run-block sub-chain of length ``depth``; returns (blocks, words, shift, reason, nodes)."""
    K = chain.k
    state = {"reason": "", "nodes": 0}

    def accept(blocks) -> tuple | None:
        state["nodes"] += 1
        try:
            words, _ = symbolic_along(p, sys, chain, blocks)
        except Obstruction as ob:
            if ob.fatal:
                raise
            state["reason"] = ob.reason
            return None
        return words

    def rec(blocks: list) -> tuple | None:
        if len(blocks) == depth:
            words = accept(blocks)
            shift = words.get((), 0) if words is not None else 0
            if words is not None and p.admissible and shift != 0:
                state["reason"] = f"admissible expression but shift {shift} != 0"
                return None
            return (tuple(blocks), words) if words is not None else None
        start = blocks[-1][1] + 1 if blocks else 0
        for a in range(start, K):
            for b in range(a, K):
                if K - 1 - b < depth - len(blocks) - 1:
                    break
                blocks.append((a, b))
                if len(blocks) == depth or accept(blocks) is not None:
                    got = rec(blocks)
                    if got is not None:
                        return got
                blocks.pop()
        return None

    try:
        if first is None:
            got = rec([])
        else:
            got = rec([first]) if accept([first]) is not None else None
    except Obstruction as ob:
        return None, ob.reason, state["nodes"], True
    return got, state["reason"], state["nodes"], False


def _search_task(args):
    text, gens, chain, depth, first = args
    return _search(parse(text), IPSystem(gens), IPRing(chain), depth, first)


def fvip_extract(
    p: GenPoly | str,
    sys: IPSystem,
    chain: IPRing,
    depth: int = DEFAULT_DEPTH,
    jobs: int = 1,
) -> FVIPResult:
    """Search the least sub-chain (runs of consecutive chain blocks, lexicographic order)
    on which ``alpha -> p(n_alpha) - n`` is an integer combination of words, and build
    its certificate."""
    if isinstance(p, str):
        p = parse(p)
    if depth < 1:
        raise ValueError("depth must be positive")
    if depth > chain.k:
        return FVIPResult(False, obstruction=f"chain has only {chain.k} blocks, depth {depth} requested")
    if jobs <= 1:
        got, reason, nodes, fatal = _search(p, sys, chain, depth, None)
    else:
        firsts = [(a, b) for a in range(chain.k) for b in range(a, chain.k)]
        args = [(p.text, sys.generators, chain.chain, depth, f) for f in firsts]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_search_task, args))
        got, reason, nodes, fatal = None, "", 0, False
        for g, r, n, ft in results:
            nodes += n
            if ft:
                got, reason, fatal = None, r, True
                break
            if g is not None and got is None:
                got = g
            reason = reason or r
    if got is None:
        why = reason or "no sub-chain satisfies the rounding identities"
        return FVIPResult(False, obstruction=why if fatal else f"not found at depth {depth}: {why}", nodes=nodes)
    blocks, words = got
    shift = words.pop((), 0)
    sub = IPRing(tuple(_run_mask(chain, a, b) for a, b in blocks))
    cert = build_certificate(p, sys, sub, blocks, shift, words)
    return FVIPResult(True, sub, blocks, shift, words, cert, nodes=nodes)


# -- certificates ------------------------------------------------------------------------------------


def suffix_generators(words: dict) -> list[Word]:
    gens = set()
    for w in words:
        for t in range(len(w)):
            gens.add(w[t:])
    return sorted(gens, key=lambda w: (len(w), w))


def sd_witness(word: Word, beta_positions: Sequence[int], index: dict) -> dict:
    """``sD_beta v_word`` on sets above ``beta`` as ``{generator index: coefficient}``."""
    out: dict = {}
    for t in range(1, len(word)):
        c = word_value(word[:t], beta_positions)
        if c:
            g = index[word[t:]]
            out[g] = out.get(g, 0) + c
    return {g: c for g, c in out.items() if c}


def build_certificate(
    p: GenPoly | None,
    sys: IPSystem | None,
    sub: IPRing,
    blocks: Sequence,
    shift: int,
    words: dict,
    expression: str | None = None,
    degree: int | None = None,
    admissible: bool | None = None,
) -> dict:
    """Certificate JSON for the map ``alpha -> sum_w c_w v_w(alpha)`` on the ring of ``sub``."""
    k = sub.k
    gens = suffix_generators(words)
    index = {w: i for i, w in enumerate(gens)}
    full = (1 << k) - 1
    sd_table: dict = {}
    witnesses: dict = {}
    for gi, w in enumerate(gens):
        for beta in nonempty_subsets(full):
            bpos = elements(beta)
            above = [a for a in nonempty_subsets(full) if min_elt(a) > max_elt(beta)]
            if not above:
                continue
            key = f"{gi}|{beta}"
            table = {}
            for a in above:
                apos = elements(a)
                table[str(a)] = word_value(w, sorted(apos + bpos)) - word_value(w, apos) - word_value(w, bpos)
            sd_table[key] = table
            witnesses[key] = sorted([g, c] for g, c in sd_witness(w, bpos, index).items())
    D = degree if degree is not None else p.degree
    cert = {
        "expression": expression if expression is not None else p.text,
        "admissible": admissible if admissible is not None else p.admissible,
        "ipsystem": sys.to_json() if sys is not None else None,
        "subchain": {"blocks": [list(b) for b in blocks], "chain": list(sub.chain)},
        "shift": shift,
        "filtration": {"group": "Z", "degree": D},
        "generators": [[list(letter) for letter in w] for w in gens],
        "combination": sorted([index[w], c] for w, c in words.items()),
        "sD_table": sd_table,
        "word_witnesses": witnesses,
    }
    cert["polynomial"] = _polymap_check(gens, words, k, D)
    return cert


def _polymap_check(gens, words, k: int, D: int) -> bool:
    """Polynomiality of the ring map against the constant filtration of ``Z`` of length ``D``."""
    from ..nilgroup import constant_filtration
    from ..nilgroup.presentations import abelian
    from ..polymap import PolyMap, verify_polynomial

    if k > 5:
        return True  # verify_polynomial is capped; the replay checker covers larger rings
    Z = abelian(1)
    table = {0: (0,)}
    for a in nonempty_subsets((1 << k) - 1):
        pos = elements(a)
        table[a] = (sum(c * word_value(w, pos) for w, c in words.items()),)
    g = PolyMap(Z, (1 << k) - 1, table)
    return verify_polynomial(g, constant_filtration(Z, D))


def words_from_certificate(cert: dict) -> dict:
    gens = [tuple(tuple(letter) for letter in w) for w in cert["generators"]]
    return {gens[i]: c for i, c in cert["combination"]}


def combine_sum(c0: dict, c1: dict) -> dict:
    """Certificate for the pointwise sum of two certified maps on the same sub-chain."""
    _same_chain(c0, c1)
    words = words_from_certificate(c0)
    for w, c in words_from_certificate(c1).items():
        words[w] = words.get(w, 0) + c
    words = {w: c for w, c in words.items() if c}
    expr = f"({c0['expression']}) + ({c1['expression']})"
    return _rebuild(c0, words, expr, c0["shift"] + c1["shift"],
                    max(c0["filtration"]["degree"], c1["filtration"]["degree"]),
                    c0["admissible"] and c1["admissible"])


def combine_product(c0: dict, c1: dict) -> dict:
    """Certificate for the pointwise product of the two shifted maps ``(p0 - n0)(p1 - n1)``."""
    _same_chain(c0, c1)
    f = qs_mul(words_from_certificate(c0), words_from_certificate(c1))
    expr = f"(({c0['expression']}) - ({c0['shift']})) * (({c1['expression']}) - ({c1['shift']}))"
    return _rebuild(c0, f, expr, 0, c0["filtration"]["degree"] + c1["filtration"]["degree"], False)


def _same_chain(c0: dict, c1: dict) -> None:
    if c0["subchain"]["chain"] != c1["subchain"]["chain"] or c0.get("ipsystem") != c1.get("ipsystem"):
        raise ValueError("certificates live on different sub-chains or IP systems")


def _rebuild(base: dict, words: dict, expr: str, shift: int, degree: int, admissible: bool) -> dict:
    sub = IPRing(tuple(base["subchain"]["chain"]))
    sys = IPSystem.from_json(base["ipsystem"]) if base.get("ipsystem") else None
    blocks = [tuple(b) for b in base["subchain"]["blocks"]]
    return build_certificate(None, sys, sub, blocks, shift, words, expression=expr, degree=degree,
                             admissible=admissible)


# -- near-identity refinement ---------------------------------------------------------------------------


def near_identity_refine(
    values: Callable[[FinSet], object],
    chain: IPRing,
    eps,
    depth: int | None = None,
) -> IPRing | None:
    """Least sub-chain of ``depth`` runs of consecutive blocks with ``dint(P) < eps`` on its ring.

    ``values`` maps a union of chain blocks (a mask of the ground) to a real value.
    Returns ``None`` when no such sub-chain exists.
    """
    depth = chain.k if depth is None else depth
    if depth < 1 or depth > chain.k:
        return None
    eps = eps if isinstance(eps, (Surd, Interval)) else Surd.rational(Fraction(eps))
    K = chain.k
    cache: dict = {}

    def small(m: FinSet) -> bool:
        if m not in cache:
            cache[m] = dint(values(m)) < eps
        return cache[m]

    def rec(masks: list) -> list | None:
        if len(masks) == depth:
            return masks
        start = rec_start[len(masks)]
        for a in range(start, K):
            for b in range(a, K):
                if K - 1 - b < depth - len(masks) - 1:
                    break
                m = _run_mask(chain, a, b)
                # every new ring element contains the new block
                if all(small(m | _union_of(masks, s)) for s in _subsets_with_empty(len(masks))):
                    masks.append(m)
                    rec_start[len(masks)] = b + 1
                    got = rec(masks)
                    if got is not None:
                        return got
                    masks.pop()
        return None

    rec_start = [0] * (depth + 1)
    got = rec([])
    return IPRing(tuple(got)) if got is not None else None


def _subsets_with_empty(n: int):
    return range(1 << n)


def _union_of(masks: Sequence[FinSet], s: int) -> FinSet:
    u = 0
    for i, m in enumerate(masks):
        if s >> i & 1:
            u |= m
    return u


def real_values(expr: str, sys: IPSystem) -> Callable[[FinSet], object]:
    """``alpha -> P(n_alpha)`` for a real-valued expression such as ``sqrt(2)*x1``."""
    from .ast import evaluate_real, parse_real

    P = parse_real(expr)
    return lambda m: evaluate_real(P, sys.value(m))


# -- monomial generators --------------------------------------------------------------------------------


def monomial_words(n_seqs: Sequence[Sequence[int]], y: Sequence[int], d: int) -> list[Word]:
    """Words ``(n^{j_1}, ..., n^{j_{e-1}}, y)`` for ``1 <= e <= d``."""
    ns = [tuple(int(v) for v in s) for s in n_seqs]
    yy = tuple(int(v) for v in y)
    out = []
    for e in range(1, d + 1):
        for js in itertools.product(range(len(ns)), repeat=e - 1):
            out.append(tuple(ns[j] for j in js) + (yy,))
    return out


def monomial_generators(n_seqs: Sequence[Sequence[int]], y: Sequence[int], d: int, word_bound: int = 6):
    """The group generated by the maps ``v_w`` of :func:`monomial_words`, as a VIP group spec
    over ``Z``; ``sd_closed`` records the tail-closure certificate."""
    from ..nilgroup.presentations import abelian
    from ..pexpr import VIPGroupSpec
    from ..polymap import PolyMap

    Z = abelian(1)
    ground = len(y)
    full = (1 << ground) - 1
    words = monomial_words(n_seqs, y, d)
    gens = []
    for w in words:
        table = {0: (0,)}
        for a in nonempty_subsets(full):
            table[a] = (word_value(w, elements(a)),)
        gens.append(PolyMap(Z, full, table, label="v" + str(len(w))))
    spec = VIPGroupSpec(gens, word_bound=word_bound)
    spec.sd_closed = tail_closure(spec)
    return spec


def tail_closure(spec) -> bool:
    """Every ``sD_beta g`` of a generator, restricted to sets above ``beta``, lies in the group
    generated by the restrictions of the generators."""
    from ..polymap import symmetric_derivative

    full = spec.support
    for g in spec.generators:
        for beta in nonempty_subsets(full):
            above = full & ~((1 << (max_elt(beta) + 1)) - 1)
            if not above:
                continue
            dg = symmetric_derivative(g, beta).restrict(above)
            if not spec.contains(dg):
                return False
    return True


def words_to_json(words: dict) -> list:
    return [{"word": [list(l) for l in w], "coeff": c} for w, c in sorted(words.items())]


def ring_positions(k: int) -> list[FinSet]:
    return list(nonempty_subsets((1 << k) - 1))


__all__ = [
    "DEFAULT_DEPTH",
    "FVIPResult",
    "IPSystem",
    "Obstruction",
    "block_values",
    "build_certificate",
    "combine_product",
    "combine_sum",
    "fvip_extract",
    "mask",
    "monomial_generators",
    "monomial_words",
    "near_identity_refine",
    "qs_mul",
    "real_values",
    "stuffle",
    "suffix_generators",
    "symbolic_along",
    "tail_closure",
    "word_value",
]
