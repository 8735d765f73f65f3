"""Exhaustive finitary searches for nilpotent Hales-Jewett configurations.

All searches run over explicit windows: group elements ``s`` in a given list
and ordered tuples ``a_1 < ... < a_m`` of nonempty subsets of
``{0..ground-1}``.  Candidates are visited window-first, then tuples in
lexicographic order of their masks, so the first witness is the least one and
``None`` proves absence inside the window.  Every witness can be replayed by
the ``check_*`` functions, which recompute group elements through the layer
definition of expressions instead of the searchers' value tables.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import CapExceededError
from .ipcore import FinSet, elements, format_set, ordered_tuples
from .nilgroup import Element, NilGroup
from .pexpr import PolyExpr, identity_expr, pe_combine, pe_eval, pe_product, substitute
from .polymap import PolyMap

GROUND_LIMIT = 8
WINDOW_LIMIT = 512


@dataclass
class HJWitness:
    s: Element
    alphas: tuple
    color: object = None
    distances: list = field(default_factory=list)
    index: int | None = None

    def to_json(self) -> dict:
        out = {"s": list(self.s), "alphas": [elements(a) for a in self.alphas]}
        if self.color is not None:
            out["color"] = self.color
        if self.distances:
            out["distances"] = [str(d) for d in self.distances]
        if self.index is not None:
            out["index"] = self.index
        return out


def _check_windows(ground: int, window: Sequence, ground_limit: int, window_limit: int) -> None:
    if ground > ground_limit:
        raise CapExceededError(f"ground {ground} exceeds the search limit {ground_limit}")
    if len(window) > window_limit:
        raise CapExceededError(f"window of {len(window)} elements exceeds the limit {window_limit}")


def _arity(g) -> int:
    return 1 if isinstance(g, PolyMap) else g.arity


def _value_table(g, tuples: list[tuple]) -> dict:
    if isinstance(g, PolyMap):
        return {t: g(t[0]) for t in tuples}
    vals = g.values()
    return {t: vals[t] for t in tuples}


def _is_identity_system(g, tuples) -> bool:
    G = g.group
    return all(G.is_identity(v) for v in _value_table(g, tuples).values())


# -- colorings of group elements ----------------------------------------------------------------


@dataclass
class ColoringSpace:
    """A coloring of group elements, viewed as a point of the space of colorings.

    ``color`` maps a normalized element to a color.  Group elements act on the
    right by ``(chi . g)(h) = chi(g h)``.
    """

    group: NilGroup
    color: Callable[[Element], object]

    def __call__(self, g: Element):
        return self.color(self.group.normalize(g))

    def translate(self, g: Element) -> "ColoringSpace":
        return ColoringSpace(self.group, _Translated(self.group, self.color, tuple(g)))

    @classmethod
    def by_coordinate(cls, G: NilGroup, coordinate: int, modulus: int) -> "ColoringSpace":
        return cls(G, _CoordinateColor(coordinate, modulus))

    @classmethod
    def constant(cls, G: NilGroup) -> "ColoringSpace":
        return cls(G, _CoordinateColor(0, 1))

    @classmethod
    def from_table(cls, G: NilGroup, table: dict, default=None) -> "ColoringSpace":
        return cls(G, _TableColor({tuple(k): v for k, v in table.items()}, default))


# Module-level callables so colorings can be sent to worker processes.


@dataclass(frozen=True)
class _CoordinateColor:
    coordinate: int
    modulus: int

    def __call__(self, h: Element):
        return h[self.coordinate] % self.modulus


@dataclass(frozen=True)
class _TableColor:
    table: dict
    default: object = None

    def __call__(self, h: Element):
        if h in self.table:
            return self.table[h]
        if self.default is None:
            raise ValueError(f"coloring has no entry for {h}")
        return self.default


@dataclass(frozen=True)
class _Translated:
    group: NilGroup
    color: Callable
    shift: Element

    def __call__(self, h: Element):
        return self.color(self.group.mul(self.shift, h))


def right_action_check(space: ColoringSpace, elements_: Sequence[Element]) -> list[tuple]:
    """Pairs ``(g, h, k)`` violating ``((chi . g) . h)(k) = (chi . gh)(k)`` over the window."""
    G = space.group
    bad = []
    for g in elements_:
        cg = space.translate(g)
        for h in elements_:
            cgh = cg.translate(h)
            direct = space.translate(G.mul(g, h))
            for k in elements_:
                if cgh(k) != direct(k):
                    bad.append((g, h, k))
    return bad


def hj_search(
    space: ColoringSpace | Callable,
    A: Sequence[PolyExpr | PolyMap],
    ground: int,
    window: Sequence[Element],
    ground_limit: int = GROUND_LIMIT,
    window_limit: int = WINDOW_LIMIT,
    jobs: int = 1,
) -> HJWitness | None:
    """Least ``(s, a_1 < ... < a_m)`` with ``{s g(a) : g in A}`` monochrome."""
    _check_windows(ground, window, ground_limit, window_limit)
    if not A:
        raise ValueError("A must contain the identity expression")
    m = _arity(A[0])
    if any(_arity(g) != m for g in A):
        raise ValueError("all expressions need the same arity")
    G = A[0].group
    tuples = list(ordered_tuples(ground, m))
    if not any(_is_identity_system(g, tuples) for g in A):
        raise ValueError("A must contain the identity expression")
    tables = [_value_table(g, tuples) for g in A]
    color = space if isinstance(space, ColoringSpace) else ColoringSpace(G, space)
    if jobs > 1 and len(window) > 1:
        args = [(color, tables, tuples, [s], G) for s in window]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for got in pool.map(_hj_window, args):
                if got is not None:
                    return got
        return None
    return _hj_window((color, tables, tuples, list(window), G))


def _hj_window(args) -> HJWitness | None:
    color, tables, tuples, window, G = args
    for s in window:
        s = G.normalize(s)
        for t in tuples:
            first = None
            ok = True
            for tab in tables:
                c = color(G.mul(s, tab[t]))
                if first is None:
                    first = c
                elif c != first:
                    ok = False
                    break
            if ok:
                return HJWitness(s, t, first)
    return None


def check_hj_witness(space: ColoringSpace | Callable, A: Sequence, w: HJWitness) -> bool:
    """Independent replay: evaluate each expression through its layers at the witness tuple."""
    G = A[0].group
    cols = set()
    for g in A:
        v = g(w.alphas[0]) if isinstance(g, PolyMap) else pe_eval(g, w.alphas)
        cols.add(space(G.mul(w.s, v)))
    return len(cols) == 1 and (w.color is None or w.color in cols)


# -- finite metric spaces with a right action ----------------------------------------------------


@dataclass
class MetricSpace:
    """Points ``0..n-1``, a distance table and a right action of a group through generators.

    ``action[i]`` is the permutation by which generator ``i`` acts; an element
    in normal form ``x_0^e0 x_1^e1 ...`` acts by applying the generators in that
    order.
    """

    group: NilGroup
    dist: list
    action: list

    def __post_init__(self):
        self.dist = [[Fraction(x) for x in row] for row in self.dist]
        self.action = [list(p) for p in self.action]
        self._inv = []
        for p in self.action:
            inv = [0] * len(p)
            for i, j in enumerate(p):
                inv[j] = i
            self._inv.append(inv)

    @property
    def n(self) -> int:
        return len(self.dist)

    def act(self, x: int, g: Element) -> int:
        for i, e in enumerate(self.group.normalize(g)):
            perm = self.action[i] if e > 0 else self._inv[i]
            for _ in range(abs(e)):
                x = perm[x]
        return x

    def act_word(self, x: int, word: Sequence[tuple[int, int]]) -> int:
        """Apply generator letters ``(index, sign)`` one at a time."""
        for i, e in word:
            perm = self.action[i] if e > 0 else self._inv[i]
            for _ in range(abs(e)):
                x = perm[x]
        return x

    def validate(self) -> list[str]:
        problems = []
        n = self.n
        if len(self.action) != self.group.rank:
            problems.append("need one permutation per group generator")
            return problems
        for p in self.action:
            if sorted(p) != list(range(n)):
                problems.append("action entry is not a permutation")
                return problems
        d = self.dist
        for i in range(n):
            if d[i][i] != 0:
                problems.append(f"d({i},{i}) != 0")
            for j in range(n):
                if d[i][j] != d[j][i]:
                    problems.append(f"asymmetric distance at ({i},{j})")
                if i != j and d[i][j] <= 0:
                    problems.append(f"non-positive distance at ({i},{j})")
                for k in range(n):
                    if d[i][k] > d[i][j] + d[j][k]:
                        problems.append(f"triangle inequality fails at ({i},{j},{k})")
                        break
        for gi, p in enumerate(self.action):
            for i in range(n):
                for j in range(n):
                    if d[p[i]][p[j]] != d[i][j]:
                        problems.append(f"generator {gi} is not an isometry")
                        break
        problems += _relation_problems(self.group, self.act, self.act_word, n)
        return problems

    @classmethod
    def discrete(cls, G: NilGroup, n: int, action: list, scale=1) -> "MetricSpace":
        return cls(G, [[0 if i == j else scale for j in range(n)] for i in range(n)], action)


def _relation_problems(G: NilGroup, act, act_word, n: int) -> list[str]:
    """The generator permutations must satisfy the group's defining relations."""
    problems = []
    pairs = [(i, j) for j in range(G.rank) for i in range(j)]
    for i, j in pairs:
        lhs = [(i, -1), (j, -1), (i, 1), (j, 1)]
        target = G.comm(G.gen(i), G.gen(j))
        for x in range(n):
            if act_word(x, lhs) != act(x, target):
                problems.append(f"commutator relation [{i},{j}] fails on point {x}")
                break
    for i, order in enumerate(G.orders):
        if order:
            for x in range(n):
                if act_word(x, [(i, order)]) != act(x, G.gen_power(i, order)):
                    problems.append(f"power relation of generator {i} fails on point {x}")
                    break
    return problems


def metric_orbit_search(
    space: MetricSpace,
    A: Sequence[PolyExpr | PolyMap],
    eps,
    ground: int,
    window: Sequence[Element],
    x: int,
    ground_limit: int = GROUND_LIMIT,
    window_limit: int = WINDOW_LIMIT,
) -> HJWitness | None:
    """Least ``(s, a)`` with ``d(x s g(a), x s) < eps`` for every ``g`` in ``A``."""
    _check_windows(ground, window, ground_limit, window_limit)
    eps = Fraction(eps)
    if not A:
        raise ValueError("A must be nonempty")
    m = _arity(A[0])
    tuples = list(ordered_tuples(ground, m))
    tables = [_value_table(g, tuples) for g in A]
    G = space.group
    for s in window:
        s = G.normalize(s)
        xs = space.act(x, s)
        for t in tuples:
            ds = []
            for tab in tables:
                ds.append(space.dist[space.act(x, G.mul(s, tab[t]))][xs])
                if ds[-1] >= eps:
                    break
            else:
                return HJWitness(s, t, distances=ds)
    return None


def check_metric_witness(space: MetricSpace, A: Sequence, eps, x: int, w: HJWitness) -> bool:
    """Replay by letter-by-letter application of ``s`` and of each ``g(a)``."""
    G = space.group
    eps = Fraction(eps)

    def word(g):
        return [(i, e) for i, e in enumerate(G.normalize(g)) if e]

    xs = space.act_word(x, word(w.s))
    for g in A:
        v = g(w.alphas[0]) if isinstance(g, PolyMap) else pe_eval(g, w.alphas)
        y = space.act_word(xs, word(v))
        if space.dist[y][xs] >= eps:
            return False
    return True


# -- pair colorings --------------------------------------------------------------------------------


def _key(e: PolyExpr) -> tuple:
    return tuple(sorted(e.values().items()))


def pair_color_search(
    R: Sequence[PolyExpr],
    W: Sequence[PolyExpr],
    coloring: Callable[[int], object],
    window: Sequence[tuple[PolyExpr, PolyExpr | None]],
    length: int,
    window_limit: int = WINDOW_LIMIT,
) -> HJWitness | None:
    """Least ``(a, b_1 < ... < b_m)`` such that the pairs
    ``(L_a R_i[b], M_a W_k[b] L_a^-1)`` all lie in the window and share a color.

    ``R_i`` and ``W_k`` have arity ``m``; the window holds pairs of
    expressions of arity ``length``; ``coloring`` colors window indices.
    Pairs are produced through the transform ``(g, h) -> (g, h g^-1)`` applied
    to ``(L_a R_i[b], M_a (W_k R_i)[b])``.  With ``W`` empty only the first
    components are compared, against the window's first components.
    """
    if len(window) > window_limit:
        raise CapExceededError(f"window of {len(window)} pairs exceeds the limit {window_limit}")
    if not R:
        raise ValueError("R must be nonempty")
    m = R[0].arity
    index: dict = {}
    for j, (L, M) in enumerate(window):
        k = (_key(L), _key(M)) if W else _key(L)
        index.setdefault(k, j)
    WR = [[pe_product(Wk, Ri) for Ri in R] for Wk in W]
    for a, (L, M) in enumerate(window):
        for beta in ordered_tuples(length, m):
            blocks = [elements(b) for b in beta]
            Rb = [substitute(Ri, blocks, length) for Ri in R]
            first = [pe_product(L, r) for r in Rb]
            hits = []
            if W:
                for k in range(len(W)):
                    for i in range(len(R)):
                        h = pe_product(M, substitute(WR[k][i], blocks, length))
                        pair = (_key(first[i]), _key(pe_product(h, pe_combine("inverse", first[i]))))
                        hits.append(index.get(pair))
            else:
                hits = [index.get(_key(f)) for f in first]
            if any(h is None for h in hits):
                continue
            cols = {coloring(h) for h in hits}
            if len(cols) == 1:
                return HJWitness((), tuple(beta), cols.pop(), index=a)
    return None


def check_pair_witness(R, W, coloring, window, length: int, w: HJWitness) -> bool:
    """Direct replay: ``(L_a R_i[b], M_a W_k[b] L_a^-1)`` evaluated pointwise on every tuple."""
    L, M = window[w.index]
    blocks = [elements(b) for b in w.alphas]
    tuples = L.tuples()
    G = L.group

    def ev(e, t):
        return pe_eval(e, t)

    def subst_val(e, t):
        return pe_eval(e, tuple(_union(t, b) for b in blocks))

    cols = set()
    for i, Ri in enumerate(R):
        gvals = {t: G.mul(ev(L, t), subst_val(Ri, t)) for t in tuples}
        targets = []
        if W:
            for Wk in W:
                hvals = {t: G.mul(G.mul(ev(M, t), subst_val(Wk, t)), G.inv(ev(L, t))) for t in tuples}
                targets.append((gvals, hvals))
        else:
            targets.append((gvals, None))
        for gv, hv in targets:
            j = _find_pair(window, gv, hv)
            if j is None:
                return False
            cols.add(coloring(j))
    return len(cols) == 1


def _union(t, positions):
    u = 0
    for p in positions:
        u |= t[p]
    return u


def _find_pair(window, gv, hv):
    for j, (L, M) in enumerate(window):
        if all(pe_eval(L, t) == v for t, v in gv.items()):
            if hv is None or all(pe_eval(M, t) == v for t, v in hv.items()):
                return j
    return None


# -- trace mode ------------------------------------------------------------------------------------


@dataclass
class TraceStep:
    index: int
    union: FinSet
    point: int

    def to_json(self) -> dict:
        return {"j": self.index, "beta": format_set(self.union), "point": self.point}


def hj_trace(space: MetricSpace, g: PolyMap, x: int, chain: Sequence[FinSet]) -> tuple[list[TraceStep], HJWitness | None]:
    """Pigeonhole recursion for a single system that is multiplicative along ordered unions.

    Follows the points ``y_j = x g(b_0 U ... U b_j)``; once two coincide,
    ``s = g(b_0 U ... U b_i)`` and ``a = b_{i+1} U ... U b_j`` return exactly.
    Applies to systems with ``g(a U b) = g(a) g(b)`` for ``a < b``, the weight
    ``{1: 1}`` situation; other systems raise ``ValueError``.
    """
    G = g.group
    for i in range(len(chain)):
        for j in range(i + 1, len(chain)):
            a, b = chain[i], chain[j]
            if G.mul(g(a), g(b)) != g(a | b):
                raise ValueError("trace mode needs g(a U b) = g(a) g(b) along the chain")
    steps: list[TraceStep] = []
    seen: dict = {}
    u = 0
    for j, b in enumerate(chain):
        u |= b
        y = space.act(x, g(u))
        steps.append(TraceStep(j, u, y))
        if y in seen:
            i, ui = seen[y]
            s = g(ui)
            alpha = u & ~ui
            d = space.dist[space.act(x, G.mul(s, g(alpha)))][space.act(x, s)]
            return steps, HJWitness(s, (alpha,), distances=[d])
        seen[y] = (j, u)
    return steps, None


def identity_in(G: NilGroup, ground: int, arity: int) -> PolyExpr:
    """The identity expression, for inclusion in ``A``."""
    return identity_expr(G, ground, arity)
