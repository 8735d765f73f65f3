"""Polynomial expressions in several ordered set variables.

An expression of arity ``m`` is evaluated as

    g(a_1, ..., a_m) = W^{a_1..a_{m-1}}(a_m) * S(a_1, ..., a_{m-1})

where every layer ``W^{prefix}`` is a map vanishing at the empty set and
``S`` is an expression of arity ``m - 1``.  Everything lives on a bounded
ground set ``{0..n-1}``; the layer attached to a prefix is a table on the
subsets lying strictly above the prefix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import CapExceededError, InconclusiveError
from .ipcore import FinSet, elements, is_ordered, max_elt, ordered_tuples, subsets
from .nilgroup import Element, Filtration, NilGroup, Subgroup, direct_power
from .polymap import (
    PolyMap,
    compose,
    conjugate,
    identity_map,
    inverse,
    symmetric_derivative,
    verify_polynomial,
)

ARITY_CAP = 3


def above(ground: int, prefix: Sequence[FinSet]) -> FinSet:
    """Subsets of the ground set lying strictly above every set of ``prefix``."""
    full = (1 << ground) - 1
    if not prefix:
        return full
    return full & ~((1 << (max_elt(prefix[-1]) + 1)) - 1)


def union_of(sets: Sequence[FinSet], positions: Iterable[int]) -> FinSet:
    r = 0
    for i in positions:
        r |= sets[i]
    return r


@dataclass(frozen=True, eq=False)
class PolyExpr:
    group: NilGroup
    ground: int
    arity: int
    layers: dict = field(default_factory=dict)
    base: "PolyExpr | None" = None
    label: str = ""
    cap: int = ARITY_CAP

    def __post_init__(self):
        if self.arity > self.cap:
            raise CapExceededError(f"arity {self.arity} exceeds cap {self.cap}")

    def __call__(self, *sets: FinSet) -> Element:
        return pe_eval(self, tuple(sets))

    def prefixes(self) -> list[tuple]:
        return list(ordered_tuples(self.ground, self.arity - 1)) if self.arity else []

    def tuples(self) -> list[tuple]:
        return list(ordered_tuples(self.ground, self.arity))

    def all_layers(self) -> list[tuple[int, tuple, PolyMap]]:
        """``(level r, prefix, W)`` for every layer of every nested base."""
        out = []
        e = self
        while e is not None and e.arity > 0:
            for p in e.prefixes():
                out.append((e.arity, p, e.layers[p]))
            e = e.base
        return out

    def values(self) -> dict:
        return {t: pe_eval(self, t) for t in self.tuples()}

    def __repr__(self) -> str:
        return f"PolyExpr({self.label or '?'}, arity={self.arity}, ground={self.ground})"

    def to_json(self) -> dict:
        out: dict = {"arity": self.arity, "ground": self.ground}
        if self.arity:
            out["layers"] = {
                ",".join(map(str, p)): {str(a): list(v) for a, v in sorted(self.layers[p].table.items())}
                for p in self.prefixes()
            }
            out["base"] = self.base.to_json()
        return out


# -- constructors ------------------------------------------------------------------


def identity_expr(G: NilGroup, ground: int, arity: int, cap: int = ARITY_CAP) -> PolyExpr:
    base = None if arity == 0 else identity_expr(G, ground, arity - 1, cap)
    layers = {}
    if arity:
        for p in ordered_tuples(ground, arity - 1):
            layers[p] = identity_map(G, above(ground, p))
    return PolyExpr(G, ground, arity, layers, base, "1", max(cap, arity))


def from_map(W: PolyMap, ground: int | None = None) -> PolyExpr:
    """The arity-1 expression ``a -> W(a)``."""
    G = W.group
    ground = W.ground if ground is None else ground
    full = (1 << ground) - 1
    if W.support != full:
        W = W.restrict(full)
    return PolyExpr(G, ground, 1, {(): W}, identity_expr(G, ground, 0), W.label)


def from_layers(
    G: NilGroup,
    ground: int,
    arity: int,
    layer: Callable[[tuple], PolyMap],
    base: PolyExpr,
    label: str = "",
    cap: int = ARITY_CAP,
) -> PolyExpr:
    if base.arity != arity - 1:
        raise ValueError("the base must have arity one less")
    layers = {}
    for p in ordered_tuples(ground, arity - 1):
        W = layer(p)
        sup = above(ground, p)
        if W.support != sup:
            W = W.restrict(sup)
        if not W.is_vip():
            raise ValueError(f"layer at {p} does not vanish at the empty set")
        layers[p] = W
    return PolyExpr(G, ground, arity, layers, base, label, cap)


def from_function(G: NilGroup, ground: int, arity: int, f: Callable[..., Element]) -> PolyExpr:
    """Layered form of an arbitrary map on ordered tuples.

    ``W^{prefix}(a) = f(prefix, a) f(prefix, {})^-1`` and the base is
    ``f(prefix, {})`` recursively, so every map has this shape; whether the
    layers are polynomial is a separate question.
    """
    if arity == 0:
        return identity_expr(G, ground, 0)

    def g_sub(*p):
        return f(*p, 0)

    base = from_function(G, ground, arity - 1, g_sub)

    def layer(p):
        s_inv = G.inv(f(*p, 0))
        return PolyMap(G, above(ground, p), {a: G.mul(f(*p, a), s_inv) for a in subsets(above(ground, p))})

    return from_layers(G, ground, arity, layer, base)


# -- evaluation and the group structure ---------------------------------------------


def pe_eval(g: PolyExpr, t: Sequence[FinSet]) -> Element:
    t = tuple(t)
    if len(t) != g.arity:
        raise ValueError(f"expected {g.arity} sets, got {len(t)}")
    if not is_ordered(t):
        raise ValueError("the tuple must be ordered: max of each set below min of the next")
    if g.arity == 0:
        return g.group.identity
    G = g.group
    if t[-1] & ~((1 << g.ground) - 1):
        raise ValueError("tuple leaves the ground set")
    return G.mul(g.layers[t[:-1]](t[-1]), pe_eval(g.base, t[:-1]))


def pe_combine(op: str, g0: PolyExpr, g1: PolyExpr | None = None) -> PolyExpr:
    """Pointwise ``product`` or ``inverse`` of expressions, keeping the layered shape.

    ``W0 S0 * W1 S1 = (W0 * S0 W1 S0^-1) * (S0 S1)`` and
    ``(W S)^-1 = (S^-1 W^-1 S) * S^-1``; the layers are conjugated by constants.
    """
    G = g0.group
    if op == "inverse":
        if g0.arity == 0:
            return g0
        base = pe_combine("inverse", g0.base)

        def layer(p):
            s = pe_eval(g0.base, p)
            return conjugate(inverse(g0.layers[p]), G.inv(s))

        return from_layers(G, g0.ground, g0.arity, layer, base, f"({g0.label})^-1", g0.cap)
    if op != "product":
        raise ValueError(f"unknown operation {op!r}")
    if g1 is None or g1.arity != g0.arity or g1.ground != g0.ground or g1.group is not G:
        raise ValueError("expressions must share arity, ground and group")
    if g0.arity == 0:
        return g0
    base = pe_combine("product", g0.base, g1.base)

    def layer(p):
        s0 = pe_eval(g0.base, p)
        return compose("product", g0.layers[p], conjugate(g1.layers[p], s0))

    return from_layers(G, g0.ground, g0.arity, layer, base, f"{g0.label}*{g1.label}", g0.cap)


def pe_product(*exprs: PolyExpr) -> PolyExpr:
    r = exprs[0]
    for e in exprs[1:]:
        r = pe_combine("product", r, e)
    return r


def pe_inverse(g: PolyExpr) -> PolyExpr:
    return pe_combine("inverse", g)


def same_values(g0: PolyExpr, g1: PolyExpr) -> bool:
    return g0.arity == g1.arity and all(pe_eval(g0, t) == pe_eval(g1, t) for t in g0.tuples())


# -- substitution -----------------------------------------------------------------------


def _check_beta(beta: Sequence[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    out = tuple(tuple(sorted(set(b))) for b in beta)
    for b in out:
        if not b:
            raise ValueError("substitution blocks must be nonempty")
    for b0, b1 in zip(out, out[1:]):
        if b0[-1] >= b1[0]:
            raise ValueError("substitution blocks must be ordered")
    return out


def substitute(g: PolyExpr, beta: Sequence[Iterable[int]], length: int | None = None) -> PolyExpr:
    """The expression ``(a_0..a_{L-1}) -> g(U_{i in beta_1} a_i, ..., U_{i in beta_m} a_i)``.

    ``beta`` is an ordered tuple of blocks of positions; ``length`` (default:
    one past the largest position) is the number ``L`` of new variables.  The
    result is built layer by layer: when the last variable ``a`` enters the
    last argument together with ``c = U_{rest} a_i``, the new layer is
    ``a -> W(a) sD_c W(a)`` and the new base is ``g(..., c)``.
    """
    beta = _check_beta(beta)
    if len(beta) != g.arity:
        raise ValueError(f"need {g.arity} blocks, got {len(beta)}")
    top = max((b[-1] for b in beta), default=-1)
    L = top + 1 if length is None else length
    if L <= top:
        raise ValueError("length must exceed every position")
    return _substitute(g, beta, L)


def _substitute(g: PolyExpr, beta: tuple, L: int) -> PolyExpr:
    G = g.group
    n = g.ground
    if L == 0 or g.arity == 0:
        return identity_expr(G, n, L, L)
    last = L - 1
    if last not in beta[-1]:
        base = _substitute(g, beta, L - 1)
        return from_layers(G, n, L, lambda p: identity_map(G, above(n, p)), base, "subst", max(L, ARITY_CAP))
    rest = beta[-1][:-1]
    head = beta[:-1]
    if rest:
        base = _substitute(g, head + (rest,), L - 1)
    else:
        base = _substitute(g.base, head, L - 1)

    def layer(p):
        prev = tuple(union_of(p, b) for b in head)
        W = g.layers[prev]
        c = union_of(p, rest)
        sup = above(n, p)
        if not c:
            return W.restrict(sup)
        sd = symmetric_derivative(W.restrict(sup | c), c)
        return compose("product", W.restrict(sup), sd.with_label(W.filtration, W.shift))

    return from_layers(G, n, L, layer, base, "subst", max(L, ARITY_CAP))


def substitution_reference(g: PolyExpr, beta: Sequence[Iterable[int]], t: Sequence[FinSet]) -> Element:
    """Direct evaluation ``g(U_{beta_1} t, ..., U_{beta_m} t)``."""
    beta = _check_beta(beta)
    return pe_eval(g, tuple(union_of(t, b) for b in beta))


# -- VIP groups ---------------------------------------------------------------------------


class MapGroup:
    """Exact membership in the group generated by tables on one support.

    Tables on a support with ``N`` subsets are elements of the direct power
    ``G^N``; membership is decided by sifting there.
    """

    _powers: dict = {}

    def __init__(self, G: NilGroup, support: FinSet, generators: Sequence[PolyMap]):
        self.G = G
        self.support = support
        self.subs = list(subsets(support))
        key = (id(G), len(self.subs))
        P = MapGroup._powers.get(key)
        if P is None or P[0] is not G:
            P = (G, direct_power(G, len(self.subs)))
            MapGroup._powers[key] = P
        self.P = P[1]
        self.sub = Subgroup(self.P, [self.vector(g) for g in generators])

    def vector(self, g: PolyMap) -> tuple:
        if g.support != self.support:
            g = g.restrict(self.support)
        out = []
        for a in self.subs:
            out.extend(g.table[a])
        return tuple(out)

    def contains(self, g: PolyMap) -> bool:
        return self.sub.contains(self.vector(g))


@dataclass(eq=False)
class VIPGroupSpec:
    """A finitely generated group of maps vanishing at the empty set.

    ``word_bound`` is kept for interface compatibility: membership is decided
    exactly by sifting, so no bound on word length is needed.
    """

    generators: list
    word_bound: int = 6
    sd_closed: bool | None = None
    conj_closed: bool | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def group(self) -> NilGroup:
        return self.generators[0].group

    @property
    def support(self) -> FinSet:
        return self.generators[0].support

    def map_group(self, support: FinSet) -> MapGroup:
        got = self._cache.get(support)
        if got is None:
            got = MapGroup(self.group, support, [g.restrict(support) for g in self.generators])
            self._cache[support] = got
        return got

    def contains(self, g: PolyMap) -> bool:
        if not self.generators:
            return g.is_identity()
        if g.support & ~self.support:
            raise ValueError("map support exceeds the generators' support")
        return self.map_group(g.support).contains(g)

    def verify_closure(self) -> tuple[bool, bool]:
        """Check ``sD_a g`` and ``b g b^-1`` membership for generators ``g``, sets ``a``
        and group generators ``b``; records and returns ``(sd_closed, conj_closed)``."""
        G = self.group
        sd_ok = True
        for g in self.generators:
            for a in subsets(self.support):
                if not a:
                    continue
                if not self.contains(symmetric_derivative(g, a)):
                    sd_ok = False
                    break
            if not sd_ok:
                break
        conj_ok = True
        for g in self.generators:
            for k in range(G.rank):
                for sign in (1, -1):
                    if not self.contains(conjugate(g, G.gen(k, sign))):
                        conj_ok = False
        self.sd_closed, self.conj_closed = sd_ok, conj_ok
        return sd_ok, conj_ok


# -- PE membership -------------------------------------------------------------------------


@dataclass
class PEReport:
    ok: bool
    mismatches: list = field(default_factory=list)
    bad_layers: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "mismatches": [list(t) for t in self.mismatches[:10]],
            "bad_layers": [{"level": r, "prefix": list(p), "reason": why} for r, p, why in self.bad_layers[:10]],
        }


def check_pe_membership(
    h: PolyExpr,
    reference: Callable[[tuple], Element] | None,
    F: Filtration | None,
    K: VIPGroupSpec | None = None,
) -> PEReport:
    """Certificate check for an expression over the VIP group of ``F``-polynomial maps.

    Verifies pointwise agreement with ``reference`` (when given) on every
    ordered tuple, and that every layer vanishes at the empty set, takes values
    in ``G_1`` and is ``F``-polynomial (and lies in ``K`` when given).
    """
    rep = PEReport(True)
    if reference is not None:
        for t in h.tuples():
            if pe_eval(h, t) != reference(t):
                rep.mismatches.append(t)
    for r, p, W in h.all_layers():
        why = None
        if not W.is_vip():
            why = "does not vanish at the empty set"
        elif F is not None and not all(F.contains(1, v) for v in W.table.values()):
            why = "values leave G_1"
        elif F is not None and not verify_polynomial(W, F):
            why = "not polynomial"
        elif K is not None and not K.contains(W):
            why = "not in the VIP group"
        if why:
            rep.bad_layers.append((r, p, why))
    rep.ok = not rep.mismatches and not rep.bad_layers
    return rep


# -- mixing / compact decomposition ------------------------------------------------------------


@dataclass
class Decomposition:
    T: list
    R: list
    k: list
    truncation: int

    def to_json(self) -> dict:
        return {
            "assignment": self.k,
            "T": [t.to_json() for t in self.T],
            "R": [r.to_json() for r in self.R],
            "truncation": {"ground": self.truncation},
        }


def _layer_quotient(Wi: PolyMap, Wj: PolyMap) -> PolyMap:
    return compose("product", inverse(Wi), Wj)


def decompose_mixing(S: Sequence[PolyExpr], K: VIPGroupSpec) -> Decomposition:
    """Split ``S_i = T_{k_i} R_i`` with ``{T_k}`` K-mixing on the truncation and ``R_i`` in ``PE(K)``.

    Follows the induction on arity: decompose the bases ``S_i(.., {})`` first,
    then group the top layers by whether ``(W_i)^-1 W_j`` lies in ``K``; this
    must hold for all prefixes or for none, otherwise
    :class:`InconclusiveError` is raised.
    """
    if not S:
        raise ValueError("need at least the identity expression")
    if any(any(v) for v in S[0].values().values()):
        raise ValueError("S_0 must be the identity expression")
    m = S[0].arity
    G = S[0].group
    n = S[0].ground
    if m == 0:
        one = identity_expr(G, n, 0)
        return Decomposition([one], [one for _ in S], [0 for _ in S], n)
    sub = decompose_mixing([s.base for s in S], K)
    prefixes = S[0].prefixes()
    t = len(S)
    rep = list(range(t))
    for j in range(t):
        for i in range(j):
            if rep[i] != i:
                continue
            verdicts = {K.contains(_layer_quotient(S[i].layers[p], S[j].layers[p])) for p in prefixes}
            if len(verdicts) > 1:
                raise InconclusiveError(
                    f"membership of W_{i}^-1 W_{j} in K is not uniform over prefixes"
                )
            if verdicts == {True}:
                rep[j] = i
                break
    pairs: list[tuple[int, int]] = []
    k = []
    for j in range(t):
        pair = (rep[j], sub.k[j])
        if pair not in pairs:
            pairs.append(pair)
        k.append(pairs.index(pair))
    T = []
    for i, kk in pairs:
        T.append(PolyExpr(G, n, m, dict(S[i].layers), sub.T[kk], f"T[{i},{kk}]"))
    R = []
    for j in range(t):
        i = rep[j]
        base_T = sub.T[sub.k[j]]

        def layer(p, i=i, j=j, base_T=base_T):
            q = _layer_quotient(S[i].layers[p], S[j].layers[p])
            return conjugate(q, G.inv(pe_eval(base_T, p)))

        R.append(from_layers(G, n, m, layer, sub.R[j], f"R[{j}]"))
    return Decomposition(T, R, k, n)


def verify_decomposition(S: Sequence[PolyExpr], dec: Decomposition, K: VIPGroupSpec) -> list[str]:
    """Independent re-check; returns the list of violated properties."""
    problems = []
    for i, s in enumerate(S):
        T = dec.T[dec.k[i]]
        R = dec.R[i]
        for t in s.tuples():
            if pe_eval(s, t) != s.group.mul(pe_eval(T, t), pe_eval(R, t)):
                problems.append(f"S_{i} != T_{dec.k[i]} R_{i} at {t}")
                break
        for r, p, W in R.all_layers():
            if not K.contains(W):
                problems.append(f"layer of R_{i} at {p} is not in K")
                break
    for a in range(len(dec.T)):
        for b in range(a + 1, len(dec.T)):
            ea, eb = dec.T[a], dec.T[b]
            while ea is not None and ea.arity > 0:
                eq = [ea.layers[p].same_values(eb.layers[p]) for p in ea.prefixes()]
                if all(eq):
                    pass
                else:
                    inK = [K.contains(_layer_quotient(ea.layers[p], eb.layers[p])) for p in ea.prefixes()]
                    if any(inK):
                        problems.append(f"T_{a}, T_{b} not K-mixing at level {ea.arity}")
                ea, eb = ea.base, eb.base
    return problems
