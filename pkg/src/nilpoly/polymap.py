"""Polynomial maps from finite sets into a nilpotent group.

A :class:`PolyMap` is a total table on all subsets of a bounded support set
(a bitmask).  "Polynomial" always means polynomial on that truncation: the
checker quantifies over the finitely many subsets available.

Each map carries the filtration it is claimed to be polynomial for, as a base
filtration plus a shift, so that derived maps and commutators can report the
label ``F[+t]`` without building new subgroup objects.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import total_ordering
from itertools import product as iproduct
from typing import Callable, Hashable, Iterable, Sequence

from .errors import CapExceededError
from .ipcore import FinSet, card, elements, nonempty_subsets, subsets
from .nilgroup import Element, Filtration, NilGroup

VERIFY_GROUND_CAP = 5


@dataclass(frozen=True, eq=False)
class PolyMap:
    """A map ``alpha -> group element`` for every subset ``alpha`` of ``support``.

    ``shift`` records the claimed filtration ``filtration[+shift]``.
    ``analytic_level`` may be set for formula-backed maps whose level is known
    independently of the truncation.
    """

    group: NilGroup
    support: FinSet
    table: dict
    filtration: Filtration | None = None
    shift: int = 0
    label: str = ""
    analytic_level: int | None = None

    def __call__(self, alpha: FinSet) -> Element:
        try:
            return self.table[alpha]
        except KeyError:
            raise ValueError(f"set {elements(alpha)} is outside the support {elements(self.support)}") from None

    @property
    def ground(self) -> int:
        return self.support.bit_length()

    def values(self) -> tuple:
        return tuple(self.table[a] for a in subsets(self.support))

    def key(self) -> tuple:
        return (self.support, self.values())

    def claimed(self) -> Filtration | None:
        if self.filtration is None:
            return None
        return self.filtration.shift(self.shift) if self.shift else self.filtration

    def with_label(self, filtration: Filtration | None, shift: int = 0, label: str | None = None) -> "PolyMap":
        return PolyMap(
            self.group, self.support, self.table, filtration, shift, self.label if label is None else label
        )

    def restrict(self, support: FinSet) -> "PolyMap":
        if support & ~self.support:
            raise ValueError("can only restrict to a subset of the support")
        return PolyMap(
            self.group,
            support,
            {a: self.table[a] for a in subsets(support)},
            self.filtration,
            self.shift,
            self.label,
            self.analytic_level,
        )

    def is_identity(self) -> bool:
        return all(not any(v) for v in self.table.values())

    def is_vip(self) -> bool:
        """Vanishes at the empty set (the value condition is part of verification)."""
        return not any(self.table[0])

    def same_values(self, other: "PolyMap") -> bool:
        return self.support == other.support and all(self.table[a] == other.table[a] for a in self.table)

    def __repr__(self) -> str:
        return f"PolyMap({self.label or '?'}, support={elements(self.support)})"

    # -- JSON ---------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "ground": self.ground,
            "support": self.support,
            "label": self.label,
            "shift": self.shift,
            "backing": {"table": {str(a): list(self.table[a]) for a in subsets(self.support)}},
        }


# -- constructors ------------------------------------------------------------------


def from_function(
    G: NilGroup,
    support: FinSet,
    f: Callable[[FinSet], Element],
    filtration: Filtration | None = None,
    label: str = "",
    analytic_level: int | None = None,
) -> PolyMap:
    return PolyMap(
        G, support, {a: G.normalize(f(a)) for a in subsets(support)}, filtration, 0, label, analytic_level
    )


def constant_map(G: NilGroup, support: FinSet, value: Element, filtration: Filtration | None = None) -> PolyMap:
    return from_function(G, support, lambda a: value, filtration, label=f"const {G.format(value)}")


def identity_map(G: NilGroup, support: FinSet, filtration: Filtration | None = None) -> PolyMap:
    return constant_map(G, support, G.identity, filtration)


def ip_system(
    G: NilGroup, support: FinSet, generators: dict[int, Element], filtration: Filtration | None = None, label: str = ""
) -> PolyMap:
    """``alpha -> prod_{i in alpha} g_i`` in increasing order of ``i``."""

    def f(a):
        r = G.identity
        for i in elements(a):
            r = G.mul(r, generators.get(i, G.identity))
        return r

    return from_function(G, support, f, filtration, label or "ip-system")


def scalar_map(
    G: NilGroup, support: FinSet, f: Callable[[FinSet], int], generator: Element | None = None,
    filtration: Filtration | None = None, label: str = "", analytic_level: int | None = None,
) -> PolyMap:
    """``alpha -> generator^{f(alpha)}``; the default generator is the first one of ``G``."""
    base = generator if generator is not None else G.gen(0)
    return from_function(G, support, lambda a: G.pow(base, f(a)), filtration, label, analytic_level)


def cardinality_power(G: NilGroup, support: FinSet, degree: int, coeff: int = 1, filtration=None) -> PolyMap:
    """``alpha -> x^{coeff * |alpha|^degree}`` (formula-backed)."""
    return scalar_map(
        G, support, lambda a: coeff * card(a) ** degree, None, filtration, label=f"{coeff}|a|^{degree}"
    )


# -- derivatives ------------------------------------------------------------------


def derivative(g: PolyMap, beta: FinSet) -> PolyMap:
    """``D_beta g(alpha) = g(alpha)^-1 g(alpha u beta)`` on subsets of ``support - beta``."""
    if not beta:
        raise ValueError("derivatives are taken along nonempty sets")
    if beta & ~g.support:
        raise ValueError("beta must lie inside the support")
    G = g.group
    rest = g.support & ~beta
    t = g.table
    table = {a: G.mul(G.inv(t[a]), t[a | beta]) for a in subsets(rest)}
    return PolyMap(G, rest, table, g.filtration, g.shift + 1, f"D[{elements(beta)}]{g.label}")


def symmetric_derivative(g: PolyMap, beta: FinSet) -> PolyMap:
    """``sD_beta g(alpha) = g(alpha)^-1 g(alpha u beta) g(beta)^-1``."""
    if not g.is_vip():
        raise ValueError("symmetric derivatives are defined for maps vanishing at the empty set")
    if not beta:
        raise ValueError("derivatives are taken along nonempty sets")
    if beta & ~g.support:
        raise ValueError("beta must lie inside the support")
    G = g.group
    rest = g.support & ~beta
    t = g.table
    gb_inv = G.inv(t[beta])
    table = {a: G.mul(G.mul(G.inv(t[a]), t[a | beta]), gb_inv) for a in subsets(rest)}
    return PolyMap(G, rest, table, g.filtration, g.shift + 1, f"sD[{elements(beta)}]{g.label}")


# -- polynomiality -------------------------------------------------------------------


class _Verifier:
    """Memoized recursive polynomiality check against ``F[+s]`` for varying ``s``."""

    def __init__(self, G: NilGroup, F: Filtration):
        self.G = G
        self.F = F
        self.memo: dict = {}

    def check(self, support: FinSet, table: dict, s: int) -> bool:
        F = self.F
        subs = list(subsets(support))
        key = (support, tuple(table[a] for a in subs), s)
        got = self.memo.get(key)
        if got is not None:
            return got
        length = F.length
        if length is None or length - s < 0:
            ok = all(F.is_trivial_element(table[a]) for a in subs)
        else:
            ok = all(F.contains(s, table[a]) for a in subs)
            if ok:
                G = self.G
                for beta in nonempty_subsets(support):
                    rest = support & ~beta
                    d = {a: G.mul(G.inv(table[a]), table[a | beta]) for a in subsets(rest)}
                    if not self.check(rest, d, s + 1):
                        ok = False
                        break
        self.memo[key] = ok
        return ok


def verify_polynomial(g: PolyMap, F: Filtration | None = None, cap: int = VERIFY_GROUND_CAP) -> bool:
    """Whether ``g`` is ``F``-polynomial on its support (default: its claimed filtration)."""
    if F is None:
        F = g.claimed()
        if F is None:
            raise ValueError("no filtration given and the map carries none")
    if card(g.support) > cap:
        raise CapExceededError(f"support of size {card(g.support)} exceeds the verification cap {cap}")
    return _Verifier(g.group, F).check(g.support, g.table, 0)


def verify_polynomial_shifted(g: PolyMap, F: Filtration, shift: int, cap: int = VERIFY_GROUND_CAP,
                              verifier: _Verifier | None = None) -> bool:
    """``verify_polynomial(g, F.shift(shift))`` reusing a verifier on the base filtration."""
    if card(g.support) > cap:
        raise CapExceededError(f"support of size {card(g.support)} exceeds the verification cap {cap}")
    v = verifier or _Verifier(g.group, F)
    return v.check(g.support, g.table, shift)


# -- group operations ------------------------------------------------------------------


def _check_compatible(g0: PolyMap, g1: PolyMap) -> None:
    if g0.group is not g1.group:
        raise ValueError("maps take values in different groups")
    if g0.support != g1.support:
        raise ValueError("maps have different supports")


def _same_base(g0: PolyMap, g1: PolyMap) -> Filtration | None:
    if g0.filtration is g1.filtration:
        return g0.filtration
    if g0.filtration is None:
        return g1.filtration
    if g1.filtration is None:
        return g0.filtration
    raise ValueError("maps are labelled with different base filtrations")


def pointwise(g0: PolyMap, g1: PolyMap, op: Callable[[Element, Element], Element], label: str) -> dict:
    _check_compatible(g0, g1)
    return {a: op(g0.table[a], g1.table[a]) for a in g0.table}


def compose(op: str, g0: PolyMap, g1: PolyMap | None = None) -> PolyMap:
    """Pointwise ``product``, ``inverse`` or ``commutator`` with the matching filtration label.

    Products and inverses keep ``F[+min(t0, t1)]``; the commutator of an
    ``F[+t0]`` map and an ``F[+t1]`` map is labelled ``F[+t0+t1]``.
    """
    G = g0.group
    if op == "inverse":
        return PolyMap(G, g0.support, {a: G.inv(v) for a, v in g0.table.items()}, g0.filtration, g0.shift,
                       f"({g0.label})^-1")
    if g1 is None:
        raise ValueError(f"{op} needs two maps")
    base = _same_base(g0, g1)
    if op == "product":
        table = pointwise(g0, g1, G.mul, "product")
        return PolyMap(G, g0.support, table, base, min(g0.shift, g1.shift), f"{g0.label}*{g1.label}")
    if op == "commutator":
        table = pointwise(g0, g1, G.comm, "commutator")
        return PolyMap(G, g0.support, table, base, g0.shift + g1.shift, f"[{g0.label},{g1.label}]")
    raise ValueError(f"unknown operation {op!r}")


def product(*maps: PolyMap) -> PolyMap:
    r = maps[0]
    for m in maps[1:]:
        r = compose("product", r, m)
    return r


def inverse(g: PolyMap) -> PolyMap:
    return compose("inverse", g)


def commutator(g0: PolyMap, g1: PolyMap) -> PolyMap:
    return compose("commutator", g0, g1)


def conjugate(g: PolyMap, b: Element) -> PolyMap:
    """``alpha -> b g(alpha) b^-1``."""
    G = g.group
    bi = G.inv(b)
    return PolyMap(G, g.support, {a: G.mul(b, G.mul(v, bi)) for a, v in g.table.items()},
                   g.filtration, g.shift, f"{G.format(b)}.{g.label}")


def restrict_all(maps: Iterable[PolyMap], support: FinSet) -> list[PolyMap]:
    return [m.restrict(support) for m in maps]


# -- monomial maps ---------------------------------------------------------------------


@dataclass(frozen=True)
class MonomialSpec:
    """Data of a monomial map ``alpha -> prod^{<}_{j in R[alpha]} g_j``.

    ``R[i]`` lists the labels of degree ``i``; an index ``j`` of degree ``i``
    is a pair ``(t, r)`` with ``t`` an ``i``-tuple of points and ``r in R[i]``,
    and ``R[alpha]`` collects the ``j`` whose tuple has all its entries in
    ``alpha``.  ``values`` maps ``(t, r)`` to ``g_j`` (missing entries are the
    identity).  ``order`` is a rank for each index; unranked indices come after
    the ranked ones in lexicographic order of ``(degree, t, r)``.
    """

    R: tuple[tuple[Hashable, ...], ...]
    values: dict = field(hash=False)
    order: dict = field(default_factory=dict, hash=False)

    def degree_of(self, j) -> int:
        return len(j[0])

    def indices(self, alpha: FinSet) -> list:
        pts = elements(alpha)
        out = []
        for i, labels in enumerate(self.R):
            for t in iproduct(pts, repeat=i):
                for r in labels:
                    out.append((t, r))
        return out

    def sort_key(self, j):
        rank = self.order.get(j)
        return (0, rank, ()) if rank is not None else (1, 0, (len(j[0]), j[0], repr(j[1])))

    def to_json(self) -> dict:
        return {
            "R": [list(r) for r in self.R],
            "values": [
                {"tuple": list(t), "label": r, "value": list(v), **({"rank": self.order[(t, r)]} if (t, r) in self.order else {})}
                for (t, r), v in sorted(self.values.items(), key=lambda kv: (len(kv[0][0]), kv[0][0], repr(kv[0][1])))
            ],
        }

    @classmethod
    def from_json(cls, data: dict, G: NilGroup) -> "MonomialSpec":
        R = tuple(tuple(r) for r in data["R"])
        values = {}
        order = {}
        for entry in data.get("values", []):
            j = (tuple(entry["tuple"]), entry["label"])
            values[j] = G.normalize(entry["value"])
            if "rank" in entry:
                order[j] = entry["rank"]
        return cls(R, values, order)


def check_level_condition(spec: MonomialSpec, F: Filtration) -> list:
    """Indices ``j`` of degree ``i`` whose value is not in ``G_i``."""
    bad = []
    for j, v in spec.values.items():
        if not F.contains(spec.degree_of(j), v):
            bad.append(j)
    return bad


def monomial_map(spec: MonomialSpec, F: Filtration, support: FinSet) -> PolyMap:
    """Table of the monomial map on all subsets of ``support``."""
    bad = check_level_condition(spec, F)
    if bad:
        raise ValueError(f"level condition violated at {bad[:3]}")
    G = F.group

    def f(alpha):
        r = G.identity
        for j in sorted(spec.indices(alpha), key=spec.sort_key):
            v = spec.values.get(j)
            if v is not None:
                r = G.mul(r, v)
        return r

    return from_function(G, support, f, F, label="monomial")


def set_monomial_spec(G: NilGroup, d: int, values: dict) -> MonomialSpec:
    """``alpha -> prod_{t in alpha^d} g_t`` in lexicographic order of ``t``."""
    return MonomialSpec(tuple(() for _ in range(d)) + ((0,),), {(t, 0): v for t, v in values.items()})


def random_monomial_spec(
    rng: random.Random, F: Filtration, ground: int, max_degree: int, labels_per_degree: int = 2, bound: int = 2
) -> MonomialSpec:
    """A random spec satisfying the level condition for ``F``, with a random order."""
    G = F.group
    R = tuple(
        tuple(range(rng.randint(0, labels_per_degree))) for _ in range(max_degree + 1)
    )
    values = {}
    for i, labels in enumerate(R):
        gens = F.level(i).igs()
        if not gens:
            continue
        for t in iproduct(range(ground), repeat=i):
            for r in labels:
                v = G.identity
                for gen in gens:
                    v = G.mul(v, G.pow(gen, rng.randint(-bound, bound)))
                values[(t, r)] = v
    keys = list(values)
    rng.shuffle(keys)
    return MonomialSpec(R, values, {j: n for n, j in enumerate(keys)})


# -- PET induction ---------------------------------------------------------------------


class NoLevelError(ValueError):
    """The identity map has no level."""


def level(g: PolyMap, F: Filtration | None = None, verifier: _Verifier | None = None) -> int:
    """Greatest ``l`` with ``g`` polynomial for ``F[+l]``, on the truncation."""
    F = F or g.filtration
    if F is None:
        raise ValueError("level needs a filtration")
    if g.is_identity() or (F.modulus is not None and all(F.is_trivial_element(v) for v in g.table.values())):
        raise NoLevelError("the identity map has no level")
    v = verifier or _Verifier(g.group, F)
    top = F.length if F.length is not None else -1
    for l in range(top, -1, -1):
        if v.check(g.support, g.table, l):
            return l
    raise ValueError("map is not polynomial for the filtration")


def _level_or_inf(g: PolyMap, F: Filtration, verifier: _Verifier) -> float:
    try:
        return level(g, F, verifier)
    except NoLevelError:
        return float("inf")


def equivalent(g: PolyMap, h: PolyMap, F: Filtration | None = None, verifier: _Verifier | None = None) -> bool:
    """``g ~ h`` iff ``l(g) = l(h) < l(g^-1 h)``."""
    F = F or g.filtration or h.filtration
    v = verifier or _Verifier(g.group, F)
    lg = level(g, F, v)
    lh = level(h, F, v)
    if lg != lh:
        return False
    diff = compose("product", inverse(g), h)
    return lg < _level_or_inf(diff, F, v)


@total_ordering
@dataclass(frozen=True)
class WeightVector:
    """Counts of equivalence classes per level.

    Ordering is lexicographic starting at level 0: a class at a lower level
    outweighs any number of classes at higher levels.
    """

    counts: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_dict(cls, d: dict[int, int]) -> "WeightVector":
        return cls(tuple(sorted((l, c) for l, c in d.items() if c)))

    def as_dict(self) -> dict[int, int]:
        return dict(self.counts)

    def _seq(self, n: int) -> tuple:
        d = self.as_dict()
        return tuple(d.get(l, 0) for l in range(n))

    def __lt__(self, other: "WeightVector") -> bool:
        n = max([l for l, _ in self.counts + other.counts], default=-1) + 1
        return self._seq(n) < other._seq(n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightVector):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(self.counts)

    def __repr__(self) -> str:
        return f"WeightVector({self.as_dict()})"


def equivalence_classes(A: Sequence[PolyMap], F: Filtration | None = None) -> list[list[int]]:
    """Indices of ``A`` grouped into ``~``-classes (union-find over equal levels)."""
    if not A:
        return []
    F = F or A[0].filtration
    v = _Verifier(A[0].group, F)
    levels = [level(g, F, v) for g in A]
    parent = list(range(len(A)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(A)):
        for j in range(i + 1, len(A)):
            if levels[i] == levels[j] and find(i) != find(j) and equivalent(A[i], A[j], F, v):
                parent[find(j)] = find(i)
    classes: dict[int, list[int]] = {}
    for i in range(len(A)):
        classes.setdefault(find(i), []).append(i)
    return [classes[k] for k in sorted(classes)]


def weight_vector(A: Sequence[PolyMap], F: Filtration | None = None) -> WeightVector:
    if not A:
        return WeightVector()
    F = F or A[0].filtration
    v = _Verifier(A[0].group, F)
    counts: dict[int, int] = {}
    for cls in equivalence_classes(A, F):
        l = level(A[cls[0]], F, v)
        counts[l] = counts.get(l, 0) + 1
    return WeightVector.from_dict(counts)


class WeightCheckError(AssertionError):
    """The PET step failed to lower the weight vector."""


def pet_step(
    A: Sequence[PolyMap],
    h: PolyMap,
    B: Sequence[Element],
    M: Sequence[FinSet],
    F: Filtration | None = None,
) -> list[PolyMap]:
    """The system ``{b h^-1 g sD_alpha g b^-1 : g in A, alpha in M, b in B}`` minus the identity.

    All maps are restricted to the support minus the union of ``M``.  Raises
    :class:`WeightCheckError` if the weight vector does not strictly drop.
    """
    if not A:
        return []
    F = F or A[0].filtration
    if F is None:
        raise ValueError("pet_step needs a filtration")
    G = A[0].group
    v = _Verifier(G, F)
    top = max(level(g, F, v) for g in A)
    if level(h, F, v) != top:
        raise ValueError("h must have maximal level in the system")
    used = 0
    for m in M:
        if not m:
            raise ValueError("the sets in M must be nonempty")
        used |= m
    rest = A[0].support & ~used
    for b in B:
        if not F.contains(1, b):
            raise ValueError("B must lie in G_1")
    h_inv = inverse(h).restrict(rest)
    out: list[PolyMap] = []
    seen = set()
    for g in A:
        g_r = g.restrict(rest)
        for alpha in M:
            sd = symmetric_derivative(g.restrict(rest | alpha), alpha)
            core = product(h_inv, g_r, sd.with_label(g.filtration, g.shift))
            for b in B:
                m = conjugate(core, b)
                if m.is_identity():
                    continue
                k = m.key()
                if k in seen:
                    continue
                seen.add(k)
                out.append(m.with_label(F, 0, f"b h^-1 g sD g b^-1 [{len(out)}]"))
    before = weight_vector(A, F)
    after = weight_vector(out, F)
    if not after < before:
        raise WeightCheckError(f"weight did not drop: {before} -> {after}")
    return out
