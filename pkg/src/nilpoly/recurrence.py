"""Multiple recurrence on finite measure-preserving systems, with exact rational measures.

A finite system has points ``0..n-1`` with rational weights and a right
action of a nilpotent group given by one permutation per generator.  For a
set ``A`` and group elements ``S_0, ..., S_t`` the return measure is
``mu(A S_0^-1 & ... & A S_t^-1)`` where ``A g^-1 = {x : x g in A}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .genpoly import GenPoly, IPSystem, evaluate, parse
from .hjsearch import _relation_problems
from .ipcore import FinSet, IPRing, elements, nonempty_subsets
from .nilgroup import Element, NilGroup
from .nilgroup.presentations import abelian, heisenberg
from .pexpr import PolyExpr, pe_eval
from .polymap import PolyMap


@dataclass
class FiniteMPS:
    group: NilGroup
    weights: list
    action: list
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.weights = [Fraction(w) for w in self.weights]
        self.action = [list(p) for p in self.action]
        self._inv = []
        for p in self.action:
            inv = [0] * len(p)
            for i, j in enumerate(p):
                inv[j] = i
            self._inv.append(inv)
        problems = self.validate()
        if problems:
            raise ValueError("; ".join(problems[:3]))

    @property
    def n(self) -> int:
        return len(self.weights)

    def validate(self) -> list[str]:
        problems = []
        if sum(self.weights) != 1 or any(w < 0 for w in self.weights):
            problems.append("weights must be non-negative and sum to 1")
        if len(self.action) != self.group.rank:
            problems.append("need one permutation per group generator")
            return problems
        for gi, p in enumerate(self.action):
            if sorted(p) != list(range(self.n)):
                problems.append(f"generator {gi} does not act by a permutation")
                return problems
            if any(self.weights[p[x]] != self.weights[x] for x in range(self.n)):
                problems.append(f"generator {gi} does not preserve the measure")
        problems += _relation_problems(self.group, self.act, self.act_word, self.n)
        return problems

    def act(self, x: int, g: Element) -> int:
        for i, e in enumerate(self.group.normalize(g)):
            perm = self.action[i] if e > 0 else self._inv[i]
            for _ in range(abs(e)):
                x = perm[x]
        return x

    def act_word(self, x: int, word) -> int:
        for i, e in word:
            perm = self.action[i] if e > 0 else self._inv[i]
            for _ in range(abs(e)):
                x = perm[x]
        return x

    def preimage(self, A: set[int], g: Element) -> set[int]:
        """``A g^-1 = {x : x g in A}``."""
        return {x for x in range(self.n) if self.act(x, g) in A}

    def measure(self, B) -> Fraction:
        return sum((self.weights[x] for x in B), Fraction(0))

    def to_json(self) -> dict:
        return {
            "points": self.n,
            "weights": [str(w) for w in self.weights],
            "generators": {f"T{i + 1}": p for i, p in enumerate(self.action)},
        }


# -- constructors ---------------------------------------------------------------------------------------


def _uniform(n: int) -> list:
    return [Fraction(1, n)] * n


def rotation(N: int, step: int = 1) -> FiniteMPS:
    """``Z`` acting on ``Z/N`` by ``x -> x + step``."""
    return FiniteMPS(abelian(1), _uniform(N), [[(x + step) % N for x in range(N)]])


def skew_torus(N: int, a: int = 1) -> FiniteMPS:
    """``Z`` acting on ``(Z/N)^2`` by ``(x, y) -> (x + a, y + x)``; point ``(x, y)`` is ``x N + y``."""
    perm = [((x + a) % N) * N + (y + x) % N for x in range(N) for y in range(N)]
    return FiniteMPS(abelian(1), _uniform(N * N), [perm])


def translation_system(G: NilGroup) -> FiniteMPS:
    """A finite group acting on itself by right translations, with counting measure."""
    pts = list(G.elements())
    idx = {p: i for i, p in enumerate(pts)}
    action = [[idx[G.mul(p, G.gen(i))] for p in pts] for i in range(G.rank)]
    mps = FiniteMPS(G, _uniform(len(pts)), action)
    mps.labels = pts
    return mps


def heisenberg_translation(p: int) -> FiniteMPS:
    return translation_system(heisenberg(p))


def from_json(data: dict, G: NilGroup | None = None) -> FiniteMPS:
    n = int(data["points"])
    weights = [Fraction(w) for w in data["weights"]] if "weights" in data else _uniform(n)
    gens = data["generators"]
    if isinstance(gens, dict):
        names = sorted(gens, key=lambda s: (len(s), s))
        action = [gens[k] for k in names]
    else:
        action = list(gens)
    if G is None:
        G = abelian(len(action))
    return FiniteMPS(G, weights, action)


# -- return measures --------------------------------------------------------------------------------------


def _evaluate_systems(S: Sequence, t: Sequence[FinSet]) -> list[Element]:
    out = []
    for s in S:
        if isinstance(s, PolyMap):
            out.append(s(t[0]))
        elif isinstance(s, PolyExpr):
            out.append(pe_eval(s, t))
        else:
            out.append(tuple(s))
    return out


def return_measure(sys: FiniteMPS, A, S: Sequence, t: Sequence[FinSet]) -> Fraction:
    """``mu(intersection_i A S_i(t)^-1)`` for expressions, maps or fixed elements ``S_i``."""
    A = set(A)
    elems = _evaluate_systems(S, t)
    return _intersection_measure(sys, A, elems)


def _intersection_measure(sys: FiniteMPS, A: set, elems: list[Element]) -> Fraction:
    if not elems:
        return sys.measure(range(sys.n))
    pre = [sys.preimage(A, g) for g in elems]
    muA = sys.measure(A)
    for B in pre:
        if sys.measure(B) != muA:
            raise AssertionError("measure is not preserved by an evaluated element")
    inter = set.intersection(*pre)
    m = sys.measure(inter)
    lower = sum(sys.measure(B) for B in pre) - (len(pre) - 1)
    if m < lower:
        raise AssertionError("intersection measure violates the inclusion-exclusion bound")
    return m


@dataclass
class ReturnReport:
    measures: dict
    minimum: Fraction
    maximum: Fraction
    witnesses: list
    depth: int
    mu_A: Fraction

    @property
    def positive(self) -> bool:
        return bool(self.witnesses)

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "mu_A": str(self.mu_A),
            "measures": {str(k): str(v) for k, v in sorted(self.measures.items())},
            "minimum": str(self.minimum),
            "maximum": str(self.maximum),
            "positive": self.positive,
            "witnesses": self.witnesses,
        }


def _polys(polys) -> list[list[GenPoly]]:
    return [[parse(p) if isinstance(p, str) else p for p in row] for row in polys]


def exponent_elements(sys: FiniteMPS, polys, n: Sequence[int]) -> list[Element]:
    """``prod_i T_i^{p_ij(n)}`` for every column ``j`` of the exponent matrix (rows: generators)."""
    G = sys.group
    P = _polys(polys)
    if not P or len(P) > G.rank:
        raise ValueError(f"exponent matrix needs between 1 and {G.rank} rows (one per generator)")
    cols = len(P[0]) if P else 0
    out = []
    for j in range(cols):
        g = G.identity
        for i in range(len(P)):
            g = G.mul(g, G.gen_power(i, evaluate(P[i][j], n)))
        out.append(g)
    return out


def recurrence_check(
    sys: FiniteMPS,
    A,
    polys,
    ipsys: IPSystem,
    chain: IPRing,
    depth: int | None = None,
) -> ReturnReport:
    """Return measures ``mu(A & A g_1(n_a)^-1 & ...)`` over the ring of the first ``depth``
    blocks of ``chain``, where ``g_j(n) = prod_i T_i^{p_ij(n)}``."""
    depth = chain.k if depth is None else depth
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if depth > chain.k:
        raise ValueError(f"chain has only {chain.k} blocks")
    A = set(A)
    G = sys.group
    measures = {}
    witnesses = []
    for s in nonempty_subsets((1 << depth) - 1):
        alpha = 0
        for i in elements(s):
            alpha |= chain.chain[i]
        n = ipsys.value(alpha)
        elems = [G.identity] + exponent_elements(sys, polys, n)
        m = _intersection_measure(sys, A, elems)
        measures[alpha] = m
        if m > 0:
            witnesses.append({"alpha": elements(alpha), "n": list(n), "measure": str(m)})
    vals = list(measures.values())
    return ReturnReport(measures, min(vals), max(vals), witnesses, depth, sys.measure(A))


def recheck_witness(sys: FiniteMPS, A, polys, witness: dict) -> bool:
    """Recompute a positivity witness point by point with letter-by-letter actions."""
    P = _polys(polys)
    n = witness["n"]
    A = set(A)
    words = [[]]
    for j in range(len(P[0])):
        words.append([(i, evaluate(P[i][j], n)) for i in range(len(P))])
    total = Fraction(0)
    for x in range(sys.n):
        if all(sys.act_word(x, w) in A for w in words):
            total += sys.weights[x]
    return total > 0 and total == Fraction(witness["measure"])
