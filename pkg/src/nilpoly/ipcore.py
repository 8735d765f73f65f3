"""Finite subsets of N as bitmasks, IP-rings, and Hindman / Milliken-Taylor searches.

A finite set is an ``int`` whose bit ``i`` marks membership of ``i``.  Chains
are sequences of nonempty masks ``a_0 < a_1 < ...`` where ``a < b`` means
``max(a) < min(b)``.  Searches enumerate chains in lexicographic order of the
mask sequence, so the first witness found is the least one.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .errors import CapExceededError

GROUND_CAP = 63

FinSet = int


# -- finite sets ---------------------------------------------------------------


def mask(elements: Iterable[int]) -> FinSet:
    m = 0
    for i in elements:
        if i < 0:
            raise ValueError("finite sets live in the non-negative integers")
        m |= 1 << i
    return m


def elements(m: FinSet) -> list[int]:
    out = []
    i = 0
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return out


def card(m: FinSet) -> int:
    return bin(m).count("1")


def min_elt(m: FinSet) -> int:
    return (m & -m).bit_length() - 1


def max_elt(m: FinSet) -> int:
    return m.bit_length() - 1


def precedes(a: FinSet, b: FinSet) -> bool:
    """``max(a) < min(b)``; the empty set precedes and succeeds everything."""
    if a == 0 or b == 0:
        return True
    return max_elt(a) < min_elt(b)


def star(a: FinSet, b: FinSet) -> FinSet:
    """Disjoint union; undefined (``ValueError``) when ``a`` and ``b`` meet."""
    if a & b:
        raise ValueError("the union is only defined for disjoint sets")
    return a | b


def is_ordered(sets: Sequence[FinSet]) -> bool:
    return all(s for s in sets) and all(precedes(a, b) for a, b in zip(sets, sets[1:]))


def subsets(m: FinSet) -> Iterator[FinSet]:
    """All subsets of ``m`` (including 0 and ``m``) in increasing numeric order."""
    sub = 0
    while True:
        yield sub
        if sub == m:
            return
        sub = (sub - m) & m


def nonempty_subsets(m: FinSet) -> Iterator[FinSet]:
    it = subsets(m)
    next(it)
    return it


def ordered_tuples(ground: int, m: int, within: FinSet | None = None) -> Iterator[tuple[FinSet, ...]]:
    """All ordered ``m``-tuples ``a_1 < ... < a_m`` of nonempty subsets of ``within``.

    Enumerated in lexicographic order of the mask sequence.
    """
    full = (1 << ground) - 1 if within is None else within
    if m == 0:
        yield ()
        return

    def rec(prefix: tuple, avail: FinSet, left: int):
        if left == 0:
            yield prefix
            return
        for s in nonempty_subsets(avail):
            rest = avail & ~((1 << (max_elt(s) + 1)) - 1)
            if left > 1 and not rest:
                continue
            yield from rec(prefix + (s,), rest, left - 1)

    # nonempty_subsets enumerates in numeric order, which is the required order
    yield from rec((), full, m)


def format_set(m: FinSet) -> str:
    return "{" + ",".join(map(str, elements(m))) + "}"


# -- IP-rings ----------------------------------------------------------------------


@dataclass(frozen=True)
class IPRing:
    """The finite unions of a chain ``a_0 < a_1 < ... < a_{k-1}``."""

    chain: tuple[FinSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "chain", tuple(int(c) for c in self.chain))
        if not is_ordered(self.chain):
            raise ValueError("an IP-ring chain must be strictly increasing and nonempty")

    @property
    def k(self) -> int:
        return len(self.chain)

    def union(self, index_set: FinSet) -> FinSet:
        """``U_{i in index_set} a_i`` for a mask of chain positions."""
        r = 0
        for i in elements(index_set):
            r |= self.chain[i]
        return r

    def enumerate(self) -> list[FinSet]:
        return ring_enumerate(self)

    def index_sets(self) -> Iterator[FinSet]:
        return nonempty_subsets((1 << self.k) - 1)

    def sub_chain(self, blocks: Sequence[FinSet]) -> "IPRing":
        """The chain of unions ``U_{i in b} a_i`` for ordered blocks ``b`` of positions."""
        return IPRing(tuple(self.union(b) for b in blocks))

    @property
    def support(self) -> FinSet:
        return self.union((1 << self.k) - 1)

    def to_json(self) -> dict:
        return {"chain": list(self.chain)}


def ring_enumerate(r: IPRing) -> list[FinSet]:
    """All nonempty unions of chain members, in increasing mask order."""
    return sorted(r.union(s) for s in r.index_sets())


def singletons(k: int, start: int = 0) -> IPRing:
    return IPRing(tuple(1 << i for i in range(start, start + k)))


# -- colorings ---------------------------------------------------------------------


@dataclass(frozen=True)
class Coloring:
    """A finite coloring of finite sets or of ordered tuples of finite sets.

    Tuples are colored through ``table`` keys ``"m1,m2,..."`` or, for rule-based
    colorings, through the rule applied to the union of the tuple.

    ``rule`` is one of ``"constant"``, ``"parity"`` (cardinality mod 2),
    ``"card_mod"`` (cardinality mod ``q``) and ``"max_mod"`` (largest element
    mod ``q``).
    """

    ground: int
    colors: int = 2
    rule: str | None = None
    q: int = 2
    table: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.ground > GROUND_CAP:
            raise CapExceededError(f"ground {self.ground} exceeds cap {GROUND_CAP}")
        if self.rule is None and not self.table:
            raise ValueError("a coloring needs a rule or a table")
        if self.rule not in (None, "constant", "parity", "card_mod", "max_mod"):
            raise ValueError(f"unknown coloring rule {self.rule!r}")

    def __call__(self, x) -> int:
        if isinstance(x, tuple):
            if self.rule is None:
                key = ",".join(str(m) for m in x)
                return self._lookup(key)
            u = 0
            for m in x:
                u |= m
            return self._rule(u)
        if self.rule is None:
            return self._lookup(x)
        return self._rule(x)

    def _lookup(self, key):
        try:
            return self.table[key]
        except KeyError:
            try:
                return self.table[str(key)]
            except KeyError:
                raise ValueError(f"coloring table has no entry for {key}") from None

    def _rule(self, m: FinSet) -> int:
        if self.rule == "constant":
            return 0
        if self.rule == "parity":
            return card(m) % 2
        if self.rule == "card_mod":
            return card(m) % self.q
        return max_elt(m) % self.q

    @classmethod
    def from_list(cls, ground: int, values: Sequence[int], colors: int = 2) -> "Coloring":
        """Table coloring from ``values[mask - 1]`` for every nonempty mask."""
        return cls(ground, colors, table={m + 1: v for m, v in enumerate(values)})

    def to_json(self) -> dict:
        out: dict = {"ground": self.ground, "colors": self.colors}
        if self.rule is None:
            out["table"] = {str(k): v for k, v in sorted(self.table.items(), key=lambda kv: str(kv[0]))}
        else:
            out["rule"] = {"name": self.rule, "q": self.q}
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Coloring":
        ground = int(data["ground"])
        colors = int(data.get("colors", 2))
        if "rule" in data:
            rule = data["rule"]
            if isinstance(rule, str):
                return cls(ground, colors, rule=rule)
            return cls(ground, colors, rule=rule["name"], q=int(rule.get("q", 2)))
        table = {}
        for k, v in data["table"].items():
            table[int(k) if "," not in str(k) else str(k)] = int(v)
        return cls(ground, colors, table=table)


# -- searches ----------------------------------------------------------------------


def _check_ground(ground: int) -> None:
    if ground > GROUND_CAP:
        raise CapExceededError(f"ground {ground} exceeds cap {GROUND_CAP}")


def _block_tuples(k: int, m: int, last: int) -> list[tuple[FinSet, ...]]:
    """Ordered ``m``-tuples of position sets inside ``{0..last}`` whose last block contains ``last``."""
    out = []
    for t in ordered_tuples(last + 1, m):
        if t[-1] >> last & 1:
            out.append(t)
    return out


def _dfs(coloring, ground: int, m: int, k: int, first: FinSet | None) -> tuple[FinSet, ...] | None:
    """Least chain of length ``k`` on which the ``m``-tuple coloring is constant."""
    full = (1 << ground) - 1
    blocks = [_block_tuples(k, m, j) for j in range(k)]

    def colors_for(chain: list[FinSet], j: int) -> list:
        out = []
        for bt in blocks[j]:
            tup = tuple(_union(chain, b) for b in bt)
            out.append(coloring(tup if m > 1 else tup[0]))
        return out

    def rec(chain: list[FinSet], target) -> tuple | None:
        j = len(chain)
        if j == k:
            return tuple(chain)
        lo = max_elt(chain[-1]) + 1 if chain else 0
        avail = full & ~((1 << lo) - 1)
        for s in nonempty_subsets(avail):
            # later blocks need room: at least k - j - 1 further elements
            if k - j - 1 > ground - 1 - max_elt(s):
                continue
            chain.append(s)
            cols = colors_for(chain, j)
            t = target
            ok = True
            for c in cols:
                if t is None:
                    t = c
                elif c != t:
                    ok = False
                    break
            if ok:
                found = rec(chain, t)
                if found is not None:
                    return found
            chain.pop()
        return None

    if first is None:
        return rec([], None)
    # a subtree with a fixed first block
    chain = [first]
    cols = colors_for(chain, 0)
    if len(set(cols)) > 1:
        return None
    if k - 1 > ground - 1 - max_elt(first):
        return None
    return rec(chain, cols[0] if cols else None)


def _union(chain: Sequence[FinSet], positions: FinSet) -> FinSet:
    r = 0
    i = 0
    while positions:
        if positions & 1:
            r |= chain[i]
        positions >>= 1
        i += 1
    return r


def _subtree(args):
    coloring, ground, m, k, first = args
    return _dfs(coloring, ground, m, k, first)


def milliken_search(
    coloring: Callable, ground: int, arity: int, chain_len: int, jobs: int = 1
) -> IPRing | None:
    """Least chain ``a_0 < ... < a_{k-1}`` inside ``{0..ground-1}`` such that every
    ordered ``arity``-tuple of unions of chain blocks has the same color.

    Returns ``None`` when no such chain exists at this ground size.
    """
    _check_ground(ground)
    if chain_len < 1 or arity < 1:
        raise ValueError("chain length and arity must be positive")
    if chain_len > ground:
        return None
    if jobs <= 1:
        found = _dfs(coloring, ground, arity, chain_len, None)
    else:
        full = (1 << ground) - 1
        firsts = list(nonempty_subsets(full))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_subtree, [(coloring, ground, arity, chain_len, f) for f in firsts]))
        # the subtrees are in increasing order of the first block: the least witness
        # is the first non-empty result, independently of scheduling
        found = next((r for r in results if r is not None), None)
    return IPRing(found) if found is not None else None


def hindman_search(coloring: Callable, ground: int, chain_len: int, jobs: int = 1) -> IPRing | None:
    """Least chain of ``chain_len`` sets whose nonempty unions are monochrome."""
    return milliken_search(coloring, ground, 1, chain_len, jobs=jobs)


def is_monochrome(coloring: Callable, ring: IPRing, arity: int = 1) -> bool:
    """Independent check: color every ordered ``arity``-tuple of ring blocks."""
    seen = set()
    for pos in ordered_tuples(ring.k, arity):
        sets = tuple(ring.union(p) for p in pos)
        seen.add(coloring(sets if arity > 1 else sets[0]))
        if len(seen) > 1:
            return False
    return True

