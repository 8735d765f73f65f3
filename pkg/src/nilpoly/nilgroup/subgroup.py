"""Subgroups given by generators, represented by an induced polycyclic sequence.

A subgroup ``H`` is stored as a table ``depth -> element`` such that every
element of ``H`` sifts to the identity: repeatedly divide off a power of the
table entry at the current depth.  At each depth the quotient
``N_k / N_{k+1}`` (``N_k = <x_k, ..., x_{n-1}>``) is cyclic, so the leading
exponents of ``H`` at depth ``k`` form a subgroup of ``Z`` (or ``Z/r``) and the
table keeps its positive generator.  This is the per-generator form of a
Hermite reduction of each layer.
"""

from __future__ import annotations

from math import gcd
from typing import Iterable

from .group import Element, NilGroup


def _lead(G: NilGroup, g: Element) -> tuple[int, int]:
    k = G.depth(g)
    return k, (g[k] if k < G.rank else 0)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, u, v)`` with ``u*a + v*b = g = gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


class Subgroup:
    """The subgroup of ``G`` generated by ``generators``.

    With ``normal=True`` the normal closure in ``G`` is computed instead.
    """

    def __init__(self, G: NilGroup, generators: Iterable[Element] = (), normal: bool = False):
        self.G = G
        self.generators = [G.normalize(g) for g in generators]
        self.normal = normal
        self.table: dict[int, Element] = {}
        self._close(list(self.generators))

    # -- construction -------------------------------------------------------

    def _insert(self, queue: list[Element]) -> bool:
        """Sift everything in ``queue`` into the table; report whether it grew."""
        G = self.G
        changed = False
        while queue:
            g = self.sift(queue.pop())
            if G.is_identity(g):
                continue
            changed = True
            k, a = _lead(G, g)
            order = G.orders[k]
            old = self.table.get(k)
            if old is None:
                if order is not None:
                    d = gcd(a, order)
                    if d != a:
                        # g^u has leading exponent gcd(a, order); g itself re-sifts
                        _, u, _ = _ext_gcd(a, order)
                        self.table[k] = G.pow(g, u % order)
                        queue.append(g)
                    else:
                        self.table[k] = g
                    queue.append(G.pow(self.table[k], order // d))
                else:
                    if a < 0:
                        g = G.inv(g)
                    self.table[k] = g
                continue
            # combine with the existing entry via the extended Euclidean algorithm
            b = old[k]
            d, u, v = _ext_gcd(b, a)
            new = G.mul(G.pow(old, u), G.pow(g, v))
            if order is not None:
                d = new[k]
                if gcd(d, order) != d:
                    _, w, _ = _ext_gcd(d, order)
                    new = G.pow(new, w % order)
            elif new[k] < 0:
                new = G.inv(new)
            self.table[k] = new
            queue.extend([old, g])
            if order is not None:
                queue.append(G.pow(new, order // gcd(new[k], order)))
        return changed

    def _close(self, queue: list[Element]) -> None:
        G = self.G
        self._insert(queue)
        if not G.commutators:
            return  # abelian: the sifted generators already span the subgroup
        while True:
            elems = [self.table[k] for k in sorted(self.table)]
            extra: list[Element] = []
            for i, s in enumerate(elems):
                for t in elems[i + 1:]:
                    extra.append(G.comm(s, t))
                    extra.append(G.comm(G.inv(s), t))
                    extra.append(G.comm(s, G.inv(t)))
                if self.normal:
                    for k in range(G.rank):
                        extra.append(G.conj(s, G.gen(k, 1)))
                        if G.orders[k] is None:
                            extra.append(G.conj(s, G.gen(k, -1)))
            if not self._insert(extra):
                return

    # -- queries ------------------------------------------------------------

    def sift(self, g: Element) -> Element:
        """Divide ``g`` by table entries; the result is the identity iff ``g`` is in the subgroup."""
        G = self.G
        while True:
            k, a = _lead(G, g)
            if k == G.rank:
                return g
            t = self.table.get(k)
            if t is None:
                return g
            b = t[k]
            order = G.orders[k]
            if order is None:
                if a % b:
                    return g
                q = a // b
            else:
                # solve q*b = a (mod order)
                d = gcd(b, order)
                if a % d:
                    return g
                _, u, _ = _ext_gcd(b // d, order // d)
                q = (a // d) * u % (order // d)
            g = G.mul(G.pow(t, -q), g)

    def contains(self, g: Element) -> bool:
        return self.G.is_identity(self.sift(self.G.normalize(g)))

    __contains__ = contains

    def igs(self) -> list[Element]:
        """Induced generating sequence, ordered by depth."""
        return [self.table[k] for k in sorted(self.table)]

    def is_trivial(self) -> bool:
        return not self.table

    def hirsch_length(self) -> int:
        return sum(1 for k in self.table if self.G.orders[k] is None)

    def index(self) -> int | None:
        """``[G : H]``, or ``None`` when it is infinite."""
        r = 1
        for k in range(self.G.rank):
            t = self.table.get(k)
            order = self.G.orders[k]
            if t is None:
                if order is None:
                    return None
                r *= order
            else:
                r *= t[k]
        return r

    def order(self) -> int | None:
        """``|H|``, or ``None`` when ``H`` is infinite."""
        r = 1
        for k, t in self.table.items():
            order = self.G.orders[k]
            if order is None:
                return None
            r *= order // t[k]
        return r

    def is_subgroup_of(self, other: "Subgroup") -> bool:
        return all(other.contains(g) for g in self.igs())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.G is other.G and self.is_subgroup_of(other) and other.is_subgroup_of(self)

    def __hash__(self):
        return hash(tuple(self.igs()))

    def join(self, other: "Subgroup", normal: bool | None = None) -> "Subgroup":
        return Subgroup(
            self.G, self.igs() + other.igs(), normal=self.normal and other.normal if normal is None else normal
        )

    def __repr__(self) -> str:
        return f"Subgroup({[self.G.format(g) for g in self.igs()]})"


def trivial_subgroup(G: NilGroup) -> Subgroup:
    return Subgroup(G, ())


def whole_group(G: NilGroup) -> Subgroup:
    return Subgroup(G, [G.gen(k) for k in range(G.rank)])


def hirsch_length(generators: Iterable[Element], G: NilGroup) -> int:
    """Hirsch length of the subgroup generated by ``generators``."""
    return Subgroup(G, generators).hirsch_length()


def finite_index_test(generators: Iterable[Element], G: NilGroup) -> bool:
    """Whether ``<generators>`` has finite index in ``G`` (equal Hirsch lengths)."""
    return hirsch_length(generators, G) == whole_group(G).hirsch_length()
