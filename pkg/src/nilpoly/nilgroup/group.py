"""Polycyclic presentations and collection.

A group is given by generators ``x_0, ..., x_{n-1}`` with relative orders,
commutator relations ``[x_i, x_j]`` for ``i < j`` and power relations
``x_i^{r_i}`` for generators of finite relative order ``r_i``.  Elements are
exponent vectors ``(e_0, ..., e_{n-1})`` standing for the normal form word
``x_0^{e_0} ... x_{n-1}^{e_{n-1}}``.

Commutator convention throughout the package: ``[g, h] = g^-1 h^-1 g h``.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

Element = tuple


class PresentationError(ValueError):
    """The presentation cannot be handled by the collector."""


class NotNilpotentError(RuntimeError):
    """Raised when a lower central series does not terminate within the class cap.

    ``layers`` holds the generator lists of the terms that were computed.
    """

    def __init__(self, message: str, layers=None):
        super().__init__(message)
        self.layers = layers or []


class NilGroup:
    """A finitely generated group given by a (nilpotent) polycyclic presentation.

    ``commutators`` maps ``(i, j)`` with ``i < j`` to the normal form of
    ``[x_i, x_j]``; missing pairs commute.  The word must only involve
    generators of index ``>= j``; the presentation is *triangular* (the
    nilpotent case) when it only involves generators of index ``> j``.
    Non-triangular relations are accepted when ``x_i`` has finite relative
    order, which is enough to host virtually nilpotent test groups such as
    ``Z_2 x| Z``.

    ``powers`` maps a finite-order generator index ``i`` to the normal form of
    ``x_i^{orders[i]}`` (involving generators of index ``> i``); missing
    entries mean the power is trivial.
    """

    def __init__(
        self,
        rank: int,
        orders: Sequence[int | None] | None = None,
        commutators: Mapping[tuple[int, int], Iterable[int]] | None = None,
        powers: Mapping[int, Iterable[int]] | None = None,
        class_cap: int = 6,
        names: Sequence[str] | None = None,
        label: str | None = None,
    ):
        self.rank = rank
        self.orders = tuple(orders) if orders is not None else (None,) * rank
        if len(self.orders) != rank:
            raise PresentationError("orders must have one entry per generator")
        for o in self.orders:
            if o is not None and o < 1:
                raise PresentationError(f"relative order {o} is not positive")
        self.class_cap = class_cap
        self.names = tuple(names) if names else tuple(f"x{i}" for i in range(rank))
        self.label = label
        self.identity = (0,) * rank

        self.commutators: dict[tuple[int, int], Element] = {}
        self.powers: dict[int, Element] = {}
        self._conj: dict[tuple[int, int, int], Element] = {}
        self._mul_cache: dict[tuple[Element, Element], Element] = {}
        raw_comm = {}
        for (i, j), word in (commutators or {}).items():
            if not 0 <= i < j < rank:
                raise PresentationError(f"commutator index pair {(i, j)} is not i < j")
            w = self._check_vector(word)
            if any(w[:j]):
                raise PresentationError(f"[x{i}, x{j}] involves generators below x{j}")
            if w[j] and self.orders[i] is None:
                raise PresentationError(
                    f"[x{i}, x{j}] involves x{j} but x{i} has infinite order"
                )
            raw_comm[(i, j)] = w
        raw_pow = {}
        for i, word in (powers or {}).items():
            i = int(i)
            if self.orders[i] is None:
                raise PresentationError(f"power relation given for infinite generator x{i}")
            w = self._check_vector(word)
            if any(w[: i + 1]):
                raise PresentationError(f"power relation of x{i} is not supported above x{i}")
            raw_pow[i] = w
        # relations are installed unreduced, then brought into normal form
        self.commutators = {k: w for k, w in raw_comm.items() if any(w)}
        self.powers = {k: w for k, w in raw_pow.items() if any(w)}
        self.commutators = {k: self.normalize(w) for k, w in self.commutators.items()}
        self.powers = {k: self.normalize(w) for k, w in self.powers.items()}
        self.commutators = {k: w for k, w in self.commutators.items() if any(w)}
        self.powers = {k: w for k, w in self.powers.items() if any(w)}
        self._conj.clear()
        self._mul_cache.clear()
        self.triangular = all(not w[j] for (_, j), w in self.commutators.items())
        # with no relations at all, multiplication is coordinatewise addition
        self.free_abelian = not self.commutators and not self.powers and all(
            o is None for o in self.orders
        )

    # -- construction helpers ------------------------------------------------

    def _check_vector(self, word: Iterable[int]) -> Element:
        w = tuple(int(v) for v in word)
        if len(w) != self.rank:
            raise PresentationError(f"expected an exponent vector of length {self.rank}")
        return w

    def normalize(self, e: Iterable[int]) -> Element:
        """Reduce an exponent vector into normal form."""
        e = tuple(e)
        if len(e) != self.rank:
            raise ValueError(f"expected {self.rank} exponents, got {len(e)}")
        if all(o is None or 0 <= v < o for v, o in zip(e, self.orders)):
            return e
        return self.word(*((k, v) for k, v in enumerate(e) if v))

    def gen(self, k: int, e: int = 1) -> Element:
        return self.gen_power(k, e)

    def word(self, *letters: tuple[int, int]) -> Element:
        """Evaluate a word given as ``(generator, exponent)`` pairs."""
        r = self.identity
        for k, e in letters:
            r = self._mul_gen(r, k, e)
        return r

    def __repr__(self) -> str:
        return f"NilGroup({self.label or self.rank})"

    # -- arithmetic ----------------------------------------------------------

    def is_identity(self, a: Element) -> bool:
        return not any(a)

    def mul(self, a: Element, b: Element) -> Element:
        if not any(b):
            return a
        if not any(a):
            return b
        if self.free_abelian:
            return tuple(x + y for x, y in zip(a, b))
        key = (a, b)
        r = self._mul_cache.get(key)
        if r is None:
            r = a
            for k, s in enumerate(b):
                if s:
                    r = self._mul_gen(r, k, s)
            if len(self._mul_cache) > 200_000:
                self._mul_cache.clear()
            self._mul_cache[key] = r
        return r

    def prod(self, *elements: Element) -> Element:
        r = self.identity
        for e in elements:
            r = self.mul(r, e)
        return r

    def inv(self, a: Element) -> Element:
        if self.free_abelian:
            return tuple(-x for x in a)
        r = self.identity
        for k in range(self.rank - 1, -1, -1):
            if a[k]:
                r = self._mul_gen(r, k, -a[k])
        return r

    def pow(self, a: Element, n: int) -> Element:
        if n < 0:
            a, n = self.inv(a), -n
        r = self.identity
        while n:
            if n & 1:
                r = self.mul(r, a)
            n >>= 1
            if n:
                a = self.mul(a, a)
        return r

    def comm(self, a: Element, b: Element) -> Element:
        """``[a, b] = a^-1 b^-1 a b``."""
        return self.mul(self.inv(self.mul(b, a)), self.mul(a, b))

    def conj(self, a: Element, b: Element) -> Element:
        """``a^b = b^-1 a b``."""
        return self.mul(self.inv(b), self.mul(a, b))

    def gen_power(self, k: int, s: int) -> Element:
        return self._mul_gen(self.identity, k, s)

    def _mul_gen(self, e: Element, k: int, s: int) -> Element:
        """Collect ``e * x_k^s``."""
        if s == 0:
            return e
        n = self.rank
        tail = (0,) * (k + 1) + tuple(e[k + 1:])
        if any(tail):
            tail = self._conj_tail(tail, k, s)
        new = e[k] + s
        order = self.orders[k]
        if order is not None:
            q, new = divmod(new, order)
            if q and k in self.powers:
                tail = self.mul(self.pow(self.powers[k], q), tail)
        return tuple(e[:k]) + (new,) + tail[k + 1:n]

    def _conj_tail(self, v: Element, k: int, s: int) -> Element:
        """``v^(x_k^s)`` for ``v`` supported strictly above ``k``."""
        order = self.orders[k]
        q = 0
        if order is not None:
            q, s = divmod(s, order)
        sign = 1 if s > 0 else -1
        for _ in range(abs(s)):
            r = self.identity
            for j in range(k + 1, self.rank):
                if v[j]:
                    r = self.mul(r, self.pow(self._conj_gen(k, j, sign), v[j]))
            v = r
        if q and k in self.powers:
            w = self.pow(self.powers[k], q)
            v = self.mul(self.inv(w), self.mul(v, w))
        return v

    def _conj_gen(self, k: int, j: int, sign: int) -> Element:
        """``x_j^(x_k^sign)`` for ``k < j``."""
        key = (k, j, sign)
        r = self._conj.get(key)
        if r is not None:
            return r
        xj = self.gen_power(j, 1)
        c = self.commutators.get((k, j))
        if sign > 0:
            # x_j^{x_k} = x_j [x_j, x_k] = x_j [x_k, x_j]^-1
            r = xj if c is None else self.mul(xj, self.inv(c))
        else:
            if c is None:
                r = xj
            else:
                # phi(x_j) = x_j t with t above j, so phi^-1(x_j) = x_j phi^-1(t)^-1
                t = self.inv(c)
                if t[j]:
                    raise PresentationError(
                        f"cannot invert conjugation by x{k}: relation is not triangular"
                    )
                r = self.mul(xj, self.inv(self._apply_conj(t, k, -1)))
        self._conj[key] = r
        return r

    def _apply_conj(self, v: Element, k: int, sign: int) -> Element:
        r = self.identity
        for j in range(k + 1, self.rank):
            if v[j]:
                r = self.mul(r, self.pow(self._conj_gen(k, j, sign), v[j]))
        return r

    # -- misc ---------------------------------------------------------------

    def depth(self, a: Element) -> int:
        """Index of the first non-zero exponent (``rank`` for the identity)."""
        for k, v in enumerate(a):
            if v:
                return k
        return self.rank

    def is_finite(self) -> bool:
        return all(o is not None for o in self.orders)

    def order(self) -> int | None:
        if not self.is_finite():
            return None
        r = 1
        for o in self.orders:
            r *= o
        return r

    def elements(self):
        """All elements of a finite group, in lexicographic exponent order."""
        if not self.is_finite():
            raise ValueError("group is infinite")
        from itertools import product

        return [tuple(t) for t in product(*(range(o) for o in self.orders))]

    def random_element(self, rng, bound: int = 3) -> Element:
        return self.normalize(
            rng.randint(-bound, bound) if o is None else rng.randrange(o) for o in self.orders
        )

    def format(self, a: Element) -> str:
        parts = [f"{self.names[k]}^{v}" if v != 1 else self.names[k] for k, v in enumerate(a) if v]
        return "*".join(parts) or "1"


def collect_product(a: Element, b: Element, G: NilGroup) -> Element:
    return G.mul(a, b)


def commutator(a: Element, b: Element, G: NilGroup) -> Element:
    return G.comm(a, b)
