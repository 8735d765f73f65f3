"""Filtrations ``G_0 >= G_1 >= ... >= G_d >= G_{d+1} = 1`` and their derived forms.

A :class:`Filtration` stores the subgroups ``G_0, ..., G_d``; ``length`` is
``d`` and ``None`` encodes length minus infinity (every level trivial).  The
optional ``modulus`` is a normal subgroup ``N`` and turns the filtration into
one of ``G_i N / N``, which is how quotients ``G_i / G_t`` are represented.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .group import Element, NilGroup, NotNilpotentError
from .subgroup import Subgroup, trivial_subgroup, whole_group


@dataclass(frozen=True, eq=False)
class Filtration:
    group: NilGroup
    levels: tuple[Subgroup, ...]
    modulus: Subgroup | None = None
    label: str = ""
    _joined: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def length(self) -> int | None:
        return len(self.levels) - 1 if self.levels else None

    def level(self, i: int) -> Subgroup:
        """``G_i``; indices below 0 give ``G_0`` and indices past the length are trivial."""
        if not self.levels or i >= len(self.levels):
            return self.modulus or trivial_subgroup(self.group)
        i = max(i, 0)
        if self.modulus is None:
            return self.levels[i]
        got = self._joined.get(i)
        if got is None:
            got = Subgroup(self.group, self.levels[i].igs() + self.modulus.igs())
            self._joined[i] = got
        return got

    def contains(self, i: int, g: Element) -> bool:
        """Whether ``g`` lies in ``G_i`` (modulo the modulus, if any)."""
        if self.length is None or i > self.length:
            return self.is_trivial_element(g)
        return self.level(i).contains(g)

    def is_trivial_element(self, g: Element) -> bool:
        if self.modulus is None:
            return self.group.is_identity(g)
        return self.modulus.contains(g)

    def same(self, a: Element, b: Element) -> bool:
        return self.is_trivial_element(self.group.mul(self.group.inv(a), b))

    # -- derived filtrations ------------------------------------------------

    def shift(self, t: int) -> "Filtration":
        """``(G[+t])_i = G_{i+t}``, of length ``d - t``."""
        if t < 0:
            raise ValueError("shift must be non-negative")
        return Filtration(self.group, self.levels[t:], self.modulus, f"{self.label}[+{t}]")

    def quotient(self, t: int) -> "Filtration":
        """``(G[/t])_i = G_i / G_t``, of length ``min(d, t - 1)``."""
        if t < 0:
            raise ValueError("quotient index must be non-negative")
        mod = self.level(t)
        return Filtration(self.group, self.levels[:t], mod, f"{self.label}[/{t}]")

    def reindex(self, dbar: Sequence[int] | int) -> "Filtration":
        """``G^dbar_i = G_j`` for ``d_{j-1} < i <= d_j``.

        ``dbar`` is either the sequence ``d_0, d_1, ...`` (at least ``length + 1``
        entries) or an integer ``d`` standing for ``d_i = d * i``.
        """
        if self.length is None:
            return self
        if isinstance(dbar, int):
            dbar = [dbar * i for i in range(self.length + 1)]
        dbar = list(dbar)
        check_superadditive(dbar)
        if len(dbar) < self.length + 1:
            raise ValueError(f"reindexing needs at least {self.length + 1} entries")
        new_levels = []
        for i in range(dbar[self.length] + 1):
            j = next(j for j, dj in enumerate(dbar) if i <= dj)
            new_levels.append(self.levels[j])
        return Filtration(self.group, tuple(new_levels), self.modulus, f"{self.label}^{dbar}")

    # -- checks ---------------------------------------------------------------

    def check(self) -> list[str]:
        """Return the violated axioms (empty when this is a prefiltration)."""
        problems = []
        for i in range(len(self.levels) - 1):
            if not self.levels[i + 1].is_subgroup_of(self.level(i)):
                problems.append(f"G_{i + 1} is not contained in G_{i}")
        G = self.group
        for i, Gi in enumerate(self.levels):
            for j in range(i, len(self.levels)):
                for a in Gi.igs():
                    for b in self.levels[j].igs():
                        if not self.contains(i + j, G.comm(a, b)):
                            problems.append(f"[G_{i}, G_{j}] is not contained in G_{i + j}")
                            break
                    else:
                        continue
                    break
        return problems

    def is_filtration(self) -> bool:
        """A prefiltration with ``G_0 = G_1``."""
        if self.check():
            return False
        if self.length is None or self.length == 0:
            return True
        return self.level(0).is_subgroup_of(self.level(1))

    def __repr__(self) -> str:
        return f"Filtration({self.label or '?'}, length={self.length})"


def check_superadditive(dbar: Sequence[int]) -> None:
    if not dbar or dbar[0] != 0:
        raise ValueError("a reindexing sequence must start with d_0 = 0")
    for i in range(len(dbar)):
        for j in range(len(dbar) - i):
            if dbar[i + j] < dbar[i] + dbar[j]:
                raise ValueError(
                    f"reindexing sequence is not superadditive: d_{i + j} < d_{i} + d_{j}"
                )


def filtration_from_generators(
    G: NilGroup, levels: Sequence[Sequence[Element]], label: str = ""
) -> Filtration:
    return Filtration(G, tuple(Subgroup(G, gens) for gens in levels), None, label)


def trivial_filtration(G: NilGroup) -> Filtration:
    """The filtration of length minus infinity."""
    return Filtration(G, (), None, "trivial")


def constant_filtration(G: NilGroup, length: int) -> Filtration:
    """``G_0 = ... = G_length = G``; for abelian ``G`` this is ``Z_*^length``."""
    W = whole_group(G)
    return Filtration(G, (W,) * (length + 1), None, f"const{length}")


def lower_central_series(G: NilGroup, class_cap: int | None = None) -> Filtration:
    """``G_0 = G_1 = G``, ``G_{i+1} = [G_i, G]``; raises past the class cap.

    On failure the :class:`NotNilpotentError` carries the induced generating
    sequences of ``G_1, G_2, ...`` computed so far.
    """
    cap = G.class_cap if class_cap is None else class_cap
    W = whole_group(G)
    gens = [G.gen(k) for k in range(G.rank)]
    terms = [W]
    while not terms[-1].is_trivial():
        if len(terms) > cap:
            raise NotNilpotentError(
                f"not nilpotent within cap {cap}", layers=[t.igs() for t in terms]
            )
        prev = terms[-1]
        comms = [G.comm(a, b) for a in prev.igs() for b in gens]
        nxt = Subgroup(G, comms, normal=True)
        if nxt == prev:
            raise NotNilpotentError(
                f"lower central series stabilises at a non-trivial term after {len(terms)} steps",
                layers=[t.igs() for t in terms],
            )
        terms.append(nxt)
    terms.pop()  # trailing trivial term
    if not terms:
        return trivial_filtration(G)
    return Filtration(G, (terms[0],) + tuple(terms), None, "lcs")
