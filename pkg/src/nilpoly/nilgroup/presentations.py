"""Ready-made presentations used throughout tests, scripts and the CLI."""

from __future__ import annotations

from .group import NilGroup


def _vec(rank: int, *letters: tuple[int, int]) -> tuple:
    v = [0] * rank
    for k, e in letters:
        v[k] += e
    return tuple(v)


def abelian(k: int) -> NilGroup:
    """``Z^k``."""
    return NilGroup(k, names=[f"e{i}" for i in range(k)], label=f"Z^{k}")


def cyclic(n: int) -> NilGroup:
    return NilGroup(1, orders=[n], names=["t"], label=f"Z/{n}")


def heisenberg(modulus: int | None = None) -> NilGroup:
    """Free class-2 nilpotent group on ``x, y`` with ``c = [x, y]`` (optionally mod ``p``)."""
    orders = None if modulus is None else [modulus] * 3
    return NilGroup(
        3,
        orders=orders,
        commutators={(0, 1): _vec(3, (2, 1))},
        names=["x", "y", "c"],
        label="heisenberg" if modulus is None else f"heisenberg mod {modulus}",
    )


def free_nilpotent_class3_rank2() -> NilGroup:
    """Generators ``a, b, c = [a,b], d = [c,a], e = [c,b]``.

    Hence ``[a, c] = d^-1`` and ``[b, c] = e^-1``; ``d, e`` are central.
    """
    return NilGroup(
        5,
        commutators={
            (0, 1): _vec(5, (2, 1)),
            (0, 2): _vec(5, (3, -1)),
            (1, 2): _vec(5, (4, -1)),
        },
        names=["a", "b", "c", "d", "e"],
        label="free class 3 rank 2",
    )


def infinite_dihedral() -> NilGroup:
    """``Z_2 x| Z`` with ``t`` acting by inversion: ``[t, a] = a^2``.

    Virtually abelian but not nilpotent; used to exercise non-nilpotence detection.
    """
    return NilGroup(
        2,
        orders=[2, None],
        commutators={(0, 1): _vec(2, (1, 2))},
        names=["t", "a"],
        label="Z2 x| Z",
    )


def unitriangular(n: int, modulus: int | None = None) -> NilGroup:
    """Upper unitriangular ``n x n`` integer matrices (optionally mod ``modulus``).

    Generators are the elementary matrices ``E_{i,j}`` ordered by ``j - i``;
    ``[E_{i,j}, E_{j,k}] = E_{i,k}``.
    """
    pairs = [(i, i + s) for s in range(1, n) for i in range(n - s)]
    index = {p: k for k, p in enumerate(pairs)}
    rank = len(pairs)
    comms = {}
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            if a >= b:
                continue
            if j == k:
                comms[(a, b)] = _vec(rank, (index[(i, l)], 1))
            elif l == i:
                comms[(a, b)] = _vec(rank, (index[(k, j)], -1))
    orders = None if modulus is None else [modulus] * rank
    return NilGroup(
        rank,
        orders=orders,
        commutators=comms,
        names=[f"E{i}{j}" for i, j in pairs],
        label=f"UT({n})" if modulus is None else f"UT({n}) mod {modulus}",
    )


def direct_power(G: NilGroup, copies: int) -> NilGroup:
    """``G^copies`` with the presentation of ``G`` repeated blockwise."""
    r = G.rank
    rank = r * copies
    comms = {}
    powers = {}
    for c in range(copies):
        off = c * r
        for (i, j), w in G.commutators.items():
            v = [0] * rank
            v[off: off + r] = w
            comms[(off + i, off + j)] = tuple(v)
        for i, w in G.powers.items():
            v = [0] * rank
            v[off: off + r] = w
            powers[off + i] = tuple(v)
    return NilGroup(
        rank,
        orders=list(G.orders) * copies,
        commutators=comms,
        powers=powers,
        class_cap=G.class_cap,
        names=[f"{n}_{c}" for c in range(copies) for n in G.names],
        label=f"({G.label or 'G'})^{copies}",
    )


BUILTINS = {
    "heisenberg": heisenberg,
    "free3": free_nilpotent_class3_rank2,
    "dihedral": infinite_dihedral,
}


def builtin(name: str, **kw) -> NilGroup:
    """Look up a named presentation: ``Z^k``, ``Z/n``, ``heisenberg``, ``heisenberg/p``,
    ``free3``, ``dihedral``, ``UT<n>``."""
    if name.startswith("Z^"):
        return abelian(int(name[2:]))
    if name.startswith("Z/"):
        return cyclic(int(name[2:]))
    if name.startswith("heisenberg/"):
        return heisenberg(int(name.split("/", 1)[1]))
    if name.startswith("UT"):
        return unitriangular(int(name[2:]))
    if name in BUILTINS:
        return BUILTINS[name](**kw)
    raise KeyError(f"unknown builtin group {name!r}")
