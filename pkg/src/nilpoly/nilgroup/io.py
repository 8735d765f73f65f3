"""JSON encoding of presentations, elements and filtrations."""

from __future__ import annotations

import json
from typing import Any

from .filtration import (
    Filtration,
    constant_filtration,
    filtration_from_generators,
    lower_central_series,
    trivial_filtration,
)
from .group import Element, NilGroup, PresentationError
from .presentations import builtin
from .subgroup import Subgroup


def _word_to_vector(rank: int, word: Any) -> tuple:
    """Accept either an exponent vector or a list of ``[generator, exponent]`` pairs."""
    if isinstance(word, list) and all(isinstance(x, int) for x in word) and len(word) == rank:
        return tuple(word)
    v = [0] * rank
    for pair in word:
        if not (isinstance(pair, list) and len(pair) == 2):
            raise PresentationError(f"malformed word letter {pair!r}")
        k, e = pair
        if not 0 <= k < rank:
            raise PresentationError(f"generator index {k} out of range")
        v[k] += e
    return tuple(v)


def _vector_to_word(v: Element) -> list:
    return [[k, e] for k, e in enumerate(v) if e]


def group_from_json(data: dict | str) -> NilGroup:
    if isinstance(data, str):
        return builtin(data)
    if "builtin" in data:
        return builtin(data["builtin"])
    try:
        rank = int(data["rank"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PresentationError("group JSON needs an integer 'rank'") from exc
    comms = {}
    for key, word in (data.get("commutators") or {}).items():
        try:
            i, j = json.loads(key)
        except (ValueError, TypeError) as exc:
            raise PresentationError(f"commutator key {key!r} is not of the form '[i,j]'") from exc
        comms[(int(i), int(j))] = _word_to_vector(rank, word)
    powers = {int(k): _word_to_vector(rank, w) for k, w in (data.get("powers") or {}).items()}
    return NilGroup(
        rank,
        orders=data.get("orders"),
        commutators=comms,
        powers=powers,
        class_cap=int(data.get("class_cap", 6)),
        names=data.get("names"),
        label=data.get("label"),
    )


def group_to_json(G: NilGroup) -> dict:
    out: dict[str, Any] = {
        "rank": G.rank,
        "orders": list(G.orders),
        "commutators": {f"[{i},{j}]": _vector_to_word(w) for (i, j), w in sorted(G.commutators.items())},
        "class_cap": G.class_cap,
        "names": list(G.names),
    }
    if G.powers:
        out["powers"] = {str(i): _vector_to_word(w) for i, w in sorted(G.powers.items())}
    if G.label:
        out["label"] = G.label
    return out


def element_from_json(G: NilGroup, data: Any) -> Element:
    if isinstance(data, str):
        return parse_word(G, data)
    return G.normalize(_word_to_vector(G.rank, data))


def element_to_json(a: Element) -> list:
    return list(a)


def parse_word(G: NilGroup, text: str) -> Element:
    """Parse ``"x^2*y^-1*c"`` using the generator names of ``G``; ``"1"`` is the identity."""
    text = text.replace(" ", "")
    if text in ("", "1", "e"):
        return G.identity
    r = G.identity
    for part in text.split("*"):
        name, _, exp = part.partition("^")
        if name not in G.names:
            raise PresentationError(f"unknown generator {name!r}")
        r = G.mul(r, G.gen(G.names.index(name), int(exp) if exp else 1))
    return r


def filtration_from_json(G: NilGroup, data: dict | str) -> Filtration:
    """Either explicit ``{"length": d, "levels": [[elements]...]}`` or a named form:
    ``"lcs"``, ``{"constant": d}``, ``"trivial"``; any form may carry ``"derive"``."""
    if isinstance(data, str):
        data = {"builtin": data}
    if data.get("builtin") == "lcs" or data.get("lcs"):
        F = lower_central_series(G)
    elif data.get("builtin") == "trivial":
        F = trivial_filtration(G)
    elif "constant" in data:
        F = constant_filtration(G, int(data["constant"]))
    else:
        length = data.get("length")
        levels = data.get("levels") or []
        if length is None:
            if any(any(any(e) for e in map(lambda x: element_from_json(G, x), lvl)) for lvl in levels):
                raise PresentationError("filtration of length null must have trivial levels")
            F = trivial_filtration(G)
        else:
            if len(levels) != length + 1:
                raise PresentationError(f"length {length} needs {length + 1} levels, got {len(levels)}")
            F = filtration_from_generators(
                G, [[element_from_json(G, x) for x in lvl] for lvl in levels], "json"
            )
        if data.get("modulus"):
            F = Filtration(
                G, F.levels, Subgroup(G, [element_from_json(G, x) for x in data["modulus"]], normal=True), F.label
            )
    for step in data.get("derive", []) or []:
        F = apply_derivation(F, step)
    return F


def apply_derivation(F: Filtration, step: dict) -> Filtration:
    if "shift" in step:
        return F.shift(int(step["shift"]))
    if "quotient" in step:
        return F.quotient(int(step["quotient"]))
    if "reindex" in step:
        return F.reindex(step["reindex"])
    raise PresentationError(f"unknown derivation {step!r}")


def filtration_to_json(F: Filtration) -> dict:
    out: dict[str, Any] = {
        "length": F.length,
        "levels": [[element_to_json(g) for g in lvl.igs()] for lvl in F.levels],
    }
    if F.modulus is not None:
        out["modulus"] = [element_to_json(g) for g in F.modulus.igs()]
    return out
