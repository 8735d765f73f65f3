"""JSON readers and writers for maps, expressions, colorings and systems.

Every reader accepts the output of the matching writer, so results of one
command can be fed to another.  References to groups and filtrations may be
builtin names (``"heisenberg"``, ``"lcs"``) or full objects.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .genpoly import IPSystem, evaluate, parse
from .hjsearch import ColoringSpace, MetricSpace
from .ipcore import Coloring, FinSet, IPRing, elements, mask, singletons, subsets
from .nilgroup import Filtration, NilGroup, lower_central_series
from .nilgroup.io import element_from_json, filtration_from_json, filtration_to_json, group_from_json, group_to_json
from .pexpr import PolyExpr, VIPGroupSpec, from_map, identity_expr
from .polymap import MonomialSpec, PolyMap, from_function, monomial_map
from .recurrence import FiniteMPS
from .recurrence import from_json as mps_from_json


def load(arg: str | dict | list | None) -> Any:
    """Inline JSON, a path to a JSON file, or a bare string (for builtin names)."""
    if arg is None or isinstance(arg, (dict, list)):
        return arg
    s = arg.strip()
    if s[:1] in "{[\"" or s in ("true", "false", "null") or _is_number(s):
        return json.loads(s)
    p = Path(s)
    if p.suffix == ".json" or p.exists():
        return json.loads(p.read_text())
    return s


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, default=_default)


def _default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    if hasattr(o, "to_json"):
        return o.to_json()
    raise TypeError(f"cannot encode {type(o).__name__}")


# -- sets -----------------------------------------------------------------------------------------


def set_from_json(data: Any) -> FinSet:
    """A list of elements, or an integer mask."""
    if isinstance(data, int):
        if data < 0:
            raise ValueError("masks are non-negative")
        return data
    return mask(int(x) for x in data)


def tuple_from_json(data: Any) -> tuple:
    if isinstance(data, str):
        data = json.loads(data) if data.strip().startswith("[") else [int(x) for x in data.split(",") if x]
    return tuple(set_from_json(x) for x in data)


# -- maps -----------------------------------------------------------------------------------------


def polymap_from_json(data: dict, G: NilGroup | None = None, F: Filtration | None = None) -> PolyMap:
    if G is None:
        if "group" not in data:
            raise ValueError("map JSON needs a 'group'")
        G = group_from_json(data["group"])
    if F is None and data.get("filtration") is not None:
        F = filtration_from_json(G, data["filtration"])
    ground = int(data.get("ground", 0))
    support = int(data["support"]) if "support" in data else (1 << ground) - 1
    backing = data.get("backing") or {}
    label = data.get("label", "")
    shift = int(data.get("shift", 0))
    if "table" in backing:
        raw = backing["table"]
        table = {}
        for k, v in raw.items():
            table[int(k)] = G.normalize(element_from_json(G, v))
        missing = [a for a in subsets(support) if a not in table]
        if missing:
            raise ValueError(f"map table misses {len(missing)} subsets of the support, e.g. {elements(missing[0])}")
        return PolyMap(G, support, {a: table[a] for a in subsets(support)}, F, shift, label)
    if "monomial" in backing:
        if F is None:
            F = lower_central_series(G)
        spec = MonomialSpec.from_json(backing["monomial"], G)
        g = monomial_map(spec, F, support)
        return PolyMap(G, support, g.table, F, shift, label or "monomial")
    if "power" in backing:
        pw = backing["power"]
        base = element_from_json(G, pw["base"])
        p = parse(pw["genpoly"])
        sys = ipsystem_from_arg(pw["ipsys"])
        g = from_function(G, support, lambda a: G.pow(base, evaluate(p, sys.value(a))), F, label or pw["genpoly"])
        return PolyMap(G, support, g.table, F, shift, g.label)
    if "ip" in backing:
        gens = {int(k): element_from_json(G, v) for k, v in backing["ip"].items()}
        from .polymap import ip_system

        g = ip_system(G, support, gens, F, label or "ip-system")
        return PolyMap(G, support, g.table, F, shift, g.label)
    raise ValueError("map backing must be one of table, monomial, power, ip")


def polymap_to_json(g: PolyMap, with_group: bool = True) -> dict:
    out = g.to_json()
    if with_group:
        out["group"] = group_to_json(g.group)
        if g.filtration is not None:
            out["filtration"] = filtration_to_json(g.filtration)
    return out


def system_from_json(data: Any) -> tuple[NilGroup, Filtration | None, list[PolyMap]]:
    """``{"group": ..., "filtration": ..., "maps": [...]}`` or a bare list of map objects."""
    if isinstance(data, list):
        data = {"maps": data}
    maps_data = data.get("maps") or data.get("system") or []
    if not maps_data:
        raise ValueError("system has no maps")
    G = group_from_json(data["group"]) if "group" in data else group_from_json(maps_data[0]["group"])
    F = filtration_from_json(G, data["filtration"]) if data.get("filtration") is not None else None
    maps = [polymap_from_json(m, G, F) for m in maps_data]
    if F is None:
        F = maps[0].filtration
    return G, F, maps


# -- expressions ----------------------------------------------------------------------------------


def polyexpr_from_json(data: dict, G: NilGroup, ground: int | None = None) -> PolyExpr:
    """Layered form (as written by ``PolyExpr.to_json``), ``{"map": ...}`` or ``{"identity": arity}``."""
    if "identity" in data:
        return identity_expr(G, int(data.get("ground", ground or 0)), int(data["identity"]))
    if "map" in data:
        W = polymap_from_json(data["map"], G)
        return from_map(W, int(data.get("ground", ground or W.ground)))
    arity = int(data["arity"])
    n = int(data.get("ground", ground or 0))
    if arity == 0:
        return identity_expr(G, n, 0)
    base = polyexpr_from_json(data["base"], G, n)
    layers = {}
    for key, table in data["layers"].items():
        prefix = tuple(int(x) for x in key.split(",")) if key else ()
        t = {int(a): G.normalize(element_from_json(G, v)) for a, v in table.items()}
        from .pexpr import above

        sup = above(n, prefix)
        layers[prefix] = PolyMap(G, sup, {a: t[a] for a in subsets(sup)})
    return PolyExpr(G, n, arity, layers, base, data.get("label", ""), max(3, arity))


def expr_system_from_json(data: Any) -> tuple[NilGroup, list[PolyExpr]]:
    if isinstance(data, list):
        raise ValueError("expression systems need a 'group' and 'exprs'")
    G = group_from_json(data["group"])
    ground = data.get("ground")
    exprs = [polyexpr_from_json(e, G, ground) for e in data.get("exprs") or data.get("system")]
    return G, exprs


def vip_from_json(data: Any, G: NilGroup | None = None) -> VIPGroupSpec:
    if isinstance(data, list):
        data = {"generators": data}
    if G is None:
        G = group_from_json(data["group"])
    gens = [polymap_from_json(m, G) for m in data["generators"]]
    return VIPGroupSpec(gens, word_bound=int(data.get("word_bound", 6)))


# -- colorings and spaces -----------------------------------------------------------------------------


def coloring_space_from_json(data: Any, G: NilGroup) -> ColoringSpace:
    """``{"coordinate": i, "modulus": q}``, ``{"constant": true}`` or ``{"table": [[element, color]...], "default": c}``."""
    if "coordinate" in data:
        return ColoringSpace.by_coordinate(G, int(data["coordinate"]), int(data.get("modulus", 2)))
    if data.get("constant"):
        return ColoringSpace.constant(G)
    if "table" in data:
        table = {tuple(G.normalize(element_from_json(G, e))): c for e, c in data["table"]}
        return ColoringSpace.from_table(G, table, data.get("default"))
    raise ValueError("coloring must give coordinate, constant or table")


def metric_from_json(data: dict, G: NilGroup) -> MetricSpace:
    action = data["action"]
    if "discrete" in data:
        return MetricSpace.discrete(G, int(data["discrete"]), action, Fraction(str(data.get("scale", 1))))
    return MetricSpace(G, [[Fraction(str(x)) for x in row] for row in data["dist"]], action)


def ipsystem_from_arg(data: Any) -> IPSystem:
    """``"powers:24"`` / ``"powers:24:3"`` shorthand, a list of generators, or IPSystem JSON."""
    if isinstance(data, str) and data.startswith("powers:"):
        parts = data.split(":")[1:]
        return IPSystem.powers(int(parts[0]), int(parts[1]) if len(parts) > 1 else 2)
    if isinstance(data, list):
        return IPSystem(tuple(data))
    return IPSystem.from_json(data)


def chain_from_arg(data: Any, ground: int) -> IPRing:
    if data is None:
        return singletons(ground)
    if isinstance(data, dict):
        data = data["chain"]
    return IPRing(tuple(set_from_json(x) for x in data))


def mps_from_arg(data: Any) -> FiniteMPS:
    from .recurrence import heisenberg_translation, rotation, skew_torus, translation_system

    if isinstance(data, str):
        kind, _, rest = data.partition(":")
        args = [int(x) for x in rest.split(":") if x]
        if kind == "rotation":
            return rotation(*args)
        if kind == "skew":
            return skew_torus(*args)
        if kind == "heisenberg":
            return heisenberg_translation(*args)
        raise ValueError(f"unknown builtin system {data!r}")
    if "translation" in data:
        return translation_system(group_from_json(data["translation"]))
    G = group_from_json(data["group"]) if "group" in data else None
    return mps_from_json(data, G)


def coloring_from_args(rule: str | None, q: int, table: Any, ground: int, colors: int) -> Coloring:
    if table is not None:
        data = load(table)
        if isinstance(data, list):
            return Coloring.from_list(ground, data, colors)
        data.setdefault("ground", ground)
        return Coloring.from_json(data)
    if rule is None:
        raise ValueError("give --rule or --table")
    return Coloring(ground, colors, rule=rule, q=q)
