"""Command-line entry point: ``nilpoly <area> <command> [options]``.

Results are printed as one JSON object on standard output.  Exit codes:
0 success or witness found, 1 not found or negative answer, 2 invalid input,
3 resource cap exceeded.  Failures print ``{"error": reason, "message": ...}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Callable

from . import genpoly, hjsearch, ipcore, pexpr, polymap, recurrence
from .errors import CapExceededError, InconclusiveError, PrecisionError
from .jsonio import (
    chain_from_arg,
    coloring_from_args,
    coloring_space_from_json,
    dumps,
    expr_system_from_json,
    ipsystem_from_arg,
    load,
    metric_from_json,
    mps_from_arg,
    polyexpr_from_json,
    polymap_from_json,
    polymap_to_json,
    set_from_json,
    system_from_json,
    tuple_from_json,
    vip_from_json,
)
from .nilgroup import NotNilpotentError, PresentationError, derive_filtration, lower_central_series
from .nilgroup.io import element_from_json, filtration_from_json, filtration_to_json, group_from_json

EXIT_OK, EXIT_NOT_FOUND, EXIT_INVALID, EXIT_CAP = 0, 1, 2, 3

Result = tuple[dict, int]


# -- group / filtration ---------------------------------------------------------------------------


def _group(args):
    return group_from_json(load(args.group))


def _elements(G, arg) -> list:
    data = load(arg) if arg is not None else []
    return [element_from_json(G, e) for e in data]


def cmd_group_lcs(args) -> Result:
    G = _group(args)
    F = lower_central_series(G, args.class_cap)
    return {"length": F.length, "filtration": filtration_to_json(F)}, EXIT_OK


def cmd_group_hirsch(args) -> Result:
    from .nilgroup import Subgroup

    G = _group(args)
    H = Subgroup(G, _elements(G, args.gens))
    return {"hirsch_length": H.hirsch_length(), "igs": [list(g) for g in H.igs()]}, EXIT_OK


def cmd_group_index(args) -> Result:
    from .nilgroup import Subgroup

    G = _group(args)
    H = Subgroup(G, _elements(G, args.gens))
    idx = H.index()
    finite = idx is not None and idx != float("inf")
    return {"index": int(idx) if finite else None, "finite": finite}, EXIT_OK if finite else EXIT_NOT_FOUND


def cmd_filt_derive(args) -> Result:
    G = _group(args)
    F = filtration_from_json(G, load(args.filtration))
    arg = load(args.arg) if args.arg is not None else None
    D = derive_filtration(F, args.op, arg)
    return {"length": D.length, "filtration": filtration_to_json(D), "problems": D.check()}, EXIT_OK


# -- polynomial maps --------------------------------------------------------------------------------


def _map(args):
    return polymap_from_json(load(args.map))


def _filtration_for(args, g):
    if getattr(args, "filtration", None):
        return filtration_from_json(g.group, load(args.filtration))
    return g.claimed()


def cmd_poly_verify(args) -> Result:
    g = _map(args)
    F = _filtration_for(args, g)
    if F is None:
        raise ValueError("no filtration given and the map carries none")
    ok = polymap.verify_polynomial(g, F, cap=args.cap)
    return {"polynomial": ok}, EXIT_OK if ok else EXIT_NOT_FOUND


def cmd_poly_level(args) -> Result:
    g = _map(args)
    F = _filtration_for(args, g)
    try:
        return {"level": polymap.level(g, F)}, EXIT_OK
    except polymap.NoLevelError:
        return {"level": None, "reason": "identity map has no level"}, EXIT_NOT_FOUND


def cmd_poly_weight(args) -> Result:
    G, F, maps = system_from_json(load(args.system))
    w = polymap.weight_vector(maps, F)
    return {"weight": {str(k): v for k, v in sorted(w.as_dict().items())},
            "classes": polymap.equivalence_classes(maps, F)}, EXIT_OK


def cmd_poly_pet_step(args) -> Result:
    G, F, maps = system_from_json(load(args.system))
    h = maps[args.h]
    B = _elements(G, args.B) or [G.identity]
    M = [set_from_json(m) for m in load(args.M)]
    out = polymap.pet_step(maps, h, B, M, F)
    return {
        "weight_before": polymap.weight_vector(maps, F).as_dict(),
        "weight_after": polymap.weight_vector(out, F).as_dict() if out else {},
        "maps": [polymap_to_json(m, with_group=False) for m in out],
    }, EXIT_OK


def cmd_poly_derive(args) -> Result:
    g = _map(args)
    beta = set_from_json(load(args.beta))
    d = polymap.symmetric_derivative(g, beta) if args.symmetric else polymap.derivative(g, beta)
    return polymap_to_json(d), EXIT_OK


# -- IP searches ------------------------------------------------------------------------------------


def _ring_json(r):
    return {"chain": list(r.chain), "sets": [ipcore.elements(m) for m in r.chain]}


def cmd_ip_hindman(args) -> Result:
    col = coloring_from_args(args.rule, args.q, args.table, args.ground, args.colors)
    r = ipcore.hindman_search(col, args.ground, args.chain, jobs=args.jobs)
    if r is None:
        return {"found": False}, EXIT_NOT_FOUND
    return {"found": True, "color": col(r.chain[0]), **_ring_json(r)}, EXIT_OK


def cmd_ip_milliken(args) -> Result:
    col = coloring_from_args(args.rule, args.q, args.table, args.ground, args.colors)
    r = ipcore.milliken_search(col, args.ground, args.arity, args.chain, jobs=args.jobs)
    if r is None:
        return {"found": False}, EXIT_NOT_FOUND
    first = tuple(r.chain[: args.arity])
    return {"found": True, "color": col(first if args.arity > 1 else first[0]), **_ring_json(r)}, EXIT_OK


# -- polynomial expressions ------------------------------------------------------------------------------


def _expr(arg, G=None):
    data = load(arg)
    if G is None:
        G = group_from_json(data["group"])
    return polyexpr_from_json(data, G), G


def cmd_pe_eval(args) -> Result:
    e, G = _expr(args.expr)
    t = tuple_from_json(args.at)
    return {"value": list(pexpr.pe_eval(e, t))}, EXIT_OK


def _expr_json(e, G):
    from .nilgroup.io import group_to_json

    out = e.to_json()
    out["group"] = group_to_json(G)
    return out


def cmd_pe_combine(args) -> Result:
    e0, G = _expr(args.expr)
    if args.op == "inverse":
        r = pexpr.pe_inverse(e0)
    else:
        if args.expr2 is None:
            raise ValueError("product needs --expr2")
        e1, _ = _expr(args.expr2, G)
        r = pexpr.pe_product(e0, e1)
    return _expr_json(r, G), EXIT_OK


def cmd_pe_subst(args) -> Result:
    e, G = _expr(args.expr)
    beta = load(args.beta)
    r = pexpr.substitute(e, beta, args.length)
    return _expr_json(r, G), EXIT_OK


def cmd_pe_decompose(args) -> Result:
    G, exprs = expr_system_from_json(load(args.system))
    K = vip_from_json(load(args.K), G)
    try:
        dec = pexpr.decompose_mixing(exprs, K)
    except InconclusiveError as exc:
        return {"decided": False, "reason": str(exc)}, EXIT_NOT_FOUND
    problems = pexpr.verify_decomposition(exprs, dec, K)
    return {"decided": True, "assignment": dec.k, "verified": not problems, "problems": problems,
            "decomposition": dec.to_json()}, EXIT_OK


# -- generalized polynomials -------------------------------------------------------------------------------


def _point(arg: str) -> list[int]:
    data = load(arg)
    if isinstance(data, int):
        return [data]
    if isinstance(data, str):
        return [int(x) for x in data.split(",")]
    return [int(x) for x in data]


def cmd_gp_parse(args) -> Result:
    return genpoly.parse(args.expression).to_json(), EXIT_OK


def cmd_gp_eval(args) -> Result:
    p = genpoly.parse(args.expression)
    return {"value": genpoly.evaluate(p, _point(args.at))}, EXIT_OK


def cmd_gp_admissible(args) -> Result:
    p = genpoly.parse(args.expression)
    return {"admissible": p.admissible}, EXIT_OK if p.admissible else EXIT_NOT_FOUND


def cmd_gp_fvip(args) -> Result:
    sysm = ipsystem_from_arg(load(args.ipsys))
    chain = chain_from_arg(load(args.chain) if args.chain else None, sysm.ground)
    res = genpoly.fvip_extract(args.expression, sysm, chain, args.depth, jobs=args.jobs)
    if not res.found:
        return {"found": False, "obstruction": res.obstruction}, EXIT_NOT_FOUND
    problems = genpoly.replay(res.certificate)
    return {"found": True, "shift": res.shift, "replayed": not problems, "problems": problems,
            "certificate": res.certificate}, EXIT_OK


# -- Hales-Jewett searches --------------------------------------------------------------------------------


def cmd_hj_search(args) -> Result:
    G = _group(args)
    sysdata = load(args.system)
    exprs = [polyexpr_from_json(e, G, args.ground) for e in (sysdata["exprs"] if isinstance(sysdata, dict) else sysdata)]
    space = coloring_space_from_json(load(args.coloring), G)
    window = _elements(G, args.s_window) if args.s_window else [G.identity]
    w = hjsearch.hj_search(space, exprs, args.ground, window, jobs=args.jobs)
    if w is None:
        return {"found": False}, EXIT_NOT_FOUND
    return {"found": True, "verified": hjsearch.check_hj_witness(space, exprs, w), **w.to_json()}, EXIT_OK


def cmd_hj_metric(args) -> Result:
    G = _group(args)
    space = metric_from_json(load(args.space), G)
    problems = space.validate()
    if problems:
        raise ValueError("; ".join(problems[:3]))
    sysdata = load(args.system)
    exprs = [polyexpr_from_json(e, G, args.ground) for e in (sysdata["exprs"] if isinstance(sysdata, dict) else sysdata)]
    window = _elements(G, args.s_window) if args.s_window else [G.identity]
    eps = Fraction(args.eps)
    w = hjsearch.metric_orbit_search(space, exprs, eps, args.ground, window, args.x)
    if w is None:
        return {"found": False}, EXIT_NOT_FOUND
    return {"found": True, "verified": hjsearch.check_metric_witness(space, exprs, eps, args.x, w),
            **w.to_json()}, EXIT_OK


def cmd_hj_pair(args) -> Result:
    data = load(args.problem)
    G = group_from_json(data["group"])
    n = int(data["ground"])
    R = [polyexpr_from_json(e, G, n) for e in data["R"]]
    W = [polyexpr_from_json(e, G, n) for e in data.get("W", [])]
    window = [(polyexpr_from_json(L, G, n), polyexpr_from_json(M, G, n)) for L, M in data["window"]]
    colors = data["colors"]
    length = int(data["length"])
    w = hjsearch.pair_color_search(R, W, lambda j: colors[j], window, length)
    if w is None:
        return {"found": False}, EXIT_NOT_FOUND
    ok = hjsearch.check_pair_witness(R, W, lambda j: colors[j], window, length, w)
    return {"found": True, "verified": ok, "index": w.index, "betas": [ipcore.elements(b) for b in w.alphas],
            "color": w.color}, EXIT_OK


# -- recurrence --------------------------------------------------------------------------------------------


def cmd_recur_measure(args) -> Result:
    mps = mps_from_arg(load(args.system))
    A = set(load(args.A))
    G = mps.group
    S = [element_from_json(G, e) for e in load(args.S)]
    m = recurrence.return_measure(mps, A, S, ())
    return {"measure": str(m)}, EXIT_OK if m > 0 else EXIT_NOT_FOUND


def cmd_recur_check(args) -> Result:
    mps = mps_from_arg(load(args.system))
    A = set(load(args.A))
    polys = load(args.polys)
    sysm = ipsystem_from_arg(load(args.ipsys))
    chain = chain_from_arg(load(args.chain) if args.chain else None, sysm.ground)
    rep = recurrence.recurrence_check(mps, A, polys, sysm, chain, args.depth)
    out = rep.to_json()
    out["rechecked"] = all(recurrence.recheck_witness(mps, A, polys, w) for w in rep.witnesses)
    return out, EXIT_OK if rep.positive else EXIT_NOT_FOUND


# -- schemas ---------------------------------------------------------------------------------------------

_SET = {"oneOf": [{"type": "array", "items": {"type": "integer", "minimum": 0}}, {"type": "integer", "minimum": 0}]}
_ELEMENT = {"oneOf": [{"type": "array", "items": {"type": "integer"}}, {"type": "string"}],
            "description": "exponent vector in normal form, [[generator, exponent], ...] pairs, or a word 'x^2*y^-1'"}

SCHEMAS: dict[str, dict] = {
    "group": {
        "oneOf": [
            {"type": "string", "description": "builtin: Z^k, Z/n, heisenberg, heisenberg/p, free3, dihedral, UT<n>"},
            {"type": "object", "required": ["rank"], "properties": {
                "rank": {"type": "integer"}, "orders": {"type": "array"},
                "commutators": {"type": "object", "description": "'[i,j]' (i<j) -> word: [x_j, x_i] relation"},
                "powers": {"type": "object"}, "names": {"type": "array"}, "class_cap": {"type": "integer"}}},
        ]
    },
    "element": _ELEMENT,
    "filtration": {
        "oneOf": [
            {"type": "string", "enum": ["lcs", "trivial"]},
            {"type": "object", "properties": {
                "length": {"type": ["integer", "null"]}, "levels": {"type": "array", "items": {"type": "array"}},
                "constant": {"type": "integer"}, "modulus": {"type": "array"},
                "derive": {"type": "array", "items": {"type": "object"}}}},
        ]
    },
    "polymap": {"type": "object", "required": ["backing"], "properties": {
        "ground": {"type": "integer"}, "support": {"type": "integer"}, "group": {"$ref": "group"},
        "filtration": {"$ref": "filtration"}, "shift": {"type": "integer"},
        "backing": {"type": "object", "description": "one of table {mask: element}, monomial spec, "
                    "power {base, genpoly, ipsys}, ip {index: element}"}}},
    "polyexpr": {"type": "object", "description": "{arity, ground, layers {'m1,..': {mask: element}}, base} "
                 "or {map: polymap} or {identity: arity, ground}"},
    "set": _SET,
    "coloring": {"type": "object", "description": "ip: {ground, colors, rule {name, q}} or {table}; "
                 "hj: {coordinate, modulus} | {constant: true} | {table: [[element, color]], default}"},
    "ipsystem": {"oneOf": [{"type": "string", "pattern": "^powers:\\d+(:\\d+)?$"},
                           {"type": "object", "properties": {"generators": {"type": "array"}}}]},
    "chain": {"type": "array", "items": _SET},
    "certificate": {"type": "object", "required": ["subchain", "shift", "filtration", "generators",
                                                   "combination", "sD_table", "word_witnesses"]},
    "metric": {"type": "object", "properties": {"dist": {"type": "array"}, "discrete": {"type": "integer"},
                                                "scale": {}, "action": {"type": "array"}}},
    "mps": {"oneOf": [{"type": "string", "description": "rotation:N[:step], skew:N[:a], heisenberg:p"},
                      {"type": "object", "required": ["points", "generators"], "properties": {
                          "points": {"type": "integer"}, "weights": {"type": "array"},
                          "generators": {"type": "object"}, "group": {"$ref": "group"}}}]},
    "witness": {"type": "object", "properties": {"s": _ELEMENT, "alphas": {"type": "array"}, "color": {}}},
    "report": {"type": "object", "properties": {"measures": {"type": "object"}, "minimum": {"type": "string"},
                                                "positive": {"type": "boolean"}, "witnesses": {"type": "array"}}},
}


# -- parser ----------------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nilpoly", description=__doc__.splitlines()[0])
    p.add_argument("--schema", metavar="TYPE", help=f"print the JSON schema of a type ({', '.join(SCHEMAS)})")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for searches (output is independent)")
    areas = p.add_subparsers(dest="area")

    def sub(area, name, fn: Callable, help_: str):
        sp = area.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
        return sp

    g = areas.add_parser("group", help="nilpotent group computations").add_subparsers(dest="cmd")
    s = sub(g, "lcs", cmd_group_lcs, "lower central series")
    s.add_argument("--group", required=True)
    s.add_argument("--class-cap", type=int, default=None)
    for name, fn in (("hirsch", cmd_group_hirsch), ("index", cmd_group_index)):
        s = sub(g, name, fn, f"{name} of a subgroup")
        s.add_argument("--group", required=True)
        s.add_argument("--gens", required=True, help="JSON list of elements")

    f = areas.add_parser("filt", help="filtrations").add_subparsers(dest="cmd")
    s = sub(f, "derive", cmd_filt_derive, "shift / quotient / reindex a filtration")
    s.add_argument("--group", required=True)
    s.add_argument("--filtration", required=True)
    s.add_argument("--op", required=True, choices=["shift", "quotient", "reindex"])
    s.add_argument("--arg", required=True)

    pm = areas.add_parser("poly", help="polynomial maps").add_subparsers(dest="cmd")
    s = sub(pm, "verify", cmd_poly_verify, "check polynomiality")
    s.add_argument("--map", required=True)
    s.add_argument("--filtration")
    s.add_argument("--cap", type=int, default=polymap.VERIFY_GROUND_CAP)
    s = sub(pm, "level", cmd_poly_level, "level of a map")
    s.add_argument("--map", required=True)
    s.add_argument("--filtration")
    s = sub(pm, "weight", cmd_poly_weight, "weight vector of a system")
    s.add_argument("--system", required=True)
    s = sub(pm, "pet-step", cmd_poly_pet_step, "one PET induction step")
    s.add_argument("--system", required=True)
    s.add_argument("--h", type=int, required=True, help="index of the maximal-level map")
    s.add_argument("--B", help="JSON list of conjugating elements in G_1")
    s.add_argument("--M", required=True, help="JSON list of nonempty sets")
    s = sub(pm, "derive", cmd_poly_derive, "derivative along a set")
    s.add_argument("--map", required=True)
    s.add_argument("--beta", required=True)
    s.add_argument("--symmetric", action="store_true")

    ip = areas.add_parser("ip", help="Hindman / Milliken-Taylor searches").add_subparsers(dest="cmd")
    for name, fn in (("hindman", cmd_ip_hindman), ("milliken", cmd_ip_milliken)):
        s = sub(ip, name, fn, f"{name} search")
        s.add_argument("--ground", type=int, required=True)
        s.add_argument("--chain", type=int, required=True)
        s.add_argument("--rule", choices=["constant", "parity", "card_mod", "max_mod"])
        s.add_argument("--q", type=int, default=2)
        s.add_argument("--colors", type=int, default=2)
        s.add_argument("--table")
        if name == "milliken":
            s.add_argument("--arity", type=int, default=2)

    pe = areas.add_parser("pe", help="polynomial expressions").add_subparsers(dest="cmd")
    s = sub(pe, "eval", cmd_pe_eval, "evaluate at an ordered tuple")
    s.add_argument("--expr", required=True)
    s.add_argument("--at", required=True, help="JSON list of sets")
    s = sub(pe, "combine", cmd_pe_combine, "product or inverse")
    s.add_argument("--op", required=True, choices=["product", "inverse"])
    s.add_argument("--expr", required=True)
    s.add_argument("--expr2")
    s = sub(pe, "subst", cmd_pe_subst, "substitution g[beta]")
    s.add_argument("--expr", required=True)
    s.add_argument("--beta", required=True, help="JSON list of position blocks")
    s.add_argument("--length", type=int)
    s = sub(pe, "decompose", cmd_pe_decompose, "mixing / compact decomposition")
    s.add_argument("--system", required=True)
    s.add_argument("--K", required=True)

    gp = areas.add_parser("gp", help="generalized polynomials").add_subparsers(dest="cmd")
    for name, fn in (("parse", cmd_gp_parse), ("admissible", cmd_gp_admissible)):
        s = sub(gp, name, fn, name)
        s.add_argument("expression")
    s = sub(gp, "eval", cmd_gp_eval, "exact evaluation")
    s.add_argument("expression")
    s.add_argument("--at", required=True, help="integer or comma-separated vector")
    s = sub(gp, "fvip", cmd_gp_fvip, "FVIP extraction with certificate")
    s.add_argument("expression")
    s.add_argument("--ipsys", default="powers:24")
    s.add_argument("--chain")
    s.add_argument("--depth", type=int, default=genpoly.DEFAULT_DEPTH)

    hj = areas.add_parser("hj", help="Hales-Jewett searches").add_subparsers(dest="cmd")
    s = sub(hj, "search", cmd_hj_search, "monochrome configuration search")
    s.add_argument("--group", required=True)
    s.add_argument("--system", required=True)
    s.add_argument("--coloring", required=True)
    s.add_argument("--ground", type=int, required=True)
    s.add_argument("--s-window")
    s = sub(hj, "metric", cmd_hj_metric, "metric return search")
    s.add_argument("--group", required=True)
    s.add_argument("--space", required=True)
    s.add_argument("--system", required=True)
    s.add_argument("--eps", required=True)
    s.add_argument("--ground", type=int, required=True)
    s.add_argument("--s-window")
    s.add_argument("--x", type=int, default=0)
    s = sub(hj, "pair", cmd_hj_pair, "pair-coloring search")
    s.add_argument("--problem", required=True)

    rc = areas.add_parser("recur", help="recurrence on finite systems").add_subparsers(dest="cmd")
    s = sub(rc, "measure", cmd_recur_measure, "return measure for fixed elements")
    s.add_argument("--system", required=True)
    s.add_argument("--A", required=True)
    s.add_argument("--S", required=True, help="JSON list of elements")
    s = sub(rc, "check", cmd_recur_check, "measures along an IP ring")
    s.add_argument("--system", required=True)
    s.add_argument("--A", required=True)
    s.add_argument("--polys", required=True, help="JSON matrix of expressions, one row per generator")
    s.add_argument("--ipsys", default="powers:8")
    s.add_argument("--chain")
    s.add_argument("--depth", type=int, default=3)
    return p


def _error(reason: str, exc: BaseException) -> dict:
    return {"error": reason, "message": str(exc)}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if args.schema:
        if args.schema not in SCHEMAS:
            print(dumps({"error": "unknown-schema", "message": f"known types: {sorted(SCHEMAS)}"}))
            return EXIT_INVALID
        print(dumps(SCHEMAS[args.schema]))
        return EXIT_OK
    fn = getattr(args, "fn", None)
    if fn is None:
        parser.print_help(sys.stderr)
        return EXIT_INVALID
    try:
        payload, code = fn(args)
    except CapExceededError as exc:
        payload, code = _error("cap-exceeded", exc), EXIT_CAP
    except PrecisionError as exc:
        payload, code = _error("precision", exc), EXIT_INVALID
    except genpoly.GenPolySyntaxError as exc:
        payload, code = {"error": "syntax", "message": exc.reason, "position": exc.position}, EXIT_INVALID
    except NotNilpotentError as exc:
        payload, code = _error("not-nilpotent", exc), EXIT_INVALID
    except (PresentationError, json.JSONDecodeError) as exc:
        payload, code = _error("invalid-input", exc), EXIT_INVALID
    except polymap.WeightCheckError as exc:
        payload, code = _error("weight-check", exc), EXIT_NOT_FOUND
    except (ValueError, KeyError, TypeError, IndexError, FileNotFoundError) as exc:
        payload, code = _error("invalid-input", exc), EXIT_INVALID
    print(dumps(payload))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
