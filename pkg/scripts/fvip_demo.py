"""Extract and replay finite IP-polynomial certificates for a few generalized polynomials."""

import argparse
import json

from nilpoly.genpoly import IPSystem, combine_sum, fvip_extract, replay
from nilpoly.ipcore import elements, singletons


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("expressions", nargs="*", default=["x1^2", "floor(sqrt(2)*x1)", "floor(sqrt(3)*x1)"])
    ap.add_argument("--ground", type=int, default=24)
    ap.add_argument("--depth", type=int, default=4)
    args = ap.parse_args()
    sysm = IPSystem.powers(args.ground)
    chain = singletons(args.ground)
    certs = []
    for expr in args.expressions:
        res = fvip_extract(expr, sysm, chain, args.depth)
        if not res.found:
            print(f"{expr}: no certificate ({res.obstruction})")
            continue
        blocks = [elements(b) for b in res.subchain.chain]
        problems = replay(res.certificate)
        print(f"{expr}: blocks {blocks}, shift {res.shift}, replay {'ok' if not problems else problems}")
        certs.append(res.certificate)
    same_chain = [c for c in certs if c["subchain"] == certs[0]["subchain"]] if certs else []
    if len(same_chain) >= 2:
        total = combine_sum(same_chain[0], same_chain[1])
        print("sum of the first two on a shared chain:", json.dumps({"replay": replay(total) or "ok"}))


if __name__ == "__main__":
    main()
