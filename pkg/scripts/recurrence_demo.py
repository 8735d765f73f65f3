"""Return measures for x1 and x1^2 along an IP system on a finite Heisenberg group."""

import argparse

from nilpoly.genpoly import IPSystem
from nilpoly.ipcore import elements, singletons
from nilpoly.recurrence import heisenberg_translation, recheck_witness, recurrence_check


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--modulus", type=int, default=5)
    ap.add_argument("--depth", type=int, default=3)
    args = ap.parse_args()
    mps = heisenberg_translation(args.modulus)
    A = set(range(0, mps.n, 2))
    polys = [["x1"], ["x1^2"]]
    rep = recurrence_check(mps, A, polys, IPSystem.powers(8), singletons(8), args.depth)
    print(f"mu(A) = {rep.mu_A}")
    for alpha, m in sorted(rep.measures.items()):
        print(f"  alpha {elements(alpha)}: {m}")
    print(f"minimum {rep.minimum}, all witnesses recheck: {all(recheck_witness(mps, A, polys, w) for w in rep.witnesses)}")


if __name__ == "__main__":
    main()
