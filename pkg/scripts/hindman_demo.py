"""Count 2-colorings of the nonempty subsets of a small ground set that admit a monochrome IP ring."""

import argparse
import itertools

from nilpoly.ipcore import Coloring, hindman_search


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ground", type=int, default=3)
    ap.add_argument("--chain", type=int, default=2)
    args = ap.parse_args()
    cells = (1 << args.ground) - 1
    found = 0
    for values in itertools.product((0, 1), repeat=cells):
        if hindman_search(Coloring.from_list(args.ground, list(values)), args.ground, args.chain) is not None:
            found += 1
    print(f"ground {args.ground}, chain {args.chain}: {found} of {2 ** cells} colorings have a monochrome ring")


if __name__ == "__main__":
    main()
