"""Independent replay of FVIP certificates.

Everything here is recomputed from the certificate JSON and the expression
text: ring values come from direct evaluation of the expression at
``n_alpha``, generator values from brute-force sums over increasing index
tuples, polynomiality from Moebius inversion, and derivatives from their
definition.  None of the symbolic machinery used by the extractor is reused.
"""

from __future__ import annotations

from itertools import combinations

from .ast import evaluate, parse


def _bits(m: int) -> list[int]:
    return [i for i in range(m.bit_length()) if m >> i & 1]


def _gen_value(word: list, positions: list[int]) -> int:
    total = 0
    for idx in combinations(sorted(positions), len(word)):
        prod = 1
        for letter, i in zip(word, idx):
            prod *= letter[i]
        total += prod
    return total


def _system_value(generators: list, chain: list[int], positions: list[int]) -> list[int]:
    dim = len(generators[0])
    out = [0] * dim
    for pos in positions:
        for i in _bits(chain[pos]):
            for t in range(dim):
                out[t] += generators[i][t]
    return out


def moebius_degree_ok(values: dict[int, int], k: int, degree: int) -> bool:
    """``f(S) = sum_{T subset S} c_T`` with ``c_T = 0`` whenever ``|T| > degree``."""
    for s in range(1, 1 << k):
        if bin(s).count("1") <= degree:
            continue
        c = 0
        t = s
        while True:
            sign = -1 if (bin(s).count("1") - bin(t).count("1")) % 2 else 1
            c += sign * values.get(t, 0)
            if t == 0:
                break
            t = (t - 1) & s
        if c:
            return False
    return True


def replay(cert: dict) -> list[str]:
    """Return the list of failed checks (empty when the certificate holds)."""
    problems: list[str] = []
    chain = [int(m) for m in cert["subchain"]["chain"]]
    k = len(chain)
    for a, b in zip(chain, chain[1:]):
        if not (a and b and a.bit_length() - 1 < (b & -b).bit_length() - 1):
            problems.append("sub-chain blocks are not increasing")
            return problems
    gens = cert["generators"]
    for w in gens:
        if any(len(letter) != k for letter in w):
            problems.append("generator letters do not match the sub-chain length")
            return problems
    D = int(cert["filtration"]["degree"])
    shift = int(cert["shift"])
    if cert.get("admissible") and shift != 0:
        problems.append("admissible expression certified with a non-zero shift")

    # ring values of the expression itself
    p = parse(cert["expression"])
    sysgens = cert["ipsystem"]["generators"]
    values = {0: 0}
    for s in range(1, 1 << k):
        n = _system_value(sysgens, chain, _bits(s))
        values[s] = evaluate(p, n) - shift

    table = {gi: {s: _gen_value(w, _bits(s)) for s in range(1 << k)} for gi, w in enumerate(gens)}

    # the map is the stated combination of generators
    for s in range(1, 1 << k):
        combo = sum(c * table[gi][s] for gi, c in cert["combination"])
        if combo != values[s]:
            problems.append(f"value at block set {_bits(s)} is {values[s]}, combination gives {combo}")
            break

    if not moebius_degree_ok(values, k, D):
        problems.append(f"map is not polynomial of degree <= {D} on the ring")
    for gi, w in enumerate(gens):
        if len(w) > D:
            problems.append(f"generator {gi} has length {len(w)} > {D}")
        if not moebius_degree_ok(table[gi], k, len(w)):
            problems.append(f"generator {gi} is not polynomial of degree <= {len(w)}")

    # derivatives along beta on sets above beta lie in the group of shorter generators
    for gi, w in enumerate(gens):
        for beta in range(1, 1 << k):
            top = beta.bit_length() - 1
            above = [s for s in range(1, 1 << k) if (s & -s).bit_length() - 1 > top]
            if not above:
                continue
            key = f"{gi}|{beta}"
            wit = cert["word_witnesses"].get(key)
            if wit is None:
                problems.append(f"missing witness for generator {gi} along {_bits(beta)}")
                continue
            for gj, _ in wit:
                if len(gens[gj]) >= len(w):
                    problems.append(f"witness {key} uses generator {gj} of non-smaller length")
            stated = cert["sD_table"].get(key, {})
            for s in above:
                d = table[gi][s | beta] - table[gi][s] - table[gi][beta]
                if int(stated.get(str(s), d)) != d:
                    problems.append(f"sD table entry {key} at {_bits(s)} is wrong")
                    break
                if sum(c * table[gj][s] for gj, c in wit) != d:
                    problems.append(f"witness {key} fails at {_bits(s)}")
                    break
    return problems


def replay_ok(cert: dict) -> bool:
    return not replay(cert)
