"""Shared generators for tests."""

from __future__ import annotations

from nilpoly import polymap


def random_vip_spec(rng, F, ground: int, labels_per_degree: int = 2, bound: int = 2) -> polymap.MonomialSpec:
    """A random monomial spec without degree-0 part, so the map vanishes at the empty set."""
    while True:
        spec = polymap.random_monomial_spec(rng, F, ground, F.length, labels_per_degree, bound)
        values = {j: v for j, v in spec.values.items() if len(j[0]) > 0}
        order = {j: r for j, r in spec.order.items() if j in values}
        R = ((),) + spec.R[1:]
        if any(any(v) for v in values.values()):
            return polymap.MonomialSpec(R, values, order)


# -- integer matrix oracle for collection ---------------------------------------------------------


def mat_mul(a, b):
    n = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def mat_id(n):
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def mat_inv_unipotent(a):
    """Inverse of a unipotent upper-triangular integer matrix via the finite Neumann series."""
    n = len(a)
    eye = mat_id(n)
    nil = tuple(tuple(a[i][j] - eye[i][j] for j in range(n)) for i in range(n))
    out = eye
    term = eye
    for k in range(1, n):
        term = mat_mul(term, nil)
        sign = -1 if k % 2 else 1
        out = tuple(tuple(out[i][j] + sign * term[i][j] for j in range(n)) for i in range(n))
    return out


def mat_pow(a, e):
    base = a if e >= 0 else mat_inv_unipotent(a)
    out = mat_id(len(a))
    for _ in range(abs(e)):
        out = mat_mul(out, base)
    return out


def mat_comm(a, b):
    return mat_mul(mat_mul(mat_inv_unipotent(a), mat_inv_unipotent(b)), mat_mul(a, b))


def elementary(n, pairs):
    m = [list(r) for r in mat_id(n)]
    for (i, j), v in pairs.items():
        m[i][j] += v
    return tuple(tuple(r) for r in m)
