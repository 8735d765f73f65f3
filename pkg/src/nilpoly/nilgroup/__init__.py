"""Exact arithmetic in polycyclic nilpotent groups and filtration calculus."""

from .filtration import (
    Filtration,
    constant_filtration,
    filtration_from_generators,
    lower_central_series,
    trivial_filtration,
)
from .group import Element, NilGroup, NotNilpotentError, PresentationError, collect_product, commutator
from .presentations import (
    abelian,
    builtin,
    cyclic,
    direct_power,
    free_nilpotent_class3_rank2,
    heisenberg,
    infinite_dihedral,
    unitriangular,
)
from .subgroup import Subgroup, finite_index_test, hirsch_length, trivial_subgroup, whole_group


def derive_filtration(F: Filtration, op: str, arg) -> Filtration:
    """Apply ``shift``, ``quotient`` or ``reindex`` to a filtration."""
    if op == "shift":
        return F.shift(arg)
    if op == "quotient":
        return F.quotient(arg)
    if op == "reindex":
        return F.reindex(arg)
    raise ValueError(f"unknown filtration operation {op!r}")


__all__ = [
    "Element",
    "Filtration",
    "NilGroup",
    "NotNilpotentError",
    "PresentationError",
    "Subgroup",
    "abelian",
    "builtin",
    "collect_product",
    "commutator",
    "constant_filtration",
    "cyclic",
    "derive_filtration",
    "direct_power",
    "filtration_from_generators",
    "finite_index_test",
    "free_nilpotent_class3_rank2",
    "heisenberg",
    "hirsch_length",
    "infinite_dihedral",
    "lower_central_series",
    "trivial_filtration",
    "trivial_subgroup",
    "unitriangular",
    "whole_group",
]
