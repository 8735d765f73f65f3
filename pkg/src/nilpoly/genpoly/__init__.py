"""Generalized polynomials and FVIP extraction."""

from .ast import (
    GenPoly,
    GenPolySyntaxError,
    degree,
    evaluate,
    evaluate_real,
    is_admissible,
    parse,
    parse_real,
)
from .fvip import (
    DEFAULT_DEPTH,
    FVIPResult,
    IPSystem,
    combine_product,
    combine_sum,
    fvip_extract,
    monomial_generators,
    monomial_words,
    near_identity_refine,
    real_values,
    tail_closure,
)
from .numbers import Interval, Surd, dint, nearest_int, working_precision
from .replay import replay, replay_ok

__all__ = [
    "DEFAULT_DEPTH",
    "FVIPResult",
    "GenPoly",
    "GenPolySyntaxError",
    "IPSystem",
    "Interval",
    "Surd",
    "combine_product",
    "combine_sum",
    "degree",
    "dint",
    "evaluate",
    "evaluate_real",
    "fvip_extract",
    "is_admissible",
    "monomial_generators",
    "monomial_words",
    "near_identity_refine",
    "nearest_int",
    "parse",
    "parse_real",
    "real_values",
    "replay",
    "replay_ok",
    "tail_closure",
    "working_precision",
]
