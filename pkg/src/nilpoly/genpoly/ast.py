"""Generalized polynomials: syntax tree, parser, evaluation, degree and admissibility.

Concrete syntax::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-' | '+') factor | atom ('^' INT)?
    atom   := INT | DECIMAL | 'x' INT | 'sqrt(' expr ')' | 'pi' | 'e'
            | 'interval(' DECIMAL ',' DECIMAL ')' | 'floor(' expr ')' | '(' expr ')'

Variables are ``x1 .. xl``.  Outside ``floor`` every coefficient must be an
integer, so that the expression is integer valued; inside ``floor`` any real
coefficient is allowed.  ``sqrt`` accepts a non-negative rational constant,
``/`` divides by a non-zero constant, and ``^`` takes a non-negative integer
exponent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .numbers import Interval, Surd, e_interval, pi_interval, real_floor


class GenPolySyntaxError(ValueError):
    """Malformed expression; ``position`` is the 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.reason = message
        self.position = position


# -- nodes ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: object  # Surd or Interval
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    index: int  # 0-based


@dataclass(frozen=True)
class Add:
    terms: tuple


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class Floor:
    arg: object


Node = "Const | Var | Add | Mul | Floor"


@dataclass(frozen=True)
class GenPoly:
    """A parsed generalized polynomial with its structural annotations."""

    root: object
    text: str = ""
    nvars: int = 0
    degree: int = 0
    admissible: bool = False
    notes: tuple = field(default=(), compare=False)

    def __call__(self, *n: int) -> int:
        return evaluate(self, n)

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "vars": self.nvars,
            "degree": self.degree,
            "degree_is_upper_bound": True,
            "admissible": self.admissible,
            "tree": node_to_json(self.root),
        }


def node_to_json(node) -> object:
    if isinstance(node, Const):
        v = node.value
        return {"const": v.to_json()}
    if isinstance(node, Var):
        return {"var": node.index + 1}
    if isinstance(node, Add):
        return {"add": [node_to_json(t) for t in node.terms]}
    if isinstance(node, Mul):
        return {"mul": [node_to_json(t) for t in node.factors]}
    return {"floor": node_to_json(node.arg)}


# -- tokenizer / parser -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<var>x\d+)|(?P<name>[A-Za-z_]+)|(?P<op>[-+*/^(),]))"
)


def _tokens(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise GenPolySyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value:
            raise GenPolySyntaxError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def parse(self):
        node = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise GenPolySyntaxError(f"unexpected {v!r}", pos)
        return node

    def expr(self):
        terms = [self.term()]
        while self.peek()[1] in ("+", "-"):
            _, op, _ = self.take()
            t = self.term()
            terms.append(t if op == "+" else _neg(t))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self):
        factors = [self.factor()]
        while self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            f = self.factor()
            if op == "/":
                if not isinstance(f, Const):
                    raise GenPolySyntaxError("division is only by constants", pos)
                try:
                    f = Const(_reciprocal(f.value), f.pos)
                except ZeroDivisionError:
                    raise GenPolySyntaxError("division by zero", pos) from None
                except ValueError as exc:
                    raise GenPolySyntaxError(str(exc), pos) from None
            factors.append(f)
        return _mul(factors)

    def factor(self):
        kind, v, pos = self.peek()
        if v in ("-", "+"):
            self.take()
            f = self.factor()
            return _neg(f) if v == "-" else f
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, v, pos = self.take()
            if kind != "num" or not v.isdigit():
                raise GenPolySyntaxError("exponent must be a non-negative integer", pos)
            n = int(v)
            if n == 0:
                return Const(Surd.rational(1))
            return _mul([base] * n)
        return base

    def atom(self):
        kind, v, pos = self.take()
        if kind == "num":
            return Const(Surd.rational(Fraction(v)), pos)
        if kind == "var":
            idx = int(v[1:])
            if idx < 1:
                raise GenPolySyntaxError("variables are numbered from x1", pos)
            return Var(idx - 1)
        if v == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if v == "pi":
                return Const(pi_interval(), pos)
            if v == "e":
                return Const(e_interval(), pos)
            if v == "floor":
                self.expect("(")
                node = self.expr()
                self.expect(")")
                return Floor(node)
            if v == "sqrt":
                self.expect("(")
                inner_pos = self.peek()[2]
                node = self.expr()
                self.expect(")")
                if not isinstance(node, Const) or not isinstance(node.value, Surd) or not node.value.is_rational():
                    raise GenPolySyntaxError(
                        "non-representable coefficient: sqrt takes a rational constant", inner_pos
                    )
                q = node.value.rational_value()
                if q < 0:
                    raise GenPolySyntaxError("non-representable coefficient: sqrt of a negative number", inner_pos)
                return Const(Surd.sqrt(q), pos)
            if v == "interval":
                self.expect("(")
                lo = self._signed_number()
                self.expect(",")
                hi = self._signed_number()
                self.expect(")")
                if lo > hi:
                    raise GenPolySyntaxError("empty interval", pos)
                return Const(Interval(lo, hi), pos)
            raise GenPolySyntaxError(f"non-representable coefficient or unknown name {v!r}", pos)
        raise GenPolySyntaxError(f"unexpected {v or 'end of input'!r}", pos)

    def _signed_number(self) -> Fraction:
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        kind, v, pos = self.take()
        if kind != "num":
            raise GenPolySyntaxError("interval bounds must be decimal numbers", pos)
        return sign * Fraction(v)


def _neg(node):
    pos = node.pos if isinstance(node, Const) else 0
    return _mul([Const(Surd.rational(-1), pos), node])


def _reciprocal(v):
    if isinstance(v, Interval):
        return Interval(Fraction(1), Fraction(1)) / v
    if not v.is_rational():
        raise ValueError("division by an irrational constant is not supported")
    q = v.rational_value()
    if q == 0:
        raise ZeroDivisionError
    return Surd.rational(1 / q)


def _mul(factors: list):
    flat = []
    for f in factors:
        flat.extend(f.factors if isinstance(f, Mul) else [f])
    consts = [f for f in flat if isinstance(f, Const)]
    rest = [f for f in flat if not isinstance(f, Const)]
    if consts:
        c = consts[0].value
        for k in consts[1:]:
            c = c * k.value
        if isinstance(c, Surd) and c == Surd.rational(1) and rest:
            pass
        else:
            rest = [Const(c, consts[0].pos)] + rest
    if len(rest) == 1:
        return rest[0]
    return Mul(tuple(rest))


def parse(text: str) -> GenPoly:
    """Parse and validate an expression; raises :class:`GenPolySyntaxError`."""
    root = _Parser(text).parse()
    _check_integral(root, text)
    nv = _max_var(root) + 1
    deg = degree(root)
    adm = is_admissible(root)
    p = GenPoly(root, text=text, nvars=nv, degree=deg, admissible=adm)
    if adm and evaluate(p, [0] * max(nv, 1)) != 0:
        raise AssertionError(f"admissible expression {text!r} does not vanish at 0")
    return p


def parse_real(text: str) -> GenPoly:
    """Parse a real-valued expression: coefficients outside floor may be any real constant."""
    root = _Parser(text).parse()
    return GenPoly(root, text=text, nvars=_max_var(root) + 1, degree=degree(root), admissible=False)


def _max_var(node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Const):
        return -1
    if isinstance(node, Floor):
        return _max_var(node.arg)
    kids = node.terms if isinstance(node, Add) else node.factors
    return max((_max_var(k) for k in kids), default=-1)


def _check_integral(node, text: str) -> None:
    """Outside floor, constants must be integers."""
    if isinstance(node, Const):
        v = node.value
        if not (isinstance(v, Surd) and v.is_rational() and v.rational_value().denominator == 1):
            raise GenPolySyntaxError(f"coefficient {v} outside floor() is not an integer", node.pos)
    elif isinstance(node, (Add, Mul)):
        for k in node.terms if isinstance(node, Add) else node.factors:
            _check_integral(k, text)
    # anything goes inside floor


# -- semantics ---------------------------------------------------------------------------


def _eval_real(node, n: Sequence[int]):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        if node.index >= len(n):
            raise ValueError(f"expression uses x{node.index + 1} but only {len(n)} values were given")
        return Surd.rational(n[node.index])
    if isinstance(node, Floor):
        return Surd.rational(real_floor(_eval_real(node.arg, n)))
    if isinstance(node, Add):
        acc = Surd()
        for t in node.terms:
            acc = _add(acc, _eval_real(t, n))
        return acc
    acc = Surd.rational(1)
    for f in node.factors:
        acc = _times(acc, _eval_real(f, n))
    return acc


def _add(a, b):
    if isinstance(b, Interval) and not isinstance(a, Interval):
        return b + a
    return a + b


def _times(a, b):
    if isinstance(b, Interval) and not isinstance(a, Interval):
        return b * a
    return a * b


def evaluate(p: GenPoly | object, n: Sequence[int]) -> int:
    """Exact integer value ``p(n)``; floor of an unresolved interval raises ``PrecisionError``."""
    root = p.root if isinstance(p, GenPoly) else p
    v = _eval_real(root, list(n))
    if isinstance(v, Interval):
        return v.floor() if v.lo == v.hi else _interval_integer(v)
    q = v.rational_value()
    if q.denominator != 1:
        raise ValueError("expression is not integer valued")
    return q.numerator


def _interval_integer(v: Interval) -> int:
    from ..errors import PrecisionError

    a = round(v.lo)
    if v.lo <= a <= v.hi and v.width < 1:
        return int(a)
    raise PrecisionError("integer-valued expression could not be pinned down; raise NILPOLY_PRECISION")


def evaluate_real(node, n: Sequence[int]):
    """Value of a (possibly real-valued) subexpression as a Surd or Interval."""
    return _eval_real(node.root if isinstance(node, GenPoly) else node, list(n))


def degree(node) -> int:
    """Structural upper bound for the degree."""
    if isinstance(node, Const):
        return 0
    if isinstance(node, Var):
        return 1
    if isinstance(node, Floor):
        return degree(node.arg)
    if isinstance(node, Add):
        return max(degree(t) for t in node.terms)
    return sum(degree(f) for f in node.factors)


# -- admissibility ---------------------------------------------------------------------------


def _monomials(node) -> dict:
    """Expand into ``{sorted atom tuple: coefficient}``; atoms are Var and Floor nodes."""
    if isinstance(node, Const):
        return {(): node.value}
    if isinstance(node, (Var, Floor)):
        return {(node,): Surd.rational(1)}
    if isinstance(node, Add):
        out: dict = {}
        for t in node.terms:
            for m, c in _monomials(t).items():
                out[m] = _add(out[m], c) if m in out else c
        return {m: c for m, c in out.items() if not _is_zero(c)}
    out = {(): Surd.rational(1)}
    for f in node.factors:
        fm = _monomials(f)
        nxt: dict = {}
        for m1, c1 in out.items():
            for m2, c2 in fm.items():
                m = tuple(sorted(m1 + m2, key=repr))
                c = _times(c1, c2)
                nxt[m] = _add(nxt[m], c) if m in nxt else c
        out = {m: c for m, c in nxt.items() if not _is_zero(c)}
    return out


def _is_zero(c) -> bool:
    return isinstance(c, Surd) and not c.terms


def _is_integer(c) -> bool:
    return isinstance(c, Surd) and c.is_rational() and c.rational_value().denominator == 1


def _atom_admissible(atom) -> bool:
    if isinstance(atom, Var):
        return True
    mons = _monomials(atom.arg)
    k = mons.get((), Surd())
    rest = {m: c for m, c in mons.items() if m != ()}
    rest_ok = all(any(_atom_admissible(a) for a in m) for m in rest)
    if not rest_ok:
        return False
    if all(_is_integer(c) for c in mons.values()):
        # floor of an integer combination is the combination itself
        return _is_zero(k)
    if isinstance(k, Interval):
        return k.lo > 0 and k.hi < 1
    return k > 0 and k < 1


def is_admissible(node) -> bool:
    """Sufficient structural test for membership in the admissible ideal.

    Every monomial of the expansion must contain an admissible atom: a
    variable, or ``floor(sum c_i p_i + k)`` with admissible ``p_i`` and
    ``0 < k < 1`` (or integer coefficients and ``k = 0``).
    """
    if isinstance(node, GenPoly):
        node = node.root
    mons = _monomials(node)
    return all(m and any(_atom_admissible(a) for a in m) for m in mons)
