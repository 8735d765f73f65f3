"""Exact real numbers of the form sum q_d sqrt(d), and rational intervals.

``Surd`` values are finite combinations of square roots of square-free
integers with rational coefficients.  They form a ring in which floor, sign
and nearest-integer are decided exactly: square roots are bracketed with
integer square roots at growing precision until the bracket excludes every
integer boundary.  This terminates because a non-rational surd is never an
integer.

``Interval`` values bracket arbitrary reals (``pi``, ``e``, user intervals)
between two rationals.  Their floor is refused with :class:`PrecisionError`
whenever the bracket straddles an integer.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import floor, isqrt

from ..errors import PrecisionError

DEFAULT_PRECISION_BITS = 96


def working_precision() -> int:
    """Bits used for interval enclosures; set with ``NILPOLY_PRECISION`` (decimal digits)."""
    env = os.environ.get("NILPOLY_PRECISION")
    if env:
        try:
            digits = int(env)
        except ValueError:
            raise ValueError(f"NILPOLY_PRECISION must be an integer, got {env!r}") from None
        return max(16, int(digits * 3.33) + 4)
    return DEFAULT_PRECISION_BITS


@lru_cache(maxsize=4096)
def squarefree_part(n: int) -> tuple[int, int]:
    """Write ``n = s * f^2`` with ``s`` square-free; return ``(s, f)``."""
    if n <= 0:
        raise ValueError("square roots of non-positive integers are not supported")
    s, f = 1, 1
    m = n
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        f *= p ** (e // 2)
        if e % 2:
            s *= p
        p += 1
    s *= m
    return s, f


def _sqrt_bounds(d: int, bits: int) -> tuple[Fraction, Fraction]:
    scale = 1 << bits
    r = isqrt(d * scale * scale)
    if r * r == d * scale * scale:
        return Fraction(r, scale), Fraction(r, scale)
    return Fraction(r, scale), Fraction(r + 1, scale)


class Surd:
    """``sum_d q_d sqrt(d)`` with square-free ``d`` (``d = 1`` is the rational part)."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self.terms = {d: Fraction(q) for d, q in (terms or {}).items() if q}
        self._hash = None

    @classmethod
    def rational(cls, q) -> "Surd":
        return cls({1: Fraction(q)})

    @classmethod
    def sqrt(cls, n) -> "Surd":
        """Square root of a non-negative rational."""
        q = Fraction(n)
        if q < 0:
            raise ValueError("square root of a negative number")
        if q == 0:
            return cls()
        # sqrt(a/b) = sqrt(a*b) / b
        s, f = squarefree_part(q.numerator * q.denominator)
        return cls({s: Fraction(f, q.denominator)})

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        other = as_surd(other)
        if other is NotImplemented:
            return NotImplemented
        t = dict(self.terms)
        for d, q in other.terms.items():
            t[d] = t.get(d, 0) + q
        return Surd(t)

    __radd__ = __add__

    def __neg__(self):
        return Surd({d: -q for d, q in self.terms.items()})

    def __sub__(self, other):
        other = as_surd(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_surd(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = as_surd(other)
        if other is NotImplemented:
            return NotImplemented
        t: dict[int, Fraction] = {}
        for d1, q1 in self.terms.items():
            for d2, q2 in other.terms.items():
                s, f = squarefree_part(d1 * d2)
                t[s] = t.get(s, 0) + q1 * q2 * f
        return Surd(t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        r = Surd.rational(1)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def __truediv__(self, other):
        other = as_surd(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.is_rational():
            raise ValueError("division by an irrational surd is not supported")
        q = other.rational_value()
        if q == 0:
            raise ZeroDivisionError("division by zero")
        return Surd({d: c / q for d, c in self.terms.items()})

    # -- exact order queries ------------------------------------------------

    def is_rational(self) -> bool:
        return all(d == 1 for d in self.terms)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("value is irrational")
        return self.terms.get(1, Fraction(0))

    def bounds(self, bits: int) -> tuple[Fraction, Fraction]:
        lo = hi = Fraction(0)
        for d, q in self.terms.items():
            if d == 1:
                lo += q
                hi += q
                continue
            a, b = _sqrt_bounds(d, bits)
            if q > 0:
                lo += q * a
                hi += q * b
            else:
                lo += q * b
                hi += q * a
        return lo, hi

    def floor(self) -> int:
        if self.is_rational():
            return floor(self.rational_value())
        bits = 64
        while True:
            lo, hi = self.bounds(bits)
            if floor(lo) == floor(hi):
                return floor(lo)
            bits *= 2

    def sign(self) -> int:
        if not self.terms:
            return 0
        if self.is_rational():
            v = self.rational_value()
            return (v > 0) - (v < 0)
        bits = 64
        while True:
            lo, hi = self.bounds(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __eq__(self, other):
        other = as_surd(other)
        if other is NotImplemented:
            return False
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self.terms.items())))
        return self._hash

    def __float__(self):
        lo, hi = self.bounds(64)
        return float((lo + hi) / 2)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for d, q in sorted(self.terms.items()):
            parts.append(str(q) if d == 1 else f"{q}*sqrt({d})")
        return " + ".join(parts)

    def to_json(self):
        return {str(d): str(q) for d, q in sorted(self.terms.items())}


def as_surd(x):
    if isinstance(x, Surd):
        return x
    if isinstance(x, (int, Fraction)):
        return Surd.rational(x)
    return NotImplemented


@dataclass(frozen=True)
class Interval:
    """A closed rational interval ``[lo, hi]`` known to contain a real number."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    @classmethod
    def of(cls, x, bits: int | None = None) -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, Surd):
            return cls(*x.bounds(bits or working_precision()))
        q = Fraction(x)
        return cls(q, q)

    def __add__(self, other):
        o = Interval.of(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-Interval.of(other))

    def __rsub__(self, other):
        return Interval.of(other) + (-self)

    def __mul__(self, other):
        o = Interval.of(other)
        c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi]
        return Interval(min(c), max(c))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        r = Interval(Fraction(1), Fraction(1))
        for _ in range(n):
            r = r * self
        return r

    def __truediv__(self, other):
        o = Interval.of(other)
        if o.lo <= 0 <= o.hi:
            raise PrecisionError("division by an interval containing zero")
        return self * Interval(1 / o.hi, 1 / o.lo)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def floor(self) -> int:
        a, b = floor(self.lo), floor(self.hi)
        if a != b:
            raise PrecisionError(
                f"interval [{float(self.lo)}, {float(self.hi)}] straddles an integer; raise NILPOLY_PRECISION"
            )
        return a

    def sign(self) -> int:
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        raise PrecisionError("sign of an interval containing zero is undetermined")

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __float__(self):
        return float((self.lo + self.hi) / 2)

    def __repr__(self):
        return f"[{float(self.lo):.6g}, {float(self.hi):.6g}]"

    def to_json(self):
        return {"lo": str(self.lo), "hi": str(self.hi)}


Real = "Surd | Interval"


def real_floor(x) -> int:
    if isinstance(x, (int,)):
        return x
    if isinstance(x, Fraction):
        return floor(x)
    return x.floor()


def nearest_int(x) -> int:
    """``floor(x + 1/2)`` (halves round up)."""
    return real_floor(x + Fraction(1, 2))


def dint(x):
    """Distance to the nearest integer, as an exact value of the same kind."""
    d = x - nearest_int(x)
    if isinstance(d, Surd):
        return d if d.sign() >= 0 else -d
    if isinstance(d, Interval):
        if d.lo >= 0:
            return d
        if d.hi <= 0:
            return -d
        return Interval(Fraction(0), max(-d.lo, d.hi))
    return abs(d)


def pi_interval(bits: int | None = None) -> Interval:
    return _const_interval("pi", bits or working_precision())


def e_interval(bits: int | None = None) -> Interval:
    return _const_interval("e", bits or working_precision())


@lru_cache(maxsize=32)
def _const_interval(name: str, bits: int) -> Interval:
    import mpmath

    with mpmath.workprec(bits + 16):
        sign, man, exp, _ = mpmath.mpf(mpmath.pi if name == "pi" else mpmath.e)._mpf_
        man, exp = int(man), int(exp)
        x = Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)
        x = -x if sign else x
    eps = Fraction(1, 1 << bits)
    return Interval(x - eps, x + eps)


def to_real(x):
    """Normalise a Python number into ``Surd`` (exact) form; intervals pass through."""
    if isinstance(x, (Surd, Interval)):
        return x
    return Surd.rational(x)
