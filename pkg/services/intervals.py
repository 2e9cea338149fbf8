"""
Closed intervals with outward rounding.

Every endpoint is rounded away from the true value with math.nextafter, but
only when the float result is actually inexact: sums and products are
compared against the exact rational result, so quantities that are exactly
representable (1 - 1/4, exp(0), log(1)) stay exact. The verifier relies on
this at tight points of the covering check.
"""
import math
import sys
from fractions import Fraction
from typing import Union

Scalar = Union[int, float, Fraction]


def _down(value: float, exact: Fraction) -> float:
    if math.isinf(value):
        return value
    return value if Fraction(value) <= exact else math.nextafter(value, -math.inf)


def _up(value: float, exact: Fraction) -> float:
    if math.isinf(value):
        return value
    return value if Fraction(value) >= exact else math.nextafter(value, math.inf)


class Interval:
    """Closed interval [lo, hi] of reals"""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float = None):
        hi = lo if hi is None else hi
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid interval [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)

    @classmethod
    def point(cls, value: Scalar) -> "Interval":
        """Tightest float interval containing an exact scalar"""
        if isinstance(value, Fraction):
            f = float(value)
            return cls(_down(f, value), _up(f, value))
        return cls(float(value), float(value))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return self.lo + (self.hi - self.lo) / 2.0

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def _coerce(self, other) -> "Interval":
        return other if isinstance(other, Interval) else Interval.point(other)

    def __add__(self, other) -> "Interval":
        o = self._coerce(other)
        return Interval(
            _down(self.lo + o.lo, Fraction(self.lo) + Fraction(o.lo)),
            _up(self.hi + o.hi, Fraction(self.hi) + Fraction(o.hi)),
        )

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Interval":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "Interval":
        o = self._coerce(other)
        products = []
        for a in (self.lo, self.hi):
            for b in (o.lo, o.hi):
                products.append((a * b, Fraction(a) * Fraction(b)))
        lo = min(_down(p, e) for p, e in products)
        hi = max(_up(p, e) for p, e in products)
        return Interval(lo, hi)

    __rmul__ = __mul__

    def scale(self, k: int) -> "Interval":
        return self * Interval.point(k)

    def exp(self) -> "Interval":
        # libm exp is within one ulp; step two ulps outward unless exact
        lo = 1.0 if self.lo == 0.0 else math.nextafter(math.nextafter(math.exp(self.lo), 0.0), 0.0)
        hi = 1.0 if self.hi == 0.0 else math.nextafter(math.nextafter(math.exp(self.hi), math.inf), math.inf)
        return Interval(lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise ValueError("empty intersection")
        return Interval(lo, hi)

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"


def log_of(value: Fraction) -> Interval:
    """Enclosure of ln(value) for an exact positive rational"""
    if value <= 0:
        raise ValueError("log of a non-positive number")
    if value == 1:
        return Interval(0.0, 0.0)
    v = math.log(float(value))
    pad = 8.0 * sys.float_info.epsilon * max(1.0, abs(v))
    return Interval(v - pad, v + pad)
