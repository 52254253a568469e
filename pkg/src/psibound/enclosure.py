"""Outward-rounded interval arithmetic for one-sided-safe constants.

Every derived constant that feeds a certified upper bound is carried as an
``Enclosure`` [lo, hi].  Arithmetic rounds lo down and hi up with
``math.nextafter``, so the true real result of an operation on contained
values stays contained.  Library transcendentals (exp, log, sqrt) are
correctly rounded to within 1 ulp on every platform we target, so a single
nextafter step on each side keeps containment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_INF = math.inf


def _down(x: float) -> float:
    if math.isinf(x):
        return x
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    if math.isinf(x):
        return x
    return math.nextafter(x, _INF)


@dataclass(frozen=True)
class Enclosure:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (self.lo <= self.hi):
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x: float) -> "Enclosure":
        return Enclosure(float(x), float(x))

    @staticmethod
    def of(x) -> "Enclosure":
        return x if isinstance(x, Enclosure) else Enclosure.point(x)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def encloses(self, other: "Enclosure") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def widen(self, eps: float) -> "Enclosure":
        return Enclosure(_down(self.lo - eps), _up(self.hi + eps))

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"

    # -- ring operations ----------------------------------------------------

    def __add__(self, other) -> "Enclosure":
        o = Enclosure.of(other)
        return Enclosure(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other) -> "Enclosure":
        o = Enclosure.of(other)
        return Enclosure(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other) -> "Enclosure":
        return Enclosure.of(other) - self

    def __mul__(self, other) -> "Enclosure":
        o = Enclosure.of(other)
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Enclosure(_down(min(p)), _up(max(p)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Enclosure":
        o = Enclosure.of(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError(f"division by enclosure containing zero: {o}")
        p = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Enclosure(_down(min(p)), _up(max(p)))

    def __rtruediv__(self, other) -> "Enclosure":
        return Enclosure.of(other) / self

    # -- order against scalars ----------------------------------------------

    def certainly_positive(self) -> bool:
        return self.lo > 0.0

    def certainly_negative(self) -> bool:
        return self.hi < 0.0

    # -- elementary functions ------------------------------------------------

    def abs(self) -> "Enclosure":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Enclosure(0.0, max(-self.lo, self.hi))

    def exp(self) -> "Enclosure":
        return Enclosure(_down(math.exp(self.lo)), _up(math.exp(self.hi)))

    def log(self) -> "Enclosure":
        if self.lo <= 0.0:
            raise ValueError(f"log of enclosure touching zero: {self}")
        return Enclosure(_down(math.log(self.lo)), _up(math.log(self.hi)))

    def sqrt(self) -> "Enclosure":
        if self.lo < 0.0:
            raise ValueError(f"sqrt of negative enclosure: {self}")
        return Enclosure(_down(math.sqrt(self.lo)), _up(math.sqrt(self.hi)))

    def powi(self, n: int) -> "Enclosure":
        """Integer power, exact case analysis on the sign for even n."""
        if n == 0:
            return Enclosure.point(1.0)
        if n < 0:
            return Enclosure.point(1.0) / self.powi(-n)
        out = Enclosure.point(1.0)
        base = self
        k = n
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        if n % 2 == 0 and self.lo < 0.0 < self.hi:
            out = Enclosure(0.0, out.hi)
        return out


PI = Enclosure(math.nextafter(math.pi, 0.0), math.nextafter(math.pi, 4.0))
TWO_PI = PI * 2.0
E = Enclosure(math.nextafter(math.e, 0.0), math.nextafter(math.e, 4.0))
