"""Exact scalar coefficients.

A :class:`Coeff` is a Gaussian rational times an integer power of pi times
an optional factor of sqrt(2).  That ring is closed under multiplication,
which is all the rewrite rules need; addition is only defined between
coefficients that share the same pi power and sqrt(2) flag (the *shape*).
Terms whose coefficients differ in shape are kept as separate terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
import math

__all__ = ["Coeff", "as_coeff", "ONE", "ZERO", "I", "TWO_PI", "SQRT2"]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        # exact decimal reading, so 0.5 -> 1/2 and 0.1 -> 1/10
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


@dataclass(frozen=True)
class Coeff:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)
    pi: int = 0
    sqrt2: int = 0  # 0 or 1

    def __post_init__(self):
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))
        if self.sqrt2 not in (0, 1):
            raise ValueError("sqrt2 flag must be 0 or 1")
        if self.re == 0 and self.im == 0:
            object.__setattr__(self, "pi", 0)
            object.__setattr__(self, "sqrt2", 0)

    # -- construction -------------------------------------------------
    @classmethod
    def rational(cls, x) -> "Coeff":
        return cls(_frac(x))

    @classmethod
    def complex(cls, re, im=0) -> "Coeff":
        return cls(_frac(re), _frac(im))

    # -- predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_one(self) -> bool:
        return self == ONE

    def is_real_rational(self) -> bool:
        return self.im == 0 and self.pi == 0 and self.sqrt2 == 0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.pi, self.sqrt2) if not self.is_zero() else (0, 0)

    # -- arithmetic ---------------------------------------------------
    def __mul__(self, other):
        other = as_coeff(other)
        re = self.re * other.re - self.im * other.im
        im = self.re * other.im + self.im * other.re
        s = self.sqrt2 + other.sqrt2
        if s == 2:
            re, im, s = 2 * re, 2 * im, 0
        return Coeff(re, im, self.pi + other.pi, s)

    __rmul__ = __mul__

    def __neg__(self):
        return Coeff(-self.re, -self.im, self.pi, self.sqrt2)

    def __add__(self, other):
        other = as_coeff(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.shape != other.shape:
            raise ValueError(f"cannot add coefficients of different shape: {self} + {other}")
        return Coeff(self.re + other.re, self.im + other.im, self.pi, self.sqrt2)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-as_coeff(other))

    def __rsub__(self, other):
        return as_coeff(other) - self

    def inverse(self) -> "Coeff":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero coefficient")
        den = self.re * self.re + self.im * self.im
        re, im = self.re / den, -self.im / den
        if self.sqrt2:
            # 1/sqrt2 = sqrt2/2
            return Coeff(re / 2, im / 2, -self.pi, 1)
        return Coeff(re, im, -self.pi, 0)

    def __truediv__(self, other):
        return self * as_coeff(other).inverse()

    def __rtruediv__(self, other):
        return as_coeff(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers")
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def conj(self) -> "Coeff":
        return Coeff(self.re, -self.im, self.pi, self.sqrt2)

    def __complex__(self) -> complex:
        scale = math.pi ** self.pi * (math.sqrt(2.0) if self.sqrt2 else 1.0)
        return complex(float(self.re) * scale, float(self.im) * scale)

    def sort_key(self):
        return (self.pi, self.sqrt2, self.re, self.im)

    # -- text ---------------------------------------------------------
    def __str__(self) -> str:
        return format_coeff(self)

    def __repr__(self) -> str:
        return f"Coeff({format_coeff(self)})"


def as_coeff(x) -> Coeff:
    if isinstance(x, Coeff):
        return x
    if isinstance(x, complex):
        return Coeff(_frac(x.real), _frac(x.imag))
    return Coeff(_frac(x))


ZERO = Coeff()
ONE = Coeff(Fraction(1))
I = Coeff(Fraction(0), Fraction(1))
TWO_PI = Coeff(Fraction(2), Fraction(0), 1)
SQRT2 = Coeff(Fraction(1), Fraction(0), 0, 1)


def _fmt_frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_coeff(c: Coeff) -> str:
    """Render a coefficient in the DSL's ASCII syntax (re-parseable)."""
    if c.is_zero():
        return "0"
    if c.im == 0:
        head = _fmt_frac(c.re)
    elif c.re == 0:
        if c.im == 1:
            head = "i"
        elif c.im == -1:
            head = "-i"
        else:
            head = f"{_fmt_frac(c.im)}*i"
    else:
        im = c.im
        sign = "+" if im > 0 else "-"
        mag = abs(im)
        imag = "i" if mag == 1 else f"{_fmt_frac(mag)}*i"
        head = f"({_fmt_frac(c.re)}{sign}{imag})"
    factors = []
    if c.pi:
        factors.append("pi" if c.pi == 1 else f"pi^{c.pi}")
    if c.sqrt2:
        factors.append("sqrt2")
    if not factors:
        return head
    if head == "1":
        return "*".join(factors)
    if head == "-1":
        return "-" + "*".join(factors)
    return "*".join([head] + factors)
