"""Affine forms and low-degree polynomials over index variables.

Every argument of a tag, extractor, delta or coefficient function is an
affine form :class:`Lin`.  Phase exponents are real polynomials
(:class:`Poly`); in practice they stay bilinear.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

__all__ = ["Lin", "Poly", "frac"]


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class Lin:
    """``sum(c_v * v) + const`` with rational coefficients."""

    coeffs: tuple = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def build(coeffs: Mapping[str, Fraction] | Iterable = (), const=0) -> "Lin":
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[str, Fraction] = {}
        for v, c in items:
            acc[v] = acc.get(v, Fraction(0)) + frac(c)
        return Lin(tuple(sorted((v, c) for v, c in acc.items() if c != 0)), frac(const))

    @staticmethod
    def var(name: str) -> "Lin":
        return Lin(((name, Fraction(1)),))

    @staticmethod
    def constant(c) -> "Lin":
        return Lin((), frac(c))

    # -- queries --------------------------------------------------------
    def vars(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def coeff(self, v: str) -> Fraction:
        for name, c in self.coeffs:
            if name == v:
                return c
        return Fraction(0)

    def as_var(self) -> str | None:
        if self.const == 0 and len(self.coeffs) == 1 and self.coeffs[0][1] == 1:
            return self.coeffs[0][0]
        return None

    def is_zero(self) -> bool:
        return not self.coeffs and self.const == 0

    def is_constant(self) -> bool:
        return not self.coeffs

    # -- algebra --------------------------------------------------------
    def __add__(self, other: "Lin") -> "Lin":
        return Lin.build(list(self.coeffs) + list(other.coeffs), self.const + other.const)

    def __neg__(self) -> "Lin":
        return self.scale(-1)

    def __sub__(self, other: "Lin") -> "Lin":
        return self + (-other)

    def scale(self, k) -> "Lin":
        k = frac(k)
        if k == 0:
            return Lin()
        return Lin(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def without(self, v: str) -> "Lin":
        return Lin(tuple((n, c) for n, c in self.coeffs if n != v), self.const)

    def subst(self, mapping: Mapping[str, "Lin"]) -> "Lin":
        if not any(v in mapping for v, _ in self.coeffs):
            return self
        out = Lin.constant(self.const)
        for v, c in self.coeffs:
            out = out + (mapping[v].scale(c) if v in mapping else Lin(((v, c),)))
        return out

    def rename(self, mapping: Mapping[str, str]) -> "Lin":
        return Lin.build([(mapping.get(v, v), c) for v, c in self.coeffs], self.const)

    def solve_for(self, v: str) -> "Lin":
        """Value of ``v`` that makes this form vanish."""
        c = self.coeff(v)
        if c == 0:
            raise ValueError(f"{v} does not occur in {self}")
        return self.without(v).scale(Fraction(-1) / c)

    def to_poly(self) -> "Poly":
        items = [((v,), c) for v, c in self.coeffs]
        if self.const:
            items.append(((), self.const))
        return Poly.build(items)

    def key(self):
        return (self.coeffs, self.const)

    def __str__(self) -> str:
        return format_lin(self)


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_scaled(c: Fraction, body: str) -> tuple[str, str]:
    sign = "-" if c < 0 else "+"
    mag = abs(c)
    if mag == 1:
        return sign, body
    return sign, f"{_fmt(mag)}*{body}"


def format_lin(lin: Lin) -> str:
    parts: list[tuple[str, str]] = [_fmt_scaled(c, v) for v, c in lin.coeffs]
    if lin.const:
        parts.append(("-" if lin.const < 0 else "+", _fmt(abs(lin.const))))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


@dataclass(frozen=True)
class Poly:
    """Real polynomial; monomials are sorted tuples of variable names."""

    terms: tuple = ()

    @staticmethod
    def build(items: Iterable) -> "Poly":
        acc: dict[tuple, Fraction] = {}
        for mono, c in items:
            mono = tuple(sorted(mono))
            acc[mono] = acc.get(mono, Fraction(0)) + frac(c)
        return Poly(tuple(sorted((m, c) for m, c in acc.items() if c != 0)))

    @staticmethod
    def monomial(*names: str, coeff=1) -> "Poly":
        return Poly.build([(names, coeff)])

    def is_zero(self) -> bool:
        return not self.terms

    def vars(self) -> set[str]:
        return {v for m, _ in self.terms for v in m}

    def degree_in(self, v: str) -> int:
        return max((m.count(v) for m, _ in self.terms), default=0)

    def degree(self) -> int:
        return max((len(m) for m, _ in self.terms), default=0)

    def __add__(self, other: "Poly") -> "Poly":
        return Poly.build(list(self.terms) + list(other.terms))

    def __neg__(self) -> "Poly":
        return self.scale(-1)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        return Poly.build((m1 + m2, c1 * c2) for m1, c1 in self.terms for m2, c2 in other.terms)

    def scale(self, k) -> "Poly":
        k = frac(k)
        return Poly(tuple((m, c * k) for m, c in self.terms)) if k else Poly()

    def subst(self, mapping: Mapping[str, Lin]) -> "Poly":
        if not (self.vars() & set(mapping)):
            return self
        out = Poly()
        for mono, c in self.terms:
            acc = Poly.build([((), c)])
            for v in mono:
                acc = acc * (mapping[v].to_poly() if v in mapping else Poly.monomial(v))
            out = out + acc
        return out

    def rename(self, mapping: Mapping[str, str]) -> "Poly":
        return Poly.build((tuple(mapping.get(v, v) for v in m), c) for m, c in self.terms)

    def diff(self, v: str) -> "Poly":
        items = []
        for mono, c in self.terms:
            k = mono.count(v)
            if k:
                rest = list(mono)
                rest.remove(v)
                items.append((tuple(rest), c * k))
        return Poly.build(items)

    def split(self, v: str) -> list["Poly"]:
        """Coefficients of ``v**0, v**1, ...`` as polynomials free of ``v``."""
        out: dict[int, list] = {}
        for mono, c in self.terms:
            k = mono.count(v)
            out.setdefault(k, []).append((tuple(x for x in mono if x != v), c))
        top = max(out, default=0)
        return [Poly.build(out.get(k, [])) for k in range(top + 1)]

    def to_lin(self) -> Lin | None:
        if self.degree() > 1:
            return None
        const = Fraction(0)
        coeffs = []
        for mono, c in self.terms:
            if mono:
                coeffs.append((mono[0], c))
            else:
                const = c
        return Lin.build(coeffs, const)

    def key(self):
        return self.terms

    def __str__(self) -> str:
        return format_poly(self)


def format_poly(poly: Poly, key=None) -> str:
    """``key`` orders the variables inside each monomial (default: by name)."""
    if poly.is_zero():
        return "0"
    parts = []
    for mono, c in poly.terms:
        body = "*".join(_power_run(mono, key)) if mono else None
        if body is None:
            parts.append(("-" if c < 0 else "+", _fmt(abs(c))))
        else:
            parts.append(_fmt_scaled(c, body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _power_run(mono: tuple, key=None) -> list[str]:
    out = []
    for v in sorted(set(mono), key=key):
        k = mono.count(v)
        out.append(v if k == 1 else f"{v}^{k}")
    return out
