"""Canned derivations built from the axioms.

Each pipeline returns a :class:`Derivation` holding the result, the value it
is expected to reduce to, and the normalizer report so the run can be
replayed against a stored log.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import ops
from .basis import DEFAULT, BasisTable
from .coeff import Coeff, I, ONE, ZERO, as_coeff
from .errors import ShapeError, UnsupportedFeature
from .expr import (
    Expr, Extractor, Fn, IndexVar, Phase, Tag, Term, substitute, structural_eq, word_shape,
)
from .linear import Lin, Poly
from .rewrite import NormalizeReport, normalize, trace

__all__ = [
    "Derivation", "make_quadratures", "make_ladders", "commutator", "weyl_symbol", "weyl_quantize",
    "symplectic_check", "identity_coefficient", "rebase", "rebase_kernel", "moment_value",
    "density_op", "purity", "trace_norm", "hs_norm", "kernel_in_q", "DERIVATIONS", "run_derivation",
]


@dataclass
class Derivation:
    name: str
    inputs: list
    result: Expr
    expected: Expr
    log: NormalizeReport
    parts: dict = field(default_factory=dict)  # label -> (result, expected)

    @property
    def ok(self) -> bool:
        return structural_eq(self.result, self.expected) and all(
            structural_eq(r, e) for r, e in self.parts.values())

    def to_json(self) -> dict:
        from .dsl import print_expr

        return {
            "name": self.name,
            "mode": self.log.mode,
            "inputs": [print_expr(x) for x in self.inputs],
            "result": print_expr(self.result),
            "expected": print_expr(self.expected),
            "ok": self.ok,
            "parts": {k: {"result": print_expr(r), "expected": print_expr(e), "ok": structural_eq(r, e)}
                      for k, (r, e) in self.parts.items()},
            "log": self.log.to_json(),
        }


def _require_operator(*xs: Expr):
    for x in xs:
        for t in x.terms:
            if word_shape(t.word) != "operator":
                raise ShapeError("expected an operator-shaped expression")


def make_quadratures() -> tuple[Expr, Expr]:
    return ops.qhat(), ops.phat()


def make_ladders() -> tuple[Expr, Expr]:
    return ops.ahat(), ops.adag()


def _split_boundary(e: Expr) -> tuple[Expr, Expr]:
    from .expr import BoundaryTerm

    has = [t for t in e.terms if any(isinstance(a, BoundaryTerm) for a in t.atoms)]
    rest = [t for t in e.terms if t not in has]
    return Expr(tuple(rest)), Expr(tuple(has))


def restrict_to_domain(e: Expr, mode: str, table=None, report: NormalizeReport | None = None) -> Expr:
    """Drop boundary-bracket terms that vanish on Schwartz states from both sides."""
    rest, bdry = _split_boundary(e)
    if bdry.is_zero():
        return e
    right, r1 = normalize(bdry * ops.ket("chi"), mode, table)
    left, r2 = normalize(ops.bra("chi") * bdry, mode, table)
    if report is not None:
        report.extend(r1)
        report.extend(r2)
    if right.is_zero() and left.is_zero():
        if report is not None:
            report.flags = [f for f in report.flags if f != "boundary-term"] + ["restricted-to-domain"]
            report.boundary_terms_remaining = 0
        return rest
    return e


def commutator(A: Expr, B: Expr, mode: str = "distributional", table=None,
               restrict: bool = True) -> tuple[Expr, NormalizeReport]:
    """``normalize(A B - B A)``; boundary terms are restricted to the Schwartz domain."""
    _require_operator(A, B)
    out, report = normalize(A * B - B * A, mode, table)
    if restrict:
        out = restrict_to_domain(out, mode, table, report)
    return out, report


def identity_coefficient(e: Expr) -> Coeff | None:
    """``c`` if ``e`` is exactly ``c * I`` in the reference basis (``0`` for zero), else ``None``."""
    e = e.canonical()
    if e.is_zero():
        return ZERO
    ident = ops.identity().terms[0]
    if len(e.terms) != 1:
        return None
    t = e.terms[0]
    if (t.mono, t.atoms, t.word, t.binders) != (ident.mono, ident.atoms, ident.word, ident.binders):
        return None
    return t.coeff


# ---------------------------------------------------------------------------
# Weyl correspondence


def kernel_in_q(A: Expr, a: str = "q1", b: str = "q2", mode="distributional", table=None) -> Expr:
    """Normal form of ``<a| A |b>`` with free position variables ``a``, ``b``."""
    sandwich = Expr((Term.make(ONE, (), (), (Extractor("q", Lin.var(a)),)),)) * A * \
        Expr((Term.make(ONE, (), (), (Tag("q", Lin.var(b)),)),))
    return normalize(sandwich, mode, table)[0]


MAX_WEYL_DEGREE = 2


def _check_symbol(s: Expr, what: str):
    for t in s.terms:
        if t.atoms or t.word or t.binders:
            raise UnsupportedFeature(f"{what} is not a polynomial in q, p")
        if sum(k for _, k in t.mono) > MAX_WEYL_DEGREE:
            raise UnsupportedFeature(f"{what} has degree above {MAX_WEYL_DEGREE}")
        if {v for v, _ in t.mono} - {"q", "p"}:
            raise UnsupportedFeature(f"{what} depends on variables other than q, p")


def weyl_symbol(A: Expr, mode: str = "distributional", table=None) -> Expr:
    """Weyl symbol ``int <q + x/2| A |q - x/2> exp(-i x p) dx`` as a polynomial in ``q``, ``p``."""
    _require_operator(A)
    K = kernel_in_q(A, "q1", "q2", mode, table)
    K = substitute(K, {"q1": Lin.build({"q": 1, "x": Fraction(1, 2)}),
                       "q2": Lin.build({"q": 1, "x": Fraction(-1, 2)})})
    phase = Phase(Poly.monomial("x", "p", coeff=-1))
    bound = Expr.from_terms(Term.make(t.coeff, t.mono, t.atoms + (phase,), t.word,
                                      t.binders + (IndexVar("x", "q"),)) for t in K.terms)
    s, _ = normalize(bound, mode, table)
    _check_symbol(s, "kernel")
    return s


def weyl_quantize(symbol: Expr, mode: str = "distributional", table=None) -> Expr:
    """Operator ``int |q + x/2> s(q, p) exp(i x p) <q - x/2| dq dx dp/2pi``."""
    symbol = symbol.canonical()
    _check_symbol(symbol, "symbol")
    x, q, p = Lin.var("x"), Lin.var("q"), Lin.var("p")
    word = (Tag("q", q + x.scale(Fraction(1, 2))), Extractor("q", q - x.scale(Fraction(1, 2))))
    binders = (IndexVar("q", "q"), IndexVar("x", "q"), IndexVar("p", "p"))
    phase = Phase(Poly.monomial("x", "p"))
    e = Expr.from_terms(Term.make(t.coeff, t.mono, (phase,), word, binders) for t in symbol.terms)
    return normalize(e, mode, table)[0]


# ---------------------------------------------------------------------------
# symplectic transformations


def symplectic_check(a, b, c, d, mode: str = "distributional", table=None) -> tuple[Expr, NormalizeReport]:
    """``[a qhat + b phat, c qhat + d phat]``, which should be ``i (ad - bc) I``."""
    Q, P = make_quadratures()
    a, b, c, d = (as_coeff(v) for v in (a, b, c, d))
    return commutator(Q * a + P * b, Q * c + P * d, mode, table)


def is_symplectic(a, b, c, d, mode: str = "distributional") -> bool:
    return identity_coefficient(symplectic_check(a, b, c, d, mode)[0]) == I


def random_rationals(seed: int, n: int = 4, span: int = 9) -> list[Fraction]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        num = rng.randint(-span, span)
        den = rng.randint(1, span)
        out.append(Fraction(num, den))
    return out


# ---------------------------------------------------------------------------
# change of basis


def rebase(X: Expr, U: str = "U", table: BasisTable | None = None, mode="distributional") -> Expr:
    """Express tags and extractors in the basis generated by the unitary kernel ``U``.

    ``|v> -> int |U:e> U*(v, e) de`` and ``<v| -> int U(v, e) <U:e| de``.
    """
    table = table or DEFAULT
    label = table.unitary_basis(U)
    X, _ = normalize(X, mode, table)
    out = []
    for t in X.terms:
        word = []
        atoms = list(t.atoms)
        binders = list(t.binders)
        names = t.all_names()
        k = 0
        for w in t.word:
            while f"_r{k}" in names:
                k += 1
            eta = f"_r{k}"
            k += 1
            ev = Lin.var(eta)
            if w.basis != table.reference:
                raise UnsupportedFeature("rebase expects tags in the reference basis")
            if isinstance(w, Tag):
                word.append(Tag(label, ev))
                atoms.append(Fn(U, (w.arg, ev), conjugated=True, unitary=True))
            else:
                word.append(Extractor(label, ev))
                atoms.append(Fn(U, (w.arg, ev), unitary=True))
            binders.append(IndexVar(eta, label))
        out.append(Term.make(t.coeff, t.mono, atoms, word, binders))
    return Expr.from_terms(out)


def rebase_kernel(A: Expr, U: str = "U", table: BasisTable | None = None, mode="distributional") -> Expr:
    """Kernel ``<U:mu| A |U:xi>`` of ``A`` in the rotated basis."""
    table = table or DEFAULT
    label = table.unitary_basis(U)
    left = Expr((Term.make(ONE, (), (), (Extractor(label, Lin.var("etaU")),)),))
    right = Expr((Term.make(ONE, (), (), (Tag(label, Lin.var("etaU'")),)),))
    return normalize(left * A * right, mode, table)[0]


# ---------------------------------------------------------------------------
# moments and density operators


def moment_value(psi: str, n: int, mode="distributional") -> Expr:
    """``<psi| M1^n |psi>``."""
    op = ops.identity()
    for _ in range(n):
        op = op * ops.moment(1)
    return normalize(ops.bra(psi) * op * ops.ket(psi), mode)[0]


def density_op(source, mode="distributional") -> Expr:
    """Pure-state density ``|psi><psi|`` from a label, or a kernel operator checked for self-adjointness."""
    if isinstance(source, str):
        return ops.projector(source)
    _require_operator(source)
    rho, _ = normalize(source, mode)
    if not structural_eq(normalize(rho.dag(), mode)[0], rho):
        raise ShapeError("density operator kernel must be self-adjoint")
    return rho


def trace_norm(rho: Expr, mode="distributional") -> Expr:
    return trace(rho, mode)[0]


def purity(rho: Expr, mode="distributional") -> Expr:
    return trace(rho * rho, mode)[0]


def hs_norm(A: Expr, mode="distributional") -> Expr:
    """Squared Hilbert-Schmidt norm ``tr(A^dag A)``."""
    return trace(A.dag() * A, mode)[0]


# ---------------------------------------------------------------------------
# registry


def _parse(src: str) -> Expr:
    from .dsl import parse

    return parse(src)


def _nf(src_or_expr, mode):
    e = _parse(src_or_expr) if isinstance(src_or_expr, str) else src_or_expr
    return normalize(e, mode)[0]


def d_qp_commutator(mode="distributional") -> Derivation:
    Q, P = make_quadratures()
    res, log = commutator(Q, P, mode)
    back, _ = commutator(P, Q, mode)
    qq, _ = commutator(Q, Q, mode)
    pp, _ = commutator(P, P, mode)
    parts = {"[p,q]": (back, _parse("-i*I")), "[q,q]": (qq, Expr.zero()), "[p,p]": (pp, Expr.zero())}
    return Derivation("qp-commutator", [Q, P], res, _parse("i*I"), log, parts)


def d_ladder_commutator(mode="distributional") -> Derivation:
    A, Ad = make_ladders()
    res, log = commutator(A, Ad, mode)
    parts = {
        "[ahat,ahat]": (commutator(A, A, mode)[0], Expr.zero()),
        "[adag,adag]": (commutator(Ad, Ad, mode)[0], Expr.zero()),
        "dag(ahat)": (_nf(A.dag(), mode), _nf(Ad, mode)),
        "ahat + adag": (_nf(A + Ad, mode), _nf(ops.qhat() * Coeff(1, 0, 0, 1), mode)),
        "ahat - adag": (_nf(A - Ad, mode), _nf(ops.phat() * Coeff(0, 1, 0, 1), mode)),
    }
    return Derivation("ladder-commutator", [A, Ad], res, _parse("I"), log, parts)


def d_weyl_annihilation(mode="distributional") -> Derivation:
    A, Ad = make_ladders()
    K = kernel_in_q(A, mode=mode)
    s = weyl_symbol(A, mode)
    log = normalize(K, mode)[1]
    expected = _parse("(q + i*p)/sqrt2")
    parts = {
        "weyl(adag)": (weyl_symbol(Ad, mode), _parse("(q - i*p)/sqrt2")),
        "weyl(I)": (weyl_symbol(ops.identity(), mode), _parse("1")),
        "quantize((q+ip)/sqrt2)": (weyl_quantize(expected, mode), _nf(A, mode)),
        "quantize(q)": (weyl_quantize(_parse("q"), mode), _nf(ops.qhat(), mode)),
        "quantize(1)": (weyl_quantize(_parse("1"), mode), _nf(ops.identity(), mode)),
    }
    return Derivation("weyl-annihilation", [A], s, expected, log, parts)


def d_symplectic(mode="distributional", a=2, b=0, c=0, d=Fraction(1, 2)) -> Derivation:
    a, b, c, d = (as_coeff(v) for v in (a, b, c, d))
    res, log = symplectic_check(a, b, c, d, mode)
    expected = ops.identity() * (I * (a * d - b * c))
    Q, P = make_quadratures()
    return Derivation("symplectic", [Q * a + P * b, Q * c + P * d], res, expected, log)


def d_unitary_invariance(mode="distributional") -> Derivation:
    A = ops.kernel_op("A")
    sandwich = ops.bra("phi") * A * ops.ket("psi")
    expected, _ = normalize(sandwich, mode)
    rebased = rebase(ops.bra("phi"), "U") * rebase(A, "U") * rebase(ops.ket("psi"), "U")
    res, log = normalize(rebased, mode)
    inner = ops.bra("phi") * ops.ket("psi")
    parts = {
        "rebase(I)": (_nf(rebase(ops.identity(), "U"), mode), _nf(ops.identity(), mode)),
        "<phi|psi>": (_nf(rebase(ops.bra("phi")) * rebase(ops.ket("psi")), mode), _nf(inner, mode)),
    }
    return Derivation("unitary-invariance", [sandwich], res, expected, log, parts)


def d_moments(mode="distributional") -> Derivation:
    M1 = ops.moment(1)
    res, log = normalize(M1 * M1, mode)
    parts = {
        "M0": (_nf(ops.moment(0), mode), _nf(ops.identity(), mode)),
        "M1 M2": (_nf(M1 * ops.moment(2), mode), _nf(ops.moment(3), mode)),
        "<psi|M1|psi>": (moment_value("psi", 1, mode), _nf("int psi*(q) q psi(q) dq", mode)),
        "<psi|M1^2|psi>": (moment_value("psi", 2, mode), _nf("int psi*(q) q^2 psi(q) dq", mode)),
    }
    return Derivation("moments", [M1], res, _nf(ops.moment(2), mode), log, parts)


def d_density_trace(mode="distributional") -> Derivation:
    rho = density_op("psi")
    res, log = trace(rho, mode)
    parts = {
        "purity": (purity(rho, mode), _nf("int int psi*(q) psi(q) psi*(q') psi(q') dq dq'", mode)),
        "tr(A)": (trace(ops.kernel_op("A"), mode)[0], _nf("int A(q, q) dq", mode)),
        "<G|P|F>": (_nf(ops.bra("G") * rho * ops.ket("F"), mode),
                    _nf("int int G*(q) psi(q) psi*(q') F(q') dq dq'", mode)),
    }
    return Derivation("density-trace", [rho], res, _nf("int psi*(q) psi(q) dq", mode), log, parts)


DERIVATIONS = {
    "qp-commutator": d_qp_commutator,
    "ladder-commutator": d_ladder_commutator,
    "weyl-annihilation": d_weyl_annihilation,
    "symplectic": d_symplectic,
    "unitary-invariance": d_unitary_invariance,
    "moments": d_moments,
    "density-trace": d_density_trace,
}


def run_derivation(name: str, mode: str = "distributional", **params) -> Derivation:
    try:
        fn = DERIVATIONS[name]
    except KeyError:
        raise KeyError(f"unknown derivation {name!r}; choose from {', '.join(DERIVATIONS)}") from None
    return fn(mode, **params)
