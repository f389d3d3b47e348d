"""Standard states and operators as expressions.

Measures are implied by the binder's basis, so ``phat()`` is
``int |p> p <p| dp`` with the ``1/2pi`` coming from the basis table.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coeff import Coeff, I, ONE, TWO_PI
from .errors import ShapeError
from .expr import BoundaryTerm, Expr, Extractor, Fn, IndexVar, Phase, Tag, Term, word_shape
from .linear import Lin, Poly

__all__ = [
    "identity", "moment", "qhat", "phat", "ahat", "adag", "kernel_op", "ket", "bra",
    "delta_hat", "projector", "Ket", "Bra", "Operator", "INV_SQRT2",
]

INV_SQRT2 = Coeff(1, 0, 0, 1) / 2  # sqrt2/2


def _v(name):
    return Lin.var(name)


def identity(basis: str = "q") -> Expr:
    return moment(0, basis)


def moment(n: int, basis: str = "q") -> Expr:
    """Diagonal moment operator ``int |v> v^n <v| dv``."""
    if n < 0:
        raise ValueError("moment order must be non-negative")
    v = "v"
    t = Term.make(ONE, ((v, n),) if n else (), (), (Tag(basis, _v(v)), Extractor(basis, _v(v))),
                  (IndexVar(v, basis),))
    return Expr((t,)).canonical()


def qhat() -> Expr:
    return moment(1, "q")


def phat() -> Expr:
    return moment(1, "p")


def ahat() -> Expr:
    return (qhat() + phat() * I) * INV_SQRT2


def adag() -> Expr:
    return (qhat() - phat() * I) * INV_SQRT2


def kernel_op(name: str, hermitian: bool = False, basis: str = "q") -> Expr:
    """``int int |a> K(a, b) <b| da db`` for an abstract kernel ``K``."""
    k = Fn(name, (_v("a"), _v("b")), schwartz=False, hermitian=hermitian)
    t = Term.make(ONE, (), (k,), (Tag(basis, _v("a")), Extractor(basis, _v("b"))),
                  (IndexVar("a", basis), IndexVar("b", basis)))
    return Expr((t,)).canonical()


def ket(name: str, basis: str = "q") -> Expr:
    """Composite entity ``int |v> psi(v) dv`` with a Schwartz coefficient function."""
    t = Term.make(ONE, (), (Fn(name, (_v("v"),), schwartz=True),), (Tag(basis, _v("v")),),
                  (IndexVar("v", basis),))
    return Expr((t,)).canonical()


def bra(name: str, basis: str = "q") -> Expr:
    return ket(name, basis).dag()


def projector(name: str) -> Expr:
    return ket(name) * bra(name)


def delta_hat() -> Expr:
    """Boundary operator left over by integration by parts of ``[qhat, phat]``."""
    payload = Expr((Term.make(ONE, (("k", 1),),
                              (Phase(Poly.monomial("k", "a") - Poly.monomial("k", "b")),)),))
    bt = BoundaryTerm.make(IndexVar("k", "p"), payload)
    t = Term.make(TWO_PI.inverse(), (), (bt,), (Tag("q", _v("a")), Extractor("q", _v("b"))),
                  (IndexVar("a", "q"), IndexVar("b", "q")))
    return Expr((t,)).canonical()


# ---------------------------------------------------------------------------
# shape-checked wrappers


@dataclass(frozen=True)
class _Shaped:
    expr: Expr
    SHAPE = ""

    def __post_init__(self):
        for t in self.expr.terms:
            if word_shape(t.word) != self.SHAPE:
                raise ShapeError(f"expected {self.SHAPE}-shaped terms, got {word_shape(t.word)}")


@dataclass(frozen=True)
class Ket(_Shaped):
    """Composite entity (single trailing tag in every term)."""

    normalized: bool = False
    SHAPE = "ket"

    def dag(self) -> "Bra":
        return Bra(self.expr.dag(), self.normalized)


@dataclass(frozen=True)
class Bra(_Shaped):
    """Adjoint composite entity (single leading extractor)."""

    normalized: bool = False
    SHAPE = "bra"

    def dag(self) -> Ket:
        return Ket(self.expr.dag(), self.normalized)


@dataclass(frozen=True)
class Operator(_Shaped):
    """Tag ... extractor shaped expression."""

    SHAPE = "operator"

    def dag(self) -> "Operator":
        return Operator(self.expr.dag())
