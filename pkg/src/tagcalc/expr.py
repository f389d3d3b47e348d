"""Symbolic expressions over tags and extractors.

An :class:`Expr` is a formal sum of :class:`Term` objects.  A term is

    coeff * monomial * scalar atoms * word * (integrals over binders)

where the scalar atoms (deltas, phases, coefficient functions, boundary
brackets) commute with everything and the *word* is an ordered list of
tags (kets) and extractors (bras).  Integration measures are implied by
the basis of each binder; the weight itself lives in the basis table.

Everything here is immutable.  Terms are canonicalized on construction
(atom ordering, delta orientation, merged phases) and
:meth:`Expr.canonical` adds alpha-normalization of binders and collection
of like terms, which is what :func:`structural_eq` compares.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Mapping

from .coeff import Coeff, ONE, ZERO, as_coeff
from .errors import UnsupportedFeature
from .linear import Lin, Poly, frac

__all__ = [
    "IndexVar", "Delta", "Phase", "Fn", "BoundaryTerm", "Tag", "Extractor",
    "Term", "Expr", "delta", "delta_prime", "phase", "fn", "mono",
    "alpha_normalize", "adjoint", "substitute", "structural_eq",
    "expr_to_json", "expr_from_json",
]

BOUND_PREFIX = "_"
BRACKET_VAR = "_t"
MAX_PERMUTED_BINDERS = 6


@dataclass(frozen=True, order=True)
class IndexVar:
    name: str
    basis: str = "q"


# ---------------------------------------------------------------------------
# scalar atoms


@dataclass(frozen=True)
class Delta:
    """``order``-th derivative of the Dirac delta evaluated at ``arg``."""

    arg: Lin
    order: int = 0

    def vars(self) -> set[str]:
        return set(self.arg.vars())

    def key(self):
        return (0, self.order, self.arg.key())

    def rename(self, m):
        return Delta(self.arg.rename(m), self.order)

    def subst(self, m):
        return Delta(self.arg.subst(m), self.order)

    def conj(self):
        return self

    def canonical(self):
        """Return ``(factor, atom_or_None)``; ``None`` atom means factor * 1."""
        arg = self.arg
        if arg.is_constant():
            if arg.const != 0:
                return ZERO, None
            return ONE, self
        lead = arg.coeffs[0][1]
        if lead == 1:
            return ONE, self
        # delta^(n)(c z) = delta^(n)(z) / (c^n |c|)
        factor = Fraction(1) / (lead ** self.order * abs(lead))
        return as_coeff(factor), Delta(arg.scale(Fraction(1) / lead), self.order)


@dataclass(frozen=True)
class Phase:
    """``exp(i * exponent)`` with a real polynomial exponent."""

    exponent: Poly

    def vars(self) -> set[str]:
        return self.exponent.vars()

    def key(self):
        return (1, self.exponent.key())

    def rename(self, m):
        return Phase(self.exponent.rename(m))

    def subst(self, m):
        return Phase(self.exponent.subst(m))

    def conj(self):
        return Phase(-self.exponent)

    def canonical(self):
        return (ONE, None) if self.exponent.is_zero() else (ONE, self)


@dataclass(frozen=True)
class Fn:
    """Named coefficient function or kernel.

    ``derivs[k]`` is the derivative order in argument ``k``.  Unitary
    kernels are never differentiated.  For a hermitian two-argument kernel
    ``conj(K)(a, b) == K(b, a)``, which is applied on construction.
    """

    name: str
    args: tuple
    conjugated: bool = False
    derivs: tuple = ()
    schwartz: bool = False
    unitary: bool = False
    hermitian: bool = False

    def __post_init__(self):
        if not self.derivs:
            object.__setattr__(self, "derivs", (0,) * len(self.args))
        if len(self.derivs) != len(self.args):
            raise ValueError("one derivative order per argument")

    def vars(self) -> set[str]:
        return {v for a in self.args for v in a.vars()}

    def key(self):
        return (2, self.name, self.conjugated, len(self.args), tuple(a.key() for a in self.args),
                self.derivs, self.schwartz, self.unitary, self.hermitian)

    def _with(self, **kw):
        d = dict(name=self.name, args=self.args, conjugated=self.conjugated, derivs=self.derivs,
                 schwartz=self.schwartz, unitary=self.unitary, hermitian=self.hermitian)
        d.update(kw)
        return Fn(**d)

    def rename(self, m):
        return self._with(args=tuple(a.rename(m) for a in self.args))

    def subst(self, m):
        return self._with(args=tuple(a.subst(m) for a in self.args))

    def conj(self):
        return self._with(conjugated=not self.conjugated)

    def canonical(self):
        if self.hermitian and self.conjugated and len(self.args) == 2:
            return ONE, self._with(args=self.args[::-1], derivs=self.derivs[::-1], conjugated=False)
        return ONE, self


@dataclass(frozen=True)
class BoundaryTerm:
    """Unevaluated bracket ``[payload]`` taken at ``var = +t`` minus ``var = -t``, t -> inf.

    ``var`` is bound by the bracket; ``payload`` is a scalar expression.
    """

    var: IndexVar
    payload: "Expr"

    @staticmethod
    def make(var: IndexVar, payload: "Expr") -> "BoundaryTerm":
        inner = IndexVar(BRACKET_VAR, var.basis)
        if var.name != BRACKET_VAR:
            payload = payload.rename_vars({var.name: BRACKET_VAR})
        return BoundaryTerm(inner, payload.canonical())

    def vars(self) -> set[str]:
        return self.payload.free_vars() - {self.var.name}

    def key(self):
        return (3, self.var.basis, self.payload.key())

    def rename(self, m):
        m = {k: v for k, v in m.items() if k != self.var.name}
        return BoundaryTerm(self.var, self.payload.rename_vars(m))

    def subst(self, m):
        m = {k: v for k, v in m.items() if k != self.var.name}
        if not (set(m) & self.vars()):
            return self
        return BoundaryTerm(self.var, self.payload.subst_free(m))

    def conj(self):
        return BoundaryTerm(self.var, self.payload.dag())

    def canonical(self):
        if self.payload.is_zero():
            return ZERO, None
        return ONE, BoundaryTerm(self.var, self.payload.canonical())


# ---------------------------------------------------------------------------
# noncommuting atoms


@dataclass(frozen=True)
class Tag:
    """Ket ``|arg>`` of the given basis."""

    basis: str
    arg: Lin

    def vars(self):
        return set(self.arg.vars())

    def key(self):
        return (0, self.basis, self.arg.key())

    def rename(self, m):
        return Tag(self.basis, self.arg.rename(m))

    def subst(self, m):
        return Tag(self.basis, self.arg.subst(m))

    def dag(self):
        return Extractor(self.basis, self.arg)


@dataclass(frozen=True)
class Extractor:
    """Bra ``<arg|`` of the given basis."""

    basis: str
    arg: Lin

    def vars(self):
        return set(self.arg.vars())

    def key(self):
        return (1, self.basis, self.arg.key())

    def rename(self, m):
        return Extractor(self.basis, self.arg.rename(m))

    def subst(self, m):
        return Extractor(self.basis, self.arg.subst(m))

    def dag(self):
        return Tag(self.basis, self.arg)


# ---------------------------------------------------------------------------
# monomial helpers (mono is a sorted tuple of (var, power))


def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    acc = dict(a)
    for v, k in b:
        acc[v] = acc.get(v, 0) + k
    return tuple(sorted((v, k) for v, k in acc.items() if k))


def mono_power(m: tuple, v: str) -> int:
    for name, k in m:
        if name == v:
            return k
    return 0


def mono_without(m: tuple, v: str) -> tuple:
    return tuple((n, k) for n, k in m if n != v)


def mono_rename(m: tuple, mapping) -> tuple:
    acc: dict[str, int] = {}
    for v, k in m:
        v = mapping.get(v, v)
        acc[v] = acc.get(v, 0) + k
    return tuple(sorted(acc.items()))


def poly_of_mono(m: tuple, mapping: Mapping[str, Lin]) -> Poly:
    out = Poly.build([((), 1)])
    for v, k in m:
        base = mapping[v].to_poly() if v in mapping else Poly.monomial(v)
        for _ in range(k):
            out = out * base
    return out


def mono_of(poly_mono: tuple) -> tuple:
    acc: dict[str, int] = {}
    for v in poly_mono:
        acc[v] = acc.get(v, 0) + 1
    return tuple(sorted(acc.items()))


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Term:
    coeff: Coeff
    mono: tuple = ()
    atoms: tuple = ()
    word: tuple = ()
    binders: tuple = ()

    @staticmethod
    def make(coeff=ONE, mono=(), atoms=(), word=(), binders=()) -> "Term | None":
        """Canonicalize the pieces of a term; ``None`` if it vanishes."""
        c = as_coeff(coeff)
        if c.is_zero():
            return None
        out_atoms = []
        exponent = Poly()
        for atom in atoms:
            f, a = atom.canonical()
            if f.is_zero():
                return None
            c = c * f
            if a is None:
                continue
            if isinstance(a, Phase):
                exponent = exponent + a.exponent
            else:
                out_atoms.append(a)
        if not exponent.is_zero():
            out_atoms.append(Phase(exponent))
        out_atoms.sort(key=lambda a: a.key())
        mono = tuple(sorted((v, k) for v, k in mono if k))
        binders = tuple(sorted(set(binders)))
        return Term(c, mono, tuple(out_atoms), tuple(word), binders)

    # -- variable bookkeeping ------------------------------------------
    def bound_names(self) -> set[str]:
        return {b.name for b in self.binders}

    def binder(self, name: str) -> IndexVar:
        for b in self.binders:
            if b.name == name:
                return b
        raise KeyError(name)

    def used_vars(self) -> set[str]:
        out = {v for v, _ in self.mono}
        for a in self.atoms:
            out |= a.vars()
        for w in self.word:
            out |= w.vars()
        return out

    def free_vars(self) -> set[str]:
        return self.used_vars() - self.bound_names()

    def all_names(self) -> set[str]:
        return self.used_vars() | self.bound_names()

    def where(self, v: str) -> set[str]:
        """Kinds of places where ``v`` occurs."""
        kinds = set()
        if mono_power(self.mono, v):
            kinds.add("mono")
        for a in self.atoms:
            if v in a.vars():
                if isinstance(a, Delta):
                    kinds.add("delta")
                elif isinstance(a, Phase):
                    kinds.add("phase")
                elif isinstance(a, Fn):
                    kinds.add("unitary" if a.unitary else "fn")
                else:
                    kinds.add("bdry")
        if any(v in w.vars() for w in self.word):
            kinds.add("word")
        return kinds

    # -- structural operations -----------------------------------------
    def rename(self, mapping: Mapping[str, str]) -> "Term":
        if not mapping:
            return self
        return Term.make(
            self.coeff,
            mono_rename(self.mono, mapping),
            [a.rename(mapping) for a in self.atoms],
            [w.rename(mapping) for w in self.word],
            [IndexVar(mapping.get(b.name, b.name), b.basis) for b in self.binders],
        )

    def subst(self, mapping: Mapping[str, Lin], binders=None, factor=ONE) -> list["Term"]:
        """Plain substitution of variables; binders are replaced by ``binders`` if given."""
        binders = self.binders if binders is None else binders
        atoms = [a.subst(mapping) for a in self.atoms]
        word = [w.subst(mapping) for w in self.word]
        out = []
        moved = {v for v, _ in self.mono if v in mapping}
        if not moved:
            t = Term.make(self.coeff * factor, self.mono, atoms, word, binders)
            return [t] if t is not None else []
        keep = tuple((v, k) for v, k in self.mono if v not in mapping)
        moved_mono = tuple((v, k) for v, k in self.mono if v in mapping)
        for pm, c in poly_of_mono(moved_mono, mapping).terms:
            t = Term.make(self.coeff * factor * as_coeff(c), mono_mul(keep, mono_of(pm)),
                          atoms, word, binders)
            if t is not None:
                out.append(t)
        return out

    def dag(self) -> "Term":
        return Term.make(
            self.coeff.conj(),
            self.mono,
            [a.conj() for a in self.atoms],
            [w.dag() for w in reversed(self.word)],
            self.binders,
        )

    def shape_key(self):
        return (
            tuple(w.key() for w in self.word),
            tuple(a.key() for a in self.atoms),
            self.mono,
            tuple((b.name, b.basis) for b in self.binders),
            self.coeff.shape,
        )

    def key(self):
        return (self.shape_key(), self.coeff.sort_key())

    def with_coeff(self, c) -> "Term | None":
        return Term.make(c, self.mono, self.atoms, self.word, self.binders)

    # -- alpha normalization -------------------------------------------
    def alpha(self) -> "Term":
        bound = [b.name for b in self.binders]
        if not bound:
            return self
        order: list[str] = []
        bset = set(bound)
        for w in self.word:
            v = w.arg.as_var()
            if v in bset and v not in order:
                order.append(v)
        rest = sorted(b for b in bound if b not in order)
        # clear the target namespace first so renames are simultaneous
        if len(rest) > MAX_PERMUTED_BINDERS:
            candidates = [tuple(rest)]
        else:
            candidates = permutations(rest)
        best = None
        best_key = None
        for perm in candidates:
            names = order + list(perm)
            mapping = {old: f"{BOUND_PREFIX}{i}" for i, old in enumerate(names)}
            t = self.rename(_simultaneous(mapping, self.all_names()))
            k = (t.shape_key(), t.coeff.sort_key())
            if best_key is None or k < best_key:
                best, best_key = t, k
        return best


def _simultaneous(mapping: dict[str, str], names: set[str]) -> dict[str, str]:
    # rename() applies the dict in one pass, so a plain dict already is simultaneous;
    # this only guards against a target colliding with an untouched free name.
    targets = set(mapping.values())
    clash = (targets & names) - set(mapping)
    if clash:
        raise ValueError(f"bound-variable namespace collides with free variables {sorted(clash)}")
    return mapping


def _fresh(avoid: set[str], prefix: str = BOUND_PREFIX):
    k = 0
    while True:
        name = f"{prefix}{k}"
        if name not in avoid:
            avoid.add(name)
            yield name
        k += 1


def _multiply_terms(a: Term, b: Term) -> Term | None:
    a_names = a.all_names()
    b_free = b.free_vars()
    avoid = a_names | b.all_names()
    gen = _fresh(avoid)
    ra = {n: next(gen) for n in a.bound_names() if n in b_free}
    if ra:
        a = a.rename(ra)
        a_names = a.all_names()
    rb = {n: next(gen) for n in b.bound_names() if n in a_names}
    if rb:
        b = b.rename(rb)
    return Term.make(
        a.coeff * b.coeff,
        mono_mul(a.mono, b.mono),
        a.atoms + b.atoms,
        a.word + b.word,
        a.binders + b.binders,
    )


# ---------------------------------------------------------------------------
# expressions


def _coerce(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    return Expr.scalar(x)


@dataclass(frozen=True)
class Expr:
    terms: tuple = field(default=())

    @staticmethod
    def zero() -> "Expr":
        return Expr(())

    @staticmethod
    def scalar(c) -> "Expr":
        t = Term.make(as_coeff(c))
        return Expr((t,) if t is not None else ())

    @staticmethod
    def from_terms(terms: Iterable[Term | None]) -> "Expr":
        return Expr(tuple(t for t in terms if t is not None))

    def is_zero(self) -> bool:
        return not self.terms

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        return Expr(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return Expr.from_terms(t.with_coeff(-t.coeff) for t in self.terms)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Expr):
            c = as_coeff(other)
            return Expr.from_terms(t.with_coeff(t.coeff * c) for t in self.terms)
        return Expr.from_terms(_multiply_terms(a, b) for a in self.terms for b in other.terms)

    def __rmul__(self, other):
        c = as_coeff(other)
        return Expr.from_terms(t.with_coeff(c * t.coeff) for t in self.terms)

    def __truediv__(self, other):
        return self * as_coeff(other).inverse()

    def __matmul__(self, other):
        return self * other

    # -- structure -----------------------------------------------------
    def dag(self) -> "Expr":
        return Expr.from_terms(t.dag() for t in self.terms)

    def free_vars(self) -> set[str]:
        out: set[str] = set()
        for t in self.terms:
            out |= t.free_vars()
        return out

    def rename_vars(self, mapping: Mapping[str, str]) -> "Expr":
        return Expr.from_terms(t.rename(mapping) for t in self.terms)

    def subst_free(self, mapping: Mapping[str, Lin]) -> "Expr":
        out = []
        for t in self.terms:
            clash = t.bound_names() & ({v for lin in mapping.values() for v in lin.vars()} | set(mapping))
            if clash:
                gen = _fresh(t.all_names() | set(mapping) | {v for lin in mapping.values() for v in lin.vars()})
                t = t.rename({n: next(gen) for n in clash})
            out.extend(t.subst(mapping))
        return Expr(tuple(out))

    def canonical(self) -> "Expr":
        """Alpha-normalize every term, collect like terms, sort."""
        groups: dict = {}
        for t in self.terms:
            t = t.alpha()
            k = t.shape_key()
            if k in groups:
                groups[k] = (groups[k][0] + t.coeff, groups[k][1])
            else:
                groups[k] = (t.coeff, t)
        out = []
        for k in sorted(groups):
            c, t = groups[k]
            if not c.is_zero():
                out.append(Term(c, t.mono, t.atoms, t.word, t.binders))
        return Expr(tuple(out))

    def key(self):
        return tuple(t.key() for t in self.canonical().terms)

    def word_shapes(self) -> set[str]:
        return {word_shape(t.word) for t in self.terms}

    def __str__(self) -> str:
        from .dsl import print_expr

        return print_expr(self)


def word_shape(word: tuple) -> str:
    """Classify a word: 'scalar', 'ket', 'bra', 'operator', or 'other'."""
    if not word:
        return "scalar"
    if len(word) == 1:
        return "ket" if isinstance(word[0], Tag) else "bra"
    if len(word) == 2 and isinstance(word[0], Tag) and isinstance(word[1], Extractor):
        return "operator"
    if isinstance(word[0], Tag) and isinstance(word[-1], Extractor):
        return "operator"
    return "other"


# ---------------------------------------------------------------------------
# constructors


def mono(*powers) -> tuple:
    """``mono('q')`` or ``mono(('q', 2), 'p')``."""
    out: tuple = ()
    for p in powers:
        out = mono_mul(out, (((p, 1) if isinstance(p, str) else tuple(p)),))
    return out


def _lin(x) -> Lin:
    if isinstance(x, Lin):
        return x
    if isinstance(x, str):
        return Lin.var(x)
    return Lin.constant(x)


def delta(u, v=None, order: int = 0) -> Delta:
    """``delta(u - v)``; ``v`` may be omitted for ``delta(u)``."""
    arg = _lin(u) if v is None else _lin(u) - _lin(v)
    return Delta(arg, order)


def delta_prime(u, v=None) -> Delta:
    return delta(u, v, order=1)


def phase(sign: int, u, v) -> Phase:
    """``exp(sign * i * u * v)``."""
    return Phase((_lin(u).to_poly() * _lin(v).to_poly()).scale(sign))


def fn(name: str, *args, conjugated=False, schwartz=None, unitary=False, hermitian=False, derivs=()) -> Fn:
    if schwartz is None:
        schwartz = len(args) == 1 and not unitary
    return Fn(name, tuple(_lin(a) for a in args), conjugated, tuple(derivs), schwartz, unitary, hermitian)


# ---------------------------------------------------------------------------
# module-level operations


def alpha_normalize(e: Expr) -> Expr:
    """Rename bound variables canonically; free variables are untouched."""
    return Expr(tuple(t.alpha() for t in e.terms))


def adjoint(e: Expr) -> Expr:
    return e.dag()


def structural_eq(a: Expr, b: Expr) -> bool:
    return a.canonical().terms == b.canonical().terms


def _det(rows: list[list[Fraction]]) -> Fraction:
    n = len(rows)
    m = [list(r) for r in rows]
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if m[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            det = -det
        det *= m[i][i]
        for r in range(i + 1, n):
            f = m[r][i] / m[i][i]
            for c in range(i, n):
                m[r][c] -= f * m[i][c]
    return det


def _as_affine(x) -> Lin:
    if isinstance(x, Lin):
        return x
    if isinstance(x, str):
        return Lin.var(x)
    if isinstance(x, Poly):
        lin = x.to_lin()
        if lin is None:
            raise ValueError(f"nonlinear replacement {x} rejected")
        return lin
    if isinstance(x, (int, Fraction, float)):
        return Lin.constant(frac(x))
    raise TypeError(f"cannot use {x!r} as an affine replacement")


def substitute(e: Expr, u, replacement=None) -> Expr:
    """Affine change of variables.

    ``substitute(e, 'q1', Lin)`` or ``substitute(e, {'q1': ..., 'q2': ...})``
    (simultaneous).  For bound variables the variables newly introduced by
    the replacements take over as binders and the integral picks up the
    absolute Jacobian determinant.
    """
    mapping = {u: replacement} if replacement is not None else dict(u)
    mapping = {k: _as_affine(v) for k, v in mapping.items()}
    out: list[Term] = []
    for t in e.terms:
        bound = t.bound_names()
        hit_bound = [v for v in mapping if v in bound]
        if not hit_bound:
            out.extend(t.subst(mapping))
            continue
        old_names = t.all_names() - set(hit_bound)
        new_vars = sorted({v for k in hit_bound for v in mapping[k].vars()} - old_names)
        kept = [v for k in hit_bound for v in mapping[k].vars() if v in hit_bound]
        new_vars = sorted(set(new_vars) | set(kept))
        if len(new_vars) != len(hit_bound):
            raise ValueError(
                f"change of bound variables {hit_bound} -> {new_vars} is not one-to-one")
        jac = abs(_det([[mapping[k].coeff(v) for v in new_vars] for k in hit_bound]))
        if jac == 0:
            raise ValueError("singular change of variables")
        bases = {t.binder(k).basis for k in hit_bound}
        if len(bases) != 1:
            raise ValueError("change of variables mixes bases")
        basis = bases.pop()
        binders = [b for b in t.binders if b.name not in hit_bound] + [IndexVar(v, basis) for v in new_vars]
        out.extend(t.subst(mapping, binders=binders, factor=as_coeff(jac)))
    return Expr(tuple(out))


# ---------------------------------------------------------------------------
# JSON


def _lin_json(lin: Lin) -> dict:
    return {"vars": {v: str(c) for v, c in lin.coeffs}, "const": str(lin.const)}


def _lin_from(d) -> Lin:
    return Lin.build({v: Fraction(c) for v, c in d["vars"].items()}, Fraction(d.get("const", "0")))


def _coeff_json(c: Coeff) -> dict:
    return {"re": str(c.re), "im": str(c.im), "pi": c.pi, "sqrt2": c.sqrt2}


def _coeff_from(d) -> Coeff:
    return Coeff(Fraction(d["re"]), Fraction(d["im"]), int(d["pi"]), int(d["sqrt2"]))


def _atom_json(a) -> dict:
    if isinstance(a, Delta):
        return {"kind": "delta", "arg": _lin_json(a.arg), "order": a.order}
    if isinstance(a, Phase):
        return {"kind": "phase", "exponent": [[list(m), str(c)] for m, c in a.exponent.terms]}
    if isinstance(a, Fn):
        return {"kind": "unitary" if a.unitary else "fn", "name": a.name,
                "args": [_lin_json(x) for x in a.args], "conjugated": a.conjugated,
                "derivs": list(a.derivs), "schwartz": a.schwartz, "hermitian": a.hermitian}
    if isinstance(a, BoundaryTerm):
        return {"kind": "boundary", "var": {"name": a.var.name, "basis": a.var.basis},
                "payload": expr_to_json(a.payload)}
    raise TypeError(a)


def _atom_from(d):
    kind = d["kind"]
    if kind == "delta":
        return Delta(_lin_from(d["arg"]), int(d["order"]))
    if kind == "phase":
        return Phase(Poly.build((tuple(m), Fraction(c)) for m, c in d["exponent"]))
    if kind in ("fn", "unitary"):
        return Fn(d["name"], tuple(_lin_from(x) for x in d["args"]), d["conjugated"],
                  tuple(d["derivs"]), d["schwartz"], kind == "unitary", d.get("hermitian", False))
    if kind == "boundary":
        return BoundaryTerm(IndexVar(d["var"]["name"], d["var"]["basis"]), expr_from_json(d["payload"]))
    raise ValueError(f"unknown scalar kind {kind!r}")


def expr_to_json(e: Expr) -> dict:
    """Stable JSON form: ``{"terms": [{coeff, scalars[], word[], binders[]}]}``."""
    terms = []
    for t in e.terms:
        scalars = [{"kind": "mono", "var": v, "power": k} for v, k in t.mono]
        scalars += [_atom_json(a) for a in t.atoms]
        word = [{"kind": "tag" if isinstance(w, Tag) else "extractor", "basis": w.basis,
                 "arg": _lin_json(w.arg)} for w in t.word]
        binders = [{"name": b.name, "basis": b.basis} for b in t.binders]
        terms.append({"coeff": _coeff_json(t.coeff), "scalars": scalars, "word": word, "binders": binders})
    return {"terms": terms}


def expr_from_json(d: dict) -> Expr:
    terms = []
    for td in d["terms"]:
        m = []
        atoms = []
        for s in td["scalars"]:
            if s["kind"] == "mono":
                m.append((s["var"], int(s["power"])))
            else:
                atoms.append(_atom_from(s))
        word = [(Tag if w["kind"] == "tag" else Extractor)(w["basis"], _lin_from(w["arg"])) for w in td["word"]]
        binders = [IndexVar(b["name"], b["basis"]) for b in td["binders"]]
        terms.append(Term.make(_coeff_from(td["coeff"]), mono_mul((), tuple(sorted(m))), atoms, word, binders))
    return Expr.from_terms(terms)
