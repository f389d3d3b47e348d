"""Staged rewrite system and fixpoint normalizer.

Rules are tried in a fixed stage order; the first stage that changes any
term is applied to every term it matches, the result is alpha-normalized
and collected, and the loop restarts from the first stage.  The stages:

    contract     <ext|tag> pairs -> pairing scalar from the basis table
    unitary      int U(a,e) U*(b,e) de -> delta(a - b)
    sift         int delta(v - u) f(v) dv -> f(u)
    support      free delta(a - b) g(b) -> delta(a - b) g(a)
    reference    open tags/extractors of other bases -> reference basis
    linearize    |a v + r> with v bound -> |w> with a fresh binder
    ibp          integration by parts in p (paperFaithful mode only)
    phase        int p^n exp(i p L) dp -> 2 pi (-i)^n delta^(n)(L)
    moment       u delta^(n)(u + r) -> -n delta^(n-1) - r delta^(n)
    dsift        int delta^(n)(c v + r) g(v) dv -> derivative of g
    schwartz     int f*'(v) g(v) dv -> -int f*(v) g'(v) dv for Schwartz f, g
    boundary     boundary brackets against Schwartz functions -> 0

Each rule rewrites a single term into a list of terms.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .basis import DEFAULT, BasisTable
from .coeff import I, ONE, TWO_PI, as_coeff
from .errors import DivergenceError, ShapeError, UnsupportedFeature
from .expr import (
    BRACKET_VAR, BoundaryTerm, Delta, Expr, Extractor, Fn, IndexVar, Phase, Tag, Term,
    _fresh, expr_to_json, mono_mul, mono_of, mono_power, mono_without, poly_of_mono,
    structural_eq, substitute, word_shape,
)
from .linear import Lin, Poly

__all__ = ["MODES", "STAGES", "NormalizeReport", "normalize", "apply_rule", "trace",
           "contract", "sift", "phase_integrate", "delta_prime_calculus", "boundary_annihilate",
           "expr_hash"]

MODES = ("distributional", "paperFaithful")
DEFAULT_BUDGET = 10**5


def expr_hash(e: Expr) -> str:
    blob = json.dumps(expr_to_json(e), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class NormalizeReport:
    mode: str = "distributional"
    steps: list = field(default_factory=list)  # (rule, before-hash, after-hash, terms rewritten)
    fixpoint: bool = False
    boundary_terms_remaining: int = 0
    boundary_terms_annihilated: int = 0
    flags: list = field(default_factory=list)

    def rules(self) -> list[str]:
        return [s[0] for s in self.steps]

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "steps": [{"rule": r, "before": b, "after": a, "terms": n} for r, b, a, n in self.steps],
            "fixpoint": self.fixpoint,
            "boundaryTermsRemaining": self.boundary_terms_remaining,
            "boundaryTermsAnnihilated": self.boundary_terms_annihilated,
            "flags": list(self.flags),
        }

    def extend(self, other: "NormalizeReport") -> None:
        self.steps.extend(other.steps)
        self.fixpoint = other.fixpoint
        self.boundary_terms_remaining = other.boundary_terms_remaining
        self.boundary_terms_annihilated += other.boundary_terms_annihilated
        for f in other.flags:
            if f not in self.flags:
                self.flags.append(f)


@dataclass
class _Ctx:
    table: BasisTable
    mode: str
    annihilated: int = 0


def _one(t):
    return [t] if t is not None else []


def _drop(atoms, index):
    return atoms[:index] + atoms[index + 1:]


def _phase(t: Term):
    for k, a in enumerate(t.atoms):
        if isinstance(a, Phase):
            return k, a
    return None, None


def _word_vars(t: Term) -> set[str]:
    out = set()
    for w in t.word:
        out |= w.vars()
    return out


def _without_binder(t: Term, name: str):
    return tuple(b for b in t.binders if b.name != name)


# ---------------------------------------------------------------------------
# rules


def rule_contract(t: Term, ctx: _Ctx):
    w = t.word
    for i in range(len(w) - 1):
        if isinstance(w[i], Extractor) and isinstance(w[i + 1], Tag):
            res = ctx.table.pairing(w[i].basis, w[i + 1].basis)
            c, atoms = res.atoms(w[i].arg, w[i + 1].arg)
            return _one(Term.make(t.coeff * c, t.mono, t.atoms + tuple(atoms), w[:i] + w[i + 2:], t.binders))
    return None


def rule_unitary(t: Term, ctx: _Ctx):
    for b in reversed(t.binders):
        v = b.name
        if mono_power(t.mono, v) or v in _word_vars(t):
            continue
        hits = [k for k, a in enumerate(t.atoms) if v in a.vars()]
        if len(hits) != 2:
            continue
        f, g = (t.atoms[k] for k in hits)
        if not (isinstance(f, Fn) and isinstance(g, Fn) and f.unitary and g.unitary):
            continue
        if f.name != g.name or f.conjugated == g.conjugated or len(f.args) != 2 or len(g.args) != 2:
            continue
        k = next((j for j in (0, 1) if f.args[j] == Lin.var(v)), None)
        if k is None or g.args[k] != Lin.var(v) or v in f.args[1 - k].vars() or v in g.args[1 - k].vars():
            continue
        if ctx.table.weight(b.basis) != ONE:
            continue
        atoms = tuple(a for j, a in enumerate(t.atoms) if j not in hits)
        new = Term.make(t.coeff, t.mono, atoms + (Delta(f.args[1 - k] - g.args[1 - k]),), t.word,
                        _without_binder(t, v))
        return _one(new)
    return None


def rule_sift(t: Term, ctx: _Ctx):
    for b in reversed(t.binders):
        for k, a in enumerate(t.atoms):
            if isinstance(a, Delta) and a.order == 0 and b.name in a.arg.vars():
                c = a.arg.coeff(b.name)
                value = a.arg.solve_for(b.name)
                base = Term.make(t.coeff, t.mono, _drop(t.atoms, k), t.word, _without_binder(t, b.name))
                factor = ctx.table.weight(b.basis) * as_coeff(Fraction(1) / abs(c))
                return base.subst({b.name: value}, factor=factor)
    return None


def _expand_mono(mono: tuple, mapping) -> list[tuple[Fraction, tuple]]:
    moved = tuple((v, k) for v, k in mono if v in mapping)
    if not moved:
        return [(Fraction(1), mono)]
    keep = tuple((v, k) for v, k in mono if v not in mapping)
    return [(c, mono_mul(keep, mono_of(pm))) for pm, c in poly_of_mono(moved, mapping).terms]


def rule_support(t: Term, ctx: _Ctx):
    bound = t.bound_names()
    for k, a in enumerate(t.atoms):
        if not (isinstance(a, Delta) and a.order == 0 and a.arg.coeffs) or a.vars() & bound:
            continue
        w = a.arg.vars()[-1]
        others = [j for j, x in enumerate(t.atoms) if j != k and isinstance(x, (Fn, Phase)) and w in x.vars()]
        if not others and not mono_power(t.mono, w):
            continue
        m = {w: a.arg.solve_for(w)}
        atoms = tuple(x.subst(m) if j in others else x for j, x in enumerate(t.atoms))
        return [y for c, mono in _expand_mono(t.mono, m)
                for y in _one(Term.make(t.coeff * as_coeff(c), mono, atoms, t.word, t.binders))]
    return None


def rule_reference(t: Term, ctx: _Ctx):
    ref = ctx.table.reference
    for i, w in enumerate(t.word):
        if w.basis == ref:
            continue
        eta = next(_fresh(t.all_names()))
        if isinstance(w, Tag):
            c, atoms = ctx.table.pairing(ref, w.basis).atoms(Lin.var(eta), w.arg)
            new_w = Tag(ref, Lin.var(eta))
        else:
            c, atoms = ctx.table.pairing(w.basis, ref).atoms(w.arg, Lin.var(eta))
            new_w = Extractor(ref, Lin.var(eta))
        word = t.word[:i] + (new_w,) + t.word[i + 1:]
        c = c * ctx.table.weight(ref)
        return _one(Term.make(t.coeff * c, t.mono, t.atoms + tuple(atoms), word,
                              t.binders + (IndexVar(eta, ref),)))
    return None


def rule_linearize(t: Term, ctx: _Ctx):
    bound = t.bound_names()
    for w in t.word:
        if w.arg.as_var() is not None:
            continue
        bvars = [v for v in w.arg.vars() if v in bound]
        if not bvars:
            continue
        v = bvars[-1]
        fresh = next(_fresh(t.all_names()))
        c = w.arg.coeff(v)
        value = (Lin.var(fresh) - w.arg.without(v)).scale(Fraction(1) / c)
        return list(substitute(Expr((t,)), {v: value}).terms)
    return None


def rule_ibp(t: Term, ctx: _Ctx):
    if ctx.mode != "paperFaithful":
        return None
    k, ph = _phase(t)
    if ph is None:
        return None
    for b in reversed(t.binders):
        p = b.name
        if mono_power(t.mono, p) != 1 or t.where(p) - {"mono", "phase"}:
            continue
        parts = ph.exponent.split(p)
        if len(parts) != 2:
            continue
        L = parts[1].to_lin()
        if L is None or L.is_constant():
            continue
        u = L.vars()[0]
        if not mono_power(t.mono, u):
            continue
        a = L.coeff(u)
        rest = L.without(u)
        w = ctx.table.weight(b.basis)
        mono_u = mono_mul(t.mono, ((u, -1),))
        mono_up = mono_without(mono_u, p)
        others = _drop(t.atoms, k)
        keep_phase = others + ((Phase(parts[0]),) if not parts[0].is_zero() else ())
        payload = Expr((Term.make(ONE, ((p, 1),), [Phase(Poly.monomial(p) * L.to_poly())]),))
        bracket = BoundaryTerm.make(IndexVar(p, b.basis), payload)
        inv_a = as_coeff(Fraction(1) / a)
        out = [
            # -i w/a [p exp(i p L)]
            Term.make(t.coeff * (-I) * w * inv_a, mono_up, keep_phase + (bracket,), t.word,
                      _without_binder(t, p)),
            # +i/a int exp(i p L) dp
            Term.make(t.coeff * I * inv_a, mono_up, t.atoms, t.word, t.binders),
        ]
        for var, c in rest.coeffs:
            out.append(Term.make(t.coeff * as_coeff(-c / a), mono_mul(mono_u, ((var, 1),)), t.atoms, t.word,
                                 t.binders))
        if rest.const:
            out.append(Term.make(t.coeff * as_coeff(-rest.const / a), mono_u, t.atoms, t.word, t.binders))
        return [x for x in out if x is not None]
    return None


MAX_PHASE_MOMENT = 2


def rule_phase(t: Term, ctx: _Ctx):
    k, ph = _phase(t)
    if ph is None:
        return None
    for b in reversed(t.binders):
        v = b.name
        where = t.where(v)
        if "phase" not in where or where - {"mono", "phase"}:
            continue
        parts = ph.exponent.split(v)
        if len(parts) != 2:
            continue
        L = parts[1].to_lin()
        if L is None:
            continue
        n = mono_power(t.mono, v)
        if n > MAX_PHASE_MOMENT:
            raise UnsupportedFeature(
                f"phase integral with {v}^{n}; moments above {MAX_PHASE_MOMENT} are not supported")
        c = t.coeff * ctx.table.weight(b.basis) * TWO_PI * ((-I) ** n)
        atoms = _drop(t.atoms, k) + (Phase(parts[0]), Delta(L, n))
        return _one(Term.make(c, mono_without(t.mono, v), atoms, t.word, _without_binder(t, v)))
    return None


def rule_moment(t: Term, ctx: _Ctx):
    for k, a in enumerate(t.atoms):
        if not (isinstance(a, Delta) and a.order >= 1 and a.arg.coeffs):
            continue
        u = a.arg.coeffs[0][0]
        if not mono_power(t.mono, u):
            continue
        rest = a.arg.without(u)
        mono_r = mono_mul(t.mono, ((u, -1),))
        others = _drop(t.atoms, k)
        out = [Term.make(t.coeff * (-a.order), mono_r, others + (Delta(a.arg, a.order - 1),), t.word, t.binders)]
        for var, c in rest.coeffs:
            out.append(Term.make(t.coeff * as_coeff(-c), mono_mul(mono_r, ((var, 1),)), t.atoms, t.word,
                                 t.binders))
        if rest.const:
            out.append(Term.make(t.coeff * as_coeff(-rest.const), mono_r, t.atoms, t.word, t.binders))
        return [x for x in out if x is not None]
    return None


def derivative(t: Term, v: str) -> list[Term]:
    """Product-rule derivative of the scalar part of ``t`` with respect to ``v``."""
    out = []
    p = mono_power(t.mono, v)
    if p:
        out.append(Term.make(t.coeff * p, mono_mul(t.mono, ((v, -1),)), t.atoms, t.word, t.binders))
    for k, a in enumerate(t.atoms):
        if v not in a.vars():
            continue
        if isinstance(a, Phase):
            for m, c in a.exponent.diff(v).terms:
                out.append(Term.make(t.coeff * I * as_coeff(c), mono_mul(t.mono, mono_of(m)), t.atoms,
                                     t.word, t.binders))
        elif isinstance(a, Delta):
            c = a.arg.coeff(v)
            new = t.atoms[:k] + (Delta(a.arg, a.order + 1),) + t.atoms[k + 1:]
            out.append(Term.make(t.coeff * as_coeff(c), t.mono, new, t.word, t.binders))
        elif isinstance(a, Fn) and not a.unitary:
            for j, arg in enumerate(a.args):
                c = arg.coeff(v)
                if c:
                    derivs = a.derivs[:j] + (a.derivs[j] + 1,) + a.derivs[j + 1:]
                    new = t.atoms[:k] + (a._with(derivs=derivs),) + t.atoms[k + 1:]
                    out.append(Term.make(t.coeff * as_coeff(c), t.mono, new, t.word, t.binders))
        else:
            kind = "unitary kernel" if isinstance(a, Fn) else "boundary bracket"
            raise UnsupportedFeature(f"cannot differentiate a {kind} in {v}")
    return [x for x in out if x is not None]


def rule_dsift(t: Term, ctx: _Ctx):
    word_vars = _word_vars(t)
    for b in reversed(t.binders):
        v = b.name
        if v in word_vars:
            continue
        for k, a in enumerate(t.atoms):
            if not (isinstance(a, Delta) and a.order >= 1 and v in a.arg.vars()):
                continue
            c = a.arg.coeff(v)
            n = a.order
            value = a.arg.solve_for(v)
            base = Term.make(t.coeff, t.mono, _drop(t.atoms, k), t.word, _without_binder(t, v))
            terms = [base]
            for _ in range(n):
                terms = [d for x in terms for d in derivative(x, v)]
            factor = as_coeff(Fraction((-1) ** n) / (c ** n * abs(c))) * ctx.table.weight(b.basis)
            return [y for x in terms for y in x.subst({v: value}, factor=factor)]
    return None


def rule_schwartz(t: Term, ctx: _Ctx):
    """Closed Schwartz integrals: move derivatives off the conjugated factor.

    ``int f*'(v) g(v) dv = -int f*(v) g'(v) dv`` when every factor carrying
    ``v`` is a Schwartz coefficient function or a monomial, so the boundary
    bracket vanishes.  Gives adjoint-stable normal forms for sandwiches.
    """
    for b in reversed(t.binders):
        v = b.name
        if not t.where(v) <= {"mono", "fn"}:
            continue
        fns = [(k, a) for k, a in enumerate(t.atoms) if v in a.vars()]
        if not all(a.schwartz for _, a in fns):
            continue
        conj = [(k, a) for k, a in fns if a.conjugated]
        if len(conj) != 1:
            continue
        k, f = conj[0]
        hits = [j for j, arg in enumerate(f.args) if v in arg.vars()]
        if len(hits) != 1 or f.args[hits[0]] != Lin.var(v) or not f.derivs[hits[0]]:
            continue
        j = hits[0]
        lowered = f._with(derivs=f.derivs[:j] + (f.derivs[j] - 1,) + f.derivs[j + 1:])
        rest = Term.make(-t.coeff, t.mono, _drop(t.atoms, k), t.word, t.binders)
        if rest is None:
            return []
        out = []
        for d in derivative(rest, v):
            x = Term.make(d.coeff, d.mono, d.atoms + (lowered,), d.word, d.binders)
            if x is not None:
                out.append(x)
        return out
    return None


def _cross_vars(bt: BoundaryTerm) -> set[str]:
    out = set()
    for pt in bt.payload.terms:
        for a in pt.atoms:
            if isinstance(a, Phase):
                for m, _ in a.exponent.terms:
                    if len(m) == 2 and BRACKET_VAR in m:
                        out |= set(m) - {BRACKET_VAR}
    return out


def _schwartz_vars(t: Term) -> set[str]:
    """Variables in which the integrand is Schwartz class.

    Arguments of Schwartz coefficient functions, closed under Fourier
    transforms: if a bound ``w`` carries only Schwartz functions, monomials
    and phases, integrating it out leaves a Schwartz function of every
    variable the phase couples to ``w``.
    """
    out = {v for a in t.atoms if isinstance(a, Fn) and a.schwartz for arg in a.args for v in arg.vars()}
    _, ph = _phase(t)
    if ph is None:
        return out
    bound = t.bound_names()
    changed = True
    while changed:
        changed = False
        for w in sorted(out & bound):
            if t.where(w) - {"mono", "phase", "fn"}:
                continue
            if any(isinstance(a, Fn) and not a.schwartz and w in a.vars() for a in t.atoms):
                continue
            for m, _ in ph.exponent.terms:
                if w in m and len(m) == 2:
                    other = m[0] if m[1] == w else m[1]
                    if other not in out and other != w:
                        out.add(other)
                        changed = True
    return out


def rule_boundary(t: Term, ctx: _Ctx):
    bound = t.bound_names()
    word_vars = _word_vars(t)
    schwartz = _schwartz_vars(t)
    for a in t.atoms:
        if isinstance(a, BoundaryTerm):
            for v in _cross_vars(a):
                if v in bound and v not in word_vars and v in schwartz:
                    ctx.annihilated += 1
                    return []
    return None


STAGES = (
    ("contract", rule_contract),
    ("unitary", rule_unitary),
    ("sift", rule_sift),
    ("support", rule_support),
    ("reference", rule_reference),
    ("linearize", rule_linearize),
    ("ibp", rule_ibp),
    ("phase", rule_phase),
    ("moment", rule_moment),
    ("dsift", rule_dsift),
    ("schwartz", rule_schwartz),
    ("boundary", rule_boundary),
)
_RULES = dict(STAGES)


# ---------------------------------------------------------------------------
# driver


def _flags(e: Expr) -> list[str]:
    flags = []
    for t in e.terms:
        for a in t.atoms:
            if isinstance(a, Delta) and a.arg.is_constant():
                flags.append("divergent-symbolic")
            if isinstance(a, BoundaryTerm):
                flags.append("boundary-term")
        for b in t.binders:
            if not t.where(b.name) - {"mono"}:
                flags.append("divergent-symbolic")
    return sorted(set(flags))


def _apply(cur: Expr, rule, ctx) -> tuple[Expr, int]:
    out = []
    hits = 0
    for t in cur.terms:
        r = rule(t, ctx)
        if r is None:
            out.append(t)
        else:
            out.extend(r)
            hits += 1
    return Expr(tuple(out)), hits


def normalize(e: Expr, mode: str = "distributional", table: BasisTable | None = None,
              budget: int = DEFAULT_BUDGET) -> tuple[Expr, NormalizeReport]:
    """Rewrite ``e`` to its normal form; returns ``(normal_form, report)``."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    ctx = _Ctx(table or DEFAULT, mode)
    report = NormalizeReport(mode=mode)
    cur = e.canonical()
    rewrites = 0
    while True:
        for name, rule in STAGES:
            new, hits = _apply(cur, rule, ctx)
            if hits:
                new = new.canonical()
                rewrites += hits
                report.steps.append((name, expr_hash(cur), expr_hash(new), hits))
                cur = new
                if rewrites > budget:
                    report.boundary_terms_annihilated = ctx.annihilated
                    raise DivergenceError(f"normalization exceeded the step budget of {budget}", report)
                break
        else:
            break
    report.fixpoint = True
    report.boundary_terms_annihilated = ctx.annihilated
    report.boundary_terms_remaining = sum(
        1 for t in cur.terms for a in t.atoms if isinstance(a, BoundaryTerm))
    report.flags = _flags(cur)
    return cur, report


def apply_rule(name: str, e: Expr, mode: str = "distributional", table: BasisTable | None = None,
               max_rounds: int = 1000) -> Expr:
    """Apply a single stage exhaustively (with alpha-normalization between rounds)."""
    rule = _RULES[name]
    ctx = _Ctx(table or DEFAULT, mode)
    cur = e.canonical()
    for _ in range(max_rounds):
        new, hits = _apply(cur, rule, ctx)
        if not hits:
            return cur
        cur = new.canonical()
    raise DivergenceError(f"rule {name!r} did not reach a fixpoint")


def contract(e: Expr, table: BasisTable | None = None) -> Expr:
    return apply_rule("contract", e, table=table)


def sift(e: Expr, table: BasisTable | None = None) -> Expr:
    return apply_rule("sift", e, table=table)


def phase_integrate(e: Expr, table: BasisTable | None = None) -> Expr:
    return apply_rule("phase", e, table=table)


def delta_prime_calculus(e: Expr, table: BasisTable | None = None) -> Expr:
    """Moment shifts and derivative sifting, plus the plain sifts they expose."""
    cur = e.canonical()
    while True:
        new = cur
        for name in ("moment", "dsift", "sift"):
            new = apply_rule(name, new, table=table)
        if structural_eq(new, cur):
            return new
        cur = new


def boundary_annihilate(e: Expr, table: BasisTable | None = None) -> Expr:
    return apply_rule("boundary", e, table=table)


def trace(A: Expr, mode: str = "distributional", table: BasisTable | None = None) -> tuple[Expr, NormalizeReport]:
    """Operator trace: move the leftmost tag to the end of the word, then normalize."""
    if A.is_zero():
        return A, NormalizeReport(mode=mode, fixpoint=True)
    for t in A.terms:
        if word_shape(t.word) != "operator":
            raise ShapeError("trace needs an operator (tag ... extractor) in every term")
    flipped = Expr.from_terms(
        Term.make(t.coeff, t.mono, t.atoms, t.word[1:] + t.word[:1], t.binders) for t in A.terms)
    return normalize(flipped, mode=mode, table=table)
