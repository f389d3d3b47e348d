"""ASCII Dirac notation: parser and canonical printer.

    int |q> q <q| dq                      position operator
    int |p> p <p| dp/2pi                  momentum operator (dp alone means the same)
    <q|p>                                 exp(i*q*p) after normalization
    |psi>  ket(psi)  <psi|  bra(psi)      Schwartz state int |q> psi(q) dq
    dag(X)  qhat phat ahat adag I I_p M(n) Deltahat Ahat
    psi*(q)  psi'(q)  A{0,1}(q, q')  U*(q, etaU)
    exp(i*q*p)  delta(q - q')  delta'(x)  bdry(p, p*exp(i*(q*p - q'*p)))

Juxtaposition multiplies.  Variables are recognized by the prefixes the
basis table assigns to each basis (``q``, ``q'``, ``q2``, ``x`` ... for the
position basis, ``p``, ``k`` ... for momentum); any other identifier is a
function name, a state label or an operator name.  The full grammar is in
``docs/grammar.md``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import ops
from .basis import DEFAULT, BasisTable
from .coeff import Coeff, I, ONE, SQRT2, as_coeff, format_coeff
from .errors import ParseError, ShapeParseError
from .expr import (
    BRACKET_VAR, BoundaryTerm, Delta, Expr, Extractor, Fn, IndexVar, Phase, Tag, Term, _fresh,
)
from .linear import Lin, Poly, _power_run, format_lin, format_poly

__all__ = ["parse", "print_expr", "DEFAULT_HERMITIAN"]

DEFAULT_HERMITIAN = frozenset({"rho", "sigma"})

KEYWORDS = {"int", "i", "pi", "sqrt2", "exp", "delta", "bdry", "dag", "ket", "bra", "M", "I", "I_p"}
OPERATORS = {"qhat", "phat", "ahat", "adag", "Deltahat", "I", "I_p", "M"}

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM = re.compile(r"\d+(?:\.\d+)?")
_SINGLE = set("+-*/^(),|<>:")


@dataclass
class Tok:
    kind: str  # NUM, ID, EOF or the punctuation character itself
    pos: int
    value: object = None
    primes: int = 0
    conj: bool = False
    derivs: tuple | None = None
    glued: bool = False  # no whitespace before this token

    @property
    def name(self) -> str:
        return f"{self.value}{chr(39) * self.primes}" if self.kind == "ID" else ""


class _Parser:
    def __init__(self, src: str, table: BasisTable, hermitian):
        self.src = src
        self.table = table
        self.hermitian = set(hermitian)
        self.toks = self._lex()
        self.i = 0
        self.stop_bar = False

    # -- lexing ----------------------------------------------------------
    def error(self, msg, pos=None, shape=False):
        pos = self.tok.pos if pos is None else pos
        line = self.src.count("\n", 0, pos) + 1
        col = pos - (self.src.rfind("\n", 0, pos) + 1) + 1
        cls = ShapeParseError if shape else ParseError
        return cls(msg, line, col, self.src)

    def is_var(self, name: str) -> bool:
        return name not in KEYWORDS and self.table.basis_for_prefix(name) is not None \
            and not name.startswith("_")

    def _lex(self):
        s = self.src
        out = []
        k = 0
        while True:
            start = k
            while k < len(s) and s[k].isspace():
                k += 1
            glued = k == start
            if k >= len(s):
                out.append(Tok("EOF", k, glued=glued))
                return out
            c = s[k]
            m = _NUM.match(s, k)
            if m:
                out.append(Tok("NUM", k, Fraction(m.group()), glued=glued))
                k = m.end()
                continue
            m = _IDENT.match(s, k)
            if m:
                tok = Tok("ID", k, m.group(), glued=glued)
                k = m.end()
                while k < len(s) and s[k] == "'":
                    tok.primes += 1
                    k += 1
                stem = tok.value
                fnlike = stem not in KEYWORDS and stem not in OPERATORS and not stem.endswith("hat") \
                    and not self.is_var(stem + "'" * tok.primes)
                if fnlike and k + 1 < len(s) and s[k] == "*" and s[k + 1] in "('{":
                    tok.conj = True
                    k += 1
                    while k < len(s) and s[k] == "'":
                        tok.primes += 1
                        k += 1
                if (fnlike or stem == "delta") and k < len(s) and s[k] == "{":
                    end = s.find("}", k)
                    if end < 0:
                        raise self._err_at("unterminated derivative orders", k)
                    try:
                        tok.derivs = tuple(int(x) for x in s[k + 1:end].split(","))
                    except ValueError:
                        raise self._err_at("derivative orders must be integers", k) from None
                    k = end + 1
                out.append(tok)
                continue
            if c in _SINGLE:
                out.append(Tok(c, k, glued=glued))
                k += 1
                continue
            raise self._err_at(f"unexpected character {c!r}", k)

    def _err_at(self, msg, pos):
        line = self.src.count("\n", 0, pos) + 1
        col = pos - (self.src.rfind("\n", 0, pos) + 1) + 1
        return ParseError(msg, line, col, self.src)

    # -- token helpers ---------------------------------------------------
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, n=1) -> Tok:
        return self.toks[min(self.i + n, len(self.toks) - 1)]

    def advance(self) -> Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str) -> Tok:
        if self.tok.kind != kind:
            raise self.error(f"expected {kind!r}, found {self._desc(self.tok)}")
        return self.advance()

    @staticmethod
    def _desc(t: Tok) -> str:
        if t.kind == "EOF":
            return "end of input"
        if t.kind == "ID":
            return repr(t.name)
        if t.kind == "NUM":
            return repr(str(t.value))
        return repr(t.kind)

    def measure_var(self, k=0) -> str | None:
        """Variable named by a measure token at offset ``k`` (``dq``, ``dq'``, ``d q``)."""
        t = self.peek(k)
        if t.kind != "ID" or not t.value.startswith("d") or t.conj or t.derivs:
            return None
        if t.value == "d":
            nxt = self.peek(k + 1)
            return nxt.name if nxt.kind == "ID" and self.is_var(nxt.name) else None
        rest = t.value[1:] + "'" * t.primes
        return rest if self.is_var(rest) and t.value not in KEYWORDS else None

    def starts_primary(self) -> bool:
        t = self.tok
        if t.kind in ("NUM", "(", "<"):
            return True
        if t.kind == "|":
            return not self.stop_bar
        if t.kind == "ID":
            return self.measure_var() is None
        return False

    # -- grammar ---------------------------------------------------------
    def parse(self) -> Expr:
        e = self.sum()
        if self.tok.kind != "EOF":
            raise self.error(f"unexpected {self._desc(self.tok)}")
        return e

    def sum(self) -> Expr:
        e = self.product()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.product()
            e = e + rhs if op == "+" else e - rhs
        return e

    def product(self) -> Expr:
        e = self.unary()
        while True:
            if self.tok.kind == "*":
                self.advance()
                e = e * self.unary()
            elif self.tok.kind == "/":
                pos = self.advance().pos
                e = e * self.pure_coeff(self.power(), pos).inverse()
            elif self.starts_primary():
                e = e * self.power()
            else:
                return e

    def unary(self) -> Expr:
        if self.tok.kind == "-":
            self.advance()
            return -self.unary()
        if self.tok.kind == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base_pos = self.tok.pos
        base = self.primary()
        if self.tok.kind != "^":
            return base
        self.advance()
        sign = 1
        if self.tok.kind == "-":
            self.advance()
            sign = -1
        n_tok = self.expect("NUM")
        if n_tok.value.denominator != 1:
            raise self.error("exponent must be an integer", n_tok.pos)
        n = int(n_tok.value) * sign
        if n < 0:
            return Expr.scalar(self.pure_coeff(base, base_pos) ** n)
        out = Expr.scalar(1)
        for _ in range(n):
            out = out * base
        return out

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "NUM":
            self.advance()
            return Expr.scalar(t.value)
        if t.kind == "(":
            self.advance()
            saved, self.stop_bar = self.stop_bar, False
            e = self.sum()
            self.stop_bar = saved
            self.expect(")")
            return e
        if t.kind == "|":
            return self.ket()
        if t.kind == "<":
            return self.bra()
        if t.kind == "ID":
            return self.identifier()
        raise self.error(f"unexpected {self._desc(t)}")

    def identifier(self) -> Expr:
        t = self.tok
        name = t.value
        if self.measure_var() is not None and not self.is_var(t.name):
            raise self.error(f"measure {t.name!r} outside an integral")
        if name == "int" and not t.primes:
            return self.integral()
        if name == "i" and not t.primes:
            self.advance()
            return Expr.scalar(I)
        if name == "pi" and not t.primes:
            self.advance()
            return Expr.scalar(Coeff(1, 0, 1))
        if name == "sqrt2" and not t.primes:
            self.advance()
            return Expr.scalar(SQRT2)
        if name == "exp":
            return self.exp()
        if name == "delta":
            return self.delta()
        if name == "bdry":
            return self.bdry()
        if name == "dag":
            self.advance()
            self.expect("(")
            e = self.sum()
            self.expect(")")
            return e.dag()
        if name in ("ket", "bra"):
            self.advance()
            self.expect("(")
            label = self.expect("ID")
            self.expect(")")
            return ops.ket(label.name) if name == "ket" else ops.bra(label.name)
        if name == "M" and self.peek().kind == "(":
            self.advance()
            self.advance()
            n = self.expect("NUM")
            self.expect(")")
            if n.value.denominator != 1:
                raise self.error("moment order must be an integer", n.pos)
            return ops.moment(int(n.value))
        op = self.operator_named(t)
        if op is not None:
            self.advance()
            return op
        if self.is_var(t.name):
            self.advance()
            return Expr((Term.make(ONE, ((t.name, 1),)),))
        if self.peek().kind == "(" and self.peek().glued:
            return self.function()
        raise self.error(f"unknown identifier {t.name!r}")

    def operator_named(self, t: Tok) -> Expr | None:
        if t.kind != "ID" or t.primes or t.conj:
            return None
        name = t.value
        simple = {"qhat": ops.qhat, "phat": ops.phat, "ahat": ops.ahat, "adag": ops.adag,
                  "Deltahat": ops.delta_hat, "I": ops.identity}
        if name in simple:
            return simple[name]()
        if name == "I_p":
            return ops.identity("p")
        if name.endswith("hat") and len(name) > 3:
            stem = name[:-3]
            return ops.kernel_op(stem, hermitian=stem in self.hermitian)
        return None

    def is_operator_token(self, t: Tok) -> bool:
        return t.kind == "ID" and not t.primes and (
            t.value in OPERATORS or (t.value.endswith("hat") and len(t.value) > 3))

    # -- compound forms --------------------------------------------------
    def args(self) -> list[tuple[Expr, int]]:
        self.expect("(")
        out = []
        saved, self.stop_bar = self.stop_bar, False
        while True:
            pos = self.tok.pos
            out.append((self.sum(), pos))
            if self.tok.kind == ",":
                self.advance()
                continue
            break
        self.stop_bar = saved
        self.expect(")")
        return out

    def function(self) -> Expr:
        t = self.advance()
        args = [self.to_lin(e, pos) for e, pos in self.args()]
        derivs = t.derivs
        if derivs is None:
            derivs = (t.primes,) + (0,) * (len(args) - 1) if t.primes else ()
        elif t.primes:
            raise self.error("use either primes or {..} derivative orders", t.pos)
        if derivs and len(derivs) != len(args):
            raise self.error(f"{t.value} has {len(args)} arguments but {len(derivs)} derivative orders", t.pos)
        unitary = t.value in self.table.unitaries
        if unitary and (any(derivs) or len(args) != 2):
            raise self.error(f"unitary kernel {t.value} takes two arguments and no derivatives", t.pos)
        f = Fn(t.value, tuple(args), t.conj, tuple(derivs), schwartz=len(args) == 1 and not unitary,
               unitary=unitary, hermitian=t.value in self.hermitian and len(args) == 2)
        return Expr((Term.make(ONE, (), (f,)),))

    def exp(self) -> Expr:
        self.advance()
        (e, pos), = self.single_arg()
        poly = Poly()
        for t in e.terms:
            c = t.coeff
            if t.atoms or t.word or t.binders or c.re != 0 or c.pi or c.sqrt2:
                raise self.error("exp() takes i times a real polynomial of index variables", pos)
            poly = poly + Poly.build([(tuple(v for v, k in t.mono for _ in range(k)), c.im)])
        return Expr((Term.make(ONE, (), (Phase(poly),)),))

    def single_arg(self):
        a = self.args()
        if len(a) != 1:
            raise self.error("expected a single argument", a[0][1] if a else None)
        return a

    def delta(self) -> Expr:
        t = self.advance()
        order = t.primes
        if t.derivs:
            if t.primes or len(t.derivs) != 1:
                raise self.error("delta takes one derivative order", t.pos)
            order = t.derivs[0]
        (e, pos), = self.single_arg()
        return Expr((Term.make(ONE, (), (Delta(self.to_lin(e, pos), order),)),))

    def bdry(self) -> Expr:
        self.advance()
        self.expect("(")
        v = self.expect("ID")
        if not self.is_var(v.name):
            raise self.error(f"{v.name!r} is not an index variable", v.pos)
        self.expect(",")
        saved, self.stop_bar = self.stop_bar, False
        payload = self.sum()
        self.stop_bar = saved
        self.expect(")")
        if any(t.word or t.binders for t in payload.terms):
            raise self.error("boundary bracket payload must be a scalar expression", v.pos)
        bt = BoundaryTerm.make(IndexVar(v.name, self.table.basis_for_prefix(v.name)), payload)
        return Expr((Term.make(ONE, (), (bt,)),))

    def integral(self) -> Expr:
        # consecutive ``int`` keywords share the measure list that follows the body
        while self.tok.kind == "ID" and self.tok.value == "int" and not self.tok.primes:
            self.advance()
        body = self.sum()
        measures = []
        while True:
            v = self.measure_var()
            if v is None:
                break
            mpos = self.tok.pos
            if self.tok.value == "d":
                self.advance()
            self.advance()
            basis = self.table.basis_for_prefix(v)
            if self.tok.kind == "/" and self.peek().kind == "NUM" and self.peek(2).kind == "ID" \
                    and self.peek(2).value == "pi" and self.peek().value == 2:
                if self.table.weight(basis) != Coeff(1, 0, 0) / Coeff(2, 0, 1):
                    raise self.error(f"d{v}/2pi does not match the measure of basis {basis!r}", mpos)
                self.i += 3
            measures.append(IndexVar(v, basis))
        if not measures:
            raise self.error("integral needs at least one measure such as dq")
        if len({m.name for m in measures}) != len(measures):
            raise self.error("variable integrated twice", self.tok.pos)
        out = []
        for t in body.terms:
            clash = t.bound_names() & {m.name for m in measures}
            if clash:
                gen = _fresh(t.all_names() | {m.name for m in measures})
                t = t.rename({n: next(gen) for n in clash})
            out.append(Term.make(t.coeff, t.mono, t.atoms, t.word, t.binders + tuple(measures)))
        return Expr.from_terms(out)

    def ket(self, opened=False) -> Expr:
        if not opened:
            self.expect("|")
        basis, label = self.nc_head(">")
        if label is not None:
            self.expect(">")
            return ops.ket(label)
        pos = self.tok.pos
        saved, self.stop_bar = self.stop_bar, False
        arg = self.sum()
        self.stop_bar = saved
        self.expect(">")
        lin = self.nc_arg(arg, pos)
        return Expr((Term.make(ONE, (), (), (Tag(self.nc_basis(basis, lin, pos), lin),)),))

    def bra(self) -> Expr:
        self.expect("<")
        basis, label = self.nc_head("|")
        if label is not None:
            self.expect("|")
            e = ops.bra(label)
        else:
            pos = self.tok.pos
            saved, self.stop_bar = self.stop_bar, True
            arg = self.sum()
            self.stop_bar = saved
            self.expect("|")
            lin = self.nc_arg(arg, pos)
            e = Expr((Term.make(ONE, (), (), (Extractor(self.nc_basis(basis, lin, pos), lin),)),))
        # <a|b> : try to read the ket half without a second bar
        mark = self.i
        saved_bar = self.stop_bar
        try:
            right = self.ket(opened=True)
        except ParseError:
            self.i = mark
            return e
        finally:
            self.stop_bar = saved_bar
        return e * right

    def nc_head(self, closer: str):
        """Optional ``basis:`` prefix; returns (basis, state label or None)."""
        basis = None
        if self.tok.kind == "ID" and self.peek().kind == ":":
            label = self.advance().name
            self.advance()
            if label in self.table.unitaries:
                basis = self.table.unitaries[label]
            elif self.table.has_basis(label):
                basis = label
            else:
                raise self.error(f"unknown basis {label!r}")
        t = self.tok
        if self.is_operator_token(t):
            raise self.error("operators are never placed inside kets or bras", shape=True)
        if t.kind == "ID" and not self.is_var(t.name) and t.value not in KEYWORDS \
                and self.peek().kind == closer and not t.conj and not t.primes:
            if basis is not None:
                raise self.error("a state label takes no basis prefix")
            self.advance()
            return None, t.value
        return basis, None

    def nc_arg(self, e: Expr, pos: int) -> Lin:
        if any(t.word or t.binders for t in e.terms):
            raise self.error("operators are never placed inside kets or bras", pos, shape=True)
        return self.to_lin(e, pos)

    def nc_basis(self, basis, lin: Lin, pos) -> str:
        if basis is not None:
            return basis
        for v in lin.vars():
            b = self.table.basis_for_prefix(v)
            if b is not None:
                return b
        raise self.error("cannot infer the basis; write it as |q:...>", pos)

    # -- conversions -----------------------------------------------------
    def pure_coeff(self, e: Expr, pos) -> Coeff:
        if len(e.terms) != 1:
            raise self.error("expected a nonzero numeric factor", pos)
        t = e.terms[0]
        if t.mono or t.atoms or t.word or t.binders:
            raise self.error("expected a numeric factor", pos)
        return t.coeff

    def to_lin(self, e: Expr, pos) -> Lin:
        coeffs = []
        const = Fraction(0)
        for t in e.terms:
            c = t.coeff
            if t.atoms or t.word or t.binders or not c.is_real_rational():
                raise self.error("expected an affine combination of index variables", pos)
            if not t.mono:
                const += c.re
            elif len(t.mono) == 1 and t.mono[0][1] == 1:
                coeffs.append((t.mono[0][0], c.re))
            else:
                raise self.error("argument is not affine in the index variables", pos)
        return Lin.build(coeffs, const)


def parse(src: str, table: BasisTable | None = None, hermitian=DEFAULT_HERMITIAN) -> Expr:
    """Parse DSL text into an :class:`Expr` (not normalized)."""
    return _Parser(src, table or DEFAULT, hermitian).parse()


# ---------------------------------------------------------------------------
# printing


def _pretty_names(basis: str, table: BasisTable):
    stem = table.prefixes[basis][0]
    yield stem
    yield stem + "'"
    yield stem + "''"
    k = 3
    while True:
        yield f"{stem}{k}"
        k += 1


def _pick(basis, table, taken):
    for n in _pretty_names(basis, table):
        if n not in taken:
            taken.add(n)
            return n


def _fmt_args(args) -> str:
    return ", ".join(format_lin(a) for a in args)


def _var_order(table):
    """Position-like variables before momentum-like ones inside a printed monomial."""
    def key(v):
        return (table.basis_for_prefix(v) == "p", v)
    return key


def _fmt_atom(a, table, taken) -> str:
    if isinstance(a, Delta):
        marks = "'" * a.order if a.order <= 2 else "{%d}" % a.order
        return f"delta{marks}({format_lin(a.arg)})"
    if isinstance(a, Phase):
        terms = a.exponent.terms
        key = _var_order(table)
        if len(terms) == 1 and abs(terms[0][1]) == 1 and terms[0][0]:
            sign = "-" if terms[0][1] < 0 else ""
            return f"exp({sign}i*{'*'.join(_power_run(terms[0][0], key))})"
        return f"exp(i*({format_poly(a.exponent, key)}))"
    if isinstance(a, Fn):
        marks = ""
        if any(a.derivs):
            if len(a.derivs) == 1 and a.derivs[0] <= 2:
                marks = "'" * a.derivs[0]
            else:
                marks = "{" + ",".join(str(d) for d in a.derivs) + "}"
        return f"{a.name}{'*' if a.conjugated else ''}{marks}({_fmt_args(a.args)})"
    if isinstance(a, BoundaryTerm):
        name = _pick(a.var.basis, table, taken)
        inner = a.payload.rename_vars({BRACKET_VAR: name})
        return f"bdry({name}, {print_expr(inner, table)})"
    raise TypeError(a)


def _fmt_word(w, table) -> str:
    arg = format_lin(w.arg)
    inferred = None
    for v in w.arg.vars():
        inferred = table.basis_for_prefix(v)
        if inferred:
            break
    head = "" if inferred == w.basis else f"{w.basis}:"
    return f"|{head}{arg}>" if isinstance(w, Tag) else f"<{head}{arg}|"


def _sugar(t: Term, table) -> str | None:
    if t.mono or len(t.binders) != 1:
        return None
    b = t.binders[0]
    v = Lin.var(b.name)
    if not t.atoms and t.word == (Tag(b.basis, v), Extractor(b.basis, v)):
        if b.basis == "q":
            return "I"
        if b.basis == "p":
            return "I_p"
        return None
    if b.basis != "q" or len(t.atoms) != 1 or len(t.word) != 1:
        return None
    f = t.atoms[0]
    if not (isinstance(f, Fn) and f.args == (v,) and not any(f.derivs) and f.schwartz and not f.unitary):
        return None
    if table.basis_for_prefix(f.name) is not None or f.name in KEYWORDS or f.name.endswith("hat"):
        return None
    if t.word == (Tag("q", v),) and not f.conjugated:
        return f"|{f.name}>"
    if t.word == (Extractor("q", v),) and f.conjugated:
        return f"<{f.name}|"
    return None


def _coeff_prefix(c: Coeff, body: str) -> str:
    if not body:
        return format_coeff(c)
    if c == ONE:
        return body
    if c == -ONE:
        return "-" + body
    return f"{format_coeff(c)}*{body}"


def _print_term(t: Term, table: BasisTable) -> str:
    sugar = _sugar(t, table)
    if sugar is not None:
        return _coeff_prefix(t.coeff, sugar)
    taken = set(t.free_vars())
    mapping = {}
    for b in t.binders:
        mapping[b.name] = _pick(b.basis, table, taken)
    # rename through a plain dict so atom order stays that of the canonical term
    t2 = Term(t.coeff, _rename_mono(t.mono, mapping), tuple(a.rename(mapping) for a in t.atoms),
              tuple(w.rename(mapping) for w in t.word), t.binders)
    lead = 0
    while lead < len(t2.word) and isinstance(t2.word[lead], Tag):
        lead += 1
    pieces = [_fmt_word(w, table) for w in t2.word[:lead]]
    key = _var_order(table)
    for v, k in sorted(t2.mono, key=lambda vk: key(vk[0])):
        pieces.append(v if k == 1 else f"{v}^{k}")
    for a in t2.atoms:
        pieces.append(_fmt_atom(a, table, taken))
    pieces += [_fmt_word(w, table) for w in t2.word[lead:]]
    body = " ".join(pieces)
    if t.binders:
        measures = []
        for b in t.binders:
            suffix = "/2pi" if table.weight(b.basis) != ONE else ""
            measures.append(f"d{mapping[b.name]}{suffix}")
        body = f"int {body or '1'} {' '.join(measures)}"
    return _coeff_prefix(t.coeff, body)


def _rename_mono(mono, mapping):
    return tuple((mapping.get(v, v), k) for v, k in mono)


def print_expr(e: Expr, table: BasisTable | None = None) -> str:
    """Deterministic text for the canonical form of ``e``."""
    table = table or DEFAULT
    e = e.canonical()
    if e.is_zero():
        return "0"
    parts = [_print_term(t, table) for t in e.terms]
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out
