import json
import time
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from tagcalc import ops
from tagcalc.coeff import I, as_coeff
from tagcalc.corpus import load_corpus
from tagcalc.derivations import (
    DERIVATIONS, commutator, density_op, hs_norm, identity_coefficient, is_symplectic, make_ladders,
    make_quadratures, moment_value, purity, rebase, rebase_kernel, run_derivation, symplectic_check,
    trace_norm, weyl_quantize, weyl_symbol,
)
from tagcalc.dsl import parse, print_expr
from tagcalc.errors import ShapeError, UnsupportedFeature
from tagcalc.expr import Expr, adjoint, structural_eq
from tagcalc.rewrite import MODES, normalize

GOLDEN = Path(__file__).parent / "golden"


def nf(x, mode="distributional"):
    return normalize(parse(x) if isinstance(x, str) else x, mode)[0]


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("name", list(DERIVATIONS))
def test_derivation_passes(name, mode):
    t0 = time.perf_counter()
    d = run_derivation(name, mode)
    assert time.perf_counter() - t0 < 1.0
    assert d.ok, json.dumps(d.to_json(), indent=1)


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("name", list(DERIVATIONS))
def test_golden_log_replays(name, mode):
    want = json.loads((GOLDEN / f"{name}.{mode}.json").read_text())
    got = json.loads(json.dumps(run_derivation(name, mode).to_json(), sort_keys=True))
    assert got == want


def test_golden_corpus_normal_forms():
    rows = json.loads((GOLDEN / "corpus.json").read_text())
    assert [r["source"] for r in rows] == load_corpus()
    for row in rows:
        e = parse(row["source"])
        assert print_expr(e) == row["printed"]
        for mode in MODES:
            out, rep = normalize(e, mode)
            assert print_expr(out) == row[mode]["normal"], (row["source"], mode)
            assert rep.flags == row[mode]["flags"]


def test_unknown_derivation():
    with pytest.raises(KeyError, match="qp-commutator"):
        run_derivation("nope")


# -- quadratures and commutators -------------------------------------------------

def test_quadrature_kernels():
    Q, P = make_quadratures()
    assert print_expr(nf(parse("<q'|") * Q * parse("|q''>"))) == "q' delta(q' - q'')"
    assert print_expr(nf(P)) == "-i*int |q> delta'(q - q') <q'| dq dq'"
    assert structural_eq(adjoint(Q), Q)
    assert structural_eq(nf(adjoint(P)), nf(P))


@pytest.mark.parametrize("mode", MODES)
def test_canonical_commutators(mode):
    Q, P = make_quadratures()
    assert print_expr(commutator(Q, P, mode)[0]) == "i*I"
    assert print_expr(commutator(P, Q, mode)[0]) == "-i*I"
    assert commutator(Q, Q, mode)[0].is_zero()
    assert commutator(P, P, mode)[0].is_zero()


def test_paper_faithful_commutator_restricts_to_domain():
    Q, P = make_quadratures()
    raw, rep = commutator(Q, P, "paperFaithful", restrict=False)
    assert rep.boundary_terms_remaining == 1
    out, rep = commutator(Q, P, "paperFaithful")
    assert print_expr(out) == "i*I"
    assert "restricted-to-domain" in rep.flags
    assert rep.boundary_terms_annihilated >= 1


def test_commutator_requires_operators():
    with pytest.raises(ShapeError):
        commutator(ops.ket("psi"), ops.qhat())


@pytest.mark.parametrize("mode", MODES)
def test_ladder_algebra(mode):
    A, Ad = make_ladders()
    assert print_expr(commutator(A, Ad, mode)[0]) == "I"
    assert commutator(A, A, mode)[0].is_zero()
    assert commutator(Ad, Ad, mode)[0].is_zero()
    assert structural_eq(nf(A + Ad, mode), nf(ops.qhat() * as_coeff(1) * parse("sqrt2"), mode))
    assert structural_eq(nf(A - Ad, mode), nf(parse("i*sqrt2") * ops.phat(), mode))
    assert structural_eq(nf(adjoint(A), mode), nf(Ad, mode))


# -- Weyl correspondence -----------------------------------------------------------

@pytest.mark.parametrize("op, symbol", [
    ("ahat", "(q + i*p)/sqrt2"),
    ("adag", "(q - i*p)/sqrt2"),
    ("I", "1"),
    ("qhat", "q"),
    ("phat", "p"),
    ("M(2)", "q^2"),
    ("phat phat", "p^2"),
    ("(qhat phat + phat qhat)/2", "q*p"),
])
def test_weyl_symbols(op, symbol):
    assert structural_eq(weyl_symbol(parse(op)), parse(symbol))


@pytest.mark.parametrize("symbol, op", [
    ("(q + i*p)/sqrt2", "ahat"),
    ("q", "qhat"),
    ("1", "I"),
    ("q*p", "(qhat phat + phat qhat)/2"),
])
def test_weyl_quantize(symbol, op):
    assert structural_eq(weyl_quantize(parse(symbol)), nf(op))


def test_weyl_degree_limit():
    with pytest.raises(UnsupportedFeature):
        weyl_symbol(ops.moment(3))
    with pytest.raises(UnsupportedFeature):
        weyl_quantize(parse("q^2*p"))


small = st.fractions(min_value=-5, max_value=5, max_denominator=6)
monos = ["1", "q", "p", "q^2", "p^2", "q*p"]


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=6, max_size=6), st.lists(small, min_size=6, max_size=6))
def test_weyl_round_trip_property(re, im):
    symbol = Expr.zero()
    for m, a, b in zip(monos, re, im):
        symbol = symbol + parse(m) * as_coeff(complex(0, 0)) + parse(m) * (as_coeff(a) + I * as_coeff(b))
    symbol = symbol.canonical()
    op = weyl_quantize(symbol)
    assert structural_eq(weyl_symbol(op), symbol)
    assert structural_eq(weyl_quantize(weyl_symbol(op)), op)


# -- symplectic check ---------------------------------------------------------------

@pytest.mark.parametrize("abcd, coeff", [
    ((1, 0, 0, 1), I),
    ((2, 0, 0, Fraction(1, 2)), I),
    ((1, 0, 0, 2), I * as_coeff(2)),
])
def test_symplectic_examples(abcd, coeff):
    out, _ = symplectic_check(*abcd)
    assert identity_coefficient(out) == coeff


@settings(max_examples=40, deadline=None)
@given(small, small, small, small)
def test_symplectic_coefficient_property(a, b, c, d):
    out, _ = symplectic_check(a, b, c, d)
    assert identity_coefficient(out) == I * as_coeff(a * d - b * c)
    assert is_symplectic(a, b, c, d) == (a * d - b * c == 1)


# -- change of basis --------------------------------------------------------------------

@pytest.mark.parametrize("mode", MODES)
def test_rebase_preserves_sandwiches(mode):
    for op in ["qhat", "phat", "Ahat", "ahat", "|chi><chi|", "I"]:
        A = parse(op)
        plain = nf(ops.bra("phi") * A * ops.ket("psi"), mode)
        moved = nf(rebase(ops.bra("phi")) * rebase(A) * rebase(ops.ket("psi")), mode)
        assert structural_eq(plain, moved), op


def test_rebase_identity():
    assert structural_eq(nf(rebase(ops.identity())), nf(parse("int |U:etaU> <U:etaU| detaU")))


def test_rebased_position_not_diagonal():
    K = rebase_kernel(ops.qhat())
    assert print_expr(K) == "int q U(q, etaU') U*(q, etaU) dq"
    assert not structural_eq(K, parse("etaU delta(etaU - etaU')"))
    assert print_expr(rebase_kernel(ops.identity())) == "delta(etaU - etaU')"


# -- moments and densities ------------------------------------------------------------------

def test_moment_algebra():
    assert structural_eq(nf(ops.moment(1) * ops.moment(1)), ops.moment(2))
    assert structural_eq(nf(ops.moment(2) * ops.moment(3)), ops.moment(5))
    assert structural_eq(nf(ops.moment(0)), ops.identity())
    assert print_expr(moment_value("psi", 1)) == "int q psi(q) psi*(q) dq"


def test_density_traces():
    rho = density_op("psi")
    assert print_expr(trace_norm(rho)) == "int psi(q) psi*(q) dq"
    pure = "int psi(q) psi(q') psi*(q) psi*(q') dq dq'"
    assert print_expr(purity(rho)) == pure
    assert print_expr(hs_norm(rho)) == pure
    sandwich = nf(ops.bra("G") * rho * ops.ket("F"))
    assert structural_eq(sandwich, nf("int G*(q) psi(q) dq int psi*(q') F(q') dq'"))


def test_density_kernel_must_be_self_adjoint():
    with pytest.raises(ShapeError):
        density_op(ops.kernel_op("A"))
    rho = density_op(ops.kernel_op("rho", hermitian=True))
    assert print_expr(trace_norm(rho)) == "int rho(q, q) dq"


# -- action symmetry -------------------------------------------------------------------------

@pytest.mark.parametrize("mode", MODES)
def test_left_right_action_symmetry(corpus_exprs, mode):
    psi = ops.ket("psi")
    n = 0
    for src, e in corpus_exprs:
        if e.word_shapes() != {"operator"}:
            continue
        left = nf(adjoint(nf(adjoint(psi) * e, mode)), mode)
        right = nf(adjoint(e) * psi, mode)
        assert structural_eq(left, right), src
        n += 1
    assert n >= 15
