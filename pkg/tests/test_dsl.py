import pytest
from hypothesis import given, settings, strategies as st

from tagcalc import ops
from tagcalc.dsl import parse, print_expr
from tagcalc.errors import ParseError, ShapeError
from tagcalc.expr import Expr, alpha_normalize, structural_eq
from tagcalc.rewrite import normalize


def test_position_operator_text():
    assert structural_eq(parse("int |q> q <q| dq"), ops.qhat())
    assert print_expr(ops.qhat()) == "int |q> q <q| dq"


def test_momentum_measure_spellings_agree():
    a = parse("int |p> p <p| dp/2pi")
    assert structural_eq(a, parse("int |p> p <p| dp"))
    assert structural_eq(a, parse("int |k> k <k| d k"))
    assert structural_eq(a, ops.phat())


def test_zero_and_identity_printing():
    assert print_expr(Expr.zero()) == "0"
    assert print_expr(parse("i*I")) == "i*I"
    assert print_expr(parse("I - I")) == "0"


def test_braket_normalizes_to_phase():
    assert print_expr(normalize(parse("<q|p>"))[0]) == "exp(i*q*p)"


def test_ket_sugar():
    assert structural_eq(parse("|psi>"), parse("ket(psi)"))
    assert structural_eq(parse("<psi|"), parse("bra(psi)"))
    assert structural_eq(parse("|psi>"), parse("int |q> psi(q) dq"))


def test_explicit_basis_prefix():
    assert structural_eq(parse("|q:x>"), parse("|x>"))
    assert parse("|U:etaU>").terms[0].word[0].basis == "qU"


def test_derivative_syntax():
    assert structural_eq(parse("psi'(q)"), parse("psi{1}(q)"))
    a = parse("A{0,2}(q, q')").terms[0].atoms[0]
    assert a.derivs == (0, 2)


def test_conjugate_function():
    f = parse("psi*(q)").terms[0].atoms[0]
    assert f.conjugated and f.name == "psi"


def test_nested_integral_shares_measures():
    e = parse("int int |q> A(q, q') <q'| dq dq'")
    assert len(e.terms[0].binders) == 2


@pytest.mark.parametrize("src", ["|Ahat psi>", "<Ahat psi|", "|q:qhat>", "|qhat>"])
def test_operator_inside_ket_is_shape_error(src):
    with pytest.raises(ShapeError):
        parse(src)


@pytest.mark.parametrize("src, line, col", [
    ("int |q> <q|", 1, 12),
    ("qhat +\n  * phat", 2, 3),
    ("psi(q", 1, 6),
    ("|q> $", 1, 5),
    ("dq", 1, 1),
])
def test_errors_carry_line_and_column(src, line, col):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert (info.value.line, info.value.column) == (line, col)
    assert str(info.value).startswith(f"{line}:{col}:")


def test_measure_weight_mismatch():
    with pytest.raises(ParseError, match="2pi"):
        parse("int |q><q| dq/2pi")


def test_round_trip_on_corpus(corpus_exprs):
    assert len(corpus_exprs) >= 30
    for src, e in corpus_exprs:
        text = print_expr(e)
        again = parse(text)
        assert structural_eq(again, alpha_normalize(e)), src
        assert print_expr(again) == text, src


def test_round_trip_of_normal_forms(corpus_exprs):
    for src, e in corpus_exprs:
        for mode in ("distributional", "paperFaithful"):
            out = normalize(e, mode)[0]
            assert structural_eq(parse(print_expr(out)), out), (src, mode)


def test_print_is_deterministic(corpus_exprs):
    for src, e in corpus_exprs:
        assert print_expr(e) == print_expr(parse(src))


pieces = st.sampled_from([
    "|psi>", "<phi|", "qhat", "phat", "ahat", "adag", "I", "I_p", "Ahat", "M(2)",
    "psi(q)", "q", "i", "2", "1/3", "sqrt2", "pi", "exp(i*q*p)", "delta(q - q')",
    "int |q> chi(q) q <q| dq", "int |p> p^2 <p| dp/2pi", "dag(ahat)",
])


@st.composite
def sources(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(pieces)
    a = draw(sources(depth=depth - 1))
    b = draw(sources(depth=depth - 1))
    op = draw(st.sampled_from([" + ", " - ", " ", " * "]))
    return f"({a}){op}({b})"


@settings(max_examples=150, deadline=None)
@given(sources())
def test_round_trip_generated(src):
    e = parse(src)
    text = print_expr(e)
    assert structural_eq(parse(text), alpha_normalize(e))
    assert print_expr(parse(text)) == text
