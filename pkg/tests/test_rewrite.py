import numpy as np
import pytest

from tagcalc import ops
from tagcalc.basis import default_table
from tagcalc.coeff import ONE
from tagcalc.dsl import parse, print_expr
from tagcalc.errors import DivergenceError, ShapeError, UnregisteredPairing, UnsupportedFeature
from tagcalc.expr import adjoint, structural_eq
from tagcalc.rewrite import (
    MODES, STAGES, apply_rule, boundary_annihilate, contract, delta_prime_calculus, normalize,
    phase_integrate, sift, trace,
)


def nf(src, mode="distributional"):
    e = parse(src) if isinstance(src, str) else src
    return normalize(e, mode)[0]


def same(a, b, mode="distributional"):
    return structural_eq(nf(a, mode), nf(b, mode))


# -- contraction -------------------------------------------------------------

@pytest.mark.parametrize("src, want", [
    ("<q|q'>", "delta(q - q')"),
    ("<p|p'>", "2*pi*delta(p - p')"),
    ("<q|p>", "exp(i*q*p)"),
    ("<p|q>", "exp(-i*q*p)"),
])
def test_contract_pairings(src, want):
    assert print_expr(contract(parse(src))) == want


def test_unregistered_pair_is_named():
    table = default_table()
    table.add_basis("r", ONE, ONE, ["r"])
    with pytest.raises(UnregisteredPairing, match="'q'.*'r'"):
        normalize(parse("<q|r>", table), table=table)


# -- sifting -----------------------------------------------------------------

@pytest.mark.parametrize("src, want", [
    ("int delta(mu - nu) psi(nu) dnu", "psi(mu)"),
    ("int delta(q - q') |q'> dq'", "|q>"),
    ("int 2*pi*delta(p - p') f(p') dp'/2pi", "f(p)"),
])
def test_sift(src, want):
    assert print_expr(sift(parse(src))) == want


def test_sift_scaled_argument():
    # int delta(2q - 1) psi(q) dq = psi(1/2)/2
    assert print_expr(nf("int delta(2*q - 1) psi(q) dq")) == "1/2*psi(1/2)"


# -- phase integration ---------------------------------------------------------

@pytest.mark.parametrize("src, want", [
    ("int exp(i*q*p) exp(-i*q'*p) dp/2pi", "delta(q - q')"),
    ("int exp(i*q*p) p exp(-i*q'*p) dp/2pi", "-i*delta'(q - q')"),
    ("int exp(i*q*p) dp/2pi", "delta(q)"),
])
def test_phase_integrate(src, want):
    assert print_expr(phase_integrate(parse(src))) == want


def test_phase_second_moment():
    assert print_expr(nf("int exp(i*q*p) p^2 exp(-i*q'*p) dp")) == "-delta''(q - q')"


def test_phase_higher_moment_unsupported():
    with pytest.raises(UnsupportedFeature):
        nf("int exp(i*q*p) p^3 exp(-i*q'*p) dp")


def test_first_moment_phase_oracle():
    """int dp/2pi p e^{ip(q - q')} against f(q') = e^{-q'^2/2} equals -i f'(q)."""
    q0 = 0.3
    p = np.linspace(-40, 40, 20001)
    ft = np.sqrt(2 * np.pi) * np.exp(-p ** 2 / 2)  # int e^{-ipq'} f(q') dq'
    lhs = np.trapezoid(p * np.exp(1j * p * q0) * ft, p) / (2 * np.pi)
    rhs = -1j * (-q0 * np.exp(-q0 ** 2 / 2))
    assert abs(lhs - rhs) < 1e-10


# -- delta-prime calculus ------------------------------------------------------

@pytest.mark.parametrize("src, want", [
    ("q delta'(q - q')", "-delta(q - q') + q' delta'(q - q')"),
    ("int delta'(q - q') q' psi(q') dq'", "psi(q) + q psi'(q)"),
    ("int delta'(q - q') psi(q') dq'", "psi'(q)"),
])
def test_delta_prime_calculus(src, want):
    assert print_expr(delta_prime_calculus(parse(src))) == want


def _mollified_prime(g, q0, eps=2e-3):
    x = np.linspace(q0 - 12 * eps, q0 + 12 * eps, 40001)
    d = np.exp(-((q0 - x) ** 2) / (2 * eps ** 2)) / (np.sqrt(2 * np.pi) * eps)
    dprime = -(q0 - x) / eps ** 2 * d  # derivative of delta_eps at q0 - x
    return np.trapezoid(dprime * g(x), x)


def test_delta_prime_product_rule_oracle():
    psi = lambda x: np.exp(-x ** 2 / 2) * (1 + x)
    dpsi = lambda x: np.exp(-x ** 2 / 2) * (1 - x - x ** 2)
    q0 = 0.7
    got = _mollified_prime(lambda x: x * psi(x), q0)
    assert abs(got - (psi(q0) + q0 * dpsi(q0))) < 1e-4
    assert abs(_mollified_prime(psi, q0) - dpsi(q0)) < 1e-4


def test_moment_shift_oracle():
    """q d'(q - q') = q' d'(q - q') - d(q - q') as distributions in q'."""
    psi = lambda x: np.exp(-x ** 2 / 2) * np.cos(x)
    q0 = -0.4
    lhs = q0 * _mollified_prime(psi, q0)
    rhs = _mollified_prime(lambda x: x * psi(x), q0) - psi(q0)
    assert abs(lhs - rhs) < 1e-4


def test_delta_prime_against_unitary_kernel_unsupported():
    with pytest.raises(UnsupportedFeature):
        nf("int delta'(nu - mu) U(mu, etaU) dmu")


# -- unitary kernels -----------------------------------------------------------

def test_unitary_composition():
    assert print_expr(nf("int U(nu, etaU) U*(mu, etaU) detaU")) == "delta(mu - nu)"


def test_unitary_same_orientation_left_alone():
    out = nf("int U(nu, etaU) U(etaU, mu) detaU")
    assert "U(nu, etaU)" in print_expr(out)


# -- boundary terms ------------------------------------------------------------

@pytest.mark.parametrize("mode", MODES)
def test_boundary_annihilated_against_schwartz(mode):
    assert nf(ops.delta_hat() * ops.ket("psi"), mode).is_zero()
    assert nf(ops.bra("psi") * ops.delta_hat(), mode).is_zero()


def test_bare_boundary_operator_flagged():
    e, rep = normalize(ops.delta_hat())
    assert not e.is_zero()
    assert "boundary-term" in rep.flags
    assert rep.boundary_terms_remaining == 1
    assert structural_eq(boundary_annihilate(ops.delta_hat()), ops.delta_hat())


# -- normalize -----------------------------------------------------------------

def test_inner_product_chain():
    assert print_expr(nf("<phi|psi>")) == "int phi*(q) psi(q) dq"


def test_identity_on_state():
    assert print_expr(nf("I |psi>")) == "|psi>"


def test_modes_agree_after_domain_restriction():
    from tagcalc.derivations import commutator
    Q, P = ops.qhat(), ops.phat()
    a, _ = commutator(Q, P, "distributional")
    b, _ = commutator(Q, P, "paperFaithful")
    assert structural_eq(a, b)


def test_paper_faithful_mode_integrates_by_parts():
    e, rep = normalize(ops.qhat() * ops.phat() - ops.phat() * ops.qhat(), "paperFaithful")
    assert "ibp" in rep.rules()
    assert rep.boundary_terms_remaining == 1
    e2, rep2 = normalize(ops.qhat() * ops.phat() - ops.phat() * ops.qhat(), "distributional")
    assert "ibp" not in rep2.rules()
    assert rep2.boundary_terms_remaining == 0


def test_step_budget():
    with pytest.raises(DivergenceError) as info:
        normalize(ops.ahat() * ops.adag(), budget=3)
    assert info.value.report is not None
    assert not info.value.report.fixpoint


def test_unknown_mode():
    with pytest.raises(ValueError):
        normalize(ops.qhat(), "sloppy")


def test_report_json():
    _, rep = normalize(parse("<q|p>"))
    d = rep.to_json()
    assert d["fixpoint"] is True
    assert d["boundaryTermsRemaining"] == 0
    assert d["steps"][0]["rule"] == "contract"
    assert len(d["steps"][0]["before"]) == 16


def test_schwartz_ibp_moves_derivative_off_conjugate():
    got = nf("int psi*'(q) phi(q) dq")
    assert print_expr(got) == "-int phi'(q) psi*(q) dq"


# -- trace -----------------------------------------------------------------------

def test_trace_of_projector():
    assert print_expr(trace(ops.projector("psi"))[0]) == "int psi(q) psi*(q) dq"


def test_trace_of_kernel():
    assert print_expr(trace(ops.kernel_op("A"))[0]) == "int A(q, q) dq"


def test_trace_of_identity_flagged_divergent():
    e, rep = trace(ops.identity())
    assert "divergent-symbolic" in rep.flags
    assert print_expr(e) == "int delta(0) dq"


def test_trace_rejects_non_operator():
    with pytest.raises(ShapeError):
        trace(ops.ket("psi"))


# -- invariants over the corpus ------------------------------------------------

@pytest.mark.parametrize("mode", MODES)
def test_fixpoint_is_stable(corpus_exprs, mode):
    for src, e in corpus_exprs:
        out, rep = normalize(e, mode)
        assert rep.fixpoint, src
        for name, _ in STAGES:
            assert structural_eq(apply_rule(name, out, mode), out), (src, name)


def test_identity_laws(corpus_exprs):
    for src, e in corpus_exprs:
        shapes = e.word_shapes()
        for ident in (ops.identity("q"), ops.identity("p")):
            if shapes <= {"ket", "operator"}:
                assert same(ident * e, e), src
            if shapes <= {"bra", "operator"}:
                assert same(e * ident, e), src


def test_identity_laws_on_domain(corpus_exprs):
    """Bare boundary brackets depend on the reduction path; on the Schwartz domain they agree."""
    from tagcalc.derivations import restrict_to_domain

    mode = "paperFaithful"

    def dom(x):
        return restrict_to_domain(nf(x, mode), mode)

    for src, e in corpus_exprs:
        shapes = e.word_shapes()
        for ident in (ops.identity("q"), ops.identity("p")):
            if shapes <= {"ket", "operator"}:
                assert structural_eq(dom(ident * e), dom(e)), src
            if shapes <= {"bra", "operator"}:
                assert structural_eq(dom(e * ident), dom(e)), src


def test_boundary_through_fourier_phase():
    # the bracket variable pairs with p', which carries the transform of chi
    e = parse("qhat phat - phat qhat") * ops.identity("p") * ops.ket("chi")
    assert print_expr(nf(e, "paperFaithful")) == "i*|chi>"


@pytest.mark.parametrize("basis", ["q", "p"])
@pytest.mark.parametrize("op", ["qhat", "phat", "ahat", "adag ahat", "Ahat", "M(2)", "|chi><chi|"])
def test_measure_consistency(basis, op):
    A = parse(op)
    ident = ops.identity(basis)
    base = ops.bra("phi") * A * ops.ket("psi")
    assert same(ops.bra("phi") * ident * A * ops.ket("psi"), base)
    assert same(ops.bra("phi") * A * ident * ops.ket("psi"), base)


@pytest.mark.parametrize("op", ["qhat", "phat", "ahat", "Ahat", "Deltahat", "|chi><chi|"])
def test_associativity(op):
    A = parse(op)
    G, F = ops.bra("G"), ops.ket("F")
    left = nf(nf(G * A) * F)
    right = nf(G * nf(A * F))
    assert structural_eq(left, right)


def test_adjoint_compatibility(corpus_exprs):
    for src, e in corpus_exprs:
        a = nf(adjoint(e))
        b = nf(adjoint(nf(e)))
        assert structural_eq(a, b), src
