import csv
import io
import json
import math
import warnings

import numpy as np
import pytest

from tagcalc import numeric as nm
from tagcalc.checks import convergence, halves_or_floor, run_checks, symbol_wigner_error
from tagcalc.derivations import make_ladders, weyl_quantize, weyl_symbol
from tagcalc.dsl import parse

G = nm.Grid(512, 20.0)


@pytest.fixture(scope="module")
def hg():
    return [nm.hermite_gauss(G, k) for k in range(11)]


# -- grid and transforms ----------------------------------------------------------

def test_grid_reciprocity():
    for n in (16, 128, 512):
        g = nm.Grid(n, 20.0)
        assert math.isclose(g.dx * g.dp, 2 * math.pi / n)
        assert g.p[0] < 0 and np.all(np.diff(g.p) > 0)
        assert g.p[n // 2] == 0


@pytest.mark.parametrize("n", [96, 0, 1, 100])
def test_grid_rejects_non_power_of_two(n):
    with pytest.raises(ValueError):
        nm.Grid(n, 20.0)


def test_declared_normalized_is_checked():
    with pytest.raises(ValueError):
        nm.NumericState(G, 2 * nm.hermite_gauss(G, 0).samples, normalized=True)


def test_forward_gaussian(hg):
    ft = nm.forward_transform(hg[0])
    want = math.sqrt(2) * np.pi ** 0.25 * np.exp(-G.p ** 2 / 2)
    assert np.abs(ft.samples - want).max() < 1e-10
    assert abs(ft.norm2() - 1) < 1e-12  # dp/2pi measure


def test_forward_matches_direct_quadrature():
    psi = nm.NumericState(G, np.exp(-(G.x - 0.5) ** 2) * (1 + G.x))
    direct = np.array([np.sum(np.exp(-1j * G.x * p) * psi.samples) * G.dx for p in G.p[::37]])
    assert np.abs(nm.forward_transform(psi).samples[::37] - direct).max() < 1e-12


def test_shift_theorem(hg):
    a = 1.25
    shifted = nm.NumericState(G, np.pi ** -0.25 * np.exp(-(G.x - a) ** 2 / 2))
    got = nm.forward_transform(shifted).samples
    want = np.exp(-1j * G.p * a) * nm.forward_transform(hg[0]).samples
    assert np.abs(got - want).max() < 1e-10


def test_round_trip(hg):
    for psi in hg[:6]:
        back = nm.inverse_transform(nm.forward_transform(psi))
        assert np.abs(back.samples - psi.samples).max() < 1e-12


# -- operators ---------------------------------------------------------------------------

def test_q_is_real_diagonal(hg):
    Q = nm.build_q(G)
    assert np.allclose(Q.apply(hg[2]).samples, G.x * hg[2].samples, atol=1e-14)
    m = Q.matrix
    assert np.all(m.imag == 0) and np.count_nonzero(m - np.diag(np.diag(m))) == 0


def test_p_hermitian():
    assert nm.build_p(G).hermiticity_error() < 1e-12


def test_p_expectation_of_boosted_gaussian():
    p0 = 1.7
    psi = nm.NumericState(G, np.pi ** -0.25 * np.exp(-G.x ** 2 / 2 + 1j * p0 * G.x))
    assert abs(psi.inner(nm.build_p(G).apply(psi)) - p0) < 1e-10


def test_p_expectation_real_for_random_state():
    rng = np.random.default_rng(3)
    psi = nm.NumericState(G, rng.standard_normal(G.n) + 1j * rng.standard_normal(G.n))
    assert abs(psi.inner(nm.build_p(G).apply(psi)).imag) < 1e-9


@pytest.mark.parametrize("k", range(6))
def test_commutator_residual(hg, k):
    assert nm.commutator_residual(G, hg[k]) < 1e-6


def test_residual_convergence_at_spec_grids():
    r = convergence(20.0)
    assert halves_or_floor(r)


def test_residual_convergence_on_coarse_grids():
    """Below the floor the residual falls steeply as n doubles."""
    r = convergence(20.0, sizes=(32, 64, 128))
    assert r[0] > 1e-5
    assert r[1] < r[0] / 2
    assert halves_or_floor(r)


def test_edge_bump_warns():
    bump = nm.NumericState(G, np.exp(-(G.x + G.L / 2) ** 2))
    with pytest.warns(nm.SchwartzWarning):
        r = nm.commutator_residual(G, bump)
    assert r > 1


def test_ladders(hg):
    A, Ad = nm.ladder_matrices(G)
    n0 = np.linalg.norm(hg[0].samples)
    assert np.linalg.norm(A.apply(hg[0]).samples) / n0 < 1e-6
    assert np.linalg.norm((Ad.apply(hg[0]) - hg[1]).samples) / n0 < 1e-6
    comm = (A @ Ad - Ad @ A - nm.build_identity(G)).apply(hg[0])
    assert np.linalg.norm(comm.samples) / n0 < 1e-6


def test_coherent_state_eigenvalue():
    alpha = (1 + 1j) / 2
    coh = nm.coherent(G, alpha)
    A, _ = nm.ladder_matrices(G)
    assert np.linalg.norm((A.apply(coh) - coh * alpha).samples) < 1e-6


# -- states ------------------------------------------------------------------------------

def test_hermite_gauss_orthonormal(hg):
    gram = np.array([[a.inner(b) for b in hg] for a in hg])
    assert np.abs(gram - np.eye(11)).max() < 1e-8


def test_hermite_gauss_ground_state(hg):
    assert np.abs(hg[0].samples - np.pi ** -0.25 * np.exp(-G.x ** 2 / 2)).max() < 1e-15


def test_hermite_gauss_limit():
    nm.hermite_gauss(G, 20)
    with pytest.raises(ValueError):
        nm.hermite_gauss(G, 21)


# -- Wigner --------------------------------------------------------------------------------

def test_vacuum_wigner(hg):
    W = nm.wigner(hg[0])
    vals, q, p = W.window(4, 4)
    assert np.abs(vals - 2 * np.exp(-q[:, None] ** 2 - p[None, :] ** 2)).max() < 1e-6
    assert abs(W.mass() - 1) < 1e-6


@pytest.mark.parametrize("k", [1, 2, 5, 10])
def test_wigner_mass(hg, k):
    assert abs(nm.wigner(hg[k]).mass() - 1) < 1e-6


def test_wigner_mixed_mass(hg):
    rho = nm.density([hg[0], hg[3]], [0.25, 0.75])
    assert abs(nm.wigner(rho).mass() - 1) < 1e-6


def test_wigner_fock1_oracle(hg):
    # W_1 = 2 (2(q^2 + p^2) - 1) e^{-q^2 - p^2}
    vals, q, p = nm.wigner(hg[1]).window(4, 4)
    r2 = q[:, None] ** 2 + p[None, :] ** 2
    assert np.abs(vals - 2 * (2 * r2 - 1) * np.exp(-r2)).max() < 1e-6


def test_wigner_of_annihilation_matches_symbol():
    s = weyl_symbol(make_ladders()[0])
    assert symbol_wigner_error(G, s, G.L / 4, G.L / 4) < 1e-6


@pytest.mark.parametrize("symbol", ["q", "p", "1 + q - 2*p", "(q - i*p)/sqrt2", "3*i"])
def test_symbol_consistency(symbol):
    s = weyl_symbol(weyl_quantize(parse(symbol)))
    assert symbol_wigner_error(G, s, G.L / 4, G.L / 4) < 1e-6


def test_wigner_identity():
    assert np.abs(nm.wigner(nm.build_identity(G)).values - 1).max() < 1e-12


def test_wigner_exports(hg):
    W = nm.WignerMap(G, nm.wigner(hg[0]).values, {"state": "fock:0"})
    d = json.loads(W.dumps("json"))
    assert d["grid"]["n"] == 512 and d["meta"]["state"] == "fock:0"
    assert len(d["re"]) == 512 and len(d["re"][0]) == 512
    text = W.dumps("csv")
    lines = text.splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    assert "# n=512" in meta and "# state=fock:0" in meta
    rows = list(csv.reader(io.StringIO("\n".join(lines[len(meta):]))))
    assert rows[0] == ["q", "p", "re", "im"]
    assert len(rows) == 1 + 512 * 512
    # row-major: q outer, p inner
    assert float(rows[1][0]) == float(rows[2][0]) and float(rows[1][1]) < float(rows[2][1])
    assert W.dumps("csv") == text


# -- moments, traces, invariance -------------------------------------------------------

def test_moments_and_traces(hg):
    assert abs(nm.moment_numeric(hg[0], 2) - 0.5) < 1e-8
    assert abs(nm.moment_numeric(hg[3], 2) - 3.5) < 1e-8
    for k in range(6):
        assert abs(nm.trace_numeric(nm.density(hg[k])) - 1) < 1e-8


def test_purity(hg):
    assert abs(nm.purity_numeric(nm.density(hg[2])) - 1) < 1e-8
    mix = nm.density([hg[0], hg[1]], [0.5, 0.5])
    assert abs(nm.purity_numeric(mix) - 0.5) < 1e-6
    assert abs(nm.hs_norm_numeric(mix) - math.sqrt(0.5)) < 1e-6


def test_trace_linearity(hg):
    r1, r2 = nm.density(hg[1]), nm.density([hg[2], hg[4]], [0.3, 0.7])
    a, b = 0.25 - 1j, 2.0
    lhs = nm.trace_numeric(r1 * a + r2 * b)
    assert abs(lhs - (a * nm.trace_numeric(r1) + b * nm.trace_numeric(r2))) < 1e-13


def test_unitary_invariance(hg):
    F = nm.transform_matrix(G)
    assert np.abs(F.conj().T @ F - np.eye(G.n)).max() < 1e-12
    phi = (hg[1] + hg[4] * 1j).normalize()
    assert nm.unitary_invariance_numeric(hg[2], phi, F) < 1e-10
    assert nm.unitary_invariance_numeric(hg[2], phi, np.eye(G.n)) == 0
    for seed in range(3):
        assert nm.unitary_invariance_numeric(hg[2], phi, nm.random_unitary(G.n, seed)) < 1e-10


def test_non_unitary_rejected(hg):
    with pytest.raises(ValueError):
        nm.unitary_invariance_numeric(hg[0], hg[1], 2 * np.eye(G.n))


def test_first_moment_not_invariant(hg):
    psi = (hg[0] + hg[1]).normalize()
    U = nm.random_unitary(G.n, 11)
    moved = nm.NumericState(G, U @ psi.samples)
    assert abs(nm.moment_numeric(psi, 1) - nm.moment_numeric(moved, 1)) > 1e-3


def test_run_checks_all_pass():
    with warnings.catch_warnings():
        warnings.simplefilter("error", nm.SchwartzWarning)
        checks = run_checks(nm.Grid(256, 20.0), seed=1)
    failed = [c.name for c in checks if not c.passed]
    assert not failed
