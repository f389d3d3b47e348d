"""Numeric oracle suite: every check returns a value, a threshold and a verdict."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import numeric as nm

__all__ = ["Check", "run_checks", "convergence", "symbol_wigner_error"]


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "pass": self.passed, "note": self.note}


def _below(name, value, threshold, note=""):
    return Check(name, float(value), threshold, bool(value < threshold), note)


FLOOR = 1e-12


def convergence(L: float, sizes=(128, 256, 512), n_state: int = 0) -> list[float]:
    out = []
    for n in sizes:
        g = nm.Grid(n, L)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", nm.SchwartzWarning)
            out.append(nm.commutator_residual(g, nm.hermite_gauss(g, n_state)))
    return out


def halves_or_floor(values, floor: float = FLOOR) -> bool:
    """Each refinement at least halves the residual, unless it is already at the floor."""
    return all(b <= a / 2 or b < floor for a, b in zip(values, values[1:]))


def symbol_wigner_error(grid: nm.Grid, symbol, qmax: float, pmax: float) -> float:
    """Max deviation between the Wigner map of the Weyl-ordered operator and its polynomial symbol."""
    coeffs = nm.symbol_to_coeffs(symbol)
    W = nm.wigner(nm.weyl_operator(grid, coeffs))
    vals, q, p = W.window(qmax, pmax)
    Q, P = np.meshgrid(q, p, indexing="ij")
    ref = sum(c * Q ** a * P ** b for (a, b), c in coeffs.items())
    return float(np.abs(vals - ref).max())


def run_checks(grid: nm.Grid, seed: int = 0) -> list[Check]:
    from .derivations import weyl_symbol, make_ladders

    out = []
    g = grid
    states = [nm.hermite_gauss(g, k) for k in range(11)]
    psi0 = states[0]

    for k in range(6):
        out.append(_below(f"commutator_residual[psi{k}]", nm.commutator_residual(g, states[k]), 1e-6))
    conv = convergence(g.L)
    out.append(Check("commutator_convergence", max(conv), FLOOR, halves_or_floor(conv),
                     "residuals at n=128,256,512: " + ", ".join(f"{r:.2e}" for r in conv)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        bump = nm.NumericState(g, np.exp(-(g.x + g.L / 2) ** 2))
        r = nm.commutator_residual(g, bump)
    warned = any(issubclass(w.category, nm.SchwartzWarning) for w in caught)
    out.append(Check("edge_bump_residual", r, 0.1, bool(r > 0.1 and warned),
                     "expected O(1) with a warning"))

    P = nm.build_p(g)
    out.append(_below("p_hermiticity", P.hermiticity_error(), 1e-12))
    A, Ad = nm.ladder_matrices(g)
    norm0 = np.linalg.norm(psi0.samples)
    out.append(_below("ladder_annihilates_vacuum", np.linalg.norm(A.apply(psi0).samples) / norm0, 1e-6))
    out.append(_below("ladder_raises_vacuum",
                      np.linalg.norm((Ad.apply(psi0) - states[1]).samples) / norm0, 1e-6))
    comm = (A @ Ad - Ad @ A - nm.build_identity(g)).apply(psi0)
    out.append(_below("ladder_commutator", np.linalg.norm(comm.samples) / norm0, 1e-6))
    alpha = (1 + 1j) / 2
    coh = nm.coherent(g, alpha)
    out.append(_below("coherent_eigenstate", np.linalg.norm((A.apply(coh) - coh * alpha).samples), 1e-6))

    gram = np.array([[a.inner(b) for b in states] for a in states])
    out.append(_below("hermite_orthonormality", np.abs(gram - np.eye(len(states))).max(), 1e-8))
    ft = nm.forward_transform(psi0).samples
    out.append(_below("forward_gaussian", np.abs(ft - math.sqrt(2) * np.pi ** 0.25 * np.exp(-g.p ** 2 / 2)).max(),
                      1e-10))
    rt = nm.inverse_transform(nm.forward_transform(states[3])).samples
    out.append(_below("transform_round_trip", np.abs(rt - states[3].samples).max(), 1e-12))

    W = nm.wigner(psi0)
    vals, q, p = W.window(4, 4)
    ref = 2 * np.exp(-q[:, None] ** 2 - p[None, :] ** 2)
    out.append(_below("wigner_vacuum", np.abs(vals - ref).max(), 1e-6))
    out.append(_below("wigner_vacuum_mass", abs(W.mass() - 1), 1e-6))
    for k in (1, 5):
        out.append(_below(f"wigner_mass[psi{k}]", abs(nm.wigner(states[k]).mass() - 1), 1e-6))
    s = weyl_symbol(make_ladders()[0])
    out.append(_below("wigner_annihilation_symbol", symbol_wigner_error(g, s, g.L / 4, g.L / 4), 1e-6))
    WI = nm.wigner(nm.build_identity(g))
    out.append(_below("wigner_identity", np.abs(WI.values - 1).max(), 1e-6))

    out.append(_below("moment2_vacuum", abs(nm.moment_numeric(psi0, 2) - 0.5), 1e-8))
    for k in range(6):
        out.append(_below(f"trace[psi{k}]", abs(nm.trace_numeric(nm.density(states[k])) - 1), 1e-8))
    mix = nm.density([states[0], states[1]], [0.5, 0.5])
    out.append(_below("purity_mixture", abs(nm.purity_numeric(mix) - 0.5), 1e-6))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(20):
        U = nm.random_unitary(g.n, seed + k)
        a = nm.NumericState(g, rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n))
        b = nm.NumericState(g, rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n))
        a, b = a.normalize(), b.normalize()
        worst = max(worst, nm.unitary_invariance_numeric(a, b, U))
    out.append(_below("unitary_invariance[20 seeded]", worst, 1e-10))
    F = nm.transform_matrix(g)
    out.append(_below("unitary_invariance[transform]",
                      nm.unitary_invariance_numeric(states[2], states[3] + states[0], F), 1e-10))
    return out
