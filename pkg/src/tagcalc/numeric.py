"""Grid discretization of the position and momentum bases.

Positions ``x_j = -L/2 + j dx`` (``dx = L/n``) and momenta
``p_k = 2 pi k / L`` for ``k`` in ``[-n/2, n/2)``, stored centered.  The
forward transform is ``psi~(p) = sum_j exp(-i x_j p) psi(x_j) dx`` and its
inverse uses the measure ``dp/2pi``, matching ``<q|p> = exp(i q p)``.

A :class:`NumericOperator` stores the kernel ``K(x_i, x_j)``; applying it to
a state is ``sum_j K_ij psi_j dx``.  Operators also carry the kernel on the
grid shifted by ``dx/2``, which the Wigner transform needs for odd offsets.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid", "NumericState", "NumericOperator", "WignerMap", "SchwartzWarning",
    "forward_transform", "inverse_transform", "build_q", "build_p", "build_identity",
    "ladder_matrices", "commutator_residual", "hermite_gauss", "coherent", "density",
    "wigner", "moment_numeric", "trace_numeric", "purity_numeric", "hs_norm_numeric",
    "unitary_invariance_numeric", "random_unitary", "transform_matrix", "weyl_operator",
    "symbol_to_coeffs", "edge_decay",
]

EDGE_SAMPLES = 10
EDGE_TOL = 1e-12


class SchwartzWarning(UserWarning):
    """State is not negligible near the grid edges, so boundary terms are not suppressed."""


@dataclass(frozen=True)
class Grid:
    n: int = 512
    L: float = 20.0

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"grid size n={self.n} must be a power of two")
        if not self.L > 0:
            raise ValueError("grid extent L must be positive")

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def dp(self) -> float:
        return 2 * math.pi / self.L

    @property
    def x(self) -> np.ndarray:
        return -self.L / 2 + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.n // 2, self.n // 2)

    @property
    def p(self) -> np.ndarray:
        return self.dp * self.k

    def to_json(self) -> dict:
        return {"n": self.n, "L": self.L, "dx": self.dx, "dp": self.dp}


def _sign(grid: Grid) -> np.ndarray:
    return np.where(grid.k % 2 == 0, 1.0, -1.0)


def _forward(grid: Grid, a: np.ndarray) -> np.ndarray:
    s = _sign(grid).reshape((-1,) + (1,) * (a.ndim - 1))
    return grid.dx * s * np.fft.fftshift(np.fft.fft(a, axis=0), axes=0)


def _inverse(grid: Grid, a: np.ndarray) -> np.ndarray:
    s = _sign(grid).reshape((-1,) + (1,) * (a.ndim - 1))
    return np.fft.ifft(np.fft.ifftshift(s * a, axes=0), axis=0) / grid.dx


@dataclass(frozen=True)
class NumericState:
    grid: Grid
    samples: np.ndarray
    normalized: bool = False
    basis: str = "q"

    def __post_init__(self):
        a = np.asarray(self.samples, dtype=complex)
        if a.shape != (self.grid.n,):
            raise ValueError("sample vector does not match the grid")
        object.__setattr__(self, "samples", a)
        if self.normalized and abs(self.norm2() - 1) > 1e-10:
            raise ValueError(f"state declared normalized has norm^2 {self.norm2():.3e}")

    def measure(self) -> float:
        return self.grid.dx if self.basis == "q" else self.grid.dp / (2 * math.pi)

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.measure())

    def inner(self, other: "NumericState") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.samples, other.samples) * self.measure())

    def normalize(self) -> "NumericState":
        return NumericState(self.grid, self.samples / math.sqrt(self.norm2()), True, self.basis)

    def shifted(self, frac: float = 0.5) -> np.ndarray:
        """Samples at ``x_j + frac*dx`` by spectral interpolation."""
        g = self.grid
        return _inverse(g, np.exp(1j * g.p * frac * g.dx) * _forward(g, self.samples))

    def __add__(self, other):
        return NumericState(self.grid, self.samples + other.samples, basis=self.basis)

    def __sub__(self, other):
        return NumericState(self.grid, self.samples - other.samples, basis=self.basis)

    def __mul__(self, c):
        return NumericState(self.grid, self.samples * c, basis=self.basis)

    __rmul__ = __mul__


def forward_transform(psi: NumericState) -> NumericState:
    return NumericState(psi.grid, _forward(psi.grid, psi.samples), basis="p")


def inverse_transform(phi: NumericState) -> NumericState:
    return NumericState(phi.grid, _inverse(phi.grid, phi.samples), basis="q")


@dataclass(frozen=True)
class NumericOperator:
    """Kernel matrix on the grid (and on the half-shifted grid, when known)."""

    grid: Grid
    kernel: np.ndarray
    half: np.ndarray | None = None

    @property
    def matrix(self) -> np.ndarray:
        """Action on sample vectors: ``psi -> matrix @ psi``."""
        return self.kernel * self.grid.dx

    def apply(self, psi: NumericState) -> NumericState:
        return NumericState(self.grid, self.matrix @ psi.samples)

    def __matmul__(self, other):
        if isinstance(other, NumericState):
            return self.apply(other)
        dx = self.grid.dx
        half = None
        if self.half is not None and other.half is not None:
            half = self.half @ other.half * dx
        return NumericOperator(self.grid, self.kernel @ other.kernel * dx, half)

    def _combine(self, other, f):
        half = None
        if self.half is not None and other.half is not None:
            half = f(self.half, other.half)
        return NumericOperator(self.grid, f(self.kernel, other.kernel), half)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, c):
        return NumericOperator(self.grid, self.kernel * c, None if self.half is None else self.half * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / c)

    def dag(self) -> "NumericOperator":
        return NumericOperator(self.grid, self.kernel.conj().T, None if self.half is None else self.half.conj().T)

    def hermiticity_error(self) -> float:
        m = self.matrix
        return float(np.linalg.norm(m - m.conj().T, 2) / np.linalg.norm(m, 2))


def build_identity(grid: Grid) -> NumericOperator:
    eye = np.eye(grid.n) / grid.dx
    return NumericOperator(grid, eye.astype(complex), eye.astype(complex))


def build_q(grid: Grid) -> NumericOperator:
    x = grid.x
    return NumericOperator(grid, np.diag(x / grid.dx).astype(complex),
                           np.diag((x + grid.dx / 2) / grid.dx).astype(complex))


def build_p(grid: Grid) -> NumericOperator:
    """Spectral momentum: inverse transform of ``diag(p)`` of the forward transform."""
    eye = np.eye(grid.n, dtype=complex)
    m = _inverse(grid, grid.p[:, None] * _forward(grid, eye))
    k = m / grid.dx
    # translation invariant, so the shifted-grid kernel is the same matrix
    return NumericOperator(grid, k, k)


def ladder_matrices(grid: Grid) -> tuple[NumericOperator, NumericOperator]:
    Q, P = build_q(grid), build_p(grid)
    return (Q + P * 1j) / math.sqrt(2), (Q - P * 1j) / math.sqrt(2)


def weyl_operator(grid: Grid, coeffs: dict) -> NumericOperator:
    """Weyl-ordered operator for a symbol ``sum c[a,b] q^a p^b`` of total degree <= 2."""
    Q, P, Id = build_q(grid), build_p(grid), build_identity(grid)
    basis = {
        (0, 0): Id, (1, 0): Q, (0, 1): P,
        (2, 0): Q @ Q, (0, 2): P @ P, (1, 1): (Q @ P + P @ Q) * 0.5,
    }
    out = Id * 0
    for key, c in coeffs.items():
        if key not in basis:
            raise ValueError(f"monomial q^{key[0]} p^{key[1]} exceeds degree 2")
        out = out + basis[key] * c
    return out


def symbol_to_coeffs(symbol) -> dict:
    """Complex coefficients ``{(a, b): c}`` of a normalized polynomial symbol in ``q``, ``p``."""
    out: dict = {}
    for t in symbol.terms:
        if t.atoms or t.word or t.binders:
            raise ValueError("symbol must be a polynomial in q, p")
        powers = dict(t.mono)
        if set(powers) - {"q", "p"}:
            raise ValueError("symbol depends on variables other than q, p")
        key = (powers.get("q", 0), powers.get("p", 0))
        out[key] = out.get(key, 0) + complex(t.coeff)
    return out


def edge_decay(psi: NumericState, samples: int = EDGE_SAMPLES) -> float:
    a = np.abs(psi.samples)
    return float(max(a[:samples].max(), a[-samples:].max()))


def commutator_residual(grid: Grid, psi: NumericState) -> float:
    """``||(QP - PQ - i) psi|| / ||psi||``; warns if ``psi`` reaches the grid edges."""
    edge = edge_decay(psi)
    if edge >= EDGE_TOL:
        warnings.warn(
            f"state is {edge:.2e} within {EDGE_SAMPLES} samples of the grid edge; "
            "boundary terms are not suppressed", SchwartzWarning, stacklevel=2)
    Q, P = build_q(grid), build_p(grid)
    v = psi.samples
    r = Q.matrix @ (P.matrix @ v) - P.matrix @ (Q.matrix @ v) - 1j * v
    return float(np.linalg.norm(r) / np.linalg.norm(v))


def hermite_gauss(grid: Grid, n: int) -> NumericState:
    """Unit-norm Hermite-Gauss function via the stable three-term recurrence."""
    if not 0 <= n <= 20:
        raise ValueError("hermite_gauss supports 0 <= n <= 20")
    x = grid.x
    prev = np.zeros_like(x)
    cur = np.pi ** -0.25 * np.exp(-x * x / 2)
    for k in range(n):
        prev, cur = cur, math.sqrt(2 / (k + 1)) * x * cur - math.sqrt(k / (k + 1)) * prev
    return NumericState(grid, cur, normalized=True)


def coherent(grid: Grid, alpha: complex) -> NumericState:
    q0, p0 = math.sqrt(2) * alpha.real, math.sqrt(2) * alpha.imag
    x = grid.x
    psi = np.pi ** -0.25 * np.exp(-(x - q0) ** 2 / 2 + 1j * p0 * x - 1j * q0 * p0 / 2)
    return NumericState(grid, psi, normalized=True)


def density(states, weights=None) -> NumericOperator:
    """Density operator ``sum_k w_k |psi_k><psi_k|``."""
    if isinstance(states, NumericState):
        states = [states]
    weights = [1.0] * len(states) if weights is None else list(weights)
    grid = states[0].grid
    k = np.zeros((grid.n, grid.n), dtype=complex)
    h = np.zeros_like(k)
    for w, s in zip(weights, states):
        k += w * np.outer(s.samples, s.samples.conj())
        sh = s.shifted()
        h += w * np.outer(sh, sh.conj())
    return NumericOperator(grid, k, h)


# ---------------------------------------------------------------------------
# Wigner transform


@dataclass(frozen=True)
class WignerMap:
    """``W[m, l]`` at ``q = x_m``, ``p = p_l``; measure ``dq dp / 2pi``."""

    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def q(self):
        return self.grid.x

    @property
    def p(self):
        return self.grid.p

    def mass(self) -> complex:
        g = self.grid
        return complex(self.values.sum() * g.dx * g.dp / (2 * math.pi))

    def window(self, qmax: float, pmax: float):
        qm = np.abs(self.q) <= qmax
        pm = np.abs(self.p) <= pmax
        return self.values[np.ix_(qm, pm)], self.q[qm], self.p[pm]

    def to_json(self) -> dict:
        return {
            "grid": self.grid.to_json(),
            "meta": self.meta,
            "q": self.q.tolist(),
            "p": self.p.tolist(),
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
            "mass": [self.mass().real, self.mass().imag],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, val in {**self.grid.to_json(), **self.meta}.items():
            buf.write(f"# {key}={val}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "p", "re", "im"])
        for m, qv in enumerate(self.q):
            for l, pv in enumerate(self.p):
                v = self.values[m, l]
                w.writerow([repr(float(qv)), repr(float(pv)), repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()

    def dumps(self, fmt: str = "json") -> str:
        return json.dumps(self.to_json()) if fmt == "json" else self.to_csv()


def wigner(op) -> WignerMap:
    """``W(q, p) = sum_r K(q + r dx/2, q - r dx/2) exp(-i r dx p) dx`` over ``r`` in ``[-n/2, n/2)``.

    Even offsets read the kernel, odd offsets the half-shifted kernel.  ``op``
    may be an operator or a state (taken as the pure density).
    """
    if isinstance(op, NumericState):
        op = density(op)
    if op.half is None:
        raise ValueError("operator has no half-shifted kernel; build it from grid primitives")
    g = op.grid
    n = g.n
    m = np.arange(n)[:, None]
    r = np.arange(-n // 2, n // 2)[None, :]
    s = np.floor_divide(r, 2)
    even = (r % 2 == 0)
    a_even, b_even = (m + s) % n, (m - s) % n
    a_odd, b_odd = (m + s) % n, (m - s - 1) % n
    V = np.where(even, op.kernel[a_even, b_even], op.half[a_odd, b_odd])
    # column index r -> r mod n, then DFT over r gives exp(-2 pi i r l / n) = exp(-i r dx p_l)
    V = np.roll(V, -(n // 2), axis=1)
    W = np.fft.fftshift(np.fft.fft(V, axis=1), axes=1) * g.dx
    return WignerMap(g, W)


# ---------------------------------------------------------------------------
# expectation values and invariance


def moment_numeric(psi: NumericState, n: int) -> float:
    return float(np.sum(psi.grid.x ** n * np.abs(psi.samples) ** 2) * psi.grid.dx)


def trace_numeric(rho: NumericOperator) -> complex:
    return complex(np.trace(rho.kernel) * rho.grid.dx)


def purity_numeric(rho: NumericOperator) -> float:
    return trace_numeric(rho @ rho).real


def hs_norm_numeric(rho: NumericOperator) -> float:
    """Hilbert-Schmidt norm ``sqrt(tr(rho^dag rho))``."""
    return math.sqrt(trace_numeric(rho.dag() @ rho).real)


def transform_matrix(grid: Grid) -> np.ndarray:
    """Forward transform as a unitary matrix on sample vectors (grid measures absorbed)."""
    eye = np.eye(grid.n, dtype=complex)
    scale = math.sqrt(grid.dp / (2 * math.pi) / grid.dx)
    return _forward(grid, eye) * scale


def random_unitary(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def unitary_invariance_numeric(psi: NumericState, phi: NumericState, U: np.ndarray) -> float:
    """``|<phi|psi> - <U phi|U psi>|``; ``U`` must be unitary to 1e-10."""
    err = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 2)
    if err > 1e-10:
        raise ValueError(f"matrix is not unitary (error {err:.2e})")
    a = phi.inner(psi)
    b = NumericState(psi.grid, U @ phi.samples).inner(NumericState(psi.grid, U @ psi.samples))
    return abs(a - b)
