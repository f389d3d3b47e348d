"""
Weyl symbols and Wigner maps
============================

The symbolic Weyl symbol of an operator and the numeric Wigner map of its
matrix should agree on the interior of the grid.
"""

# %%
import numpy as np

from tagcalc import numeric as nm
from tagcalc import parse, print_expr
from tagcalc.checks import symbol_wigner_error
from tagcalc.derivations import make_ladders, weyl_quantize, weyl_symbol

A, Ad = make_ladders()
print("W[ahat] =", print_expr(weyl_symbol(A)))
print("W[adag] =", print_expr(weyl_symbol(Ad)))
print("quantize(q*p) =", print_expr(weyl_quantize(parse("q*p"))))

# %%
g = nm.Grid(512, 20.0)
s = weyl_symbol(A)
print(f"symbol vs numeric Wigner of ahat: {symbol_wigner_error(g, s, 5, 5):.1e}")

# %%
# Vacuum: W = 2 exp(-q^2 - p^2) with the 2pi pairing used throughout.
W = nm.wigner(nm.hermite_gauss(g, 0))
vals, q, p = W.window(4, 4)
err = np.abs(vals - 2 * np.exp(-q[:, None] ** 2 - p[None, :] ** 2)).max()
print(f"vacuum error {err:.1e}, mass {W.mass().real:.12f}")

# %%
# Excited states go negative near the origin.
for k in (1, 2, 3):
    Wk = nm.wigner(nm.hermite_gauss(g, k))
    i0, j0 = g.n // 2, g.n // 2
    print(f"psi{k}: W(0,0) = {Wk.values[i0, j0].real:+.6f} (expect {2 * (-1) ** k:+d})")

# %%
# A mixture has purity below one.
rho = nm.density([nm.hermite_gauss(g, 0), nm.hermite_gauss(g, 1)], [0.5, 0.5])
print("purity", round(nm.purity_numeric(rho), 10), "hs norm", round(nm.hs_norm_numeric(rho), 10))
