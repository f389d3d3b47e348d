"""
Symplectic maps and change of basis
===================================
"""

# %%
from fractions import Fraction

import numpy as np

from tagcalc import numeric as nm
from tagcalc import normalize, parse, print_expr
from tagcalc.derivations import identity_coefficient, random_rationals, symplectic_check

# a qhat + b phat and c qhat + d phat commute to i (ad - bc).
for a, b, c, d in [(2, 0, 0, Fraction(1, 2)), (1, 0, 0, 2), (1, 1, 0, 1)]:
    out, _ = symplectic_check(a, b, c, d)
    print((a, b, c, d), "->", print_expr(out))

# %%
a, b, c = random_rationals(5, 3)
d = (1 + b * c) / a
print("random symplectic", (a, b, c, d), "->", print_expr(symplectic_check(a, b, c, d)[0]))
print("coefficient:", identity_coefficient(symplectic_check(a, b, c, d)[0]))

# %%
# Inserting a resolution of the identity in either basis leaves sandwiches alone.
plain = normalize(parse("<phi| qhat |psi>"))[0]
for ident in ("int |q><q| dq", "int |p><p| dp/2pi"):
    e = normalize(parse(f"<phi| ({ident}) qhat |psi>"))[0]
    print(ident, "->", print_expr(e), "| same:", e == plain)

# %%
# Numerically, any unitary preserves inner products.
g = nm.Grid(256, 20.0)
phi, psi = nm.hermite_gauss(g, 1), nm.coherent(g, 0.3 + 0.4j)
for U, name in [(nm.transform_matrix(g), "Fourier"), (nm.random_unitary(g.n, 0), "random")]:
    print(f"{name:8} {nm.unitary_invariance_numeric(phi, psi, U):.1e}")

# %%
# Moments are not invariant: the first moment moves under a random unitary.
moved = nm.NumericState(g, nm.random_unitary(g.n, 1) @ psi.samples)
print(np.round([nm.moment_numeric(psi, 1), nm.moment_numeric(moved, 1)], 6))
