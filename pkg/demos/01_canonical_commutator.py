"""
The canonical commutator, symbolically
======================================

Build the quadrature operators from their kernels and let the rewriter
reduce [qhat, phat] to a multiple of the identity.
"""

# %%
from tagcalc import normalize, parse, print_expr
from tagcalc.derivations import commutator, make_quadratures, run_derivation

Q, P = make_quadratures()
print("qhat =", print_expr(Q))
print("phat =", print_expr(normalize(P)[0]))

# %%
# The Fourier pairing and completeness are the two axioms everything rests on.
for src in ["<q|p>", "<p|p'>", "int |q><q| dq |psi>", "int |p><p| dp/2pi |psi>"]:
    print(f"{src:28} -> {print_expr(normalize(parse(src))[0])}")

# %%
# In distributional mode the delta' calculus does the work directly.
out, report = commutator(Q, P, "distributional")
print("[qhat, phat] =", print_expr(out))
print("rules used:", sorted(set(report.rules())))

# %%
# The same result through the canned derivation, with every side check.
d = run_derivation("qp-commutator")
print(d.name, "PASS" if d.ok else "FAIL")
for label, (got, want) in d.parts.items():
    print(f"  {label:8} {print_expr(got):8} expected {print_expr(want)}")

# %%
# Ladder operators follow from the quadratures.
d = run_derivation("ladder-commutator")
print("[ahat, adag] =", print_expr(d.result))
