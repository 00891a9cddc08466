"""Greatest Ricci lower bounds across the built-in catalog.

For each toric Fano surface or threefold we print the barycenter, R(X),
the cone angles a conical Kahler-Einstein metric would need at alpha = R,
and, when R < 1, the divisor the metrics degenerate onto.
"""

from fractions import Fraction

from conical_toric import CATALOG, analyze, greatest_ricci_lower_bound, tau_of_alpha, divisor_of_point
from conical_toric.catalog import fmt_fraction

for name, entry in CATALOG.items():
    rep = analyze(entry)
    print(f"{name:>6}  R = {fmt_fraction(rep.fano.R):<18} P_c = {tuple(str(c) for c in rep.fano.P_c)}")
    if rep.limiting is not None:
        print(f"{'':8}angles at R: {[str(b) for b in rep.angles.beta]}")
        print(f"{'':8}limiting divisor: {[str(c) for c in rep.limiting.coeffs]}")

# Walking alpha up to R on Bl1 P^2: D(tau(alpha)) stays effective until the
# facet (1, 1) coefficient hits zero exactly at alpha = 6/7.
P = CATALOG["bl1p2"].polytope
rep = greatest_ricci_lower_bound(P)
print("\nBl1 P^2, D(tau(alpha)) as alpha approaches R:")
for alpha in (Fraction(1, 2), Fraction(4, 5), Fraction(6, 7), Fraction(7, 8)):
    D = divisor_of_point(P, tau_of_alpha(rep, alpha))
    print(f"  alpha = {str(alpha):>4}: {[str(c) for c in D.coeffs]}  effective={D.effective}")
