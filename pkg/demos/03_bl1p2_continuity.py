"""Following the continuity path on Bl1 P^2 towards R = 6/7.

Each alpha < R gives a conical metric; we solve on a 97 x 97 grid over
[-12, 12]^2 and watch the pushforward mass, the barycenter identity and the
Ding-type functional F against the reference. The final Newton steps slow
down as t nears alpha: translations rho -> rho + s are an exact near-kernel
of the linearization there.
"""

from fractions import Fraction

from conical_toric import (CATALOG, RhoGrid, SolverConfig, barycenter_identity_check, continuity_solve,
                           greatest_ricci_lower_bound, ma_residual, pushforward_mass_check, reference_data,
                           toric_functionals)

P = CATALOG["bl1p2"].polytope
rep = greatest_ricci_lower_bound(P)
grid = RhoGrid(2, 12.0, 97)
print(f"R = {rep.R}")
for alpha in (Fraction(1, 2), Fraction(7, 10), Fraction(4, 5)):
    ref = reference_data(P, rep, alpha, grid)
    phi, trace = continuity_solve(P, rep, SolverConfig(alpha=alpha), grid, reference=ref)
    mass, vol = pushforward_mass_check(phi)
    I, J, F = toric_functionals(phi, ref[0], float(alpha), rep.P_c)
    print(f"\nalpha = {alpha}: {len(trace.steps)} steps, {trace.elapsed:.1f} s")
    print(f"  residual {ma_residual(phi, rep.P_c, alpha):.2e}, mass {mass:.5f} / {vol}, "
          f"barycenter defect {barycenter_identity_check(phi, alpha, rep.P_c):.2e}")
    print(f"  I = {I:.4e}, J = {J:.4e}, F = {F:.4e}")
