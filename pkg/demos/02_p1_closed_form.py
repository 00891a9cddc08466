"""The conical metric on P^1 against the finite-difference solver.

The equation phi'' = exp(-alpha phi) on the line has an explicit solution
with moment map tanh(alpha rho / 2). The hybrid scheme keeps the analytic
Hessian of the reference and differences only the correction; here the
reference is already the solution, so the error sits at rounding level.
The fully discrete scheme shows the expected h^2 convergence instead.
"""

import numpy as np

from conical_toric import CATALOG, RhoGrid, SolverConfig, continuity_solve, greatest_ricci_lower_bound
from conical_toric.special_solutions import p1_conical_potential

P = CATALOG["p1"].polytope
rep = greatest_ricci_lower_bound(P)
exact = p1_conical_potential(0.5)

print(f"{'scheme':>9} {'M':>5} {'sup err (mod const)':>20} {'ratio':>6}")
for scheme in ("hybrid", "discrete"):
    prev = None
    for M in (257, 513, 1025, 2049):
        grid = RhoGrid(1, 16.0, M)
        phi, trace = continuity_solve(P, rep, SolverConfig(alpha=0.5, hessian=scheme), grid)
        window = np.abs(grid.axis) <= 8
        diff = (phi.values - exact.value(grid.axis))[window]
        err = (diff.max() - diff.min()) / 2
        ratio = f"{prev / err:6.2f}" if prev else ""
        print(f"{scheme:>9} {M:5d} {err:20.3e} {ratio:>6}")
        prev = err
