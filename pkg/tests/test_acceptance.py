"""One PASS/FAIL line per acceptance criterion, at the stated tolerances."""

import time
from fractions import Fraction as Fr

import numpy as np
import pytest

from conical_toric.catalog import CATALOG
from conical_toric.chern_numbers import miyaoka_yau_check, toric_chern_numbers
from conical_toric.guillemin import SymplecticPotential, inverse_legendre_transform, legendre_potential, verify_duality
from conical_toric.ma_solver import (RhoGrid, SolverConfig, barycenter_identity_check, continuity_solve,
                                     ma_residual, pushforward_mass_check, reference_data, toric_functionals)
from conical_toric.polytope_core import FanoPolytope
from conical_toric.special_solutions import nonexistence_certificate, p1_conical_potential
from conical_toric.toric_invariants import (cone_angles, divisor_of_point, effectiveness_window,
                                            greatest_ricci_lower_bound, limiting_divisor, tau_of_alpha)

SURFACES = ["p2", "p1xp1", "bl1p2", "bl2p2", "bl3p2"]


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return emit


def bump(grid, centre, radius, amp):
    r2 = np.sum((grid.coords - np.asarray(centre)) ** 2, axis=-1) / radius**2
    out = np.zeros(grid.shape)
    inside = r2 < 1
    out[inside] = amp * np.e * np.exp(-1 / (1 - r2[inside]))
    return out


def test_criterion_1_R_bl1(report):
    start = time.perf_counter()
    R = greatest_ricci_lower_bound(FanoPolytope.from_normals(((1, 0), (0, 1), (-1, -1), (1, 1)))).R
    elapsed = time.perf_counter() - start
    report(1, R == Fr(6, 7) and elapsed < 1, f"R(Bl1 P2) = {R}, {elapsed * 1e3:.1f} ms")


def test_criterion_2_limiting_divisor(report):
    P = CATALOG["bl1p2"].polytope
    D = limiting_divisor(greatest_ricci_lower_bound(P), P)
    on_infinity = D.coeffs[P.normals.index((-1, -1))]
    ok = sorted(D.coeffs) == [0, Fr(1, 2), Fr(1, 2), 2] and on_infinity == 2
    report(2, ok, f"coefficients {tuple(str(c) for c in D.coeffs)} on {P.normals}")


def test_criterion_3_R_one(report):
    Rs = {name: greatest_ricci_lower_bound(CATALOG[name].polytope).R for name in
          ("p1", "p2", "p1xp1", "bl3p2", "p3")}
    report(3, all(R == 1 for R in Rs.values()), ", ".join(f"{k}: {v}" for k, v in Rs.items()))


def test_criterion_4_chern(report):
    d = {name: toric_chern_numbers(CATALOG[name].polytope) for name in ("p2", "bl1p2", "p1xp1", "p3")}
    pairs = {name: (c.c1n, c.c2c1) for name, c in d.items()}
    my_p2, my_p3 = miyaoka_yau_check(d["p2"], 1), miyaoka_yau_check(d["p3"], 1)
    ok = (pairs == {"p2": (9, 3), "bl1p2": (8, 4), "p1xp1": (8, 4), "p3": (64, 24)}
          and my_p2.lhs == my_p2.rhs == Fr(9, 3) and my_p3.lhs == my_p3.rhs == Fr(3, 8) * 64)
    shown = ", ".join(f"{k}: ({a}, {b})" for k, (a, b) in pairs.items())
    report(4, ok, f"(c1^n, c2.c1^(n-2)) {shown}; MY p2 {my_p2.lhs} = {my_p2.rhs}, p3 {my_p3.lhs} = {my_p3.rhs}")


def _p1_error(M, hessian):
    P = CATALOG["p1"].polytope
    rep = greatest_ricci_lower_bound(P)
    grid = RhoGrid(1, 16.0, M)
    phi, _ = continuity_solve(P, rep, SolverConfig(alpha=0.5, hessian=hessian), grid)
    window = np.abs(grid.axis) <= 8
    diff = (phi.values - p1_conical_potential(0.5).value(grid.axis))[window]
    return (diff.max() - diff.min()) / 2


def test_criterion_5_p1_closed_form(report):
    start = time.perf_counter()
    lines, ok = [], False
    for hessian in ("hybrid", "discrete"):
        e1, e2 = _p1_error(513, hessian), _p1_error(1025, hessian)
        ratio = e1 / e2
        passes = e1 <= 1e-6 and 3.5 <= ratio <= 4.5
        ok |= passes
        lines.append(f"{hessian}: err(513) = {e1:.3e}, err(513)/err(1025) = {ratio:.2f}")
    elapsed = time.perf_counter() - start
    report(5, ok and elapsed < 10, "; ".join(lines) + f"; {elapsed:.2f} s")


def test_criterion_6_p2_solver(report):
    start = time.perf_counter()
    P = CATALOG["p2"].polytope
    rep = greatest_ricci_lower_bound(P)
    phi, trace = continuity_solve(P, rep, SolverConfig(alpha=0.9), RhoGrid(2, 12.0, 129))
    elapsed = time.perf_counter() - start
    res = ma_residual(phi, rep.P_c, 0.9)
    mass, target = pushforward_mass_check(phi)
    bary = barycenter_identity_check(phi, 0.9, rep.P_c)
    ok = res <= 1e-8 and abs(mass - 4.5) <= 1e-2 and bary <= 1e-3 and elapsed < 300
    report(6, ok, f"residual {res:.2e}, mass {mass:.6f} (target 9/2), barycenter defect {bary:.2e}, "
                  f"{elapsed:.1f} s")


def test_criterion_7_certificate(report):
    start = time.perf_counter()
    cert = nonexistence_certificate(1, 3, samples=10_000)
    elapsed = time.perf_counter() - start
    ok = (cert.holds and cert.g_at_0 == 0 and cert.dg_at_0 == 0 and cert.d2g_min_sampled > 0
          and cert.g_min_sampled > 0 and elapsed < 1)
    report(7, ok, f"g(0) = {cert.g_at_0}, g'(0) = {cert.dg_at_0}, min g'' = {cert.d2g_min_sampled:.3g}, "
                  f"min g on [1e-3, 1] = {cert.g_min_sampled:.3e}, {elapsed * 1e3:.1f} ms")


def test_criterion_8_property_suites(report):
    rng = np.random.default_rng(2024)
    involution, fenchel = 0.0, 0.0
    for name in SURFACES:
        P = CATALOG[name].polytope
        rep = greatest_ricci_lower_bound(P)
        u = SymplecticPotential(P, cone_angles(rep, P, min(rep.R, Fr(9, 10))))
        phi = legendre_potential(u)
        x = 0.8 * rng.dirichlet(np.ones(len(u.vertices)), size=100) @ u.vertices + 0.2 * u.centre
        value, _ = inverse_legendre_transform(phi, x)
        involution = max(involution, float(np.max(np.abs(value - u.value(x)))))
        fenchel = max(fenchel, verify_duality(u, phi, rng.normal(0, 5, (100, 2))))
    identity = True
    for name, entry in CATALOG.items():
        P = entry.polytope
        rep = greatest_ricci_lower_bound(P)
        for alpha in (Fr(1, 7), Fr(1, 2), Fr(5, 6)):
            lhs = tuple((1 - alpha) * l for l in P.evaluate(tau_of_alpha(rep, alpha)))
            identity &= lhs == tuple(1 - b for b in cone_angles(rep, P, alpha).beta)
    window = True
    for name in ("bl1p2", "bl2p2"):
        P = CATALOG[name].polytope
        rep = greatest_ricci_lower_bound(P)
        eps = Fr(1, 10**12)
        window &= effectiveness_window(rep, P) == (0, rep.R)
        window &= divisor_of_point(P, tau_of_alpha(rep, rep.R)).effective
        window &= divisor_of_point(P, tau_of_alpha(rep, rep.R - eps)).effective
        window &= not divisor_of_point(P, tau_of_alpha(rep, rep.R + eps)).effective
    ok = involution < 1e-8 and fenchel < 1e-9 and identity and window
    report(8, ok, f"involution defect {involution:.2e}, Fenchel-Young defect {fenchel:.2e}, "
                  f"angle identity {'exact' if identity else 'BROKEN'}, window edge {'exact' if window else 'BROKEN'}")


def test_criterion_9_functionals(report):
    rng = np.random.default_rng(9)
    # normalization on 0 and constants
    P1 = CATALOG["p1"].polytope
    rep1 = greatest_ricci_lower_bound(P1)
    grid1 = RhoGrid(1, 16.0, 513)
    ref1 = reference_data(P1, rep1, Fr(1, 2), grid1)
    zero = 0.0
    for c in (0.0, 1.5, -4.0):
        zero = max(zero, *map(abs, toric_functionals(ref1[0].added(np.zeros(grid1.shape), c), ref1[0], 0.5)))
    # I-J bounds in 1-D, n = 1: I/2 <= J <= I/2
    bounds = True
    for _ in range(20):
        psi = bump(grid1, (rng.uniform(-4, 4),), rng.uniform(1, 5), rng.uniform(-0.1, 0.1))
        I, J, _ = toric_functionals(ref1[0].perturbed(psi), ref1[0], 0.5)
        bounds &= 0 <= I / 2 <= J + 1e-14 and J <= I / 2 + 1e-14
    # local minimality of F at the Bl1 P^2 solution, alpha = 4/5 < 6/7
    P = CATALOG["bl1p2"].polytope
    rep = greatest_ricci_lower_bound(P)
    grid = RhoGrid(2, 10.0, 81)
    ref = reference_data(P, rep, Fr(4, 5), grid)
    phi, _ = continuity_solve(P, rep, SolverConfig(alpha=0.8), grid, reference=ref)
    F0 = toric_functionals(phi, ref[0], 0.8, rep.P_c)[2]
    gaps, convex = [], True
    for _ in range(20):
        pert = phi.perturbed(bump(grid, rng.uniform(-1.5, 1.5, 2), rng.uniform(1, 2), 1e-2 * rng.choice([-1, 1])))
        convex &= bool(np.all(pert.min_eigenvalue() > 0))
        gaps.append(toric_functionals(pert, ref[0], 0.8, rep.P_c)[2] - F0)
    ok = zero < 1e-10 and bounds and convex and min(gaps) > 0
    report(9, ok, f"max |I|,|J|,|F| on constants {zero:.1e}; 1-D I/J bounds {'hold' if bounds else 'FAIL'} "
                  f"on 20 samples; min F(perturbed) - F(solution) = {min(gaps):.3e} over 20 "
                  f"convexity-preserving bumps (convex: {convex})")
