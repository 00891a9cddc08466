from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conical_toric.catalog import CATALOG
from conical_toric.guillemin import (KahlerPotentialFn, SymplecticPotential, inverse_legendre_transform,
                                     legendre_extended, legendre_potential, legendre_transform, moment_map,
                                     verify_duality, weighted_guillemin_potential)
from conical_toric.polytope_core import FacetPresentation
from conical_toric.toric_invariants import cone_angles, greatest_ricci_lower_bound

UNIT = FacetPresentation(((1,), (-1,)), (0, 1))  # [0, 1]: l1 = x, l2 = 1 - x
SURFACES = ["p2", "p1xp1", "bl1p2", "bl2p2", "bl3p2"]


def interval_u(b1, b2):
    return SymplecticPotential(UNIT, (b1, b2))


def test_interval_closed_form():
    u = interval_u(Fr(1, 3), Fr(3, 4))
    x = np.linspace(0.05, 0.95, 19)[:, None]
    want = 3 * x * np.log(x) + 4 / 3 * (1 - x) * np.log(1 - x)
    assert np.allclose(u.value(x), want[:, 0], atol=1e-14)


def test_classical_transform_at_zero():
    phi, x = legendre_transform(interval_u(1, 1), np.zeros((1, 1)))
    assert abs(phi[0] - np.log(2)) < 1e-14
    assert abs(x[0, 0] - 0.5) < 1e-14


def test_classical_transform_closed_form():
    rho = np.linspace(-30, 30, 121)[:, None]
    phi, x = legendre_transform(interval_u(1, 1), rho)
    assert np.max(np.abs(phi - np.logaddexp(0, rho[:, 0]))) < 1e-12
    assert np.max(np.abs(x[:, 0] - 1 / (1 + np.exp(-rho[:, 0])))) < 1e-12


@pytest.mark.parametrize("b1, b2", [(1, 1), (0.5, 0.5), (Fr(1, 3), Fr(3, 4))])
def test_interval_inverse_map(b1, b2):
    """rho(x) = (1/b1 - 1/b2) + log(x^{1/b1} / (1-x)^{1/b2}) is inverted pointwise."""
    b1f, b2f = float(b1), float(b2)
    xs = np.linspace(0.02, 0.98, 49)
    rho = (1 / b1f - 1 / b2f) + np.log(xs ** (1 / b1f) / (1 - xs) ** (1 / b2f))
    _, x = legendre_transform(interval_u(b1, b2), rho[:, None])
    assert np.max(np.abs(x[:, 0] - xs)) < 1e-12


def test_gradient_round_trip():
    rng = np.random.default_rng(7)
    P = CATALOG["bl1p2"].polytope
    u = weighted_guillemin_potential(P, cone_angles(greatest_ricci_lower_bound(P), P, Fr(6, 7)))
    # interior samples as convex combinations of vertices
    w = rng.dirichlet(np.ones(len(u.vertices)), size=50)
    x0 = 0.9 * w @ u.vertices + 0.1 * u.centre
    _, x = legendre_transform(u, u.gradient(x0))
    assert np.max(np.abs(x - x0)) < 1e-10


def test_weights_from_angles():
    P = CATALOG["bl1p2"].polytope
    u = weighted_guillemin_potential(P, cone_angles(greatest_ricci_lower_bound(P), P, Fr(6, 7)))
    assert np.allclose(1 / u.beta, [14 / 13, 14 / 13, 7 / 5, 1])
    assert u.is_strictly_convex()


def test_vertex_asymptotics():
    u = SymplecticPotential(CATALOG["p2"].polytope, (1, 1, 1))
    _, x = legendre_transform(u, np.array([[30.0, 0.0]]))
    assert np.max(np.abs(x[0] - [2, -1])) < 1e-6


def test_moment_map_matches_maximizer():
    u = SymplecticPotential(CATALOG["bl2p2"].polytope, (1,) * 5)
    rho = np.random.default_rng(1).normal(0, 3, (20, 2))
    phi = legendre_potential(u)
    _, x = legendre_transform(u, rho)
    assert np.allclose(moment_map(phi, rho), x, atol=1e-13)
    fd = KahlerPotentialFn(phi.value, dim=2)  # no analytic gradient: central differences
    assert np.allclose(moment_map(fd, rho), x, atol=1e-7)


@pytest.mark.parametrize("name", SURFACES)
def test_fenchel_young_on_gaussian_samples(name):
    P = CATALOG[name].polytope
    u = SymplecticPotential(P, (1,) * len(P.normals))
    rho = np.random.default_rng(3).normal(0, 10, (100, 2))
    assert verify_duality(u, legendre_potential(u), rho) < 1e-9


def test_fenchel_young_detects_broken_pair():
    u = SymplecticPotential(CATALOG["p2"].polytope, (1, 1, 1))
    phi = legendre_potential(u)
    bad = KahlerPotentialFn(lambda r: phi.value(r) + 0.1 * np.sum(np.atleast_2d(r) ** 2, axis=1),
                            lambda r: phi.gradient(r) + 0.2 * np.atleast_2d(r), dim=2)
    rho = np.random.default_rng(4).normal(0, 0.3, (100, 2))
    assert verify_duality(u, bad, rho) > 1e-3


def test_fenchel_young_interval_equal_weights():
    u = interval_u(Fr(1, 2), Fr(1, 2))
    rho = np.random.default_rng(5).normal(0, 5, (100, 1))
    assert verify_duality(u, legendre_potential(u), rho) < 1e-9


@pytest.mark.parametrize("name", SURFACES)
def test_involution(name):
    P = CATALOG[name].polytope
    rep = greatest_ricci_lower_bound(P)
    u = SymplecticPotential(P, cone_angles(rep, P, rep.R if rep.R < 1 else Fr(9, 10)))
    phi = legendre_potential(u)
    rng = np.random.default_rng(11)
    x = 0.8 * rng.dirichlet(np.ones(len(u.vertices)), size=100) @ u.vertices + 0.2 * u.centre
    value, _ = inverse_legendre_transform(phi, x)
    assert np.max(np.abs(value - u.value(x))) < 1e-8


def test_extended_precision_agrees():
    u = SymplecticPotential(CATALOG["bl1p2"].polytope, (1, 1, 1, 1))
    rho = np.random.default_rng(2).normal(0, 2, (30, 2))
    phi, x = legendre_transform(u, rho)
    phi_ld, x_ld, hess, logdet = legendre_extended(u, rho)
    assert np.max(np.abs(phi_ld - phi)) < 1e-12
    assert np.max(np.abs(x_ld - x)) < 1e-12
    assert np.allclose(np.log(np.linalg.det(hess.astype(float))), logdet.astype(float), atol=1e-10)


def test_hessian_duality():
    """Hess phi(rho) = (Hess u(x))^{-1} at x = grad phi(rho)."""
    u = SymplecticPotential(CATALOG["bl1p2"].polytope, (1, 1, 1, 1))
    phi = legendre_potential(u)
    rho = np.random.default_rng(6).normal(0, 1.5, (30, 2))
    x = phi.gradient(rho)
    prod = np.einsum("mab,mbc->mac", phi.hessian(rho), u.hessian(x))
    assert np.max(np.abs(prod - np.eye(2))) < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.floats(-40, 40), st.floats(-40, 40))
def test_moment_image_inside_polytope(r1, r2):
    u = SymplecticPotential(CATALOG["bl1p2"].polytope, (1, 1, 1, 1))
    _, x = legendre_transform(u, np.array([[r1, r2]]))
    assert np.all(u.A @ x[0] + u.b >= -1e-12)


def test_rejects_bad_weights():
    with pytest.raises(ValueError):
        SymplecticPotential(CATALOG["p2"].polytope, (1, 1))
    with pytest.raises(ValueError):
        SymplecticPotential(CATALOG["p2"].polytope, (1, 0, 1))
