import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conical_toric.special_solutions import (CalabiProfile, ExpPoly, NoSolution, calabi_coefficients,
                                             calabi_constraint, calabi_roots, calabi_scan,
                                             nonexistence_certificate, p1_conical_potential)


def test_p1_equation_beta_one():
    phi = p1_conical_potential(1)
    for r in (-2.0, 0.0, 2.0):
        assert abs(phi.hessian(r) - math.exp(-phi.value(r))) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(-20, 20))
def test_p1_equation_any_beta(beta, r):
    phi = p1_conical_potential(beta)
    assert abs(phi.hessian(r) - math.exp(-beta * phi.value(r))) <= 1e-12 * max(1.0, phi.hessian(r))


def test_p1_derivatives_consistent():
    phi = p1_conical_potential(0.5)
    r, h = np.linspace(-5, 5, 21), 1e-5
    assert np.allclose((phi.value(r + h) - phi.value(r - h)) / (2 * h), phi.gradient(r), atol=1e-9)
    assert np.allclose((phi.gradient(r + h) - phi.gradient(r - h)) / (2 * h), phi.hessian(r), atol=1e-9)


def test_p1_moment_image():
    phi = p1_conical_potential(0.5)
    g = phi.gradient(np.linspace(-60, 60, 101))
    assert np.all(np.abs(g) <= 1) and np.all(np.diff(g) >= 0)
    assert g[0] == pytest.approx(-1, abs=1e-12) and g[-1] == pytest.approx(1, abs=1e-12)


def test_p1_cone_angle_rate():
    beta = 0.5
    phi = p1_conical_potential(beta)
    r = np.array([20.0, 30.0, 40.0])
    gap = 1 - phi.gradient(r)
    rates = np.diff(np.log(gap)) / np.diff(r)
    assert np.allclose(rates, -beta, atol=1e-9)


def test_p1_rejects_beta():
    with pytest.raises(ValueError):
        p1_conical_potential(1.5)


def test_constraint_values():
    assert calabi_constraint(0.0) == 0
    assert calabi_constraint(1 / 3) == pytest.approx(2 / 3, abs=1e-15)
    assert calabi_constraint(1.0, 1, 2) == pytest.approx(math.e, abs=1e-14)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0])
def test_profile_solves_ode(alpha):
    prof = calabi_coefficients(alpha)
    assert isinstance(prof, NoSolution)
    p = prof.profile
    x = np.linspace(1, 3, 41)
    assert np.max(p.ode_residual(x)) < 1e-12
    assert abs(p.Y(1.0)) < 1e-14
    # Y(b) is g(alpha) up to a nonvanishing factor
    assert prof.defect == pytest.approx(abs(2 * calabi_constraint(alpha) / (alpha**2 * 3 * math.exp(2 * alpha))),
                                        rel=1e-12)


def test_alpha_zero_limit():
    res = calabi_coefficients(0.0)
    assert isinstance(res, NoSolution)
    assert res.defect == pytest.approx(8 / 3, abs=1e-15)
    assert np.allclose(res.profile.Y(np.array([1.0, 2.0, 3.0])), [0, 1.5, 8 / 3])


def test_roots_none_for_1_3():
    assert calabi_roots(1, 3) == []


def test_roots_1_2_scan_is_empty():
    assert calabi_roots(1, 2) == []
    x = np.linspace(1e-3, 1, 1000)
    assert np.all(calabi_constraint(x, 1, 2) > 0)


def test_scan_ignores_bad_pairs():
    scan = calabi_scan([1, 2], [1, 3], samples=200)
    assert set(scan) == {(1, 3), (2, 3)}
    assert all(v == [] for v in scan.values())


def test_exppoly_derivatives():
    g = ExpPoly({2: (-1, 3), 0: (1, -1)})
    d2 = g.derivative().derivative()
    assert g.at_zero() == 0 and g.derivative().at_zero() == 0
    assert str(d2) == "(8 + 12*alpha)*exp(2*alpha)"
    assert d2.positive_on_nonnegative_axis()
    x = np.linspace(0, 1, 11)
    assert np.allclose(g(x), calabi_constraint(x), atol=1e-14)


def test_certificate():
    cert = nonexistence_certificate(1, 3, samples=10_000)
    assert cert.holds
    assert cert.g_at_0 == 0 and cert.dg_at_0 == 0 and cert.d2g_positive
    assert cert.g_min_sampled > 0 and cert.d2g_min_sampled > 0
    assert cert.summary().startswith("no root in (0,1]; certificate: g(0)=0, g'(0)=0, g''>0")


@settings(max_examples=30, deadline=None)
@given(st.fractions(Fr(1, 10), Fr(5), max_denominator=10), st.fractions(Fr(1, 10), Fr(5), max_denominator=10))
def test_certificate_any_pair(a, b):
    """g'' = k e^{k alpha}(a + b + k b alpha) with k = b - a > 0, so every 0 < a < b is certified."""
    if not a < b:
        return
    cert = nonexistence_certificate(a, b, samples=500)
    assert cert.holds


def test_bad_pairs_raise():
    with pytest.raises(ValueError):
        calabi_roots(2, 1)
    with pytest.raises(ValueError):
        nonexistence_certificate(3, 3)
