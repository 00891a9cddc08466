from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from conical_toric.catalog import CATALOG
from conical_toric.polytope_core import FanoPolytope
from conical_toric.toric_invariants import (AlphaOutOfRange, RIsOne, cone_angles, divisor_of_point,
                                            effectiveness_window, greatest_ricci_lower_bound,
                                            limiting_divisor, tau_of_alpha)

BL1 = FanoPolytope.from_normals(((1, 0), (0, 1), (-1, -1), (1, 1)))
BL2 = CATALOG["bl2p2"].polytope


def grid_oracle(P, denominator=700):
    """Largest alpha = k/denominator whose tau(alpha) stays in the closed polytope."""
    Pc = P.barycenter
    best = Fr(0)
    for k in range(1, denominator):
        a = Fr(k, denominator)
        tau = tuple(-a / (1 - a) * c for c in Pc)
        if all(l >= 0 for l in P.evaluate(tau)):
            best = a
    return best


def test_bl1_R():
    rep = greatest_ricci_lower_bound(BL1)
    assert rep.R == Fr(6, 7)
    assert rep.P_c == (Fr(1, 12), Fr(1, 12))
    assert rep.Q == (Fr(-1, 2), Fr(-1, 2))
    assert rep.argmin_facets == {3}


@pytest.mark.parametrize("name", ["p1", "p2", "p1xp1", "bl3p2", "p3"])
def test_symmetric_R_is_one(name):
    rep = greatest_ricci_lower_bound(CATALOG[name].polytope)
    assert rep.R == 1 and rep.barycenter_is_origin


def test_bl2_against_grid_oracle():
    R = greatest_ricci_lower_bound(BL2).R
    assert R == Fr(21, 25)
    lo = grid_oracle(BL2)
    assert lo <= R < lo + Fr(1, 700)


def test_tau():
    rep = greatest_ricci_lower_bound(BL1)
    assert tau_of_alpha(rep, 0) == (0, 0)
    assert tau_of_alpha(rep, Fr(6, 7)) == (Fr(-1, 2), Fr(-1, 2))
    assert tau_of_alpha(rep, Fr(1, 2)) == (Fr(-1, 12), Fr(-1, 12))
    with pytest.raises(AlphaOutOfRange):
        tau_of_alpha(rep, 1)
    with pytest.raises(TypeError):
        tau_of_alpha(rep, 0.5)


def test_divisor_of_point():
    assert divisor_of_point(BL1, (0, 0)).coeffs == (1, 1, 1, 1)
    d = divisor_of_point(BL1, (Fr(-1, 2), Fr(-1, 2)))
    assert d.coeffs == (Fr(1, 2), Fr(1, 2), 2, 0) and d.effective
    d = divisor_of_point(BL1, (-1, -1))
    assert d.coeffs == (0, 0, 3, -1) and not d.effective


def test_windows():
    assert effectiveness_window(greatest_ricci_lower_bound(BL1), BL1) == (0, Fr(6, 7))
    p2 = CATALOG["p2"].polytope
    assert effectiveness_window(greatest_ricci_lower_bound(p2), p2) == (0, 1)
    rep = greatest_ricci_lower_bound(BL2)
    assert effectiveness_window(rep, BL2) == (0, rep.R)


@pytest.mark.parametrize("name", ["bl1p2", "bl2p2"])
def test_window_edge_exact(name):
    P = CATALOG[name].polytope
    rep = greatest_ricci_lower_bound(P)
    eps = Fr(1, 10**9)
    assert divisor_of_point(P, tau_of_alpha(rep, rep.R)).effective
    assert min(divisor_of_point(P, tau_of_alpha(rep, rep.R)).coeffs) == 0
    assert divisor_of_point(P, tau_of_alpha(rep, rep.R - eps)).effective
    assert not divisor_of_point(P, tau_of_alpha(rep, rep.R + eps)).effective


def test_cone_angles():
    rep = greatest_ricci_lower_bound(BL1)
    assert cone_angles(rep, BL1, Fr(6, 7)).beta == (Fr(13, 14), Fr(13, 14), Fr(5, 7), 1)
    low = cone_angles(rep, BL1, Fr(7, 12)).beta
    assert low == (Fr(91, 144), Fr(91, 144), Fr(35, 72), Fr(49, 72))
    assert all(b < 1 for b in low)
    p2 = CATALOG["p2"].polytope
    assert cone_angles(greatest_ricci_lower_bound(p2), p2, Fr(2, 3)).beta == (Fr(2, 3),) * 3
    with pytest.raises(AlphaOutOfRange):
        cone_angles(rep, BL1, 0)


def test_limiting_divisor():
    rep = greatest_ricci_lower_bound(BL1)
    D = limiting_divisor(rep, BL1)
    assert D.coeffs == (Fr(1, 2), Fr(1, 2), 2, 0)
    assert sorted(D.coeffs) == [0, Fr(1, 2), Fr(1, 2), 2]
    beta = cone_angles(rep, BL1, rep.R).beta
    assert D.scaled(1 - rep.R).coeffs == tuple(1 - b for b in beta)
    with pytest.raises(RIsOne):
        limiting_divisor(greatest_ricci_lower_bound(CATALOG["p2"].polytope), CATALOG["p2"].polytope)


def test_bl2_limiting_by_hand():
    rep = greatest_ricci_lower_bound(BL2)
    hand = tuple((1 - l * rep.R) / (1 - rep.R) for l in BL2.evaluate(rep.P_c))
    assert limiting_divisor(rep, BL2).coeffs == hand
    assert min(hand) == 0


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(CATALOG)), st.fractions(Fr(1, 100), Fr(99, 100), max_denominator=100))
def test_tau_angle_identity(name, alpha):
    """(1 - alpha) l_j(tau(alpha)) = 1 - beta_j exactly."""
    P = CATALOG[name].polytope
    rep = greatest_ricci_lower_bound(P)
    lhs = tuple((1 - alpha) * l for l in P.evaluate(tau_of_alpha(rep, alpha)))
    rhs = tuple(1 - b for b in cone_angles(rep, P, alpha).beta)
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(st.fractions(Fr(1, 100), Fr(1), max_denominator=101))
def test_effective_iff_alpha_le_R(alpha):
    rep = greatest_ricci_lower_bound(BL1)
    if alpha == 1:
        return
    assert divisor_of_point(BL1, tau_of_alpha(rep, alpha)).effective == (alpha <= rep.R)
