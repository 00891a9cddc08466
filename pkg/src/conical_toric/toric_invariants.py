"""Greatest Ricci lower bound, cone angles and limiting divisors of toric Fano manifolds.

Everything is exact. For a Fano polytope with barycenter ``P_c`` the ray from
``P_c`` through the origin leaves the polytope at ``Q = -s* P_c`` and

    R(X) = |OQ| / |P_c Q| = s* / (1 + s*).

The divisor attached to a point ``tau`` is ``D(tau) = sum_j l_j(tau) D_j`` and
the family used by the continuity path is ``tau(alpha) = -alpha/(1-alpha) P_c``.
"""

from dataclasses import dataclass
from fractions import Fraction

from ._exact import as_fraction, as_vector, dot

__all__ = [
    "AlphaOutOfRange", "RIsOne", "InternalInconsistency",
    "FanoReport", "ToricDivisorClass", "ConeAngles",
    "greatest_ricci_lower_bound", "tau_of_alpha", "divisor_of_point",
    "effectiveness_window", "cone_angles", "limiting_divisor",
]


class AlphaOutOfRange(ValueError):
    pass


class RIsOne(ValueError):
    """Raised when a quantity only makes sense for R(X) < 1."""


class InternalInconsistency(RuntimeError):
    pass


@dataclass(frozen=True)
class FanoReport:
    P_c: tuple
    Q: tuple | None
    R: Fraction
    s_star: Fraction | None
    argmin_facets: frozenset

    @property
    def barycenter_is_origin(self):
        return all(c == 0 for c in self.P_c)


@dataclass(frozen=True)
class ToricDivisorClass:
    coeffs: tuple

    @property
    def effective(self):
        return all(c >= 0 for c in self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def scaled(self, factor):
        factor = as_fraction(factor)
        return ToricDivisorClass(tuple(factor * c for c in self.coeffs))


@dataclass(frozen=True)
class ConeAngles:
    beta: tuple
    alpha: Fraction


def greatest_ricci_lower_bound(P):
    """Exact ``R(X_P)`` from the barycenter of a Fano polytope."""
    P_c = P.barycenter
    if all(c == 0 for c in P_c):
        return FanoReport(P_c, None, Fraction(1), None, frozenset())
    candidates = {}
    for j, v in enumerate(P.normals):
        s = dot(v, P_c)
        if s > 0:
            candidates[j] = 1 / s
    if not candidates:
        raise InternalInconsistency("no facet faces the barycenter direction")
    s_star = min(candidates.values())
    argmin = frozenset(j for j, s in candidates.items() if s == s_star)
    Q = tuple(-s_star * c for c in P_c)
    return FanoReport(P_c, Q, s_star / (1 + s_star), s_star, argmin)


def tau_of_alpha(report, alpha):
    """``tau = -alpha/(1-alpha) P_c``; ``alpha = 1`` is only legal when ``P_c = 0``."""
    alpha = as_fraction(alpha)
    if alpha < 0 or alpha > 1:
        raise AlphaOutOfRange(f"alpha={alpha} outside [0, 1]")
    if alpha == 1:
        if not report.barycenter_is_origin:
            raise AlphaOutOfRange("alpha = 1 requires the barycenter at the origin")
        return tuple(Fraction(0) for _ in report.P_c)
    k = alpha / (1 - alpha)
    return tuple(-k * c for c in report.P_c)


def divisor_of_point(P, tau):
    """``D(tau)`` with ``coeffs[j] = l_j(tau)``; effective iff ``tau`` lies in the closed polytope."""
    tau = as_vector(tau)
    if len(tau) != P.dim:
        raise ValueError("dimension mismatch")
    return ToricDivisorClass(P.evaluate(tau))


def effectiveness_window(report, P=None, eps=Fraction(1, 10**6)):
    """Closed interval of alpha for which ``D(tau(alpha))`` is effective.

    When the polytope is supplied the window edge is checked directly:
    ``D(tau(R))`` must be effective and ``D(tau(R + eps))`` must not be.
    """
    if P is not None and report.R < 1:
        inside = divisor_of_point(P, tau_of_alpha(report, report.R))
        beyond = min(report.R + as_fraction(eps), (1 + report.R) / 2)
        outside = divisor_of_point(P, tau_of_alpha(report, beyond))
        if not inside.effective or outside.effective:
            raise InternalInconsistency("effectiveness changes away from alpha = R")
    return (Fraction(0), report.R)


def cone_angles(report, P, alpha):
    """``beta_j = l_j(P_c) * alpha`` (the Fano offsets make ``l_j(0) = 1``)."""
    alpha = as_fraction(alpha)
    if not 0 < alpha <= 1:
        raise AlphaOutOfRange(f"alpha={alpha} outside (0, 1]")
    values = P.evaluate(report.P_c)
    zero = P.evaluate((0,) * P.dim)
    return ConeAngles(tuple(lv / l0 * alpha for lv, l0 in zip(values, zero)), alpha)


def limiting_divisor(report, P):
    """``D_P = sum_j (1 - beta_j) / (1 - R) D_j`` with the angles taken at ``alpha = R``."""
    if report.R == 1:
        raise RIsOne("R(X) = 1: the limit is a smooth Kahler-Einstein metric, no divisor")
    angles = cone_angles(report, P, report.R)
    return ToricDivisorClass(tuple((1 - b) / (1 - report.R) for b in angles.beta))
