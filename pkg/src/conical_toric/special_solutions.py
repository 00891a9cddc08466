"""Closed-form conical solutions and the Calabi-symmetry ODE on Bl1 P^2."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .guillemin import KahlerPotentialFn

__all__ = [
    "NoSolution", "CertificateFailed", "CalabiProfile", "ExpPoly", "Certificate",
    "p1_conical_potential", "calabi_constraint", "calabi_coefficients",
    "calabi_roots", "calabi_scan", "nonexistence_certificate",
]


class CertificateFailed(RuntimeError):
    pass


def p1_conical_potential(beta):
    """``phi = 2/beta log(1 + e^{beta rho}) - rho - log(2 beta)/beta`` on the interval (-1, 1).

    Satisfies ``phi'' = exp(-beta phi)``; the moment map is ``tanh(beta rho / 2)``.
    """
    beta = float(beta)
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    shift = math.log(2 * beta) / beta

    def value(rho):
        rho = np.asarray(rho, dtype=float)
        return 2 / beta * np.logaddexp(0.0, beta * rho) - rho - shift

    def gradient(rho):
        return np.tanh(beta * np.asarray(rho, dtype=float) / 2)

    def hessian(rho):
        c = np.cosh(beta * np.asarray(rho, dtype=float) / 2)
        return beta / (2 * c * c)

    return KahlerPotentialFn(value, gradient, hessian, provenance="closed-form", dim=1)


def calabi_constraint(alpha, a=1, b=3):
    """``g(alpha) = (b alpha - 1) e^{(b-a) alpha} + 1 - a alpha``; zero iff ``Y(b) = 0``."""
    alpha = np.asarray(alpha, dtype=float)
    return (b * alpha - 1) * np.exp((b - a) * alpha) + 1 - a * alpha


@dataclass(frozen=True)
class CalabiProfile:
    alpha: float
    a: float
    b: float
    c: float
    defect: float  # |Y(b)|

    def Y(self, x):
        x = np.asarray(x, dtype=float)
        if self.alpha == 0:
            return x - self.a * self.a / x
        al = self.alpha
        return 2 / al - 2 / (al * al * x) + self.c / (x * np.exp(al * x))

    def dY(self, x):
        x = np.asarray(x, dtype=float)
        if self.alpha == 0:
            return 1 + self.a * self.a / (x * x)
        al = self.alpha
        return 2 / (al * al * x * x) - self.c * (1 + al * x) / (x * x * np.exp(al * x))

    def ode_residual(self, x):
        """``|Y' + (1/x + alpha) Y - 2|``."""
        x = np.asarray(x, dtype=float)
        return np.abs(self.dY(x) + (1 / x + self.alpha) * self.Y(x) - 2)


@dataclass(frozen=True)
class NoSolution:
    profile: CalabiProfile
    defect: float
    tol: float


def calabi_coefficients(alpha, a=1, b=3, tol=1e-10):
    """Solve ``Y' + (1/x + alpha) Y = 2`` with ``Y(a) = 0``; check ``Y(b) = 0``.

    ``alpha = 0`` is accepted as the limiting equation ``Y' + Y/x = 2``.
    """
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    alpha = float(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 0:
        c = 0.0
    else:
        c = 2 / alpha**2 * math.exp(alpha * a) * (1 - a * alpha)
    profile = CalabiProfile(alpha, float(a), float(b), c, 0.0)
    defect = float(abs(profile.Y(b)))
    profile = CalabiProfile(alpha, float(a), float(b), c, defect)
    if defect > tol:
        return NoSolution(profile, defect, tol)
    return profile


def calabi_roots(a, b, samples=10_000, lo=0.0, hi=1.0):
    """Roots of ``g_{a,b}`` in ``(lo, hi]`` located by sign change and bisection."""
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    grid = np.linspace(lo, hi, samples + 1)[1:]
    vals = calabi_constraint(grid, a, b)
    roots = [float(x) for x, v in zip(grid, vals) if v == 0]
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(brentq(calabi_constraint, grid[i], grid[i + 1], args=(a, b), xtol=1e-14))
    return sorted(roots)


def calabi_scan(a_values, b_values, samples=2_000):
    """Map ``(a, b) -> roots in (0, 1]`` over a user grid with ``a < b`` (exploratory)."""
    return {(a, b): calabi_roots(a, b, samples) for a in a_values for b in b_values if 0 < a < b}


class ExpPoly:
    """Finite sum ``sum_k p_k(alpha) e^{k alpha}`` with exact rational data.

    ``terms`` maps the rate ``k`` to polynomial coefficients (lowest degree first).
    """

    def __init__(self, terms):
        self.terms = {Fraction(k): tuple(Fraction(c) for c in p) for k, p in terms.items()}

    def derivative(self):
        out = {}
        for k, p in self.terms.items():
            dp = [i * p[i] for i in range(1, len(p))] + [Fraction(0)]
            out[k] = tuple(k * c + d for c, d in zip(p, dp))
        return ExpPoly(out)

    def at_zero(self):
        return sum((p[0] for p in self.terms.values()), Fraction(0))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for k, p in self.terms.items():
            total = total + np.polyval([float(c) for c in reversed(p)], x) * np.exp(float(k) * x)
        return total

    def positive_on_nonnegative_axis(self):
        """Sufficient test: a single exponential times a polynomial with nonnegative
        coefficients and positive constant term is positive for ``alpha >= 0``."""
        live = {k: p for k, p in self.terms.items() if any(p)}
        if len(live) != 1:
            return False
        (p,) = live.values()
        return p[0] > 0 and all(c >= 0 for c in p)

    def __str__(self):
        parts = []
        for k, p in sorted(self.terms.items()):
            poly = " + ".join(f"{c}" if i == 0 else f"{c}*alpha" if i == 1 else f"{c}*alpha^{i}"
                              for i, c in enumerate(p) if c)
            if poly:
                parts.append(f"({poly})" + (f"*exp({k}*alpha)" if k else ""))
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class Certificate:
    a: int
    b: int
    g: str
    g_at_0: Fraction
    dg_at_0: Fraction
    d2g: str
    d2g_positive: bool  # symbolic
    d2g_min_sampled: float
    g_min_sampled: float  # on [1e-3, 1]
    samples: int

    @property
    def holds(self):
        return (self.g_at_0 == 0 and self.dg_at_0 == 0 and self.d2g_positive
                and self.d2g_min_sampled > 0 and self.g_min_sampled > 0)

    def summary(self):
        return (f"no root in (0,1]; certificate: g(0)={self.g_at_0}, g'(0)={self.dg_at_0}, "
                f"g''>0 [g''(alpha) = {self.d2g}; min sampled {self.d2g_min_sampled:.6g}]; "
                f"min g on [1e-3,1] = {self.g_min_sampled:.6g}")


def nonexistence_certificate(a=1, b=3, samples=10_000):
    """Certify ``g_{a,b} > 0`` on ``(0, 1]``: ``g(0) = g'(0) = 0`` and ``g'' > 0``."""
    a, b = Fraction(a), Fraction(b)
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    g = ExpPoly({b - a: (-1, b), 0: (1, -a)})
    dg = g.derivative()
    d2g = dg.derivative()
    grid = np.linspace(0.0, 1.0, samples)
    d2_min = float(np.min(d2g(grid)))
    g_grid = np.linspace(1e-3, 1.0, samples)
    g_vals = calabi_constraint(g_grid, float(a), float(b))
    cert = Certificate(int(a) if a.denominator == 1 else a, int(b) if b.denominator == 1 else b,
                       str(g), g.at_zero(), dg.at_zero(), str(d2g),
                       d2g.positive_on_nonnegative_axis(), d2_min, float(np.min(g_vals)), samples)
    if d2_min <= 0 or cert.g_min_sampled <= 0:
        raise CertificateFailed(f"positivity violated: min g''={d2_min}, min g={cert.g_min_sampled}")
    return cert
