"""Toric Chern numbers and their conical shifts.

Chern quantities are stored already paired against powers of ``c_1``:
``c1n = c_1^n`` and ``c2c1 = c_2 . c_1^{n-2}``. For a smooth toric Fano
``X_P`` these are lattice volumes of the anticanonical polytope:

    c_1^n = n! vol(P),   c_2 . c_1^{n-2} = sum over codim-2 faces of their normalized volume.
"""

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

from ._exact import as_fraction, det

__all__ = [
    "NotASurface", "ChernData", "ConicalChernShift", "SurfaceIntersection",
    "MiyaokaYau", "toric_chern_numbers", "conical_chern_shift",
    "miyaoka_yau_check", "surface_intersection_matrix", "conical_euler_signature",
    "PROOF_BETA_RANGE",
]

# the conical Chern-class shift formulas are proved for beta in this open range
PROOF_BETA_RANGE = (Fraction(1, 2), Fraction(1))


class NotASurface(ValueError):
    pass


@dataclass(frozen=True)
class ChernData:
    dim: int
    c1n: Fraction
    c2c1: Fraction
    euler_char: int
    signature: Fraction | None
    face_volumes: tuple


@dataclass(frozen=True)
class ConicalChernShift:
    beta: Fraction
    c1n: Fraction
    c2c1: Fraction
    Dc1: Fraction
    D2: Fraction
    c1_shift: Fraction
    c2_shift: Fraction
    c1sq_shift: Fraction
    extrapolated: bool  # beta outside the range where the shift formulas are proved


@dataclass(frozen=True)
class SurfaceIntersection:
    rays: tuple  # counterclockwise
    facet_order: tuple  # facet index of each ray
    matrix: tuple  # D_i . D_j in ray order

    def self_intersections(self):
        return tuple(self.matrix[i][i] for i in range(len(self.rays)))

    def pair(self, a, b):
        """Intersection number of two divisors given by per-ray coefficients."""
        n = len(self.rays)
        return sum((as_fraction(a[i]) * as_fraction(b[j]) * self.matrix[i][j]
                    for i in range(n) for j in range(n)), Fraction(0))

    def from_facet_coeffs(self, coeffs):
        """Reorder per-facet coefficients into ray order."""
        return tuple(as_fraction(coeffs[j]) for j in self.facet_order)

    @property
    def anticanonical(self):
        return (Fraction(1),) * len(self.rays)


@dataclass(frozen=True)
class MiyaokaYau:
    holds: bool
    lhs: Fraction
    rhs: Fraction
    beta_max: float
    beta_max_sq: Fraction


def toric_chern_numbers(P):
    n = P.dim
    c1n = math.factorial(n) * P.volume
    if n >= 2:
        faces = P.faces(2)
        volumes = tuple(P.normalized_volume(f) for f in faces)
        c2c1 = sum(volumes, Fraction(0))
    else:
        volumes = ()
        c2c1 = Fraction(0)
    chi = len(P.vertices)
    signature = (c1n - 2 * c2c1) / 3 if n == 2 else None
    return ChernData(n, c1n, c2c1, chi, signature, volumes)


def conical_chern_shift(data, beta, m=1, *, intersection=None, divisor=None, omega=None):
    """Pair the conical Chern classes of a cone-angle-``beta`` metric along ``D``.

    The default Fano case takes ``[D] = m c_1`` and ``[omega] = c_1``. For
    surfaces an explicit divisor (per-facet coefficients) and optionally a
    polarization can be given together with the surface intersection form.
    """
    beta = as_fraction(beta)
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    s = 1 - beta
    extrapolated = beta != 1 and not (PROOF_BETA_RANGE[0] < beta < PROOF_BETA_RANGE[1])
    if divisor is None:
        m = as_fraction(m)
        Dc1 = m * data.c1n
        D2 = m * m * data.c1n
        c1_shift = (1 - s * m) * data.c1n
        c2_shift = data.c2c1 + s * (m * m - m) * data.c1n
        c1sq_shift = (1 - s * m) ** 2 * data.c1n
        return ConicalChernShift(beta, data.c1n, data.c2c1, Dc1, D2,
                                 c1_shift, c2_shift, c1sq_shift, extrapolated)
    if data.dim != 2 or intersection is None:
        raise NotASurface("explicit divisor classes are supported on surfaces only")
    d = intersection.from_facet_coeffs(divisor)
    k = intersection.anticanonical
    w = k if omega is None else intersection.from_facet_coeffs(omega)
    c1_minus = tuple(a - s * b for a, b in zip(k, d))
    pair = intersection.pair
    return ConicalChernShift(
        beta, data.c1n, data.c2c1, pair(d, k), pair(d, d),
        c1_shift=pair(c1_minus, w),
        c2_shift=data.c2c1 + s * pair(tuple(b - a for a, b in zip(k, d)), d),
        c1sq_shift=pair(c1_minus, c1_minus),
        extrapolated=extrapolated,
    )


def miyaoka_yau_check(data, beta):
    """``c_2 . c_1^{n-2} >= n beta^2 / (2(n+1)) c_1^n``."""
    beta = as_fraction(beta)
    n = data.dim
    if n < 2:
        raise ValueError("the inequality needs n >= 2")
    rhs = Fraction(n, 2 * (n + 1)) * beta * beta * data.c1n
    beta_max_sq = Fraction(2 * (n + 1)) * data.c2c1 / (n * data.c1n)
    beta_max = min(1.0, math.sqrt(beta_max_sq))
    return MiyaokaYau(data.c2c1 >= rhs, data.c2c1, rhs, beta_max, beta_max_sq)


def surface_intersection_matrix(P):
    """Intersection form of the toric divisors of a smooth toric surface."""
    if P.dim != 2:
        raise NotASurface(f"expected a surface, got dimension {P.dim}")
    rays = list(P.normals)
    order = sorted(range(len(rays)), key=lambda j: math.atan2(rays[j][1], rays[j][0]))
    u = [rays[j] for j in order]
    N = len(u)
    mat = [[Fraction(0)] * N for _ in range(N)]
    for i in range(N):
        prev, cur, nxt = u[i - 1], u[i], u[(i + 1) % N]
        s = (prev[0] + nxt[0], prev[1] + nxt[1])
        # prev + next = a * cur; smoothness makes a an integer
        a = Fraction(s[0], cur[0]) if cur[0] != 0 else Fraction(s[1], cur[1])
        if (a * cur[0], a * cur[1]) != s or abs(det([prev, cur])) != 1:
            raise ValueError("fan is not smooth")
        mat[i][i] = -a
        mat[i][(i + 1) % N] = Fraction(1)
        mat[(i + 1) % N][i] = Fraction(1)
    return SurfaceIntersection(tuple(u), tuple(order), tuple(tuple(r) for r in mat))


def conical_euler_signature(chi_X, sigma_X, chi_D, D2, beta, *, intersection=None, divisor=None):
    """Conical Euler number and signature of a surface with angle ``2 pi beta`` along a curve.

    When ``intersection`` and ``divisor`` (per-facet coefficients) are given,
    ``D^2`` and ``chi(D) = -D.(D + K)`` are derived from them; a disagreeing
    user-supplied ``chi_D`` only triggers a warning.
    """
    if intersection is not None and divisor is not None:
        d = intersection.from_facet_coeffs(divisor)
        k = intersection.anticanonical
        D2_derived = intersection.pair(d, d)
        chi_derived = -(D2_derived - intersection.pair(d, k))
        if chi_D is not None and as_fraction(chi_D) != chi_derived:
            warnings.warn(f"supplied chi(D)={chi_D} disagrees with adjunction value {chi_derived}")
        if D2 is not None and as_fraction(D2) != D2_derived:
            warnings.warn(f"supplied D^2={D2} disagrees with intersection value {D2_derived}")
        chi_D, D2 = chi_derived, D2_derived
    if chi_D is None or D2 is None:
        raise ValueError("chi(D) and D^2 are required when no divisor class is given")
    if isinstance(beta, float):
        return (chi_X - (1 - beta) * float(chi_D),
                float(sigma_X) - (1 - beta * beta) * float(D2) / 3)
    beta = as_fraction(beta)
    chi_g = as_fraction(chi_X) - (1 - beta) * as_fraction(chi_D)
    sigma_g = as_fraction(sigma_X) - (1 - beta * beta) * as_fraction(D2) / 3
    return chi_g, sigma_g
