"""Continuity-method Newton solver for the real Monge-Ampere equation on rho-grids.

The target equation for a Fano polytope with barycenter ``P_c`` is

    log det D^2 phi + alpha (phi - P_c . rho) = 0,

reached from a reference potential ``phi0`` (transform of the weighted
Guillemin potential) along

    G_t(phi) = log det D^2 phi + t (phi - P_c . rho) + (alpha - t)(w - P_c . rho),

with ``w = P_c . rho - alpha^{-1} log det grad^2 phi0`` so that ``phi0`` solves
``t = 0`` in the analytic sense. The unknown is the bounded correction
``psi = phi - phi0``.

Precision notes. Far from the origin the Hessian has eigenvalues near 1e-9
while ``phi`` itself is O(10), so differencing sampled values in double
precision cannot resolve ``det D^2 phi``. The discrete Hessian of ``phi0`` is
therefore evaluated through the exact identity

    (f(s+h) - 2 f(s) + f(s-h)) / h^2 = int_{-1}^{1} (1 - |r|) f''(s + r h) dr

(and its box-average analogue for mixed differences) with Gauss quadrature of
the analytic Hessian in extended precision. Corrections are stored in
``np.longdouble`` and residuals are evaluated in it; Jacobians are assembled
and factorized in double (mixed-precision Newton refinement).
"""

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .guillemin import SymplecticPotential, legendre_extended
from .toric_invariants import AlphaOutOfRange, cone_angles

__all__ = [
    "GridMismatch", "ContinuityStalled", "ConvexityLost",
    "RhoGrid", "PotentialGrid", "SolverConfig", "TraceStep", "ContinuityTrace",
    "reference_data", "continuity_solve", "ma_residual", "pushforward_mass_check",
    "barycenter_identity_check", "toric_functionals", "dump_grid",
]

LD = np.longdouble


class GridMismatch(ValueError):
    pass


class ContinuityStalled(RuntimeError):
    def __init__(self, message, t_reached, trace, phi):
        super().__init__(message)
        self.t_reached = t_reached
        self.trace = trace
        self.phi = phi


class ConvexityLost(RuntimeError):
    def __init__(self, message, trace=None, phi=None):
        super().__init__(message)
        self.trace = trace
        self.phi = phi


@dataclass(frozen=True)
class RhoGrid:
    dim: int
    box: float
    nodes: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("grids are supported for n = 1, 2")
        if self.nodes < 9 or self.nodes % 2 == 0:
            raise ValueError("nodes per axis must be odd and >= 9")
        if not self.box > 0:
            raise ValueError("box half-width must be positive")

    @property
    def h(self):
        return 2.0 * self.box / (self.nodes - 1)

    @property
    def shape(self):
        return (self.nodes,) * self.dim

    @property
    def axis(self):
        return np.linspace(-self.box, self.box, self.nodes)

    @property
    def coords(self):
        """Array of shape ``shape + (dim,)``."""
        return np.stack(np.meshgrid(*([self.axis] * self.dim), indexing="ij"), axis=-1)

    def points(self):
        return self.coords.reshape(-1, self.dim)

    @property
    def interior(self):
        mask = np.zeros(self.shape, dtype=bool)
        mask[(slice(1, -1),) * self.dim] = True
        return mask

    @property
    def boundary(self):
        return ~self.interior


def _second_differences(f, h, dim):
    """Central second differences of a padded array ``f`` (one ghost layer)."""
    c = (slice(1, -1),) * dim
    out = np.empty((dim, dim) + f[c].shape, dtype=f.dtype)

    def sl(shift):
        return tuple(slice(1 + s, f.shape[a] - 1 + s) for a, s in enumerate(shift))

    for a in range(dim):
        e = [0] * dim
        e[a] = 1
        # differences of neighbours first: exact for smooth data, no eps * |f| loss
        out[a, a] = ((f[sl(e)] - f[c]) - (f[c] - f[sl([-k for k in e])])) / (h * h)
        for b in range(a + 1, dim):
            pp = [0] * dim
            pp[a], pp[b] = 1, 1
            pm = [0] * dim
            pm[a], pm[b] = 1, -1
            mixed = ((f[sl(pp)] - f[sl(pm)]) - (f[sl([-k for k in pm])] - f[sl([-k for k in pp])])) / (4 * h * h)
            out[a, b] = out[b, a] = mixed
    return out


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _det(H):
    if H.shape[0] == 1:
        return H[0, 0]
    return H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]


def _inverse(H):
    if H.shape[0] == 1:
        return 1 / H
    d = _det(H)
    return np.stack([np.stack([H[1, 1] / d, -H[0, 1] / d]), np.stack([-H[1, 0] / d, H[0, 0] / d])])


def _min_eig(H):
    if H.shape[0] == 1:
        return H[0, 0]
    half_tr = (H[0, 0] + H[1, 1]) / 2
    d = _det(H)
    big = half_tr + np.sqrt(np.maximum(half_tr * half_tr - d, 0))
    return np.where(big > 0, d / np.where(big > 0, big, 1), half_tr)


class PotentialGrid:
    """A potential sampled on a :class:`RhoGrid`.

    Either plain sampled values (Hessian by central differences on interior
    nodes), or ``base + shift + correction`` where the base carries a
    precomputed discrete Hessian and moment map, and the correction obeys a
    boundary rule: ``"neumann"`` (mirror ghosts, Hessian at every node) or
    ``"dirichlet"`` (zero on the boundary ring, Hessian on interior nodes).
    """

    def __init__(self, grid, values=None, *, base_values=None, base_hessian=None,
                 base_gradient=None, correction=None, correction_lo=None, shift=0, boundary="none"):
        self.grid = grid
        if values is not None:
            base_values = np.asarray(values, dtype=float).reshape(grid.shape)
            boundary = "none"
        if base_values is None:
            raise ValueError("need values")
        if boundary not in ("none", "neumann", "dirichlet"):
            raise ValueError(f"unknown boundary rule {boundary!r}")
        if boundary != "none" and base_hessian is None:
            raise ValueError("corrections need a base Hessian")
        self.base_values = np.asarray(base_values).reshape(grid.shape)
        self.base_hessian = base_hessian
        self.base_gradient = base_gradient
        self.boundary_rule = boundary
        self.correction = (np.zeros(grid.shape, dtype=LD) if correction is None
                           else np.asarray(correction, dtype=LD).reshape(grid.shape))
        # the correction is kept as an unevaluated sum hi + lo of longdoubles; far
        # from the origin det D^2 phi is ~1e-18 and one longdouble ulp of an O(1)
        # correction would already move log det by ~1e-9
        self.correction_lo = (np.zeros(grid.shape, dtype=LD) if correction_lo is None
                              else np.asarray(correction_lo, dtype=LD).reshape(grid.shape))
        if boundary == "dirichlet":
            self.correction[grid.boundary] = 0
            self.correction_lo[grid.boundary] = 0
        self.shift = LD(shift)
        bv = self.values_ld[grid.boundary].astype(float)
        bv.setflags(write=False)
        self.boundary_values = bv

    # -- values -------------------------------------------------------------------
    @property
    def values_ld(self):
        return self.base_values.astype(LD) + self.shift + (self.correction + self.correction_lo)

    @property
    def values(self):
        return self.values_ld.astype(float)

    @property
    def active(self):
        """Nodes where the discrete Hessian is defined."""
        if self.boundary_rule == "neumann":
            return np.ones(self.grid.shape, dtype=bool)
        return self.grid.interior

    def with_correction(self, correction, shift=None, correction_lo=None):
        return PotentialGrid(self.grid, base_values=self.base_values, base_hessian=self.base_hessian,
                             base_gradient=self.base_gradient, correction=correction,
                             correction_lo=correction_lo,
                             shift=self.shift if shift is None else shift, boundary=self.boundary_rule)

    def added(self, delta, shift_delta=0):
        """Copy with ``delta`` added to the correction, carrying rounding into the low part."""
        hi, err = _two_sum(self.correction, np.asarray(delta, dtype=LD).reshape(self.grid.shape))
        return self.with_correction(hi, self.shift + LD(shift_delta), self.correction_lo + err)

    def perturbed(self, delta):
        """Copy with ``delta`` (array over the grid) added to the potential."""
        delta = np.asarray(delta).reshape(self.grid.shape)
        if self.boundary_rule == "none":
            return PotentialGrid(self.grid, self.values_ld + delta)
        return self.added(delta)

    # -- derivatives ------------------------------------------------------------------
    def _padded_correction(self, part=None):
        mode = "reflect" if self.boundary_rule == "neumann" else "constant"
        if part is None:
            part = self.correction + self.correction_lo
        return np.pad(part, 1, mode=mode)

    def hessian(self):
        """Discrete Hessian, shape ``(n, n) + grid.shape``, NaN where undefined."""
        n, h = self.grid.dim, self.grid.h
        if self.boundary_rule == "none":
            H = np.full((n, n) + self.grid.shape, np.nan, dtype=LD)
            inner = _second_differences(self.values_ld, h, n)
            H[(slice(None), slice(None)) + (slice(1, -1),) * n] = inner
            return H
        H = (self.base_hessian + _second_differences(self._padded_correction(self.correction), h, n)
             + _second_differences(self._padded_correction(self.correction_lo), h, n))
        if self.boundary_rule == "dirichlet":
            H[(slice(None), slice(None)) + (self.grid.boundary,)] = np.nan
        return H

    def gradient(self):
        """Discrete moment map, shape ``grid.shape + (n,)``."""
        n, h = self.grid.dim, self.grid.h
        if self.boundary_rule == "none":
            v = self.values
            g = np.gradient(v, h) if n > 1 else [np.gradient(v, h)]
            return np.stack(g, axis=-1)
        f = self._padded_correction().astype(float)
        c = (slice(1, -1),) * n
        grads = []
        for a in range(n):
            up = tuple(slice(2, None) if b == a else slice(1, -1) for b in range(n))
            dn = tuple(slice(None, -2) if b == a else slice(1, -1) for b in range(n))
            grads.append((f[up] - f[dn]) / (2 * h))
        return self.base_gradient + np.stack(grads, axis=-1)

    def det_hessian(self):
        return _det(self.hessian())

    def min_eigenvalue(self):
        return _min_eig(self.hessian())


@dataclass
class SolverConfig:
    alpha: float
    t_step: float = 0.05
    newton_tol: float = 1e-10
    max_newton: int = 30
    damping: float = 0.5
    boundary: str = "neumann"
    force: bool = False
    t_step_min: float = 1e-4
    t_step_max: float = 0.1
    hessian: str = "hybrid"
    quadrature_points: int = 6


@dataclass(frozen=True)
class TraceStep:
    t: float
    iterations: int
    residual: float
    min_eig: float


@dataclass
class ContinuityTrace:
    steps: list = field(default_factory=list)
    status: str = "running"
    elapsed: float = 0.0

    @property
    def t_values(self):
        return [s.t for s in self.steps]

    @property
    def final_residual(self):
        return self.steps[-1].residual if self.steps else math.inf

    def summary(self):
        lines = [f"{'t':>10} {'newton':>6} {'residual':>11} {'min eig':>11}"]
        for s in self.steps:
            lines.append(f"{s.t:10.6f} {s.iterations:6d} {s.residual:11.3e} {s.min_eig:11.3e}")
        lines.append(f"status: {self.status} ({self.elapsed:.2f} s)")
        return "\n".join(lines)


def _exact_alpha(alpha):
    if isinstance(alpha, float):
        return Fraction(repr(alpha))
    return Fraction(alpha)


def _gauss_01(k):
    nodes, weights = np.polynomial.legendre.leggauss(k)
    return (nodes + 1) / 2, weights / 2


def _discrete_hessian_by_quadrature(u, grid, k):
    """Central-difference Hessian of the transform of ``u`` at every node, in longdouble."""
    n, h = grid.dim, grid.h
    pts = grid.points()
    m = len(pts)
    s, ws = _gauss_01(k)
    out = np.zeros((n, n, m), dtype=LD)
    # pure second differences: hat weight (1 - |r|) on [-1, 1]
    offsets, weights, targets = [], [], []
    for a in range(n):
        for sign in (1, -1):
            for r, wr in zip(s, ws):
                e = np.zeros(n)
                e[a] = sign * r * h
                offsets.append(e)
                weights.append(wr * (1 - r))
                targets.append((a, a))
    # mixed differences: plain average over the square [-1, 1]^2, i.e. 4 copies of [0,1]^2 with signs
    for a in range(n):
        for b in range(a + 1, n):
            for sa in (1, -1):
                for sb in (1, -1):
                    for r1, w1 in zip(s, ws):
                        for r2, w2 in zip(s, ws):
                            e = np.zeros(n)
                            e[a], e[b] = sa * r1 * h, sb * r2 * h
                            offsets.append(e)
                            weights.append(w1 * w2 / 4)
                            targets.append((a, b))
    for e, wt, (a, b) in zip(offsets, weights, targets):
        _, _, hess, _ = legendre_extended(u, pts + e)
        out[a, b] += LD(wt) * hess[:, a, b]
    for a in range(n):
        for b in range(a + 1, n):
            out[b, a] = out[a, b]
    return out.reshape((n, n) + grid.shape)


def reference_data(P, report, alpha, grid, *, boundary="neumann", hessian="hybrid",
                   quadrature_points=6):
    """Reference potential ``phi0`` on the grid and the node values of ``w``.

    ``hessian="hybrid"`` stores the analytic Hessian of ``phi0`` as the base,
    so only the correction is differenced. ``"discrete"`` stores the central
    difference Hessian of ``phi0`` itself (evaluated by quadrature). The
    second choice is the textbook scheme but it is not convex where the
    Hessian is strongly anisotropic along a grid diagonal, which happens for
    polytopes with edges oblique to the grid once ``h`` is not small.
    """
    if hessian not in ("hybrid", "discrete"):
        raise ValueError(f"unknown hessian mode {hessian!r}")
    alpha_q = _exact_alpha(alpha)
    angles = cone_angles(report, P, alpha_q)
    u = SymplecticPotential(P, angles)
    pts = grid.points()
    phi0, x, hess_nodes, logdet = legendre_extended(u, pts)
    Pc = np.array([float(c) for c in report.P_c])
    Pc_rho = (pts @ Pc).astype(LD)
    alpha_ld = LD(alpha_q.numerator) / LD(alpha_q.denominator)
    w = Pc_rho - logdet / alpha_ld
    if hessian == "hybrid":
        hess = np.moveaxis(hess_nodes, 0, -1).reshape((grid.dim, grid.dim) + grid.shape)
    else:
        hess = _discrete_hessian_by_quadrature(u, grid, quadrature_points)
    # the transform fixes phi0 only up to a constant; pick the one with
    # sum exp(-alpha (phi0 - P_c.rho)) = sum det D^2 phi0, which every solution satisfies
    expo = -alpha_ld * (phi0 - Pc_rho)
    top = expo.max()
    log_dens = top + np.log(np.sum(np.exp(expo - top)))
    log_mass = np.log(np.sum(_det(hess)))
    normalization = (log_dens - log_mass) / alpha_ld
    phi0 = phi0 + normalization
    phi = PotentialGrid(grid, base_values=phi0.reshape(grid.shape), base_hessian=hess,
                        base_gradient=x.astype(float).reshape(grid.shape + (grid.dim,)),
                        boundary=boundary)
    phi.symplectic_potential = u
    phi.normalization = float(normalization)
    return phi, w.reshape(grid.shape)


def _residual_field(phi, Pc, alpha, w_blend=None):
    H = phi.hessian()
    pts = phi.grid.coords
    Pc_rho = (pts @ np.asarray(Pc, dtype=float)).astype(LD)
    alpha = LD(alpha)
    with np.errstate(invalid="ignore", divide="ignore"):
        logdet = np.log(_det(H))
    if w_blend is None:
        G = logdet + alpha * (phi.values_ld - Pc_rho)
    else:
        t, w = w_blend
        t = LD(t)
        G = logdet + t * (phi.values_ld - Pc_rho) + (alpha - t) * (np.asarray(w, dtype=LD) - Pc_rho)
    return G, H


def ma_residual(phi, P_c, alpha, w_blend=None):
    """Sup norm of the (optionally ``t``-blended) equation over nodes with a Hessian."""
    G, _ = _residual_field(phi, [float(c) for c in P_c], float(alpha), w_blend)
    vals = G[phi.active]
    if np.any(~np.isfinite(vals)):
        return math.inf
    return float(np.max(np.abs(vals)))


class _Assembler:
    """Sparse linearization ``delta -> tr(H^{-1} D^2 delta) + t delta`` on the active nodes."""

    def __init__(self, grid, rule):
        self.grid = grid
        self.rule = rule
        M, n = grid.nodes, grid.dim
        active = np.ones(grid.shape, dtype=bool) if rule == "neumann" else grid.interior
        self.active = active
        self.index = -np.ones(grid.shape, dtype=np.int64)
        self.index[active] = np.arange(active.sum())
        self.size = int(active.sum())
        self.nodes = np.argwhere(active)

    def _neighbour(self, shift):
        M = self.grid.nodes
        nb = self.nodes + np.array(shift)
        if self.rule == "neumann":
            nb = np.where(nb < 0, -nb, nb)
            nb = np.where(nb > M - 1, 2 * (M - 1) - nb, nb)
            return self.index[tuple(nb.T)]
        inside = np.all((nb >= 0) & (nb <= M - 1), axis=1)
        out = -np.ones(len(nb), dtype=np.int64)
        out[inside] = self.index[tuple(nb[inside].T)]
        return out  # boundary neighbours carry zero correction (index -1)

    def matrix(self, Hinv, t):
        n, h = self.grid.dim, self.grid.h
        A = [[Hinv[a, b][self.active] for b in range(n)] for a in range(n)]
        rows, cols, vals = [], [], []
        own = np.arange(self.size)

        def add(shift, coeff):
            nb = self._neighbour(shift)
            keep = nb >= 0
            rows.append(own[keep])
            cols.append(nb[keep])
            vals.append(coeff[keep])

        centre = np.full(self.size, t, dtype=float)
        for a in range(n):
            centre -= 2 * A[a][a] / h**2
            for sign in (1, -1):
                e = [0] * n
                e[a] = sign
                add(e, A[a][a] / h**2)
        if n == 2:
            for s1, s2, sg in ((1, 1, 1), (-1, -1, 1), (1, -1, -1), (-1, 1, -1)):
                add((s1, s2), sg * A[0][1] / (2 * h**2))
        add([0] * n, centre)
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals)
        J = sp.csr_matrix((v, (r, c)), shape=(self.size, self.size))
        scale = 1.0 / np.abs(J.diagonal())
        return sp.diags(scale) @ J, scale


def _newton(phi, Pc, alpha, w, t, asm, cfg, tol):
    """Damped Newton at fixed ``t``; returns (phi, iterations, residual, lu, scale) or raises."""
    def field_norms(p):
        G, H = _residual_field(p, Pc, alpha, (t, w))
        g = G[asm.active]
        if np.any(~np.isfinite(g)):
            return None, None, math.inf, math.inf
        convex = bool(np.all(_min_eig(H)[asm.active] > 0) and np.all(H[0, 0][asm.active] > 0))
        if not convex:
            return None, None, math.inf, math.inf
        return g, H, float(np.max(np.abs(g))), float(np.sqrt(np.sum(g.astype(float) ** 2)))

    g, H, res, norm2 = field_norms(phi)
    if g is None:
        raise ConvexityLost("starting guess is not discretely convex")
    lu = scale = None
    for it in range(cfg.max_newton + 1):
        if res <= tol:
            return phi, it, res, lu, scale
        if it == cfg.max_newton:
            break
        Hinv = _inverse(H.astype(float))
        J, scale = asm.matrix(Hinv, t)
        lu = spla.splu(J.tocsc())
        delta = lu.solve(-scale * g.astype(float))
        step = 1.0
        for _ in range(40):
            d = np.zeros(asm.grid.shape, dtype=LD)
            d[asm.active] = step * delta
            # Neumann corrections carry their constant mode as a separate shift; a
            # Dirichlet correction is pinned on the ring, so it has no constant mode
            mean = d[asm.active].mean() if asm.rule == "neumann" else LD(0)
            trial = phi.added((d - mean) * asm.active, mean)
            g2, H2, res2, norm2b = field_norms(trial)
            if g2 is not None and norm2b <= (1 - 1e-4 * step) * norm2:
                break
            step *= cfg.damping
        else:
            raise _NewtonFailed(res)
        phi, g, H, res, norm2 = trial, g2, H2, res2, norm2b
    raise _NewtonFailed(res)


class _NewtonFailed(Exception):
    def __init__(self, residual):
        super().__init__(residual)
        self.residual = residual


def continuity_solve(P, report, config, grid, reference=None):
    """March ``t`` from 0 to ``alpha``; returns the solution grid and the trace."""
    start = time.perf_counter()
    alpha_q = _exact_alpha(config.alpha)
    if not 0 < alpha_q <= 1:
        raise AlphaOutOfRange(f"alpha={config.alpha} outside (0, 1]")
    if alpha_q > report.R and not config.force:
        raise AlphaOutOfRange(f"alpha={config.alpha} exceeds R(X)={report.R}; pass force to experiment")
    alpha = float(alpha_q)
    if reference is None:
        reference = reference_data(P, report, alpha_q, grid, boundary=config.boundary,
                                   hessian=config.hessian, quadrature_points=config.quadrature_points)
    phi0, w = reference
    Pc = [float(c) for c in report.P_c]
    asm = _Assembler(grid, phi0.boundary_rule)
    trace = ContinuityTrace()
    mid_tol = max(config.newton_tol, 1e-7)
    phi, t, dt = phi0, 0.0, min(max(config.t_step, config.t_step_min), config.t_step_max)
    lu = scale = None
    while t < alpha:
        t_next = min(alpha, t + dt)
        guess = phi
        if lu is not None:
            # tangent predictor: dG/dt = (phi - P_c.rho) - (w - P_c.rho) = phi - w
            dGdt = (phi.values_ld - w)[asm.active].astype(float)
            v = np.zeros(grid.shape, dtype=LD)
            v[asm.active] = lu.solve(-scale * dGdt) * (t_next - t)
            candidate = phi.added(v * asm.active)
            if np.all(_min_eig(candidate.hessian())[asm.active] > 0):
                guess = candidate
        tol = config.newton_tol if t_next == alpha else mid_tol
        try:
            phi_new, iters, res, lu_new, scale_new = _newton(guess, Pc, alpha, w, t_next, asm, config, tol)
        except (_NewtonFailed, ConvexityLost):
            dt /= 2
            if dt < config.t_step_min:
                trace.status = "stalled"
                trace.elapsed = time.perf_counter() - start
                raise ContinuityStalled(f"continuity step underflow at t={t:.6g}", t, trace, phi)
            continue
        phi, t = phi_new, t_next
        if lu_new is not None:
            lu, scale = lu_new, scale_new
        min_eig = float(np.min(_min_eig(phi.hessian())[asm.active]))
        trace.steps.append(TraceStep(t, iters, res, min_eig))
        if iters <= 3:
            dt = min(2 * dt, config.t_step_max)
    trace.status = "converged"
    trace.elapsed = time.perf_counter() - start
    phi.symplectic_potential = getattr(phi0, "symplectic_potential", None)
    return phi, trace


def _volume_element(grid):
    return grid.h ** grid.dim


def pushforward_mass_check(phi, target=None):
    """``(sum of det D^2 phi h^n over interior nodes, Euclidean vol(P))``."""
    det = phi.det_hessian()
    mask = phi.grid.interior
    mass = float(np.sum(det[mask]) * _volume_element(phi.grid))
    if target is None:
        u = getattr(phi, "symplectic_potential", None)
        target = float(u.polytope.volume) if u is not None else math.nan
    return mass, float(target)


def barycenter_identity_check(phi, alpha, P_c, weight="equation"):
    """Distance between a pushforward barycenter and ``P_c``.

    ``weight="hessian"`` weights the moment map by ``det D^2 phi``; that
    barycenter equals ``P_c`` for every admissible potential, so it only
    measures truncation. ``weight="equation"`` uses ``exp(-alpha (phi - P_c . rho))``,
    which coincides with ``det D^2 phi`` exactly at solutions and therefore
    separates solutions from other potentials.
    """
    Pc = np.array([float(c) for c in P_c])
    mask = phi.grid.interior
    grad = phi.gradient()[mask]
    if weight == "hessian":
        dens = phi.det_hessian().astype(float)[mask]
    elif weight == "equation":
        expo = -float(alpha) * (phi.values[mask] - phi.grid.coords[mask] @ Pc)
        dens = np.exp(expo - expo.max())
    else:
        raise ValueError(f"unknown weight {weight!r}")
    centre = np.sum(grad * dens[:, None], axis=0) / np.sum(dens)
    return float(np.linalg.norm(centre - Pc))


def _mixed_discriminant(A, B):
    if A.shape[0] == 1:
        return A[0, 0] * B[0, 0]
    return (A[0, 0] * B[1, 1] + A[1, 1] * B[0, 0] - A[0, 1] * B[1, 0] - A[1, 0] * B[0, 1]) / 2


def toric_functionals(phi, phi_ref, alpha, P_c=None):
    """Quadrature versions of the I, J and F functionals of ``psi = phi - phi_ref``.

    The F reference density is ``exp(-alpha (phi_ref - P_c . rho))`` normalized
    to total mass ``V``, so that critical points of F solve the target
    equation. Sums run over interior nodes.
    """
    if phi.grid != phi_ref.grid:
        raise GridMismatch("potentials live on different grids")
    grid = phi.grid
    n = grid.dim
    mask = grid.interior
    hn = _volume_element(grid)
    psi = (phi.values_ld - phi_ref.values_ld)[mask].astype(float)
    H = phi.hessian().astype(float)
    Hr = phi_ref.hessian().astype(float)
    det_r = _det(Hr)[mask]
    det_p = _det(H)[mask]
    V = np.sum(det_r) * hn
    I = np.sum(psi * (det_r - det_p)) * hn / V
    if n == 1:
        mixed = det_p + det_r
    else:
        mixed = det_p + _mixed_discriminant(Hr, H)[mask] + det_r
    # J is invariant under psi -> psi + c; evaluating it on the centred psi keeps
    # the discrete sums from turning a large constant into O(h^2) noise
    centred = psi - np.sum(psi * det_r) * hn / V
    J = -np.sum(centred * mixed) * hn / ((n + 1) * V)
    Pc = np.zeros(n) if P_c is None else np.array([float(c) for c in P_c])
    expo = -alpha * (phi_ref.values[mask] - grid.coords[mask] @ Pc)
    mu = np.exp(expo - expo.max())
    mu *= V / (np.sum(mu) * hn)
    # log-sum-exp keeps large |alpha psi| finite
    a = -alpha * psi
    amax = a.max()
    log_mean = amax + np.log(np.sum(np.exp(a - amax) * mu) * hn / V)
    F = J - np.sum(psi * det_r) * hn / V - log_mean / alpha
    return float(I), float(J), float(F)


def dump_grid(phi, path):
    """Write ``rho.. phi det grad..`` per node as whitespace-separated columns."""
    grid = phi.grid
    pts = grid.points()
    det = phi.det_hessian().astype(float).reshape(-1)
    grad = phi.gradient().reshape(-1, grid.dim)
    cols = np.column_stack([pts, phi.values.reshape(-1), det, grad])
    header = " ".join([f"rho{a + 1}" for a in range(grid.dim)] + ["phi", "det_hess"]
                      + [f"x{a + 1}" for a in range(grid.dim)])
    np.savetxt(path, cols, header=header, fmt="%.17g")
