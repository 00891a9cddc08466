"""Weighted Guillemin potentials and the Legendre duality between x- and rho-space.

The symplectic potential of a conical toric metric with angle ``2 pi beta_j``
along the divisor ``{l_j = 0}`` is

    u(x) = sum_j beta_j^{-1} l_j(x) log l_j(x) + f(x),

and the Kahler potential is its Legendre transform
``phi(rho) = sup_x (x . rho - u(x))``, attained where ``grad u(x) = rho``.
Transforms are evaluated on demand at query points, vectorized over a leading
batch axis.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .polytope_core import FacetPresentation, FanoPolytope, is_delzant, vertices_from_facets
from .toric_invariants import ConeAngles

__all__ = [
    "NoConvergence", "SymplecticPotential", "KahlerPotentialFn", "LegendrePoint",
    "weighted_guillemin_potential", "legendre_transform", "legendre_data",
    "legendre_potential", "legendre_extended", "inverse_legendre_transform", "moment_map", "verify_duality",
]


class NoConvergence(RuntimeError):
    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


@dataclass
class _Anchor:
    """Affine chart ``x = p + Vinv @ y`` in which ``l_j = l0_j + W_j . y``.

    For a simple vertex ``p`` the chart coordinates ``y`` are the values of
    the active ``l_j``, so facets that are nearly tight are represented with
    full relative precision instead of as the difference of two O(1) numbers.
    """

    p: np.ndarray
    Vinv: np.ndarray
    l0: np.ndarray
    W: np.ndarray
    active: tuple = ()  # facet indices whose values are the chart coordinates


class SymplecticPotential:
    """``u(x) = sum_j beta_j^{-1} l_j log l_j + f(x)`` on a polytope.

    ``smooth`` is an optional triple ``(f, grad_f, hess_f)`` of callables that
    accept an ``(m, n)`` array.
    """

    def __init__(self, polytope, weights, smooth=None):
        if isinstance(polytope, FanoPolytope):
            facets, vs = polytope.facets, polytope.vertex_set
            centre = polytope.barycenter
        elif isinstance(polytope, FacetPresentation):
            from .polytope_core import volume_and_barycenter
            facets = polytope
            vs = vertices_from_facets(facets)
            centre = volume_and_barycenter(facets, vs)[1]
        else:
            raise TypeError("expected a FanoPolytope or FacetPresentation")
        if isinstance(weights, ConeAngles):
            weights = weights.beta
        beta = np.array([float(b) for b in weights])
        if beta.shape != (facets.n_facets,) or np.any(beta <= 0):
            raise ValueError("need one positive weight per facet")
        self.polytope = polytope
        self.facets = facets
        self.beta = beta
        self.beta_ld = np.array([np.longdouble(Fraction(b).numerator) / np.longdouble(Fraction(b).denominator)
                                 if not isinstance(b, float) else np.longdouble(b) for b in weights])
        self.smooth = smooth
        self.A = np.array(facets.normals, dtype=float)
        self.b = np.array([float(c) for c in facets.offsets])
        self.dim = facets.dim
        self.vertices = np.array(vs.vertices, dtype=float)
        self.centre = np.array([float(c) for c in centre])
        self._anchors = self._build_anchors(facets, vs)

    def _build_anchors(self, facets, vs):
        simple, _ = is_delzant(facets, vs)
        anchors = []
        if all(len(inc) == self.dim for inc in vs.incidence):
            for vertex, active in zip(vs.vertices, vs.incidence):
                idx = sorted(active)
                V = self.A[idx]
                if abs(np.linalg.det(V)) < 1e-12:
                    anchors = []
                    break
                Vinv = np.linalg.inv(V)
                if simple:
                    Vinv = np.round(Vinv)  # unimodular: the inverse is integral
                p = np.array([float(c) for c in vertex])
                l0 = np.array([float(c) for c in facets.evaluate(vertex)])
                W = self.A @ Vinv
                W[idx] = np.eye(self.dim)
                l0[idx] = 0.0
                anchors.append(_Anchor(p, Vinv, l0, W, tuple(idx)))
        self._plain = _Anchor(np.zeros(self.dim), np.eye(self.dim), self.b.copy(), self.A.copy())
        return anchors

    # -- evaluation from facet values -------------------------------------------------
    def l(self, x):
        return np.asarray(x, dtype=float) @ self.A.T + self.b

    def _value(self, x, l):
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(l > 0, l * np.log(np.where(l > 0, l, 1.0)), 0.0)
        val = terms @ (1.0 / self.beta)
        if self.smooth is not None:
            val = val + self.smooth[0](x)
        return val

    def _gradient(self, x, l):
        g = (np.log(l) + 1.0) / self.beta
        grad = g @ self.A
        if self.smooth is not None:
            grad = grad + self.smooth[1](x)
        return grad

    def _hessian(self, x, l):
        c = 1.0 / (self.beta * l)
        hess = np.einsum("mj,ja,jb->mab", c, self.A, self.A)
        if self.smooth is not None:
            hess = hess + self.smooth[2](x)
        return hess

    def value(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self._value(x, self.l(x))

    def gradient(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self._gradient(x, self.l(x))

    def hessian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self._hessian(x, self.l(x))

    def is_strictly_convex(self, resolution=8):
        """Check positive definiteness of the Hessian on an interior sample grid.

        The check is only as good as the sample: ``resolution`` points per axis
        of the bounding box, keeping those strictly inside.
        """
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        axes = [np.linspace(a, b, resolution + 2)[1:-1] for a, b in zip(lo, hi)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        pts = pts[np.all(self.l(pts) > 1e-9, axis=1)]
        if len(pts) == 0:
            return True
        return bool(np.all(np.linalg.eigvalsh(self.hessian(pts)) > 0))

    def pick_anchor(self, rho):
        """Index of the anchor vertex for each rho (the maximizer of ``p . rho``)."""
        if not self._anchors:
            return np.full(len(rho), -1)
        return np.argmax(rho @ self.vertices.T, axis=1)


@dataclass(frozen=True)
class KahlerPotentialFn:
    """A convex function on R^n with optional analytic derivatives."""

    value: Callable
    gradient: Optional[Callable] = None
    hessian: Optional[Callable] = None
    provenance: str = "closed-form"
    dim: int = 1
    # facet values l_j at grad phi(rho); lets callers evaluate u without rebuilding l from x
    facet_values: Optional[Callable] = None

    def __call__(self, rho):
        return self.value(rho)


def weighted_guillemin_potential(P, angles):
    """Closed-form ``u`` with ``f = 0`` for the given cone angles."""
    return SymplecticPotential(P, angles)


@dataclass(frozen=True)
class LegendrePoint:
    phi: np.ndarray
    x: np.ndarray
    l: np.ndarray
    hess_phi: np.ndarray
    logdet_hess_phi: np.ndarray
    residual: np.ndarray


def _newton_group(u, anchor, rho, tol, max_iter):
    """Damped Newton for ``grad u(x) = rho`` in one anchor chart; returns y, l, residual."""
    m, n = rho.shape
    x0 = u.centre
    y = np.tile(np.linalg.solve(anchor.Vinv, x0 - anchor.p), (m, 1))
    inv_beta = 1.0 / u.beta
    active = np.ones(m, dtype=bool)
    res = np.full(m, np.inf)

    def pieces(y):
        l = anchor.l0 + y @ anchor.W.T
        x = anchor.p + y @ anchor.Vinv.T
        return x, l

    def objective(x, l, r):
        return u._value(x, l) - np.einsum("ma,ma->m", r, x)

    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        x, l = pieces(y[idx])
        r = rho[idx]
        gx = u._gradient(x, l) - r
        res[idx] = np.max(np.abs(gx), axis=1)
        done = res[idx] <= tol
        gy = gx @ anchor.Vinv
        c = inv_beta / l
        Hy = np.einsum("mj,ja,jb->mab", c, anchor.W, anchor.W)
        if u.smooth is not None:
            Hy = Hy + np.einsum("ia,mij,jb->mab", anchor.Vinv, u.smooth[2](x), anchor.Vinv)
        d = -np.linalg.solve(Hy, gy[..., None])[..., 0]
        decrement = -np.einsum("ma,ma->m", gy, d)
        dl = d @ anchor.W.T
        # a Newton step that moves every log l_j by a few ulps cannot improve anything
        done |= np.max(np.abs(dl) / l, axis=1) <= 8 * np.finfo(float).eps
        # feasibility damping: no facet value may drop below half its current value
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = np.where(dl < 0, 0.5 * l / -dl, np.inf)
        s = np.minimum(1.0, ratio.min(axis=1))
        f0 = objective(x, l, r)
        for _ in range(60):
            yt = y[idx] + s[:, None] * d
            xt, lt = pieces(yt)
            ok = np.all(lt > 0, axis=1)
            ft = np.where(ok, objective(xt, np.where(lt > 0, lt, 1.0), r), np.inf)
            slack = 1e-13 * (1.0 + np.abs(f0))
            accept = ok & (ft <= f0 - 1e-4 * s * decrement + slack)
            if np.all(accept | done):
                break
            s = np.where(accept | done, s, 0.5 * s)
        step = np.where(done, 0.0, s)
        y[idx] = y[idx] + step[:, None] * d
        active[idx[done]] = False
    x, l = pieces(y)
    gx = u._gradient(x, l) - rho
    res = np.max(np.abs(gx), axis=1)
    return y, x, l, res, active


def _phi_hessian(u, anchor, x, l):
    """``Hess phi = Vinv H_y^{-1} Vinv^T`` and its log det, from the anchor chart.

    Near a face the small facet values sit on the diagonal of ``H_y``, so a
    Jacobi-scaled inverse stays accurate where inverting ``Hess u`` in x would not.
    """
    H = np.einsum("mj,ja,jb->mab", 1.0 / (u.beta * l), anchor.W, anchor.W)
    if u.smooth is not None:
        H = H + np.einsum("ia,mij,jb->mab", anchor.Vinv, u.smooth[2](x), anchor.Vinv)
    d = 1.0 / np.sqrt(np.einsum("maa->ma", H))
    S = H * d[:, :, None] * d[:, None, :]
    Hinv = np.linalg.inv(S) * d[:, :, None] * d[:, None, :]
    _, logdet_S = np.linalg.slogdet(S)
    logdet_H = logdet_S - 2 * np.log(d).sum(axis=1)
    hess = np.einsum("ia,mab,jb->mij", anchor.Vinv, Hinv, anchor.Vinv)
    return hess, -logdet_H + 2 * np.log(abs(np.linalg.det(anchor.Vinv)))


def _bisect_1d(u, rho, tol):
    """Fallback for n = 1: bisection on the monotone map x -> u'(x) - rho."""
    lo, hi = u.vertices.min(), u.vertices.max()
    out = np.empty(len(rho))
    for i, r in enumerate(rho[:, 0]):
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            g = u.gradient(np.array([[mid]]))[0, 0] - r
            if abs(g) <= tol or b - a < 1e-300:
                break
            if g > 0:
                b = mid
            else:
                a = mid
        out[i] = mid
    return out[:, None]


def legendre_data(u, rho, tol=1e-12, max_iter=100):
    """Transform of ``u`` at every row of ``rho`` plus the analytic Hessian of ``phi``."""
    rho = np.asarray(rho, dtype=float)
    single = rho.ndim == 1
    rho = np.atleast_2d(rho)
    if rho.shape[1] != u.dim:
        rho = rho.reshape(-1, u.dim)
    m, n = rho.shape
    x = np.empty((m, n))
    l = np.empty((m, u.facets.n_facets))
    res = np.empty(m)
    failed = np.zeros(m, dtype=bool)
    hess_phi = np.empty((m, n, n))
    logdet = np.empty(m)
    anchors = u.pick_anchor(rho)
    for k in np.unique(anchors):
        sel = anchors == k
        anchor = u._anchors[k] if k >= 0 else u._plain
        _, xs, ls, rs, act = _newton_group(u, anchor, rho[sel], tol, max_iter)
        x[sel], l[sel], res[sel] = xs, ls, rs
        failed[sel] = act
        hess_phi[sel], logdet[sel] = _phi_hessian(u, anchor, xs, ls)
    if np.any(failed):
        if n == 1:
            xb = _bisect_1d(u, rho[failed], tol)
            x[failed] = xb
            l[failed] = u.l(xb)
            res[failed] = np.abs(u.gradient(xb)[:, 0] - rho[failed, 0])
            hess_phi[failed], logdet[failed] = _phi_hessian(u, u._plain, xb, l[failed])
            failed[:] = False
        else:
            bad = np.nonzero(failed)[0]
            raise NoConvergence(f"Legendre Newton failed at {len(bad)} point(s)",
                                last_iterate=x[bad], residual=res[bad])
    phi = np.einsum("ma,ma->m", x, rho) - u._value(x, l)
    out = LegendrePoint(phi, x, l, hess_phi, logdet, res)
    if single:
        return LegendrePoint(phi[0], x[0], l[0], hess_phi[0], logdet[0], res[0])
    return out


def _inv_small(H):
    """Explicit inverse of a stack of 1x1 or 2x2 matrices; works in longdouble."""
    n = H.shape[-1]
    if n == 1:
        return 1 / H, H[..., 0, 0]
    a, b, c, d = H[..., 0, 0], H[..., 0, 1], H[..., 1, 0], H[..., 1, 1]
    det = a * d - b * c
    inv = np.empty_like(H)
    inv[..., 0, 0], inv[..., 1, 1] = d / det, a / det
    inv[..., 0, 1], inv[..., 1, 0] = -b / det, -c / det
    return inv, det


def legendre_extended(u, rho, polish=2):
    """Transform data in ``np.longdouble`` for n <= 2.

    A double-precision solve is refined by ``polish`` Newton steps carried out
    in extended precision in the anchor chart. Returns ``(phi, x, hess_phi,
    logdet_hess_phi)`` as longdouble arrays. Used where second differences of
    ``phi`` have to be resolved far below double rounding of ``phi`` itself.
    """
    if u.dim > 2 or u.smooth is not None:
        raise ValueError("extended transforms support n <= 2 and f = 0 only")
    rho = np.atleast_2d(np.asarray(rho, dtype=float))
    base = legendre_data(u, rho)
    ld = np.longdouble
    m, n = rho.shape
    rho_ld = rho.astype(ld)
    phi = np.empty(m, dtype=ld)
    x = np.empty((m, n), dtype=ld)
    hess = np.empty((m, n, n), dtype=ld)
    logdet = np.empty(m, dtype=ld)
    inv_beta = 1 / u.beta_ld
    A = u.A.astype(ld)
    anchors = u.pick_anchor(rho)
    for k in np.unique(anchors):
        sel = anchors == k
        anc = u._anchors[k] if k >= 0 else u._plain
        Vinv, W, l0, p = (anc.Vinv.astype(ld), anc.W.astype(ld), anc.l0.astype(ld), anc.p.astype(ld))
        if anc.active:
            y = base.l[sel][:, list(anc.active)].astype(ld)
        else:
            y = base.x[sel].astype(ld)
        r = rho_ld[sel]
        for _ in range(polish + 1):
            l = l0 + y @ W.T
            xs = p + y @ Vinv.T
            g = ((np.log(l) + 1) * inv_beta) @ A - r
            gy = g @ Vinv
            Hy = np.einsum("mj,ja,jb->mab", inv_beta / l, W, W)
            Hinv, detHy = _inv_small(Hy)
            if _ == polish:
                break
            y = y - np.einsum("mab,mb->ma", Hinv, gy)
        terms = l * np.log(l)
        x[sel] = xs
        phi[sel] = np.einsum("ma,ma->m", xs, r) - terms @ inv_beta
        hess[sel] = np.einsum("ia,mab,jb->mij", Vinv, Hinv, Vinv)
        # det(Vinv) = +-1 for Delzant anchors, so log det hess_phi = -log det H_y
        logdet[sel] = -np.log(detHy) + 2 * np.log(np.abs(ld(np.linalg.det(anc.Vinv))))
    return phi, x, hess, logdet


def legendre_transform(u, rho, tol=1e-12, max_iter=100):
    """``phi(rho) = sup_x (x . rho - u(x))`` and its maximizer ``x``."""
    data = legendre_data(u, rho, tol=tol, max_iter=max_iter)
    return data.phi, data.x


def legendre_potential(u, tol=1e-12):
    """Wrap the transform of ``u`` as a :class:`KahlerPotentialFn`."""
    return KahlerPotentialFn(
        value=lambda rho: legendre_data(u, rho, tol).phi,
        gradient=lambda rho: legendre_data(u, rho, tol).x,
        hessian=lambda rho: legendre_data(u, rho, tol).hess_phi,
        provenance="legendre-of-potential",
        dim=u.dim,
        facet_values=lambda rho: legendre_data(u, rho, tol).l,
    )


def moment_map(phi, rho, step=1e-5):
    """``grad phi(rho)``; central differences when no analytic gradient is attached."""
    rho = np.asarray(rho, dtype=float)
    if phi.gradient is not None:
        return np.asarray(phi.gradient(rho))
    pts = np.atleast_2d(rho)
    n = pts.shape[1]
    grad = np.empty_like(pts)
    for a in range(n):
        e = np.zeros(n)
        e[a] = step
        grad[:, a] = (np.asarray(phi.value(pts + e)) - np.asarray(phi.value(pts - e))) / (2 * step)
    return grad[0] if rho.ndim == 1 else grad


def inverse_legendre_transform(phi, x, rho0=None, tol=1e-11, max_iter=100):
    """``sup_rho (x . rho - phi(rho))`` by damped Newton; returns ``(value, rho)``.

    Needs ``phi`` with analytic gradient and Hessian. Used to check that the
    transform is an involution.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    rho = np.zeros_like(x) if rho0 is None else np.atleast_2d(np.asarray(rho0, dtype=float)).copy()

    def obj(r):
        return np.asarray(phi.value(r)) - np.einsum("ma,ma->m", x, r)

    for _ in range(max_iter):
        g = np.asarray(phi.gradient(rho)) - x
        if np.max(np.abs(g)) <= tol:
            break
        H = np.asarray(phi.hessian(rho))
        d = -np.linalg.solve(H, g[..., None])[..., 0]
        dec = -np.einsum("ma,ma->m", g, d)
        f0 = obj(rho)
        s = np.ones(len(rho))
        for _ in range(60):
            ft = obj(rho + s[:, None] * d)
            ok = ft <= f0 - 1e-4 * s * dec + 1e-13 * (1 + np.abs(f0))
            if np.all(ok):
                break
            s = np.where(ok, s, 0.5 * s)
        rho = rho + s[:, None] * d
    else:
        raise NoConvergence("inverse Legendre Newton did not converge", last_iterate=rho)
    return -obj(rho), rho


def verify_duality(u, phi, samples):
    """Max Fenchel defect ``|phi(rho) + u(grad phi(rho)) - rho . grad phi(rho)|``."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    x = moment_map(phi, samples)
    x = np.atleast_2d(x)
    # far out, x rounds onto the boundary; accurate facet values avoid that when available
    l = np.atleast_2d(phi.facet_values(samples)) if phi.facet_values is not None else u.l(x)
    if not np.all(l > 0):
        return np.inf
    defect = np.asarray(phi.value(samples)) + u._value(x, l) - np.einsum("ma,ma->m", samples, x)
    return float(np.max(np.abs(defect)))
