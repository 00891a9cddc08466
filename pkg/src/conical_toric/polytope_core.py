"""Exact lattice-polytope geometry for facet presentations.

A polytope is given by affine functions ``l_j(x) = v_j . x + lambda_j`` with
primitive integer normals ``v_j``; the polytope is ``{x : l_j(x) >= 0}``.
All arithmetic here is done with :class:`fractions.Fraction`; floating point
never enters this module.

The dimension is capped at 3. Vertices are found by brute force over all
``n``-subsets of facet equalities, which is perfectly adequate at that size.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import factorial, gcd

from ._exact import (as_fraction, as_vector, det, dot, integer_kernel, nullspace,
                     rank, solve)

__all__ = [
    "PolytopeError", "UnboundedPolytope", "EmptyPolytope", "DegeneratePolytope",
    "ValidationError", "FacetPresentation", "VertexSet", "FanoPolytope", "Face",
    "vertices_from_facets", "is_delzant", "volume_and_barycenter",
    "faces_of_codim", "normalized_face_volume", "lattice_coordinates",
    "MAX_DIM",
]

MAX_DIM = 3


class PolytopeError(ValueError):
    pass


class UnboundedPolytope(PolytopeError):
    pass


class EmptyPolytope(PolytopeError):
    pass


class DegeneratePolytope(PolytopeError):
    pass


class ValidationError(PolytopeError):
    """A presentation that violates a Fano/Delzant requirement.

    ``witness`` carries the offending object (a vertex, a facet index, ...).
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class FacetPresentation:
    """Facets ``l_j(x) = normals[j] . x + offsets[j]``.

    Normals must be primitive integer vectors and (normal, offset) pairs must
    be distinct. Boundedness and non-emptiness are checked when vertices are
    computed.
    """

    normals: tuple
    offsets: tuple

    def __post_init__(self):
        normals = tuple(tuple(int(c) for c in v) for v in self.normals)
        offsets = as_vector(self.offsets)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        if not normals:
            raise PolytopeError("a polytope needs at least one facet")
        if len(normals) != len(offsets):
            raise PolytopeError("one offset per normal is required")
        n = len(normals[0])
        if n < 1 or any(len(v) != n for v in normals):
            raise PolytopeError("all normals must have the same positive length")
        for j, v in enumerate(normals):
            g = 0
            for c in v:
                g = gcd(g, abs(c))
            if g != 1:
                raise ValidationError(f"normal {v} of facet {j} is not primitive", witness=j)
        pairs = list(zip(normals, offsets))
        if len(set(pairs)) != len(pairs):
            raise ValidationError("duplicate facet in presentation")

    @classmethod
    def fano(cls, normals):
        """Presentation with every offset equal to 1."""
        normals = tuple(tuple(v) for v in normals)
        return cls(normals, (1,) * len(normals))

    @property
    def dim(self):
        return len(self.normals[0])

    @property
    def n_facets(self):
        return len(self.normals)

    def evaluate(self, x):
        """All ``l_j(x)`` as a tuple of Fractions."""
        x = as_vector(x)
        return tuple(dot(v, x) + lam for v, lam in zip(self.normals, self.offsets))

    def contains(self, x, strict=False):
        values = self.evaluate(x)
        return all(v > 0 for v in values) if strict else all(v >= 0 for v in values)

    def translated(self, c):
        """Presentation of ``P - c``: ``lambda_j -> lambda_j + v_j . c``."""
        c = as_vector(c)
        return FacetPresentation(self.normals,
                                 tuple(lam + dot(v, c) for v, lam in zip(self.normals, self.offsets)))


@dataclass(frozen=True)
class VertexSet:
    vertices: tuple
    incidence: tuple  # frozenset of active facet indices per vertex

    def __len__(self):
        return len(self.vertices)


def _recession_is_trivial(normals):
    """True iff ``{y : v_j . y >= 0 for all j}`` is ``{0}``."""
    n = len(normals[0])
    if rank(normals) < n:
        return False
    # The cone is pointed; a nonzero cone has an extreme ray cut out by n-1
    # independent tight constraints.
    for subset in combinations(range(len(normals)), n - 1):
        rows = [normals[j] for j in subset]
        kernel = nullspace(rows, n)
        if len(kernel) != 1:
            continue
        y = kernel[0]
        for d in (y, tuple(-c for c in y)):
            if all(dot(v, d) >= 0 for v in normals):
                return False
    return True


def vertices_from_facets(fp):
    """Enumerate vertices exactly by solving every ``n``-subset of facet equalities."""
    n = fp.dim
    if n > MAX_DIM:
        raise PolytopeError(f"dimension {n} exceeds the desk-scale cap of {MAX_DIM}")
    if not _recession_is_trivial(fp.normals):
        raise UnboundedPolytope("facet normals do not positively span R^n")
    found = {}
    for subset in combinations(range(fp.n_facets), n):
        a = [fp.normals[j] for j in subset]
        if det(a) == 0:
            continue
        x = solve(a, [-fp.offsets[j] for j in subset])
        values = fp.evaluate(x)
        if all(v >= 0 for v in values):
            found[x] = frozenset(j for j, v in enumerate(values) if v == 0)
    if not found:
        raise EmptyPolytope("no feasible vertex")
    ordered = sorted(found)
    return VertexSet(tuple(ordered), tuple(found[v] for v in ordered))


def is_delzant(fp, vs):
    """Check smoothness at every vertex.

    Returns ``(True, None)`` or ``(False, vertex)`` for the first offending
    vertex in lexicographic order.
    """
    n = fp.dim
    for vertex, active in zip(vs.vertices, vs.incidence):
        if len(active) != n:
            return False, vertex
        d = det([fp.normals[j] for j in sorted(active)])
        if abs(d) != 1:
            return False, vertex
    return True, None


def _affine_dim(points):
    if len(points) <= 1:
        return 0
    p0 = points[0]
    return rank([[a - b for a, b in zip(p, p0)] for p in points[1:]])


def _vertex_average(points):
    k = len(points)
    n = len(points[0])
    return tuple(sum((p[i] for p in points), Fraction(0)) / k for i in range(n))


def _subfaces(vertex_ids, fp, vs):
    """Facets (maximal proper faces) of the face spanned by ``vertex_ids``."""
    dim = _affine_dim([vs.vertices[i] for i in vertex_ids])
    out = set()
    for j in range(fp.n_facets):
        sub = frozenset(i for i in vertex_ids if j in vs.incidence[i])
        if not sub or sub == vertex_ids:
            continue
        if _affine_dim([vs.vertices[i] for i in sub]) == dim - 1:
            out.add(sub)
    return sorted(out, key=lambda s: sorted(s))


def _triangulate(vertex_ids, fp, vs):
    """Fan triangulation of a face: cone from its vertex average over its facets."""
    pts = [vs.vertices[i] for i in sorted(vertex_ids)]
    if _affine_dim(pts) == 0:
        return [(pts[0],)]
    centre = _vertex_average(pts)
    simplices = []
    for sub in _subfaces(vertex_ids, fp, vs):
        for simplex in _triangulate(sub, fp, vs):
            simplices.append((centre,) + simplex)
    return simplices


def volume_and_barycenter(fp, vs):
    """Exact Euclidean volume and barycenter of a full-dimensional polytope."""
    n = fp.dim
    all_ids = frozenset(range(len(vs)))
    if _affine_dim(list(vs.vertices)) < n:
        raise DegeneratePolytope("polytope is not full dimensional")
    total = Fraction(0)
    moment = [Fraction(0)] * n
    for simplex in _triangulate(all_ids, fp, vs):
        p0 = simplex[0]
        vol = abs(det([[a - b for a, b in zip(p, p0)] for p in simplex[1:]])) / factorial(n)
        centroid = _vertex_average(list(simplex))
        total += vol
        for i in range(n):
            moment[i] += vol * centroid[i]
    if total == 0:
        raise DegeneratePolytope("polytope has zero volume")
    return total, tuple(m / total for m in moment)


@dataclass(frozen=True)
class Face:
    active_facets: frozenset
    codim: int
    basis: tuple  # integer lattice basis of the direction space
    vertices: tuple

    @property
    def dim(self):
        return len(self.basis)


def lattice_coordinates(face, point):
    """Coordinates of ``point - face.vertices[0]`` in the face's lattice basis."""
    if face.dim == 0:
        return ()
    p0 = face.vertices[0]
    delta = [a - b for a, b in zip(point, p0)]
    n = len(delta)
    a = [[Fraction(face.basis[k][i]) for k in range(face.dim)] for i in range(n)]
    y = solve(a, delta)
    if y is None:
        raise PolytopeError("point is not in the affine span of the face")
    return y


def faces_of_codim(fp, vs, k):
    """All faces of codimension ``k`` in deterministic order."""
    n = fp.dim
    if not 0 <= k <= n:
        raise ValueError(f"codimension must lie in [0, {n}]")
    faces = {}
    for active in vs.incidence:
        for subset in combinations(sorted(active), k):
            sub = frozenset(subset)
            ids = frozenset(i for i, inc in enumerate(vs.incidence) if sub <= inc)
            if ids in faces:
                continue
            pts = [vs.vertices[i] for i in sorted(ids)]
            if n - _affine_dim(pts) != k:
                continue
            faces[ids] = pts
    out = []
    for ids, pts in faces.items():
        common = frozenset.intersection(*(vs.incidence[i] for i in ids))
        basis = integer_kernel([fp.normals[j] for j in sorted(common)], n) if common else [
            tuple(int(i == j) for j in range(n)) for i in range(n)]
        out.append(Face(common, k, tuple(basis), tuple(pts)))
    out.sort(key=lambda f: (sorted(f.active_facets), f.vertices))
    return out


def normalized_face_volume(face, fp=None, vs=None):
    """``d!`` times the volume of a ``d``-face measured in its own lattice.

    ``fp`` and ``vs`` are only needed for faces of dimension >= 2, whose
    triangulation requires the facet incidence data.
    """
    d = face.dim
    if d == 0:
        return Fraction(1)
    if d == 1:
        coords = [lattice_coordinates(face, p)[0] for p in face.vertices]
        return max(coords) - min(coords)
    if fp is None or vs is None:
        raise ValueError("faces of dimension >= 2 need the facet presentation and vertex set")
    ids = frozenset(i for i, v in enumerate(vs.vertices) if v in set(face.vertices))
    total = Fraction(0)
    for simplex in _triangulate(ids, fp, vs):
        ys = [lattice_coordinates(face, p) for p in simplex]
        y0 = ys[0]
        total += abs(det([[a - b for a, b in zip(y, y0)] for y in ys[1:]]))
    return total


@dataclass(frozen=True)
class FanoPolytope:
    """Integral Delzant polytope with every offset equal to 1.

    Build one with :meth:`from_normals`, which runs every check and raises
    :class:`ValidationError` with a witness on failure.
    """

    facets: FacetPresentation
    vertex_set: VertexSet = field(repr=False)

    @classmethod
    def from_normals(cls, normals):
        fp = FacetPresentation.fano(normals)
        return cls.from_presentation(fp)

    @classmethod
    def from_presentation(cls, fp):
        for j, lam in enumerate(fp.offsets):
            if lam != 1:
                raise ValidationError(f"facet {j} has offset {lam}, expected 1", witness=j)
        vs = vertices_from_facets(fp)
        for v in vs.vertices:
            if any(c.denominator != 1 for c in v):
                raise ValidationError(f"vertex {v} is not a lattice point", witness=v)
        ok, witness = is_delzant(fp, vs)
        if not ok:
            raise ValidationError("not Delzant at vertex (" + ", ".join(map(str, witness)) + ")", witness=witness)
        if not fp.contains((0,) * fp.dim, strict=True):
            raise ValidationError("origin is not interior", witness=(0,) * fp.dim)
        return cls(fp, vs)

    @property
    def dim(self):
        return self.facets.dim

    @property
    def normals(self):
        return self.facets.normals

    @property
    def n_facets(self):
        return self.facets.n_facets

    @property
    def vertices(self):
        return self.vertex_set.vertices

    def evaluate(self, x):
        return self.facets.evaluate(x)

    @cached_property
    def _vol_bary(self):
        return volume_and_barycenter(self.facets, self.vertex_set)

    @property
    def volume(self):
        return self._vol_bary[0]

    @property
    def barycenter(self):
        return self._vol_bary[1]

    def faces(self, codim):
        return faces_of_codim(self.facets, self.vertex_set, codim)

    def normalized_volume(self, face):
        return normalized_face_volume(face, self.facets, self.vertex_set)
