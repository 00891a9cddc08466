"""Built-in polytopes, the text file format, and aggregated analysis reports.

File format, one item per line, ``#`` starts a comment::

    dim 2
    fano 1 0          # normal with offset 1
    facet 0 1 3/2     # normal and explicit offset (general polytopes only)
"""

from dataclasses import dataclass, field
from fractions import Fraction

from ._exact import as_fraction
from .chern_numbers import miyaoka_yau_check, toric_chern_numbers
from .polytope_core import FacetPresentation, FanoPolytope
from .toric_invariants import (cone_angles, divisor_of_point, greatest_ricci_lower_bound,
                               limiting_divisor, tau_of_alpha)

__all__ = [
    "ParseError", "KnownValues", "CatalogEntry", "AnalysisReport",
    "CATALOG", "catalog_entry", "parse_presentation", "parse_polytope",
    "format_polytope", "analyze", "fmt_fraction",
]


class ParseError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class KnownValues:
    R: Fraction
    c1n: Fraction
    c2c1: Fraction
    euler_char: int
    signature: Fraction | None


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    normals: tuple
    known: KnownValues | None = None
    description: str = ""

    @property
    def polytope(self):
        return FanoPolytope.from_normals(self.normals)

    def self_test(self):
        """Names of the known values that disagree with recomputation (empty when all match)."""
        if self.known is None:
            return []
        P = self.polytope
        chern = toric_chern_numbers(P)
        got = KnownValues(greatest_ricci_lower_bound(P).R, chern.c1n, chern.c2c1,
                          chern.euler_char, chern.signature)
        return [k for k in KnownValues.__dataclass_fields__ if getattr(got, k) != getattr(self.known, k)]


def _known(R, c1n, c2c1, chi, sigma):
    return KnownValues(Fraction(R), Fraction(c1n), Fraction(c2c1), chi,
                       None if sigma is None else Fraction(sigma))


CATALOG = {e.name: e for e in (
    CatalogEntry("p1", ((1,), (-1,)), _known(1, 2, 0, 2, None), "projective line"),
    CatalogEntry("p2", ((1, 0), (0, 1), (-1, -1)), _known(1, 9, 3, 3, 1), "projective plane"),
    CatalogEntry("p1xp1", ((1, 0), (0, 1), (-1, 0), (0, -1)), _known(1, 8, 4, 4, 0),
                 "product of two lines"),
    CatalogEntry("bl1p2", ((1, 0), (0, 1), (-1, -1), (1, 1)), _known("6/7", 8, 4, 4, 0),
                 "plane blown up at one point"),
    CatalogEntry("bl2p2", ((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1)), _known("21/25", 7, 5, 5, -1),
                 "plane blown up at two points"),
    CatalogEntry("bl3p2", ((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)), _known(1, 6, 6, 6, -2),
                 "plane blown up at three points"),
    CatalogEntry("p3", ((1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, -1)), _known(1, 64, 24, 4, None),
                 "projective 3-space"),
)}


def catalog_entry(name):
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(CATALOG)}") from None


def parse_presentation(text):
    """Parse the file format into a :class:`FacetPresentation`; also reports whether
    every facet line was a ``fano`` line."""
    dim = None
    normals, offsets = [], []
    all_fano = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if dim is None:
            if key != "dim" or len(rest) != 1:
                raise ParseError("first line must be 'dim n'", lineno)
            try:
                dim = int(rest[0])
            except ValueError:
                raise ParseError(f"bad dimension {rest[0]!r}", lineno) from None
            if dim < 1:
                raise ParseError("dimension must be positive", lineno)
            continue
        if key == "fano":
            want = dim
        elif key == "facet":
            want = dim + 1
            all_fano = False
        else:
            raise ParseError(f"unknown keyword {key!r}", lineno)
        if len(rest) != want:
            raise ParseError(f"'{key}' needs {want} numbers, got {len(rest)}", lineno)
        try:
            normal = tuple(int(c) for c in rest[:dim])
        except ValueError:
            raise ParseError("normals must be integers", lineno) from None
        try:
            offset = as_fraction(rest[dim]) if key == "facet" else Fraction(1)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad offset {rest[dim]!r}", lineno) from None
        normals.append(normal)
        offsets.append(offset)
    if dim is None:
        raise ParseError("empty input")
    if not normals:
        raise ParseError("no facets given")
    return FacetPresentation(tuple(normals), tuple(offsets)), all_fano


def parse_polytope(text):
    """Parse and validate a Fano polytope (offsets must all be 1)."""
    fp, _ = parse_presentation(text)
    return FanoPolytope.from_presentation(fp)


def format_polytope(P):
    fp = P.facets if isinstance(P, FanoPolytope) else P
    lines = [f"dim {fp.dim}"]
    for v, lam in zip(fp.normals, fp.offsets):
        coords = " ".join(str(c) for c in v)
        lines.append(f"fano {coords}" if lam == 1 else f"facet {coords} {lam}")
    return "\n".join(lines) + "\n"


def fmt_fraction(x, digits=6):
    """``6/7 (0.857143)``; integers print bare."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x} ({float(x):.{digits}g})"


def _fmt_vec(v):
    return "(" + ", ".join(str(Fraction(c)) for c in v) + ")"


@dataclass
class AnalysisReport:
    name: str
    polytope: FanoPolytope
    fano: object
    angles: object
    limiting: object
    chern: object
    miyaoka_yau: dict
    alpha: Fraction | None = None
    angles_at_alpha: object = None
    divisor_at_alpha: object = None
    extra: dict = field(default_factory=dict)

    def items(self):
        """Ordered ``(key, exact value)`` pairs."""
        P, f, c = self.polytope, self.fano, self.chern
        out = [("name", self.name), ("dim", P.dim), ("facets", len(P.normals)),
               ("normals", " ".join(_fmt_vec(v) for v in P.normals)),
               ("volume", P.volume), ("P_c", _fmt_vec(f.P_c)), ("R", f.R)]
        if f.Q is not None:
            out += [("Q", _fmt_vec(f.Q)), ("argmin_facets", ",".join(map(str, sorted(f.argmin_facets))))]
        out += [("beta_at_R", " ".join(str(b) for b in self.angles.beta))]
        if self.limiting is not None:
            out += [("limiting_divisor", " ".join(str(b) for b in self.limiting.coeffs))]
        out += [("c1^n", c.c1n), ("c2.c1^(n-2)", c.c2c1), ("euler_char", c.euler_char)]
        if c.signature is not None:
            out += [("signature", c.signature)]
        for beta, my in self.miyaoka_yau.items():
            verdict = "equality" if my.lhs == my.rhs else ("holds" if my.holds else "fails")
            out += [(f"miyaoka_yau[beta={beta}]", f"{verdict}: {my.lhs} >= {my.rhs}")]
        if self.alpha is not None:
            out += [("alpha", self.alpha),
                    ("beta_at_alpha", " ".join(str(b) for b in self.angles_at_alpha.beta))]
            if self.divisor_at_alpha is not None:
                out += [("divisor_at_alpha", " ".join(str(b) for b in self.divisor_at_alpha.coeffs)),
                        ("divisor_effective", self.divisor_at_alpha.effective)]
        out += list(self.extra.items())
        return out

    def render(self, machine=False):
        lines = []
        for key, value in self.items():
            if machine:
                lines.append(f"{key}\t{value}")
            elif isinstance(value, Fraction):
                lines.append(f"{key:>26}: {fmt_fraction(value)}")
            else:
                lines.append(f"{key:>26}: {value}")
        return "\n".join(lines)


def analyze(target, alpha=None, name=None):
    """Aggregate every exact invariant of a catalog entry or Fano polytope."""
    if isinstance(target, CatalogEntry):
        name = name or target.name
        P = target.polytope
    else:
        P = target
    report = greatest_ricci_lower_bound(P)
    angles = cone_angles(report, P, report.R)
    limiting = limiting_divisor(report, P) if report.R < 1 else None
    chern = toric_chern_numbers(P)
    my = {}
    if P.dim >= 2:
        for beta in sorted({report.R, Fraction(1)}):
            my[beta] = miyaoka_yau_check(chern, beta)
    out = AnalysisReport(name or "input", P, report, angles, limiting, chern, my)
    if alpha is not None:
        alpha = as_fraction(alpha)
        out.alpha = alpha
        out.angles_at_alpha = cone_angles(report, P, alpha)
        if alpha < 1:
            out.divisor_at_alpha = divisor_of_point(P, tau_of_alpha(report, alpha))
    return out
