"""Small exact linear algebra over the rationals and the integers.

Everything here works on plain tuples/lists of ``Fraction`` or ``int`` and is
meant for the tiny matrices (n <= 3) that show up in polytope combinatorics.
"""

from fractions import Fraction
from math import gcd


def as_fraction(value):
    """Convert ints, Fractions and ``"p/q"`` strings to ``Fraction``.

    Floats are rejected on purpose: silently turning 0.1 into a 3602879701896397/2^55
    rational is never what a caller wants in this package.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    # numpy integers
    if hasattr(value, "__index__"):
        return Fraction(int(value))
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def as_vector(values):
    return tuple(as_fraction(v) for v in values)


def dot(u, v):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def det(rows):
    """Determinant by fraction-exact Gaussian elimination."""
    m = [list(map(Fraction, r)) for r in rows]
    n = len(m)
    if n == 0:
        return Fraction(1)
    sign = 1
    result = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        p = m[col][col]
        result *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return sign * result


def row_reduce(rows):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows):
    return len(row_reduce(rows)[1]) if rows else 0


def solve(a, b):
    """Solve ``a x = b`` for a consistent system of full column rank.

    ``a`` may have more rows than columns (overdetermined but consistent);
    returns ``None`` when the system is inconsistent or underdetermined.
    """
    ncols = len(a[0])
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    m, pivots = row_reduce(aug)
    if ncols in pivots or len(pivots) != ncols:
        return None
    return tuple(m[i][ncols] for i in range(ncols))


def nullspace(rows, n):
    """Rational basis of ``{y : rows @ y = 0}`` in dimension ``n``."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    m, pivots = row_reduce(rows)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        y = [Fraction(0)] * n
        y[f] = Fraction(1)
        for i, p in enumerate(pivots):
            y[p] = -m[i][f]
        basis.append(tuple(y))
    return basis


def primitive(v):
    """Scale an integer/rational vector to the primitive integer vector on its ray."""
    fr = [as_fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in ints)


def integer_kernel(rows, n):
    """Basis of the saturated lattice ``{y in Z^n : rows @ y = 0}``.

    Column-style Hermite reduction: integer column operations on ``rows`` are
    mirrored on a unimodular matrix ``U``; the columns of ``U`` that end up
    against zero columns of the reduced matrix span the integer kernel.
    """
    a = [[int(x) for x in r] for r in rows]
    for r in rows:
        for x in r:
            if as_fraction(x).denominator != 1:
                raise ValueError("integer_kernel needs an integer matrix")
    u = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_op(dst, src, k):
        # column dst -= k * column src
        for row in a:
            row[dst] -= k * row[src]
        for row in u:
            row[dst] -= k * row[src]

    def col_swap(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in u:
            row[i], row[j] = row[j], row[i]

    pivot = 0
    for row in range(len(a)):
        if pivot == n:
            break
        while True:
            nonzero = [c for c in range(pivot, n) if a[row][c] != 0]
            if not nonzero:
                break
            best = min(nonzero, key=lambda c: abs(a[row][c]))
            for c in nonzero:
                if c != best:
                    col_op(c, best, a[row][c] // a[row][best])
            if all(a[row][c] == 0 for c in range(pivot, n) if c != best):
                col_swap(pivot, best)
                pivot += 1
                break
    return [tuple(u[i][c] for i in range(n)) for c in range(pivot, n)]
