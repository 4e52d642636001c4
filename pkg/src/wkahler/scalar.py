"""Scalars and exact linear algebra.

A scalar is either a :class:`fractions.Fraction` (exact) or a ``float``
(approximate).  Python's numeric tower already gives the mixing rule we
want: any operation touching a float returns a float, and Fraction
arithmetic never rounds.  Vectors are plain tuples of scalars.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

Scalar = Union[Fraction, float]
Vector = tuple


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


def to_scalar(value, *, exact: bool = True) -> Scalar:
    """Parse ``value`` into a scalar.

    Accepts ints, Fractions, floats, and strings such as ``"3"``, ``"-2/7"``
    or ``"0.125"``.  With ``exact=True`` floats are converted to the
    rational they represent (binary floats are dyadic rationals, so this
    is lossless).
    """
    if isinstance(value, bool):
        raise ValidationError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value if exact else float(value)
    if isinstance(value, int):
        return Fraction(value) if exact else float(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"non-finite number: {value!r}")
        return Fraction(value) if exact else value
    if isinstance(value, str):
        try:
            q = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse number {value!r}") from exc
        return q if exact else float(q)
    raise ValidationError(f"not a number: {value!r}")


def to_vector(values, *, exact: bool = True) -> Vector:
    if isinstance(values, (str, bytes)) or not isinstance(values, Iterable):
        values = [values]
    return tuple(to_scalar(v, exact=exact) for v in values)


def is_exact(*values) -> bool:
    """True iff every scalar (or every entry of every vector) is exact."""
    for v in values:
        if isinstance(v, tuple):
            if not all(isinstance(x, Fraction) for x in v):
                return False
        elif not isinstance(v, Fraction):
            return False
    return True


def fmt(x) -> str | float | None:
    """Render a scalar for JSON output: ``"p/q"`` strings for exact values."""
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def fmt_vec(v) -> list:
    return [fmt(x) for x in v]


def dot(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise ValidationError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def vsub(a, b) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def vadd(a, b) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vscale(c, a) -> Vector:
    return tuple(c * x for x in a)


# -- exact Gaussian elimination -------------------------------------------

def rref(rows: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form. Returns (matrix, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def nullspace(rows, ncols: int | None = None) -> list[Vector]:
    """Basis of {x : A x = 0}."""
    if not rows:
        n = ncols or 0
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    n = len(rows[0])
    m, pivots = rref(rows)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for i, p in enumerate(pivots):
            x[p] = -m[i][f]
        basis.append(tuple(x))
    return basis


def solve(a_rows, b) -> Vector | None:
    """Unique solution of a square system, or None when singular."""
    n = len(a_rows)
    aug = [list(r) + [bi] for r, bi in zip(a_rows, b)]
    m, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return tuple(m[i][n] for i in range(n))


def det(rows) -> Fraction:
    m = [list(r) for r in rows]
    n = len(m)
    sign = 1
    out = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            sign = -sign
        piv = m[c][c]
        out *= piv
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / piv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return out * sign


def affine_rank(points: Sequence[Vector]) -> int:
    """Dimension of the affine hull (-1 for an empty set)."""
    if not points:
        return -1
    p0 = points[0]
    return rank([vsub(p, p0) for p in points[1:]]) if len(points) > 1 else 0


def primitive(normal: Vector) -> Vector:
    """Scale a rational vector to a primitive integer vector (same direction)."""
    if not is_exact(normal):
        norm = math.sqrt(sum(float(x) ** 2 for x in normal))
        return tuple(float(x) / norm for x in normal)
    den = 1
    for x in normal:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in normal]
    g = 0
    for i in ints:
        g = math.gcd(g, i)
    if g == 0:
        return tuple(Fraction(0) for _ in normal)
    return tuple(Fraction(i // g) for i in ints)
