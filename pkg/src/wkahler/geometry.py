"""Rational convex polytopes and linear families of moment polytopes.

Halfspaces use the convention ``<n, x> >= -offset``, so the reflexive
normalisation of an anticanonical polytope has every offset equal to 1 and
adding Kähler classes is adding offsets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .scalar import (
    Scalar,
    ValidationError,
    Vector,
    affine_rank,
    det,
    dot,
    is_exact,
    nullspace,
    primitive,
    rank,
    solve,
    to_scalar,
    to_vector,
    vsub,
)

MAX_DIM = 6
_MAX_SUBSETS = 500_000


class EmptyPolytopeError(ValidationError):
    pass


@dataclass(frozen=True)
class Polytope:
    """Bounded polytope carrying both descriptions.

    ``halfspaces`` is irredundant: every entry is a facet (or, for a
    lower-dimensional polytope, one side of an equation of its affine hull).
    """

    vertices: tuple[Vector, ...]
    halfspaces: tuple[tuple[Vector, Fraction], ...]
    ambient_dim: int

    @property
    def dim(self) -> int:
        return affine_rank(list(self.vertices))

    @property
    def is_full_dimensional(self) -> bool:
        return self.dim == self.ambient_dim

    @property
    def normals(self) -> tuple[Vector, ...]:
        return tuple(n for n, _ in self.halfspaces)

    @property
    def offsets(self) -> tuple[Fraction, ...]:
        return tuple(c for _, c in self.halfspaces)

    def __contains__(self, x) -> bool:
        return contains(self, x)

    def translate(self, t: Vector) -> Polytope:
        t = to_vector(t)
        verts = [tuple(a + b for a, b in zip(v, t)) for v in self.vertices]
        hs = tuple((n, c - dot(n, t)) for n, c in self.halfspaces)
        return Polytope(_sorted(verts), hs, self.ambient_dim)

    def scale(self, c) -> Polytope:
        c = to_scalar(c)
        if c <= 0:
            raise ValidationError("scale factor must be positive")
        verts = [tuple(c * a for a in v) for v in self.vertices]
        hs = tuple((n, c * off) for n, off in self.halfspaces)
        return Polytope(_sorted(verts), hs, self.ambient_dim)

    def same_set(self, other: Polytope) -> bool:
        return self.ambient_dim == other.ambient_dim and set(self.vertices) == set(other.vertices)


def _sorted(points) -> tuple[Vector, ...]:
    return tuple(sorted(set(points)))


def _check_dim(d: int) -> None:
    if d < 1:
        raise ValidationError("points must have at least one coordinate")
    if d > MAX_DIM:
        raise ValidationError(f"dimension {d} exceeds supported maximum {MAX_DIM}")


def _guard_subsets(m: int, k: int) -> None:
    if math.comb(m, k) > _MAX_SUBSETS:
        raise ValidationError(f"too many candidate subsets ({m} choose {k}); input too large")


# -- V-representation -> H-representation ----------------------------------

def _facets_full(points: list[Vector], d: int) -> list[tuple[Vector, Fraction]]:
    """Facets of a full-dimensional point set, by exact enumeration."""
    if d == 1:
        xs = [p[0] for p in points]
        return [((Fraction(1),), -min(xs)), ((Fraction(-1),), max(xs))]
    _guard_subsets(len(points), d)
    found: dict[Vector, Fraction] = {}
    for subset in itertools.combinations(points, d):
        p0 = subset[0]
        diffs = [vsub(p, p0) for p in subset[1:]]
        ns = nullspace(diffs)
        if len(ns) != 1:
            continue
        n = primitive(ns[0])
        vals = [dot(n, p) for p in points]
        lo, hi = min(vals), max(vals)
        h = dot(n, p0)
        if h == lo:
            normal, off = n, -lo
        elif h == hi:
            normal, off = tuple(-x for x in n), hi
        else:
            continue
        tight = [p for p in points if dot(normal, p) == -off]
        if affine_rank(tight) == d - 1:
            found[normal] = off
    return sorted(found.items())


def polytope_from_vertices(points: Sequence) -> Polytope:
    """Convex hull of a finite point set, with its irredundant H-rep."""
    pts = [to_vector(p) for p in points]
    if not pts:
        raise ValidationError("empty point set")
    d = len(pts[0])
    if any(len(p) != d for p in pts):
        raise ValidationError("dimension mismatch among points")
    _check_dim(d)
    pts = sorted(set(pts))
    k = affine_rank(pts)
    p0 = pts[0]

    if k == d:
        halfspaces = _facets_full(pts, d)
    else:
        # parametrise the affine hull as p0 + B y and take the hull in y-space
        basis_rows = []
        for p in pts[1:]:
            diff = vsub(p, p0)
            if rank(basis_rows + [list(diff)]) > len(basis_rows):
                basis_rows.append(list(diff))
        equations = nullspace(basis_rows, ncols=d) if basis_rows else nullspace([], ncols=d)
        halfspaces = []
        for e in equations:
            e = primitive(e)
            c = dot(e, p0)
            halfspaces.append((e, -c))
            halfspaces.append((tuple(-x for x in e), c))
        if k > 0:
            gram = [[dot(bi, bj) for bj in basis_rows] for bi in basis_rows]
            ys = []
            for p in pts:
                rhs = [dot(bi, vsub(p, p0)) for bi in basis_rows]
                ys.append(solve(gram, rhs))
            for m_vec, mu in _facets_full(ys, k):
                # find n in span(B) with B^T n = m
                coeffs = solve(gram, list(m_vec))
                n = tuple(sum(c * bi[j] for c, bi in zip(coeffs, basis_rows)) for j in range(d))
                scale_to = primitive(n)
                ratio = next(a / b for a, b in zip(scale_to, n) if b != 0)
                off = (mu - dot(n, p0)) * ratio
                halfspaces.append((scale_to, off))
    verts = _extreme_points(pts, halfspaces, k)
    return Polytope(tuple(verts), tuple(halfspaces), d)


def _extreme_points(pts, halfspaces, k) -> list[Vector]:
    if k == 0:
        return pts[:1]
    out = []
    for p in pts:
        tight = [n for n, c in halfspaces if dot(n, p) == -c]
        # a vertex is cut out by its tight constraints alone
        if rank(tight) == len(p):
            out.append(p)
    return out


# -- H-representation -> V-representation ----------------------------------

@lru_cache(maxsize=256)
def _bounded(normals: tuple[Vector, ...]) -> bool:
    """True iff the recession cone {x : <n,x> >= 0 for all n} is {0}."""
    d = len(normals[0])
    box = []
    for i in range(d):
        e = tuple(Fraction(int(i == j)) for j in range(d))
        box.append((e, Fraction(1)))
        box.append((tuple(-x for x in e), Fraction(1)))
    system = [(n, Fraction(0)) for n in normals] + box
    verts = _enumerate_vertices(system, d)
    return all(all(x == 0 for x in v) for v in verts)


def _enumerate_vertices(system, d) -> list[Vector]:
    _guard_subsets(len(system), d)
    out = set()
    for rows in itertools.combinations(system, d):
        a = [list(n) for n, _ in rows]
        b = [-c for _, c in rows]
        x = solve(a, b)
        if x is None:
            continue
        if all(dot(n, x) >= -c for n, c in system):
            out.add(x)
    return sorted(out)


def halfspace_vertices(normals, offsets) -> list[Vector]:
    """Vertices of {x : <n_F, x> >= -offset_F} (empty list when infeasible)."""
    normals = tuple(to_vector(n) for n in normals)
    offsets = tuple(to_scalar(c) for c in offsets)
    if len(normals) != len(offsets):
        raise ValidationError("normals and offsets differ in length")
    if not normals:
        raise ValidationError("no halfspaces given")
    d = len(normals[0])
    if any(len(n) != d for n in normals):
        raise ValidationError("dimension mismatch among normals")
    _check_dim(d)
    if not _bounded(normals):
        raise ValidationError("halfspace system is unbounded")
    return _enumerate_vertices(list(zip(normals, offsets)), d)


def polytope_from_halfspaces(normals, offsets) -> Polytope:
    verts = halfspace_vertices(normals, offsets)
    if not verts:
        raise EmptyPolytopeError("halfspace system is infeasible")
    return polytope_from_vertices(verts)


# -- queries ---------------------------------------------------------------

def _check_point(P: Polytope, x) -> Vector:
    x = tuple(x)
    if len(x) != P.ambient_dim:
        raise ValidationError(f"dimension mismatch: point has {len(x)} coordinates, polytope {P.ambient_dim}")
    return x


def contains(P: Polytope, x, tol: float = 0.0) -> bool:
    """Closed membership. Exact for rational points; ``tol`` only matters for floats."""
    x = _check_point(P, x)
    if is_exact(x):
        return all(dot(n, x) >= -c for n, c in P.halfspaces)
    return all(float(dot(n, x)) >= -float(c) - tol for n, c in P.halfspaces)


def support_min(P: Polytope, p) -> Scalar:
    """min over P of <p, .>, attained at a vertex."""
    p = _check_point(P, p)
    return min(dot(p, v) for v in P.vertices)


def ray_max_scale(P: Polytope, direction) -> Scalar:
    """Largest s >= 0 with s * direction in P; ``math.inf`` if the ray stays inside."""
    d = _check_point(P, direction)
    zero = tuple(Fraction(0) for _ in d)
    if not contains(P, zero):
        raise ValidationError("ray shooting needs the origin inside the polytope")
    best = math.inf
    for n, c in P.halfspaces:
        nd = dot(n, d)
        if nd < 0:
            s = c / (-nd)
            if s < best:
                best = s
    return best


def volume(P: Polytope) -> Fraction:
    return sum((simplex_volume(s) for s in triangulate(P)), Fraction(0))


def simplex_volume(simplex: Sequence[Vector]) -> Fraction:
    v0 = simplex[0]
    d = len(v0)
    return abs(det([vsub(v, v0) for v in simplex[1:]])) / math.factorial(d)


def triangulate(P: Polytope) -> list[tuple[Vector, ...]]:
    """Pulling triangulation: cone the lowest vertex over the facets missing it."""
    d = P.ambient_dim
    if not P.is_full_dimensional:
        raise ValidationError("triangulation needs a full-dimensional polytope")
    verts = list(P.vertices)
    facet_sets = [
        frozenset(i for i, v in enumerate(verts) if dot(n, v) == -c) for n, c in P.halfspaces
    ]

    def rec(face: frozenset, k: int) -> list[tuple[int, ...]]:
        if k == 0:
            return [tuple(face)]
        apex = min(face)
        out = []
        seen = set()
        for fs in facet_sets:
            sub = face & fs
            if apex in sub or sub in seen or sub == face:
                continue
            if affine_rank([verts[i] for i in sub]) == k - 1:
                seen.add(sub)
                out.extend(s + (apex,) for s in rec(sub, k - 1))
        return out

    simplices = rec(frozenset(range(len(verts))), d)
    return [tuple(verts[i] for i in s) for s in simplices]


# -- linear families of classes ---------------------------------------------

@dataclass(frozen=True)
class ToricClassFamily:
    """Fixed facet normals with offsets for [omega_0] and for 2*pi*c_1(X)."""

    normals: tuple[Vector, ...]
    offsets_omega0: tuple[Fraction, ...]
    offsets_c1: tuple[Fraction, ...]

    def __post_init__(self):
        if not (len(self.normals) == len(self.offsets_omega0) == len(self.offsets_c1)):
            raise ValidationError("normals and offset arrays must be aligned")
        if not self.normals:
            raise ValidationError("family needs at least one facet normal")
        d = len(self.normals[0])
        if any(len(n) != d for n in self.normals):
            raise ValidationError("dimension mismatch among normals")
        _check_dim(d)

    @classmethod
    def make(cls, normals, offsets_omega0, offsets_c1) -> ToricClassFamily:
        return cls(
            tuple(to_vector(n) for n in normals),
            tuple(to_scalar(c) for c in offsets_omega0),
            tuple(to_scalar(c) for c in offsets_c1),
        )

    @classmethod
    def proportional(cls, delta_c1: Polytope, lam) -> ToricClassFamily:
        """Family with [omega_0] = lam * 2 pi c_1(X), built from the anticanonical polytope."""
        lam = to_scalar(lam)
        return cls(delta_c1.normals, tuple(lam * c for c in delta_c1.offsets), delta_c1.offsets)

    @property
    def dim(self) -> int:
        return len(self.normals[0])

    def offsets(self, t1, t2) -> tuple[Scalar, ...]:
        return tuple(t1 * a + t2 * b for a, b in zip(self.offsets_omega0, self.offsets_c1))

    def proportionality(self) -> Fraction | None:
        """lam with offsets_omega0 = lam * offsets_c1, if such a lam > 0 exists."""
        lam = None
        for a, b in zip(self.offsets_omega0, self.offsets_c1):
            if b == 0:
                if a != 0:
                    return None
                continue
            r = a / b
            if lam is None:
                lam = r
            elif r != lam:
                return None
        return lam if lam is not None and lam > 0 else None


def is_kahler_proper(normals, offsets) -> bool:
    """Nonempty, full-dimensional, and every given inequality cuts out a facet."""
    verts = halfspace_vertices(normals, offsets)
    if not verts:
        return False
    d = len(verts[0])
    if affine_rank(verts) != d:
        return False
    for n, c in zip(normals, offsets):
        tight = [v for v in verts if dot(n, v) == -c]
        if affine_rank(tight) != d - 1:
            return False
    return True


def combine_class(F: ToricClassFamily, t1, t2) -> tuple[Polytope | None, bool]:
    """Moment polytope of t1 [omega_0] + t2 2 pi c_1(X) and its Kähler-properness.

    Returns ``(None, False)`` when the system is infeasible.
    """
    t1, t2 = to_scalar(t1), to_scalar(t2)
    offs = F.offsets(t1, t2)
    verts = halfspace_vertices(F.normals, offs)
    if not verts:
        return None, False
    P = polytope_from_vertices(verts)
    return P, is_kahler_proper(F.normals, offs)


def _critical_thresholds(F: ToricClassFamily) -> list[Fraction]:
    """Values of s where d+1 facet hyperplanes of c_1 - s omega_0 meet.

    The combinatorial type (hence properness) is constant between them.
    """
    d = F.dim
    m = len(F.normals)
    rows = list(range(m))
    out = set()
    for subset in itertools.combinations(rows, d):
        a = [list(F.normals[i]) for i in subset]
        # x(s) = base + s * slope solves <n_i, x> = -(c1_i - s w0_i)
        base = solve(a, [-F.offsets_c1[i] for i in subset])
        if base is None:
            continue
        slope = solve(a, [F.offsets_omega0[i] for i in subset])
        for j in rows:
            if j in subset:
                continue
            num = dot(F.normals[j], base) + F.offsets_c1[j]
            den = dot(F.normals[j], slope) - F.offsets_omega0[j]
            if den != 0:
                out.add(-num / den)
    return sorted(out)


def kahler_threshold(F: ToricClassFamily) -> Scalar:
    """sup{s : c_1 - s [omega_0] is Kähler-proper}, exactly.

    Proportional families give 1/lam directly.  Otherwise properness is
    tested once inside each interval between consecutive critical values;
    the Kähler cone is convex, so the proper parameters form one interval.
    """
    if not is_kahler_proper(F.normals, F.offsets_omega0):
        raise ValidationError("[omega_0] is not Kähler-proper for this family")
    lam = F.proportionality()
    if lam is not None:
        return 1 / lam
    crit = _critical_thresholds(F)

    def proper(s) -> bool:
        return is_kahler_proper(F.normals, F.offsets(-s, 1))

    if not crit:
        return math.inf if proper(Fraction(0)) else -math.inf
    samples = [crit[0] - 1] + [(a + b) / 2 for a, b in zip(crit, crit[1:])] + [crit[-1] + 1]
    flags = [proper(s) for s in samples]
    if not any(flags):
        raise ValidationError("no Kähler-proper member of c_1 - s [omega_0]")
    last = max(i for i, f in enumerate(flags) if f)
    return math.inf if last == len(crit) else crit[last]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for i in range(total + 1):
        for rest in _compositions(total - i, parts - 1):
            yield (i,) + rest


def simplex_grid(simplex: Sequence[Vector], density: int) -> list[Vector]:
    """Rational points sum_i (k_i / density) v_i with sum k_i = density."""
    d = len(simplex[0])
    out = []
    for ks in _compositions(density, len(simplex)):
        out.append(
            tuple(sum((Fraction(k, density) * v[j] for k, v in zip(ks, simplex)), Fraction(0)) for j in range(d))
        )
    return out


def grid_points(P: Polytope, density: int) -> list[Vector]:
    """Deterministic rational grid covering P (vertices included)."""
    if density < 1:
        raise ValidationError("grid density must be positive")
    if not P.is_full_dimensional:
        return list(P.vertices)
    pts = set()
    for s in triangulate(P):
        pts.update(simplex_grid(s, density))
    return sorted(pts)
