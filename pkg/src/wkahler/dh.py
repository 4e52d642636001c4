"""Weighted Duistermaat-Heckman integrals over moment polytopes.

Polynomial weights (products of affine factors) are integrated exactly:
each simplex of a triangulation is parametrised by barycentric coordinates,
every affine factor becomes a linear form in those coordinates, and
monomials integrate by the Dirichlet formula

    int_S lam^alpha = d! vol(S) alpha! / (d + |alpha|)!.

Other weights fall back to Grundmann-Moeller cubature with increasing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import Polytope, _compositions, contains, simplex_volume, triangulate
from .scalar import Scalar, ValidationError, Vector, dot, to_scalar
from .weights import Constant, PolyProduct, Weight, check_positive


class IntegrationError(ValidationError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class Measure:
    polytope: Polytope
    weight: Weight

    def __post_init__(self):
        if not self.polytope.is_full_dimensional:
            raise ValidationError("the moment polytope must be full-dimensional")
        check_positive(self.weight, self.polytope)


@dataclass(frozen=True)
class Integral:
    value: Scalar
    residual: float
    method: str


# -- exact path --------------------------------------------------------------

def _mul_linear(poly: dict, form: Sequence[Fraction]) -> dict:
    out: dict = {}
    for exps, coef in poly.items():
        for i, a in enumerate(form):
            if a == 0:
                continue
            e = exps[:i] + (exps[i] + 1,) + exps[i + 1:]
            out[e] = out.get(e, 0) + coef * a
    return out


def _dirichlet(poly: dict, d: int) -> Fraction:
    total = Fraction(0)
    for exps, coef in poly.items():
        deg = sum(exps)
        num = math.prod(math.factorial(a) for a in exps)
        total += coef * Fraction(math.factorial(d) * num, math.factorial(d + deg))
    return total


def _simplex_poly_integral(simplex, v: PolyProduct, extra_linear: Sequence[Vector] = ()) -> Fraction:
    """Exact integral over a simplex of v(x) * prod of the given coordinate forms."""
    d = len(simplex[0])
    poly = {tuple([0] * (d + 1)): Fraction(v.coef)}
    for p, c, k in v.factors:
        form = [dot(p, vert) + c for vert in simplex]
        for _ in range(k):
            poly = _mul_linear(poly, form)
    for lin in extra_linear:
        poly = _mul_linear(poly, [dot(lin, vert) for vert in simplex])
    return simplex_volume(simplex) * _dirichlet(poly, d)


# -- cubature path -----------------------------------------------------------

def _gm_rule(order: int, n: int):
    """Grundmann-Moeller rule of degree 2*order+1 on the unit n-simplex.

    Returns barycentric nodes (n+1 columns) and weights summing to 1/n!.
    """
    s = order
    deg = 2 * s + 1
    acc: dict = {}
    for i in range(s + 1):
        w = (-1) ** i * 2.0 ** (-2 * s) * (deg + n - 2 * i) ** deg / math.factorial(i) / math.factorial(deg + n - i)
        den = deg + n - 2 * i
        for beta in _compositions(s - i, n + 1):
            pt = tuple(Fraction(2 * b + 1, den) for b in beta)
            acc[pt] = acc.get(pt, 0.0) + w
    nodes = np.array([[float(c) for c in pt] for pt in acc])
    weights = np.array(list(acc.values()))
    return nodes, weights


def _cubature(simplices, funcs, order: int) -> np.ndarray:
    d = len(simplices[0][0])
    nodes, weights = _gm_rule(order, d)
    total = np.zeros(len(funcs))
    for s in simplices:
        V = np.array([[float(c) for c in v] for v in s])
        X = nodes @ V
        jac = float(simplex_volume(s)) * math.factorial(d)
        for j, f in enumerate(funcs):
            total[j] += jac * float(weights @ f(X))
    return total


def _integrate_cubature(P: Polytope, v: Weight, coords: Sequence[int], tol: float, max_order: int):
    simplices = triangulate(P)
    funcs = [v.eval_array] + [
        (lambda X, i=i: X[:, i] * v.eval_array(X)) for i in coords
    ]
    prev = None
    residual = math.inf
    for order in range(1, max_order + 1):
        cur = _cubature(simplices, funcs, order)
        if prev is not None:
            scale = max(np.max(np.abs(cur)), 1e-300)
            residual = float(np.max(np.abs(cur - prev)) / scale)
            if residual < tol:
                return cur, residual
        prev = cur
    raise IntegrationError("cubature did not converge", residual)


# -- public operations ---------------------------------------------------------

def _weighted_integrals(M: Measure, coords: Sequence[int], tol: float, max_order: int):
    """Integrals of v and x_i v for i in ``coords``; exact where possible."""
    P, v = M.polytope, M.weight
    d = P.ambient_dim
    if isinstance(v, Constant):
        v = PolyProduct((), v.k)
    if isinstance(v, PolyProduct) and v.exact:
        simplices = triangulate(P)
        units = [tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)]
        vals = [sum((_simplex_poly_integral(s, v) for s in simplices), Fraction(0))]
        for i in coords:
            vals.append(sum((_simplex_poly_integral(s, v, (units[i],)) for s in simplices), Fraction(0)))
        return vals, 0.0, "exact"
    arr, residual = _integrate_cubature(P, v, coords, tol, max_order)
    return [float(a) for a in arr], residual, "cubature"


def vol_v(M: Measure, tol: float = 1e-10, max_order: int = 12) -> Scalar:
    """Total mass of the weighted DH measure."""
    return integral(M, tol=tol, max_order=max_order).value


def integral(M: Measure, tol: float = 1e-10, max_order: int = 12) -> Integral:
    vals, residual, method = _weighted_integrals(M, (), tol, max_order)
    return Integral(vals[0], residual, method)


def moment(M: Measure, i: int, tol: float = 1e-10, max_order: int = 12) -> Scalar:
    """int_P x_i v(x) dx."""
    if not 0 <= i < M.polytope.ambient_dim:
        raise ValidationError(f"coordinate index {i} out of range")
    vals, _, _ = _weighted_integrals(M, (i,), tol, max_order)
    return vals[1]


def barycenter(M: Measure, tol: float = 1e-10, max_order: int = 12) -> Vector:
    d = M.polytope.ambient_dim
    vals, _, _ = _weighted_integrals(M, tuple(range(d)), tol, max_order)
    vol = vals[0]
    b = tuple(m / vol for m in vals[1:])
    if not contains(M.polytope, b, tol=1e-9):
        raise ValidationError("barycenter left the polytope; integration is inaccurate")
    return b


def barycenter_p1_closed_form(p, c, d: int, lam) -> Fraction:
    """Barycenter on [-1, 1] of u -> (p lam u + c)^d, by the closed formula.

    Requires p > 0 (p = 0 is the product case) and c > lam |p|.
    """
    p, c, lam = to_scalar(p), to_scalar(c), to_scalar(lam)
    if p == 0:
        raise ValidationError("p = 0 is the product case; the closed form divides by p")
    if p < 0:
        raise ValidationError("closed form assumes p > 0 (use the symmetry u -> -u)")
    if lam <= 0:
        raise ValidationError("lambda must be positive")
    if not c > lam * abs(p):
        raise ValidationError("compatibility requires c > lambda |p|")
    if not isinstance(d, int) or d < 0:
        raise ValidationError("d must be a nonnegative integer")
    hi, lo = p * lam + c, c - p * lam
    ratio = Fraction(d + 1, d + 2) * (hi ** (d + 2) - lo ** (d + 2)) / (hi ** (d + 1) - lo ** (d + 1))
    return (ratio - c) / (p * lam)
