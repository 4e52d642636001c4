"""Weight functions on moment polytopes and the derived weights built from them.

Every weight carries its own logarithmic gradient, so the derived
quantities below are evaluated without numerical differentiation and stay
exact whenever the weight and the points are rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import Polytope, grid_points
from .scalar import Scalar, ValidationError, Vector, dot, is_exact, to_scalar, to_vector, vsub


class Weight:
    """Base class. Subclasses implement ``eval``, ``grad_log`` and ``eval_array``."""

    exact = True

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x) -> Scalar:
        raise NotImplementedError

    def grad_log(self, x) -> Vector:
        raise NotImplementedError

    def eval_array(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def rescale(self, t) -> Weight:
        """The weight x -> v(x / t)."""
        raise NotImplementedError

    def translate(self, s) -> Weight:
        """The weight x -> v(x - s)."""
        raise NotImplementedError

    def __mul__(self, other: Weight) -> Weight:
        return multiply(self, other)


@dataclass(frozen=True)
class Constant(Weight):
    k: Fraction

    def eval(self, x):
        return self.k

    def grad_log(self, x):
        return tuple(Fraction(0) for _ in x)

    def eval_array(self, X):
        return np.full(X.shape[0], float(self.k))

    def rescale(self, t):
        return self

    def translate(self, s):
        return self


@dataclass(frozen=True)
class LogAffine(Weight):
    """x -> exp(<a, x> + b)."""

    a: Vector
    b: Fraction = Fraction(0)
    exact = False

    def eval(self, x):
        return math.exp(float(dot(self.a, x) + self.b))

    def grad_log(self, x):
        if len(x) != len(self.a):
            raise ValidationError("dimension mismatch")
        return self.a

    def eval_array(self, X):
        return np.exp(X @ np.array([float(c) for c in self.a]) + float(self.b))

    def rescale(self, t):
        t = to_scalar(t)
        return LogAffine(tuple(c / t for c in self.a), self.b)

    def translate(self, s):
        return LogAffine(self.a, self.b - dot(self.a, to_vector(s)))


@dataclass(frozen=True)
class PolyProduct(Weight):
    """x -> coef * prod (<p, x> + c)^power."""

    factors: tuple[tuple[Vector, Fraction, int], ...]
    coef: Fraction = Fraction(1)

    def __post_init__(self):
        for p, c, k in self.factors:
            if not isinstance(k, int) or k < 0:
                raise ValidationError("powers must be nonnegative integers")

    @property
    def exact(self):
        return is_exact(self.coef, *[c for _, c, _ in self.factors]) and all(
            is_exact(p) for p, _, _ in self.factors
        )

    @property
    def degree(self) -> int:
        return sum(k for _, _, k in self.factors)

    def eval(self, x):
        out = self.coef
        for p, c, k in self.factors:
            out = out * (dot(p, x) + c) ** k
        return out

    def grad_log(self, x):
        g = [Fraction(0)] * len(x)
        for p, c, k in self.factors:
            if k == 0:
                continue
            val = dot(p, x) + c
            if val == 0:
                raise ValidationError("log-gradient evaluated at a zero of a factor")
            for i, pi in enumerate(p):
                g[i] = g[i] + k * pi / val
        return tuple(g)

    def eval_array(self, X):
        out = np.full(X.shape[0], float(self.coef))
        for p, c, k in self.factors:
            out *= (X @ np.array([float(q) for q in p]) + float(c)) ** k
        return out

    def rescale(self, t):
        t = to_scalar(t)
        return PolyProduct(tuple((tuple(q / t for q in p), c, k) for p, c, k in self.factors), self.coef)

    def translate(self, s):
        s = to_vector(s)
        return PolyProduct(tuple((p, c - dot(p, s), k) for p, c, k in self.factors), self.coef)

    def as_expression(self) -> Expression:
        node: Node = Const(float(self.coef))
        for p, c, k in self.factors:
            node = Mul((node, Pow(Affine(tuple(p), c), k)))
        return Expression(node)


# -- expression trees (approximate only) -------------------------------------

class Node:
    def value(self, x) -> float:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def array(self, X) -> np.ndarray:
        raise NotImplementedError

    def map_affine(self, f) -> Node:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(Node):
    c: float

    def value(self, x):
        return float(self.c)

    def grad(self, x):
        return np.zeros(len(x))

    def array(self, X):
        return np.full(X.shape[0], float(self.c))

    def map_affine(self, f):
        return self


@dataclass(frozen=True)
class Affine(Node):
    p: Vector
    c: Fraction

    def value(self, x):
        return float(dot(self.p, x) + self.c)

    def grad(self, x):
        return np.array([float(q) for q in self.p])

    def array(self, X):
        return X @ np.array([float(q) for q in self.p]) + float(self.c)

    def map_affine(self, f):
        return Affine(*f(self.p, self.c))


@dataclass(frozen=True)
class Add(Node):
    args: tuple

    def value(self, x):
        return sum(a.value(x) for a in self.args)

    def grad(self, x):
        return sum(a.grad(x) for a in self.args)

    def array(self, X):
        return sum(a.array(X) for a in self.args)

    def map_affine(self, f):
        return Add(tuple(a.map_affine(f) for a in self.args))


@dataclass(frozen=True)
class Mul(Node):
    args: tuple

    def value(self, x):
        return math.prod(a.value(x) for a in self.args)

    def grad(self, x):
        vals = [a.value(x) for a in self.args]
        g = np.zeros(len(x))
        for i, a in enumerate(self.args):
            g = g + a.grad(x) * math.prod(v for j, v in enumerate(vals) if j != i)
        return g

    def array(self, X):
        out = np.ones(X.shape[0])
        for a in self.args:
            out = out * a.array(X)
        return out

    def map_affine(self, f):
        return Mul(tuple(a.map_affine(f) for a in self.args))


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: float

    def value(self, x):
        return self.base.value(x) ** self.exponent

    def grad(self, x):
        b = self.base.value(x)
        if self.exponent == 0:
            return np.zeros(len(x))
        return self.exponent * b ** (self.exponent - 1) * self.base.grad(x)

    def array(self, X):
        return self.base.array(X) ** self.exponent

    def map_affine(self, f):
        return Pow(self.base.map_affine(f), self.exponent)


@dataclass(frozen=True)
class Exp(Node):
    arg: Node

    def value(self, x):
        return math.exp(self.arg.value(x))

    def grad(self, x):
        return math.exp(self.arg.value(x)) * self.arg.grad(x)

    def array(self, X):
        return np.exp(self.arg.array(X))

    def map_affine(self, f):
        return Exp(self.arg.map_affine(f))


@dataclass(frozen=True)
class Log(Node):
    arg: Node

    def value(self, x):
        a = self.arg.value(x)
        if a <= 0:
            raise ValidationError("log of a nonpositive value inside an expression weight")
        return math.log(a)

    def grad(self, x):
        a = self.arg.value(x)
        if a <= 0:
            raise ValidationError("log of a nonpositive value inside an expression weight")
        return self.arg.grad(x) / a

    def array(self, X):
        a = self.arg.array(X)
        if np.any(a <= 0):
            raise ValidationError("log of a nonpositive value inside an expression weight")
        return np.log(a)

    def map_affine(self, f):
        return Log(self.arg.map_affine(f))


@dataclass(frozen=True)
class Expression(Weight):
    root: Node
    exact = False

    def eval(self, x):
        return self.root.value(x)

    def grad_log(self, x):
        v = self.root.value(x)
        if v == 0:
            raise ValidationError("log-gradient evaluated at a zero of the weight")
        return tuple(float(g) / v for g in self.root.grad(x))

    def eval_array(self, X):
        return self.root.array(X)

    def rescale(self, t):
        t = to_scalar(t)
        return Expression(self.root.map_affine(lambda p, c: (tuple(q / t for q in p), c)))

    def translate(self, s):
        s = to_vector(s)
        return Expression(self.root.map_affine(lambda p, c: (p, c - dot(p, s))))


def _as_node(v: Weight) -> Node:
    if isinstance(v, Expression):
        return v.root
    if isinstance(v, Constant):
        return Const(float(v.k))
    if isinstance(v, LogAffine):
        return Exp(Affine(v.a, v.b))
    if isinstance(v, PolyProduct):
        return v.as_expression().root
    raise TypeError(type(v))


def to_expression(v: Weight) -> Expression:
    """The same weight as a generic expression tree (evaluated in floats)."""
    return Expression(_as_node(v))


def multiply(v: Weight, w: Weight) -> Weight:
    """Product weight; stays in the most specific variant that can hold it."""
    if isinstance(v, Constant) and isinstance(w, Constant):
        return Constant(v.k * w.k)
    if isinstance(v, Constant) and isinstance(w, PolyProduct):
        return PolyProduct(w.factors, v.k * w.coef)
    if isinstance(w, Constant) and isinstance(v, PolyProduct):
        return PolyProduct(v.factors, w.k * v.coef)
    if isinstance(v, PolyProduct) and isinstance(w, PolyProduct):
        return PolyProduct(v.factors + w.factors, v.coef * w.coef)
    if isinstance(v, LogAffine) and isinstance(w, LogAffine):
        return LogAffine(tuple(a + b for a, b in zip(v.a, w.a)), v.b + w.b)
    return Expression(Mul((_as_node(v), _as_node(w))))


def add_weights(*ws: Weight) -> Expression:
    return Expression(Add(tuple(_as_node(w) for w in ws)))


# -- positivity ------------------------------------------------------------

@dataclass(frozen=True)
class PositivityWitness:
    min_value: Scalar
    argmin: Vector
    points_checked: int


def check_positive(v: Weight, P: Polytope, grid: int = 4) -> PositivityWitness:
    """Check v > 0 at the vertices of P and on a deterministic interior grid.

    For a product of affine factors, positivity on P is decided exactly by
    requiring every factor to keep a strict sign over the vertices.
    """
    if isinstance(v, PolyProduct):
        for p, c, k in v.factors:
            if k == 0:
                continue
            vals = [dot(p, x) + c for x in P.vertices]
            if not (all(t > 0 for t in vals) or all(t < 0 for t in vals)):
                bad = min(zip(vals, P.vertices), key=lambda t: abs(t[0]))
                raise ValidationError(
                    f"weight factor <{list(map(str, p))}, x> + {c} vanishes or changes sign on the polytope "
                    f"(value {bad[0]} at {tuple(map(str, bad[1]))})"
                )
    points = list(P.vertices)
    if P.is_full_dimensional:
        points += [q for q in grid_points(P, grid) if q not in set(P.vertices)]
    best_val, best_pt = None, None
    for q in points:
        val = v.eval(q)
        if best_val is None or val < best_val:
            best_val, best_pt = val, q
    if best_val <= 0:
        raise ValidationError(f"weight is not positive on the polytope: value {best_val} at {best_pt}")
    return PositivityWitness(best_val, best_pt, len(points))


# -- derived weights ---------------------------------------------------------

@dataclass(frozen=True)
class ProductPoint:
    x: Vector
    y: Vector


@dataclass(frozen=True)
class TildeV:
    """x -> 2 (n + <d log v(x), x>), the target weight of v-solitons."""

    v: Weight
    n: int

    def __call__(self, x):
        x = tuple(x)
        return 2 * (self.n + dot(self.v.grad_log(x), x))

    eval = __call__


def tilde_v(v: Weight, n: int) -> TildeV:
    if n < 1:
        raise ValidationError("complex dimension n must be at least 1")
    return TildeV(v, n)


def hat_v(v: Weight, x, x2) -> Scalar:
    """<d log v(x), x - x2>."""
    x, x2 = tuple(x), tuple(x2)
    return dot(v.grad_log(x), vsub(x, x2))


def bar_w(v: Weight, w: Weight, pt: ProductPoint) -> Scalar:
    """w(x)/2 - <d log v(x), y>."""
    x = tuple(pt.x)
    return w.eval(x) / 2 - dot(v.grad_log(x), tuple(pt.y))


def check_w_eps(v: Weight, w: Weight, delta_eps, n: int, pt: ProductPoint) -> Scalar:
    """delta*n - w(x)/2 + <d log v(x), delta*x - y>."""
    x, y = tuple(pt.x), tuple(pt.y)
    g = v.grad_log(x)
    shifted = tuple(delta_eps * a - b for a, b in zip(x, y))
    return delta_eps * n - w.eval(x) / 2 + dot(g, shifted)


def check_w_eps_via_tilde(v: Weight, w: Weight, delta_eps, n: int, pt: ProductPoint) -> Scalar:
    """Same quantity as :func:`check_w_eps` through (delta * v~ - w)/2 - <d log v, y>."""
    x, y = tuple(pt.x), tuple(pt.y)
    return (delta_eps * tilde_v(v, n)(x) - w.eval(x)) / 2 - dot(v.grad_log(x), y)


def p_weight(factors: Sequence, polytope: Polytope | None = None) -> PolyProduct:
    """Weight prod (<p_a, y> + c_a)^dim_a of a fibration with basis factors.

    ``factors`` holds ``(p_a, c_a, dim_a)`` triples.  When ``polytope`` is
    given, every factor must be positive at its vertices.
    """
    fs = []
    for p, c, dim in factors:
        if not isinstance(dim, int) or dim < 1:
            raise ValidationError("basis dimensions must be positive integers")
        fs.append((to_vector(p), to_scalar(c), dim))
    v = PolyProduct(tuple(fs))
    if polytope is not None:
        for p, c, _ in fs:
            vals = [dot(p, x) + c for x in polytope.vertices]
            if min(vals) <= 0:
                raise ValidationError(
                    f"not a compatible Kähler class: <p, x> + c = {min(vals)} <= 0 at a vertex"
                )
        check_positive(v, polytope)
    return v


def is_concave_descriptor(w: Weight) -> bool:
    """Concavity that can be read off the descriptor without sampling."""
    if isinstance(w, Constant):
        return True
    if isinstance(w, LogAffine):
        return all(a == 0 for a in w.a)
    if isinstance(w, PolyProduct):
        return _affine_poly(w) or w.degree == 0
    return False


def is_convex_descriptor(w: Weight) -> bool:
    """Convexity readable from the descriptor: constants, affine, exp(affine), even powers of affine."""
    if isinstance(w, (Constant, LogAffine)):
        return True
    if isinstance(w, PolyProduct):
        live = [(p, c, k) for p, c, k in w.factors if k > 0]
        if not live:
            return True
        if _affine_poly(w):
            return True
        return len(live) == 1 and live[0][2] % 2 == 0 and w.coef >= 0
    return False


def _affine_poly(w: PolyProduct) -> bool:
    return w.degree <= 1
