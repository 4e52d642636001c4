"""Brute-force twins of the exact computations.

Everything here is deliberately naive: Monte-Carlo integration, grid
minimisation, bisection and finite differences.  These routines share no
integration or closed-form code with the main paths, so agreement between
the two is meaningful evidence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .geometry import Polytope, contains, grid_points, simplex_volume, triangulate
from .scalar import Scalar, ValidationError, Vector
from .weights import Weight


@dataclass(frozen=True)
class OracleConfig:
    samples: int = 100_000
    grid: int = 16
    seed: int = 0
    tol: float = 1e-6
    chunks: int = 8

    def __post_init__(self):
        if self.samples < 1000:
            raise ValidationError("statistical oracles need at least 1000 samples")
        if self.grid < 1:
            raise ValidationError("grid density must be positive")
        if self.chunks < 1:
            raise ValidationError("chunk count must be positive")


@dataclass(frozen=True)
class MCEstimate:
    volume: float
    volume_se: float
    barycenter: tuple[float, ...]
    barycenter_se: tuple[float, ...]


def _sample(P: Polytope, cfg: OracleConfig) -> tuple[np.ndarray, float]:
    """Uniform points in P: volume-weighted simplex choice, Dirichlet(1,...,1) inside."""
    if not P.is_full_dimensional:
        raise ValidationError("Monte-Carlo integration needs a full-dimensional polytope")
    simplices = triangulate(P)
    verts = np.array([[[float(c) for c in v] for v in s] for s in simplices])
    vols = np.array([float(simplex_volume(s)) for s in simplices])
    probs = vols / vols.sum()
    d = P.ambient_dim
    sizes = [cfg.samples // cfg.chunks + (1 if i < cfg.samples % cfg.chunks else 0) for i in range(cfg.chunks)]
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.chunks)
    parts = []
    for size, child in zip(sizes, children):
        rng = np.random.default_rng(child)
        idx = rng.choice(len(simplices), size=size, p=probs)
        lam = rng.dirichlet(np.ones(d + 1), size=size)
        parts.append(np.einsum("nk,nkd->nd", lam, verts[idx]))
    return np.concatenate(parts), float(vols.sum())


def mc_integrate(P: Polytope, v: Weight, cfg: OracleConfig = OracleConfig()) -> tuple[float, float]:
    """Unbiased estimate of int_P v and its standard error."""
    X, total = _sample(P, cfg)
    f = total * v.eval_array(X)
    return float(f.mean()), float(f.std(ddof=1) / math.sqrt(len(f)))


def mc_barycenter(P: Polytope, v: Weight, cfg: OracleConfig = OracleConfig()) -> MCEstimate:
    """Weighted volume and barycenter; ratio errors by the delta method."""
    X, total = _sample(P, cfg)
    n = len(X)
    f = total * v.eval_array(X)
    fbar = f.mean()
    bary, ses = [], []
    for j in range(P.ambient_dim):
        g = X[:, j] * f
        r = g.mean() / fbar
        resid = g - r * f
        bary.append(float(r))
        ses.append(float(resid.std(ddof=1) / (math.sqrt(n) * abs(fbar))))
    return MCEstimate(float(fbar), float(f.std(ddof=1) / math.sqrt(n)), tuple(bary), tuple(ses))


def grid_inf(f: Callable, P: Polytope, cfg: OracleConfig = OracleConfig()) -> tuple[Scalar, Vector]:
    """Minimum of f over a barycentric grid of P, refined once around the argmin."""
    pts = list(P.vertices) + grid_points(P, cfg.grid)
    best_val, best_pt = None, None
    for q in pts:
        val = f(q)
        if not math.isfinite(float(val)):
            raise ValidationError(f"non-finite value at {q}")
        if best_val is None or val < best_val:
            best_val, best_pt = val, q
    m = 4
    h = Fraction(1, cfg.grid * m)
    d = P.ambient_dim
    for offs in itertools.product(range(-m, m + 1), repeat=d):
        q = tuple(c + k * h for c, k in zip(best_pt, offs))
        if contains(P, q):
            val = f(q)
            if val < best_val:
                best_val, best_pt = val, q
    return best_val, best_pt


def bisect_threshold(predicate: Callable, lo, hi, iters: int = 60) -> tuple:
    """Bracket [lo, hi] of width (hi - lo) / 2^iters around the switch of ``predicate``."""
    if not predicate(lo):
        raise ValidationError("bisection needs predicate(lo) to hold")
    if predicate(hi):
        raise ValidationError("bisection needs predicate(hi) to fail")
    for _ in range(iters):
        mid = (lo + hi) / 2
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


def fd_hessian(f: Callable, x: Sequence, h: float = 1e-4, P: Polytope | None = None) -> np.ndarray:
    """Centered second differences of f at x (symmetric by construction)."""
    x = np.array([float(c) for c in x])
    d = len(x)
    if P is not None:
        for signs in itertools.product((-1, 0, 1), repeat=d):
            q = x + h * np.array(signs)
            if not contains(P, tuple(q)):
                raise ValidationError("point too close to the boundary for the finite-difference step")

    def ev(q):
        return float(f(tuple(float(c) for c in q)))

    H = np.zeros((d, d))
    f0 = ev(x)
    e = np.eye(d) * h
    for i in range(d):
        H[i, i] = (ev(x + e[i]) - 2 * f0 + ev(x - e[i])) / h ** 2
        for j in range(i + 1, d):
            val = (ev(x + e[i] + e[j]) - ev(x + e[i] - e[j]) - ev(x - e[i] + e[j]) + ev(x - e[i] - e[j])) / (4 * h * h)
            H[i, j] = H[j, i] = val
    return H


def sgr_beta_float(n: int) -> float:
    """log-gamma evaluation of 2 (2n+1)! / ((n+2) (n! 2^n)^2)."""
    logv = math.log(2) + math.lgamma(2 * n + 2) - math.log(n + 2) - 2 * (math.lgamma(n + 1) + n * math.log(2))
    return math.exp(logv)
