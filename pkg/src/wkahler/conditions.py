"""Checkers for sufficient conditions of weighted cscK and weighted J existence.

Every condition is reported with its verdict, a numeric margin and a
witness point, so callers can scan the slack parameter epsilon themselves.
Analytic inputs that are not computable from polytope data (vanishing of
the weighted Futaki invariant, the J normalization identity and the chi
bound) enter as asserted flags and are labelled as such.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .geometry import (
    Polytope,
    ToricClassFamily,
    combine_class,
    contains,
    grid_points,
    kahler_threshold,
    polytope_from_halfspaces,
    polytope_from_vertices,
)
from .invariants import BetaReport
from .oracle import fd_hessian
from .scalar import Scalar, ValidationError
from .weights import (
    Constant,
    LogAffine,
    ProductPoint,
    Weight,
    bar_w,
    check_w_eps,
    hat_v,
    is_concave_descriptor,
    is_convex_descriptor,
)

STRICT_TOL = 1e-9


@dataclass(frozen=True)
class DeltaEstimate:
    delta_eps: Scalar
    provenance: str = "user-asserted"

    def __post_init__(self):
        if not self.delta_eps > 0:
            raise ValidationError("delta_eps must be positive")


def delta_from_beta(report: BetaReport, eps=Fraction(0)) -> DeltaEstimate:
    """Lower bound for the reduced delta invariant from a beta report.

    beta = min(s, delta); when beta < s this pins delta = beta, otherwise
    delta >= s.  The reduced invariant dominates the unreduced one.
    """
    base = report.value if report.delta_conclusion == "delta_equals_value" else report.s_threshold
    note = (
        "delta_v = beta_v since beta_v < s, and reduced delta >= delta_v"
        if report.delta_conclusion == "delta_equals_value"
        else "delta_v >= s since beta_v = s, and reduced delta >= delta_v"
    )
    return DeltaEstimate(base - eps, f"{note}; minus eps = {eps}")


def _positive(x) -> bool:
    """Strict positivity: exact comparison for rationals, a small margin otherwise."""
    if isinstance(x, Fraction):
        return x > 0
    return float(x) > STRICT_TOL


@dataclass(frozen=True)
class InfResult:
    value: Scalar
    witness: ProductPoint
    certified: bool
    resolution: Optional[Fraction]


@dataclass(frozen=True)
class Verdict:
    holds: bool
    margin: Optional[Scalar] = None
    witness: Optional[object] = None
    note: str = ""


@dataclass(frozen=True)
class ConditionReport:
    verdicts: dict = field(default_factory=dict)
    overall: bool = False

    def __post_init__(self):
        if self.overall != all(v.holds for v in self.verdicts.values()):
            raise ValidationError("overall verdict must be the conjunction of the conditions")


def _report(verdicts: dict) -> ConditionReport:
    return ConditionReport(verdicts, all(v.holds for v in verdicts.values()))


def theta_eps_polytope(F: ToricClassFamily, d: DeltaEstimate) -> tuple[Optional[Polytope], bool]:
    """Moment polytope of delta_eps [omega_0] - 2 pi c_1(X) and whether it is Kähler."""
    return combine_class(F, d.delta_eps, -1)


def _refine(f: Callable, P: Polytope, x0, h: Fraction, rounds: int, m: int = 2):
    """Pattern search around x0 inside P with shrinking rational steps."""
    best_x, best = x0, f(x0)
    d = len(x0)
    for _ in range(rounds):
        moved = True
        while moved:
            moved = False
            for offs in itertools.product(range(-m, m + 1), repeat=d):
                if not any(offs):
                    continue
                q = tuple(c + k * h for c, k in zip(best_x, offs))
                if contains(P, q):
                    val = f(q)
                    if val < best:
                        best, best_x, moved = val, q, True
        h /= 2 * m
    return best, best_x, h


def inf_product(
    f: Callable,
    Dx: Polytope,
    Dy: Polytope,
    affine_in_y: bool = True,
    *,
    concave_in_x: bool = False,
    grid: int = 8,
    rounds: int = 6,
) -> InfResult:
    """inf of f(x, y) over Dx x Dy.

    Functions affine in y attain their minimum over y at a vertex of Dy.
    When f is also concave in x the x-minimum sits at a vertex of Dx and
    the value is certified.  Otherwise x ranges over a barycentric grid
    followed by pattern-search refinement, and the resolution is reported.
    """
    ys = list(Dy.vertices) if affine_in_y else list(Dy.vertices) + grid_points(Dy, grid)

    def fx(x):
        vals = []
        for y in ys:
            val = f(x, y)
            if not math.isfinite(float(val)):
                raise ValidationError(f"non-finite value at x={x}, y={y}")
            vals.append((val, y))
        return min(vals, key=lambda t: t[0])

    if concave_in_x and affine_in_y:
        best = min(((fx(x), x) for x in Dx.vertices), key=lambda t: t[0][0])
        (val, y), x = best
        return InfResult(val, ProductPoint(x, y), True, None)
    xs = list(Dx.vertices) + (grid_points(Dx, grid) if Dx.is_full_dimensional else [])
    (val, y), x = min(((fx(x), x) for x in xs), key=lambda t: t[0][0])
    if Dx.is_full_dimensional and rounds > 0:
        val, x, res = _refine(lambda q: fx(q)[0], Dx, x, Fraction(1, grid * 2), rounds)
        y = fx(x)[1]
    else:
        res = Fraction(1, grid)
    return InfResult(val, ProductPoint(x, y), False, res)


# -- convexity -------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexityVerdict:
    status: str  # certified_convex | convex_on_grid | not_convex
    witness: Optional[dict] = None

    @property
    def convex(self) -> bool:
        return self.status != "not_convex"


def _probe_hessian(g: Callable, Dx: Polytope, ys, grid: int, h: float) -> ConvexityVerdict:
    if not Dx.is_full_dimensional:
        raise ValidationError("convexity probe needs a full-dimensional x-domain")
    pts = [q for q in grid_points(Dx, grid) if q not in set(Dx.vertices)]
    checked = 0
    for y in ys:
        vals_scale = 1.0
        for x in pts:
            try:
                H = fd_hessian(lambda q: g(q, y), x, h, Dx)
            except ValidationError:
                continue
            checked += 1
            vals_scale = max(vals_scale, float(np.max(np.abs(H))))
            eig, vec = np.linalg.eigh(H)
            if eig[0] < -1e-8 * vals_scale:
                return ConvexityVerdict(
                    "not_convex",
                    {"x": x, "y": y, "direction": tuple(float(c) for c in vec[:, 0]), "eigenvalue": float(eig[0])},
                )
    if checked == 0:
        raise ValidationError("degenerate grid: no interior points for the finite-difference probe")
    return ConvexityVerdict("convex_on_grid", {"points": checked})


def convexity_probe(
    v: Weight, w: Weight, d: DeltaEstimate, n: int, Dx: Polytope, Dy: Polytope,
    *, grid: int = 8, h: float = 1e-3,
) -> ConvexityVerdict:
    """Is x -> w_check_eps(x, y) convex for every y in Dy?

    For log-affine v the function is affine in x plus -w/2, so convexity
    follows when w is concave by its descriptor.
    """
    if isinstance(v, (Constant, LogAffine)) and is_concave_descriptor(w):
        return ConvexityVerdict("certified_convex")

    def g(x, y):
        return check_w_eps(v, w, float(d.delta_eps), n, ProductPoint(x, y))

    return _probe_hessian(g, Dx, list(Dy.vertices), grid, h)


def bar_w_convexity(v: Weight, w: Weight, Dx: Polytope, Dy: Polytope, *, grid: int = 8, h: float = 1e-3) -> ConvexityVerdict:
    """Is x -> w_bar(x, y) = w(x)/2 - <d log v(x), y> convex for every y in Dy?"""
    if isinstance(v, (Constant, LogAffine)) and is_convex_descriptor(w):
        return ConvexityVerdict("certified_convex")

    def g(x, y):
        return bar_w(v, w, ProductPoint(x, y))

    return _probe_hessian(g, Dx, list(Dy.vertices), grid, h)


def _affine_log(v: Weight) -> bool:
    return isinstance(v, (Constant, LogAffine))


def inf_hat_v(v: Weight, D: Polytope, *, grid: int = 8) -> InfResult:
    """inf over D x D of <d log v(x), x - x'>; affine in x', and in x too for log-affine v."""
    return inf_product(lambda x, x2: hat_v(v, x, x2), D, D, True, concave_in_x=_affine_log(v), grid=grid)


# -- theorem checkers -------------------------------------------------------------

def exi_delta_check(
    F: ToricClassFamily,
    v: Weight,
    w: Weight,
    d: DeltaEstimate,
    n: int,
    futaki_vanishes: bool,
    *,
    grid: int = 8,
) -> ConditionReport:
    """The five sufficient conditions for a weighted cscK metric in [omega_0]."""
    if n < 1:
        raise ValidationError("complex dimension n must be at least 1")
    delta0 = polytope_from_halfspaces(F.normals, F.offsets_omega0)
    out: dict = {}
    out["i_futaki"] = Verdict(bool(futaki_vanishes), note="asserted by the caller")
    theta, kahler = theta_eps_polytope(F, d)
    out["ii_theta_kahler"] = Verdict(kahler, witness=None if theta is None else [list(map(str, q)) for q in theta.vertices])
    if kahler:
        s = kahler_threshold(F)
        res = inf_product(
            lambda x, y: check_w_eps(v, w, d.delta_eps, n, ProductPoint(x, y)),
            delta0, theta, True,
            concave_in_x=_affine_log(v) and is_convex_descriptor(w), grid=grid,
        )
        if n == 1:
            margin = res.value
        elif s == math.inf:
            margin = math.inf
        else:
            margin = res.value + (n - 1) * (s - d.delta_eps)
        out["iii_inf_w_check"] = Verdict(
            _positive(margin), margin, res.witness,
            "certified" if res.certified else f"numerical, resolution {res.resolution}",
        )
        conv = convexity_probe(v, w, d, n, delta0, theta, grid=grid)
        out["v_convexity"] = Verdict(conv.convex, witness=conv.witness, note=conv.status)
    else:
        out["iii_inf_w_check"] = Verdict(False, note="not applicable: theta_eps is not Kähler")
        out["v_convexity"] = Verdict(False, note="not applicable: theta_eps is not Kähler")
    hv = inf_hat_v(v, delta0, grid=grid)
    margin4 = 1 + hv.value
    out["iv_hat_v"] = Verdict(
        _positive(margin4), margin4, hv.witness,
        "certified" if hv.certified else f"numerical, resolution {hv.resolution}",
    )
    order = ["i_futaki", "ii_theta_kahler", "iii_inf_w_check", "iv_hat_v", "v_convexity"]
    return _report({k: out[k] for k in order})


def p1_cscK_check(v: Weight, w: Weight, d: DeltaEstimate, futaki_vanishes: bool = True, *, grid: int = 16) -> ConditionReport:
    """Sufficient conditions on P^1 with [omega_0] = 2 pi c_1: delta_eps > 1 and inf w_check > 0."""
    delta = d.delta_eps
    out: dict = {"futaki": Verdict(bool(futaki_vanishes), note="asserted by the caller")}
    out["delta_gt_1"] = Verdict(delta > 1, delta - 1)
    if delta > 1:
        seg = polytope_from_vertices([(Fraction(-1),), (Fraction(1),)])
        r = delta - 1
        theta = polytope_from_vertices([(-r,), (r,)])
        res = inf_product(
            lambda x, y: check_w_eps(v, w, delta, 1, ProductPoint(x, y)),
            seg, theta, True, concave_in_x=_affine_log(v) and is_convex_descriptor(w), grid=grid,
        )
        out["inf_w_check"] = Verdict(
            _positive(res.value), res.value, res.witness,
            "certified" if res.certified else f"numerical, resolution {res.resolution}",
        )
    else:
        out["inf_w_check"] = Verdict(False, note="not applicable: theta_eps is not Kähler for delta_eps <= 1")
    return _report(out)


def j_hypotheses_check(
    v: Weight,
    w_hat: Weight,
    Dx: Polytope,
    Dy: Polytope,
    asserted: dict,
    *,
    grid: int = 8,
) -> ConditionReport:
    """Hypotheses for the weighted J-equation: convexity of w_bar, 1 + inf v_hat > 0, two flags."""
    out: dict = {}
    conv = bar_w_convexity(v, w_hat, Dx, Dy, grid=grid)
    out["bar_w_convex"] = Verdict(conv.convex, witness=conv.witness, note=conv.status)
    hv = inf_hat_v(v, Dx, grid=grid)
    margin = 1 + hv.value
    out["hat_v_bound"] = Verdict(
        _positive(margin), margin, hv.witness,
        "certified" if hv.certified else f"numerical, resolution {hv.resolution}",
    )
    out["normalization"] = Verdict(bool(asserted.get("normalization", False)), note="asserted by the caller")
    out["chi_bound"] = Verdict(bool(asserted.get("chi_bound", False)), note="asserted by the caller")
    return _report(out)
