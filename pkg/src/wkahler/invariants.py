"""Beta invariants of toric classes: upper bounds, the toric value, and delta."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .dh import Measure, barycenter
from .geometry import (
    Polytope,
    ToricClassFamily,
    combine_class,
    contains,
    kahler_threshold,
    polytope_from_halfspaces,
    ray_max_scale,
)
from .scalar import Scalar, ValidationError, Vector, dot, to_scalar
from .weights import Weight

KINDS = ("exact_toric", "upper_bound_only")


@dataclass(frozen=True)
class BetaReport:
    value: Scalar
    kind: str
    s_threshold: Scalar
    delta_conclusion: str
    witness: Vector = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown report kind {self.kind!r}")
        if self.value > self.s_threshold:
            raise ValidationError("beta exceeds the Kähler threshold")
        expected = "delta_equals_value" if self.value < self.s_threshold else "delta_at_least_s"
        if self.delta_conclusion != expected:
            raise ValidationError("delta conclusion inconsistent with value and threshold")


@dataclass(frozen=True)
class ScanCertificate:
    """Outcome of scanning beta = k * step for k = 0..steps over [0, s)."""

    step: Scalar
    feasible: int
    total: int
    prefix_end: Scalar
    refined: Scalar


@dataclass(frozen=True)
class UpperBound:
    value: Scalar
    s_threshold: Scalar
    barycenter: Vector
    binding_facet: int | None
    certificate: ScanCertificate | None = field(default=None)


def _feasible(F: ToricClassFamily, bary: Vector, beta) -> bool:
    """Does -beta * bary lie in the moment polytope of c_1 - beta [omega_0]?"""
    x = tuple(-beta * b for b in bary)
    for n, a, c in zip(F.normals, F.offsets_omega0, F.offsets_c1):
        if dot(n, x) < -(c - beta * a):
            return False
    return True


def _scan(F: ToricClassFamily, bary: Vector, hi: Scalar, steps: int, iters: int) -> ScanCertificate:
    step = hi / steps
    flags = [_feasible(F, bary, k * step) for k in range(steps)]
    prefix = 0
    while prefix < steps and flags[prefix]:
        prefix += 1
    if prefix == 0:
        return ScanCertificate(step, 0, steps, Fraction(0), Fraction(0))
    lo = (prefix - 1) * step
    up = prefix * step
    for _ in range(iters):
        mid = (lo + up) / 2
        if _feasible(F, bary, mid):
            lo = mid
        else:
            up = mid
    return ScanCertificate(step, sum(flags), steps, (prefix - 1) * step, lo)


def beta_upper_bound_report(
    F: ToricClassFamily,
    v: Weight,
    *,
    scan_steps: int = 1000,
    refine_iters: int = 40,
    scan: bool = True,
) -> UpperBound:
    """sup{beta < s : -beta bary_v([omega_0]) in Delta(c_1 - beta [omega_0])}.

    Each facet inequality reads beta * (<n, b> + a) <= c, with a and c the
    offsets of [omega_0] and c_1, so the feasible set is an interval and its
    supremum is min(s, min c / (<n, b> + a) over facets with positive
    coefficient).  A dense scan with bisection is attached as a certificate.
    """
    s = kahler_threshold(F)
    delta0 = polytope_from_halfspaces(F.normals, F.offsets_omega0)
    bary = barycenter(Measure(delta0, v))
    value: Scalar = s
    binding = None
    lower = -math.inf
    for i, (n, a, c) in enumerate(zip(F.normals, F.offsets_omega0, F.offsets_c1)):
        coef = dot(n, bary) + a
        if coef > 0 and c / coef < value:
            value, binding = c / coef, i
        elif coef < 0:
            lower = max(lower, c / coef)
        elif coef == 0 and c < 0:
            raise ValidationError("the feasible set of beta values is empty")
    if lower > value or (lower == value == s):
        raise ValidationError("the feasible set of beta values is empty")
    cert = None
    if scan:
        hi = s if s != math.inf else max(2 * value, Fraction(1)) if value != math.inf else Fraction(1)
        cert = _scan(F, bary, hi, scan_steps, refine_iters)
    return UpperBound(value, s, bary, binding, cert)


def beta_upper_bound(F: ToricClassFamily, v: Weight) -> Scalar:
    return beta_upper_bound_report(F, v, scan=False).value


def fano_toric_beta(delta_c1: Polytope, v: Weight, toric: bool = True) -> BetaReport:
    """Beta of 2 pi c_1 from the weighted barycenter of the anticanonical polytope.

    With b the barycenter and s_ray the largest s such that -s b stays in the
    polytope, beta = s_ray / (1 + s_ray), and beta = 1 when b = 0.  For toric
    data this is an equality; otherwise only an upper bound is claimed.
    """
    zero = tuple(Fraction(0) for _ in range(delta_c1.ambient_dim))
    if not contains(delta_c1, zero):
        raise ValidationError("the origin must lie in the anticanonical polytope")
    if any(c == 0 for c in delta_c1.offsets):
        raise ValidationError("the origin must be an interior point of the anticanonical polytope")
    b = barycenter(Measure(delta_c1, v))
    s_ray = ray_max_scale(delta_c1, tuple(-x for x in b))
    value = Fraction(1) if s_ray == math.inf else s_ray / (1 + s_ray)
    return beta_delta_report(Fraction(1), value, kind="exact_toric" if toric else "upper_bound_only", witness=b)


def beta_delta_report(s, beta, *, kind: str = "exact_toric", witness: Vector = ()) -> BetaReport:
    """beta = min(s, delta): beta < s pins delta down, beta = s only bounds it below."""
    s = s if s == math.inf else to_scalar(s, exact=not isinstance(s, float))
    beta = to_scalar(beta, exact=not isinstance(beta, float))
    if beta > s:
        raise ValidationError(f"beta = {beta} exceeds the threshold s = {s}")
    conclusion = "delta_equals_value" if beta < s else "delta_at_least_s"
    return BetaReport(beta, kind, s, conclusion, tuple(witness))


def scaling_transport(beta, t) -> Scalar:
    """Beta of t [omega_0] with weight v(./t), from beta of [omega_0] with v."""
    t = to_scalar(t, exact=not isinstance(t, float))
    if t <= 0:
        raise ValidationError("scaling factor must be positive")
    return beta / t


def proper_at(F: ToricClassFamily, beta) -> bool:
    """Is c_1 - beta [omega_0] Kähler-proper?"""
    return combine_class(F, -to_scalar(beta), 1)[1]
