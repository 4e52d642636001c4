"""Invariants of semisimple principal fibrations Y over products of bases.

The fibration is described by a toric fiber X (its anticanonical polytope),
and for each basis factor B_a a one-parameter subgroup p_a, a constant c_a
and dim B_a.  Geometry of Y reduces to weighted geometry on the fiber with
the weight p(y) = prod_a (<p_a, y> + c_a)^{dim B_a}.

Basis beta values are inputs.  By default they are read as beta(B_a, 2 pi
c_1(B_a)), so that beta(B_a, [omega_a]) = c_a * beta_basis when
c_a [omega_a] = 2 pi c_1(B_a); with ``basis_normalization="class"`` the
value is taken to be beta(B_a, [omega_a]) itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .geometry import (
    Polytope,
    ToricClassFamily,
    combine_class,
    polytope_from_halfspaces,
    polytope_from_vertices,
    support_min,
)
from .invariants import beta_upper_bound, fano_toric_beta
from .scalar import Scalar, ValidationError, Vector, to_scalar, to_vector
from .weights import Constant, Weight, multiply, p_weight

NORMALIZATIONS = ("anticanonical", "class")


@dataclass(frozen=True)
class BasisFactor:
    dim: int
    c: Scalar
    p: Vector
    beta_basis: Optional[Scalar] = None
    delta_alg: Optional[Scalar] = None
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ValidationError("basis dimension must be a positive integer")

    @classmethod
    def make(cls, dim, c, p, beta_basis=None, delta_alg=None, name="") -> BasisFactor:
        return cls(
            int(dim),
            to_scalar(c),
            to_vector(p),
            None if beta_basis is None else to_scalar(beta_basis),
            None if delta_alg is None else to_scalar(delta_alg),
            name,
        )


@dataclass(frozen=True)
class FibrationSpec:
    """Fiber data, the class [omega_0] and the basis factors.

    Either ``lam`` is set ([omega_0] = lam * 2 pi c_1(X)) or ``family``
    describes a general class; in the latter case ``fiber_delta_c1`` is
    rebuilt from the family's c_1 offsets.
    """

    fiber_delta_c1: Polytope
    factors: tuple[BasisFactor, ...]
    weight_v: Weight = field(default_factory=lambda: Constant(Fraction(1)))
    lam: Optional[Scalar] = Fraction(1)
    family: Optional[ToricClassFamily] = None
    basis_normalization: str = "anticanonical"
    fiber_toric: bool = True

    def __post_init__(self):
        if self.basis_normalization not in NORMALIZATIONS:
            raise ValidationError(f"basis_normalization must be one of {NORMALIZATIONS}")
        if not self.factors:
            raise ValidationError("a fibration needs at least one basis factor")
        d = self.fiber_delta_c1.ambient_dim
        for f in self.factors:
            if len(f.p) != d:
                raise ValidationError("one-parameter subgroup dimension does not match the fiber")
        if self.family is None:
            if self.lam is None or self.lam <= 0:
                raise ValidationError("lambda must be positive")
        elif self.family.dim != d:
            raise ValidationError("family dimension does not match the fiber")
        # Positivity of <p_a, .> + c_a on the fiber moment polytope.
        for f in self.factors:
            if support_min(self.omega0_polytope(), f.p) + f.c <= 0:
                raise ValidationError(
                    "<p_a, x> + c_a must be positive on the fiber moment polytope"
                )

    def omega0_polytope(self) -> Polytope:
        if self.family is not None:
            return polytope_from_halfspaces(self.family.normals, self.family.offsets_omega0)
        return self.fiber_delta_c1.scale(self.lam)

    def class_family(self) -> ToricClassFamily:
        if self.family is not None:
            return self.family
        return ToricClassFamily.proportional(self.fiber_delta_c1, self.lam)

    def p_weight(self) -> Weight:
        pw = p_weight([(f.p, f.c, f.dim) for f in self.factors], self.omega0_polytope())
        return multiply(self.weight_v, pw)

    def basis_class_beta(self, f: BasisFactor) -> Scalar:
        """beta(B_a, [omega_a])."""
        if f.beta_basis is None:
            raise ValidationError(f"missing beta_basis for factor {f.name or f.p}")
        if self.basis_normalization == "class":
            return f.beta_basis
        return f.c * f.beta_basis


@dataclass(frozen=True)
class FibrationReport:
    beta_comp: Scalar
    achiever: str
    fiber_term: Scalar
    basis_terms: tuple[Scalar, ...]
    sharp: bool = False
    conclusions: tuple[str, ...] = ()
    brackets: tuple = ()

    def __post_init__(self):
        m = min((self.fiber_term,) + tuple(self.basis_terms))
        if self.beta_comp != m:
            raise ValidationError("beta_comp must equal the minimum of its terms")
        if self.achiever == "fiber":
            if self.fiber_term != m:
                raise ValidationError("achiever inconsistent with the minimum")
        else:
            a = int(self.achiever.split(":")[1])
            if self.basis_terms[a] != m or self.fiber_term == m:
                raise ValidationError("achiever inconsistent with the minimum")


def _achiever(fiber_term, basis_terms) -> str:
    m = min((fiber_term,) + tuple(basis_terms))
    if fiber_term == m:
        return "fiber"
    return f"basis:{list(basis_terms).index(m)}"


def compatibly_fano_check(spec: FibrationSpec) -> tuple[bool, list[dict]]:
    """Strict test inf_Delta <p_a, .> > -c_a beta(B_a, 2 pi c_1(B_a)) for each factor."""
    d = spec.fiber_delta_c1.ambient_dim
    if tuple(Fraction(0) for _ in range(d)) not in spec.fiber_delta_c1:
        raise ValidationError("the fiber polytope must contain the origin")
    ok = True
    witnesses = []
    for a, f in enumerate(spec.factors):
        if f.beta_basis is None:
            raise ValidationError(f"missing beta_basis for factor {a}")
        beta_anti = f.beta_basis if spec.basis_normalization == "anticanonical" else f.beta_basis / f.c
        m = support_min(spec.fiber_delta_c1, f.p)
        margin = m + f.c * beta_anti
        good = f.c > 0 and margin > 0
        ok = ok and good
        witnesses.append({"factor": a, "inf_p": m, "bound": -f.c * beta_anti, "margin": margin, "holds": good})
    return ok, witnesses


def compatible_beta_fano_fiber(spec: FibrationSpec) -> FibrationReport:
    """Closed form for [omega_0] = lam 2 pi c_1(X).

    fiber term: beta_{v p}(X, [omega_0]) = beta_{(v p)(lam .)}(X, 2 pi c_1) / lam;
    basis term: (beta(B_a, [omega_a]) + m_a) / (c_a + lam m_a), m_a = inf p_a.
    """
    if spec.family is not None:
        raise ValidationError("the closed form needs a class proportional to 2 pi c_1(X)")
    lam = spec.lam
    w = spec.p_weight().rescale(1 / lam)
    fiber = fano_toric_beta(spec.fiber_delta_c1, w, toric=spec.fiber_toric).value / lam
    terms = []
    for f in spec.factors:
        m = support_min(spec.fiber_delta_c1, f.p)
        den = f.c + lam * m
        if den <= 0:
            raise ValidationError("c_a + lam inf p_a must be positive")
        terms.append((spec.basis_class_beta(f) + m) / den)
    terms = tuple(terms)
    beta = min((fiber,) + terms)
    return FibrationReport(beta, _achiever(fiber, terms), fiber, terms)


@dataclass(frozen=True)
class Bracket:
    """Bisection outcome for one factor of the general formula."""

    lo: Scalar
    hi: Scalar
    value: Scalar
    snapped: bool


def _sup_feasible(g: Callable, target, t_lo, t_hi, iters: int) -> Bracket:
    """sup{t < t_hi : g(t) > target} for g piecewise affine, with g(t_lo) > target."""
    if g(t_hi) > target:
        return Bracket(t_hi, t_hi, t_hi, True)
    lo, hi = t_lo, t_hi
    for _ in range(iters):
        mid = (lo + hi) / 2
        if g(mid) > target:
            lo = mid
        else:
            hi = mid
    # g is affine on a small enough bracket: interpolate and verify exactly.
    glo, ghi = g(lo), g(hi)
    if glo != ghi:
        root = lo + (target - glo) * (hi - lo) / (ghi - glo)
        if lo <= root <= hi and g(root) == target:
            return Bracket(lo, hi, root, True)
    return Bracket(lo, hi, lo, False)


def compatible_beta_general(
    spec: FibrationSpec,
    fiber_beta: Optional[Scalar] = None,
    delta_t: Optional[Callable[[Scalar], Optional[Polytope]]] = None,
    *,
    iters: int = 64,
) -> FibrationReport:
    """inf_a sup{t < beta_fiber : inf_{Delta_t} <p_a, .> - t c_a > -beta(B_a, [omega_a])}.

    Delta_t is the moment polytope of 2 pi c_1(X) - t [omega_0] unless a
    callable is supplied.  ``fiber_beta`` defaults to the general upper bound
    for the weight v p, so without toric equality the result is itself only
    the value of the formula at that bound.
    """
    F = spec.class_family()
    if fiber_beta is None:
        fiber_beta = beta_upper_bound(F, spec.p_weight())
    if delta_t is None:
        def delta_t(t):
            return combine_class(F, -t, 1)[0]

    cache: dict = {}

    def poly(t):
        if t not in cache:
            P = delta_t(t)
            if P is None:
                raise ValidationError(f"Delta_t is empty at t = {t}")
            cache[t] = P
        return cache[t]

    if delta_t(Fraction(0)) is None:
        raise ValidationError("Delta_t is infeasible at t = 0")
    terms = []
    brackets = []
    for f in spec.factors:
        beta_a = spec.basis_class_beta(f)

        def g(t, f=f):
            return support_min(poly(t), f.p) - t * f.c

        target = -beta_a
        t_lo = Fraction(0)
        width = max(abs(fiber_beta), Fraction(1))
        while not g(t_lo) > target:
            t_lo -= width
            width *= 2
            if t_lo < -Fraction(2) ** 40:
                raise ValidationError("no feasible t found for a basis factor")
        br = _sup_feasible(g, target, t_lo, fiber_beta, iters)
        brackets.append(br)
        terms.append(br.value)
    terms = tuple(terms)
    beta = min((fiber_beta,) + terms)
    return FibrationReport(beta, _achiever(fiber_beta, terms), fiber_beta, terms, brackets=tuple(brackets))


def toric_fiber_sharpness(report: FibrationReport, spec: FibrationSpec) -> Optional[Scalar]:
    """beta(Y) when the fiber term achieves the minimum and the fiber is toric."""
    if not spec.fiber_toric:
        return None
    if spec.family is not None or spec.lam != 1:
        return None
    ok, _ = compatibly_fano_check(spec)
    if not ok:
        return None
    if report.achiever == "fiber":
        return report.fiber_term
    return None


def with_sharpness(report: FibrationReport, spec: FibrationSpec) -> FibrationReport:
    sharp_value = toric_fiber_sharpness(report, spec)
    sharp = sharp_value is not None
    conclusions = tuple(semistability_report(report, spec)) if sharp or report.beta_comp >= 1 else ()
    return FibrationReport(
        report.beta_comp, report.achiever, report.fiber_term, report.basis_terms,
        sharp, conclusions, report.brackets,
    )


# -- P^1 bundles ---------------------------------------------------------------

def p1_beta(p, c, d: int, lam) -> Fraction:
    """Closed form of beta_p(P^1, [omega_0]) for the weight (p lam u + c)^d on [-1, 1]."""
    p, c, lam = to_scalar(p), to_scalar(c), to_scalar(lam)
    if p <= 0:
        raise ValidationError("p must be positive")
    if lam <= 0:
        raise ValidationError("lambda must be positive")
    if not c > lam * p:
        raise ValidationError("compatibility requires c > lambda p")
    if not isinstance(d, int) or d < 0:
        raise ValidationError("d must be a nonnegative integer")
    hi, lo = p * lam + c, c - p * lam
    num = p * (d + 2) * (hi ** (d + 1) - lo ** (d + 1))
    den = (lam * p - c) * (d + 2) * (hi ** (d + 1) - lo ** (d + 1)) + (d + 1) * (hi ** (d + 2) - lo ** (d + 2))
    return num / den


def p1_bundle_spec(p, c, d: int, lam=1, beta_basis=1) -> FibrationSpec:
    """P^1 fiber over one basis of dimension d."""
    seg = polytope_from_vertices([(Fraction(-1),), (Fraction(1),)])
    return FibrationSpec(
        seg,
        (BasisFactor.make(d, c, (p,), beta_basis),),
        lam=to_scalar(lam),
    )


# -- comparison with the algebraic delta invariant ----------------------------------

def zz_delta(r, delta_b, beta0) -> Scalar:
    """min(delta_B r beta0 / (1 + beta0 (r - 1)), beta0)."""
    r, delta_b, beta0 = to_scalar(r), to_scalar(delta_b), to_scalar(beta0)
    if not r > 1:
        raise ValidationError("r must exceed 1")
    if not 0 < beta0 <= 1:
        raise ValidationError("beta0 must lie in (0, 1]")
    if not delta_b > 0:
        raise ValidationError("delta_B must be positive")
    return min(delta_b * r * beta0 / (1 + beta0 * (r - 1)), beta0)


def zz_equivalence(r, beta_b, delta_b, beta0) -> tuple[bool, bool, bool]:
    """The three equivalent conditions for beta_comp(Y) = beta(Y)."""
    r, beta_b, delta_b, beta0 = (to_scalar(x) for x in (r, beta_b, delta_b, beta0))
    if not 0 < beta_b <= 1:
        raise ValidationError("beta_B must lie in (0, 1]")
    if beta_b > delta_b:
        raise ValidationError("beta_B cannot exceed delta_B")
    if delta_b > beta_b and beta_b != 1:
        raise ValidationError("delta_B > beta_B requires beta_B = 1")
    c1 = (r * beta_b - 1) / (r - 1) >= beta0
    c2 = delta_b * r * beta0 / (1 + beta0 * (r - 1)) >= beta0
    c3 = min((r * beta_b - 1) / (r - 1), beta0) == zz_delta(r, delta_b, beta0)
    if not c1 == c2 == c3:
        raise ValidationError(
            f"equivalence violated at r={r}, beta_B={beta_b}, delta_B={delta_b}, beta0={beta0}: {(c1, c2, c3)}"
        )
    return c1, c2, c3


# -- odd symplectic Grassmannians --------------------------------------------------

def sgr_beta(n: int) -> Fraction:
    """2 (2n+1)! / ((n+2) (n! 2^n)^2)."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError("n must be a positive integer")
    return Fraction(2 * math.factorial(2 * n + 1), (n + 2) * (math.factorial(n) * 2 ** n) ** 2)


def sgr_compatibly_fano_probe(r: int) -> tuple[bool, Fraction]:
    """With n = r^3 - 2 and c = r: is -1 > -r beta(SGr(n, 2n+1))?  Margin r beta - 1."""
    if not isinstance(r, int) or isinstance(r, bool) or r < 2:
        raise ValidationError("r must be an integer >= 2")
    margin = r * sgr_beta(r ** 3 - 2) - 1
    return margin > 0, margin


def sgr_first_failure(r_max: int = 64) -> int:
    """Smallest r >= 2 for which the compatibly Fano inequality fails."""
    for r in range(2, r_max + 1):
        if not sgr_compatibly_fano_probe(r)[0]:
            return r
    raise ValidationError(f"no failure found up to r = {r_max}")


# -- semistability -------------------------------------------------------------------

def semistability_report(report: FibrationReport, spec: Optional[FibrationSpec] = None) -> list[str]:
    """Conclusions available once beta_comp >= 1 in the compatibly Fano regime."""
    if report.beta_comp < 1:
        return []
    if spec is not None:
        for a, f in enumerate(spec.factors):
            b = f.beta_basis
            if b is not None and spec.basis_normalization == "class":
                b = b / f.c
            if b is not None and b < 1:
                raise ValidationError(
                    f"beta_comp = 1 forces beta(B_{a}) = 1, but {b} was supplied"
                )
    out = [
        "Y is K-semistable",
        "every basis B_a is K-semistable",
        "the fiber X is weighted K-semistable",
    ]
    if report.beta_comp == 1:
        out.append("beta_v(Y) = beta_{v p}(X) = beta(B_a) = 1 for every a")
    return out


# -- catalog ---------------------------------------------------------------------

def _bl_p3_beta() -> Fraction:
    # The blowup of P^3 at a point: P^1 bundle P(O + O(1)) over P^2.
    spec = p1_bundle_spec(1, 3, 2)
    return compatible_beta_fano_fiber(spec).beta_comp


def _bl_p2_beta() -> Fraction:
    delta = polytope_from_vertices([(-1, 0), (0, -1), (2, -1), (-1, 2)])
    return fano_toric_beta(delta, Constant(Fraction(1))).value


CATALOG: dict[str, tuple[int, Callable[[], Fraction]]] = {
    "P1": (1, lambda: Fraction(1)),
    "P2": (2, lambda: Fraction(1)),
    "Bl1P2": (2, _bl_p2_beta),
    "Bl1P3": (3, _bl_p3_beta),
}


def catalog_entry(name: str) -> tuple[int, Fraction]:
    """(dimension, beta(B, 2 pi c_1(B))) for a catalog basis; SGr(n) as 'SGr:n'."""
    if name.startswith("SGr:"):
        tail = name.split(":", 1)[1]
        if not tail.isdigit():
            raise ValidationError(f"SGr catalog entries look like 'SGr:n', got {name!r}")
        n = int(tail)
        return n * (n + 3) // 2, sgr_beta(n)
    if name not in CATALOG:
        raise ValidationError(f"unknown catalog basis {name!r}")
    dim, fn = CATALOG[name]
    return dim, fn()
