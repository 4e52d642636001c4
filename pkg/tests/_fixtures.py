"""Shared polytopes, weights and rational grids for the test suite."""

from __future__ import annotations

import io
import json
from fractions import Fraction as Q

from wkahler.geometry import ToricClassFamily, polytope_from_vertices
from wkahler.weights import Constant, PolyProduct, ProductPoint, check_w_eps, hat_v

SEGMENT = polytope_from_vertices([(Q(-1),), (Q(1),)])
SQUARE = polytope_from_vertices([(Q(-1), Q(-1)), (Q(1), Q(-1)), (Q(1), Q(1)), (Q(-1), Q(1))])
UNIT_SQUARE = polytope_from_vertices([(Q(0), Q(0)), (Q(1), Q(0)), (Q(1), Q(1)), (Q(0), Q(1))])
SIMPLEX2 = polytope_from_vertices([(Q(0), Q(0)), (Q(1), Q(0)), (Q(0), Q(1))])
# anticanonical polytopes of P^2 and of the blowup of P^2 at one point
P2 = polytope_from_vertices([(Q(-1), Q(-1)), (Q(2), Q(-1)), (Q(-1), Q(2))])
BL1P2 = polytope_from_vertices([(Q(-1), Q(0)), (Q(0), Q(-1)), (Q(2), Q(-1)), (Q(-1), Q(2))])
# same surface, normals ordered so that offsets (1, 1, 1, 2) describe a Kähler class
BL1P2_FAMILY = ToricClassFamily.make([(1, 0), (0, 1), (1, 1), (-1, -1)], [1, 1, 1, 2], [1, 1, 1, 1])

ONE = Constant(Q(1))


def affine_power(p, c, k) -> PolyProduct:
    """u -> (<p, u> + c)^k."""
    p = tuple(Q(x) for x in (p if isinstance(p, (tuple, list)) else (p,)))
    return PolyProduct(((p, Q(c), k),))


def p1_fixtures() -> list[tuple]:
    """At least 20 rational (p, c, d, lam) with p > 0 and c > lam p."""
    out = []
    for p in (Q(1), Q(2), Q(1, 2)):
        for lam in (Q(1), Q(1, 2), Q(3)):
            for extra, d in ((Q(1), 1), (Q(2), 2), (Q(1, 3), 3)):
                out.append((p, lam * p + extra, d, lam))
    return out


def toric_fixtures() -> list[tuple]:
    """(anticanonical polytope, weight) pairs with rational data."""
    return [
        (SEGMENT, ONE),
        (SEGMENT, affine_power(1, 3, 2)),
        (SEGMENT, affine_power(2, 3, 2)),
        (SEGMENT, affine_power(1, 2, 3)),
        (SQUARE, ONE),
        (SQUARE, affine_power((1, 0), 3, 1)),
        (P2, ONE),
        (P2, affine_power((1, 1), 5, 2)),
        (BL1P2, ONE),
        (BL1P2, affine_power((0, 1), 4, 1)),
    ]


# One representative invocation per CLI subcommand (JSON inputs inline).
_SEG = {"vertices": [["-1"], ["1"]]}
_P1_FAMILY = {"normals": [[1], [-1]], "offsets_omega0": [1, 1], "offsets_c1": [1, 1]}
_BL_FAMILY = {"normals": [[1, 0], [0, 1], [1, 1], [-1, -1]], "offsets_omega0": [1, 1, 1, 2], "offsets_c1": [1, 1, 1, 1]}
_U3SQ = {"type": "poly_product", "factors": [{"p": [1], "c": "3", "power": 2}]}

CLI_CASES = {
    "barycenter": ["barycenter", "-i", json.dumps({"polytope": _SEG, "weight": _U3SQ})],
    "threshold": ["threshold", "-i", json.dumps({"family": _BL_FAMILY})],
    "beta-toric": ["beta-toric", "-i", json.dumps({"polytope": _SEG, "weight": _U3SQ})],
    "beta-upper": ["beta-upper", "-i", json.dumps({"family": _BL_FAMILY})],
    "fibration": ["fibration", "-i", json.dumps(
        {"fiber": _SEG, "lambda": 1, "factors": [{"p": [1], "c": 2, "dim": 3, "beta_basis": "14/17"}]}
    )],
    "p1-bundle": ["p1-bundle", "--p", "1", "--c", "3", "--d", "2", "--lambda", "1", "--beta-basis", "1"],
    "zz": ["zz", "--r", "2", "--delta-b", "14/17", "--beta0", "50/71", "--beta-b", "14/17"],
    "sgr": ["sgr", "--n", "2", "--r", "2", "--scan", "10"],
    "check-cscK": ["check-cscK", "-i", json.dumps(
        {"theorem": "general", "class_family": _P1_FAMILY, "n": 1, "v": {"type": "constant", "k": 1},
         "w": {"type": "constant", "k": 2}, "delta_eps": "3/2", "futaki_vanishes": True}
    )],
    "check-j": ["check-j", "-i", json.dumps(
        {"v": {"type": "poly_product", "factors": [{"p": [1], "c": 2, "power": 3}]},
         "w_hat": {"type": "constant", "k": 2}, "x_domain": _SEG,
         "asserted": {"normalization": True, "chi_bound": True}}
    )],
}


def run_cli(argv) -> tuple[int, str, str]:
    """Run the CLI in-process and capture (exit code, stdout, stderr)."""
    from wkahler.cli import run

    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def product_box(Dx, Dy):
    return polytope_from_vertices([tuple(a) + tuple(b) for a in Dx.vertices for b in Dy.vertices])


# (f, Dx, Dy, oracle grid density): the density resolves each minimum below 1e-6
PRODUCT_FIXTURES = [
    (lambda x, y: hat_v(affine_power(1, 3, 2), x, y), SEGMENT, SEGMENT, 32),
    (lambda x, y: check_w_eps(affine_power(1, 3, 2), Constant(Q(0)), Q(3, 2), 1, ProductPoint(x, y)), SEGMENT, SEGMENT.scale(Q(1, 2)), 32),
    (lambda x, y: check_w_eps(affine_power((1, 0), 3, 2), PolyProduct((((Q(0), Q(1)), Q(0), 2),)), Q(2), 2, ProductPoint(x, y)), SQUARE, SQUARE, 4),
    (lambda x, y: (x[0] - Q(1, 3)) ** 2 + y[0], SEGMENT, SEGMENT, 128),
]
