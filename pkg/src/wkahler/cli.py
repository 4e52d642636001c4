"""Command-line front end.

Exit codes: 0 success, 2 validation error, 64 unknown subcommand,
65 malformed JSON input.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import conditions, dh, fibration, geometry, invariants, oracle
from .scalar import ValidationError, to_scalar
from .serialize import (
    OUTPUT_SCHEMA,
    jsonable,
    parse_family,
    parse_fibration,
    parse_polytope,
    parse_weight,
    validate,
)
from .weights import PolyProduct, ProductPoint, check_w_eps, hat_v, to_expression

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_USAGE = 64
EXIT_DATA = 65

SUBCOMMANDS = (
    "barycenter", "threshold", "beta-toric", "beta-upper", "fibration",
    "p1-bundle", "zz", "sgr", "check-cscK", "check-j",
)


class MalformedInput(Exception):
    pass


def _load(source: str | None):
    if source is None:
        raise ValidationError("this subcommand needs --input (a JSON file path or inline JSON)")
    text = source if source.lstrip()[:1] in ("{", "[") else None
    if text is None:
        path = Path(source)
        if not path.exists():
            raise ValidationError(f"input file not found: {source}")
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise MalformedInput("input JSON must be an object")
    return data


def _require(data: dict, *keys):
    for k in keys:
        if k not in data:
            raise ValidationError(f"input is missing the '{k}' field")


def _close(a, b, tol) -> bool:
    if a == math.inf or b == math.inf:
        return a == b
    return abs(float(a) - float(b)) <= tol * max(1.0, abs(float(a)))


def _cfg(args) -> oracle.OracleConfig:
    return oracle.OracleConfig(samples=args.samples, grid=args.grid, seed=args.seed)


def _tol(args) -> float:
    return float(to_scalar(args.tol))


# -- handlers ---------------------------------------------------------------------
# Each returns (result, claims, provenance, verify-or-None).

def cmd_barycenter(args, data):
    _require(data, "polytope")
    P = parse_polytope(data["polytope"])
    v = parse_weight(data.get("weight"), exact=args.exact)
    M = dh.Measure(P, v)
    integ = dh.integral(M, tol=_tol(args))
    b = dh.barycenter(M, tol=_tol(args))
    exact = integ.method == "exact"
    result = {"volume": integ.value, "barycenter": list(b), "method": integ.method, "residual": integ.residual}
    claims = {"volume": "exact" if exact else "numerical", "barycenter": "exact" if exact else "numerical"}
    verify = None
    if args.verify:
        est = oracle.mc_barycenter(P, v, _cfg(args))
        z_vol = abs(float(integ.value) - est.volume) / est.volume_se if est.volume_se > 0 else 0.0
        z_bar = [abs(float(x) - e) / s if s > 0 else 0.0 for x, e, s in zip(b, est.barycenter, est.barycenter_se)]
        verify = {
            "oracle": "Monte-Carlo over a volume-weighted triangulation",
            "volume": est.volume, "volume_se": est.volume_se,
            "barycenter": list(est.barycenter), "barycenter_se": list(est.barycenter_se),
            "agrees": z_vol <= 4 and all(z <= 4 for z in z_bar) and (est.volume_se > 0 or _close(integ.value, est.volume, 1e-9)),
        }
    prov = "weighted Duistermaat-Heckman measure v(x) dx on the moment polytope; barycenter = int x v / int v"
    return result, claims, prov, verify


def cmd_threshold(args, data):
    _require(data, "family")
    F = parse_family(data["family"])
    s = geometry.kahler_threshold(F)
    result = {"s": s, "proportionality": F.proportionality()}
    verify = None
    if args.verify:
        proper = lambda t: geometry.is_kahler_proper(F.normals, F.offsets(-t, 1))
        if s == math.inf:
            verify = {"oracle": "properness at large s", "agrees": proper(Fraction(10 ** 6))}
        else:
            lo = s / 2 if proper(s / 2) else Fraction(0)
            lo_b, hi_b = oracle.bisect_threshold(proper, lo, s + 1, 60)
            verify = {
                "oracle": "bisection on Kähler-properness of c_1 - s [omega_0]",
                "bracket": [lo_b, hi_b], "agrees": lo_b <= s <= hi_b,
            }
    prov = "sup of s such that 2 pi c_1(X) - s [omega_0] is Kähler, from the facet offsets"
    return result, {"s": "exact"}, prov, verify


def _beta_oracle(P, v):
    """Barycenter by cubature of the weight as an expression tree, then bisection on beta."""
    b = dh.barycenter(dh.Measure(P, to_expression(v)), tol=1e-12)
    if all(abs(x) < 1e-14 for x in b):
        return 1.0, b

    def feasible(beta):
        k = beta / (1 - beta)
        return geometry.contains(P, tuple(-k * x for x in b))

    lo, hi = oracle.bisect_threshold(feasible, 0.0, 1.0 - 1e-15, 80)
    return (lo + hi) / 2, b


def cmd_beta_toric(args, data):
    _require(data, "polytope")
    P = parse_polytope(data["polytope"])
    v = parse_weight(data.get("weight"), exact=args.exact)
    toric = bool(data.get("toric", True))
    rep = invariants.fano_toric_beta(P, v, toric=toric)
    result = {
        "beta": rep.value, "kind": rep.kind, "s_threshold": rep.s_threshold,
        "delta_conclusion": rep.delta_conclusion, "barycenter": list(rep.witness),
    }
    claims = {"beta": "exact" if rep.kind == "exact_toric" else "upper_bound"}
    if rep.delta_conclusion == "delta_equals_value":
        claims["delta"] = claims["beta"]
        result["delta"] = rep.value
    else:
        claims["delta"] = "lower_bound"
        result["delta_lower_bound"] = rep.s_threshold
    verify = None
    if args.verify:
        val, b = _beta_oracle(P, v)
        verify = {"oracle": "cubature barycenter and bisection on -beta/(1-beta) b in the polytope",
                  "beta": val, "agrees": _close(rep.value, val, 1e-8)}
    prov = ("toric Fano class: beta = s/(1+s) with s the largest scale keeping -s times the weighted "
            "barycenter in the anticanonical polytope; beta = min(s, delta) fixes delta")
    return result, claims, prov, verify


def cmd_beta_upper(args, data):
    _require(data, "family")
    F = parse_family(data["family"])
    v = parse_weight(data.get("weight"), exact=args.exact)
    ub = invariants.beta_upper_bound_report(F, v, scan_steps=args.scan_steps)
    result = {
        "beta_upper_bound": ub.value, "s_threshold": ub.s_threshold,
        "barycenter": list(ub.barycenter), "binding_facet": ub.binding_facet,
        "scan": {
            "step": ub.certificate.step, "feasible": ub.certificate.feasible,
            "total": ub.certificate.total, "prefix_end": ub.certificate.prefix_end,
            "refined": ub.certificate.refined,
        },
    }
    verify = None
    if args.verify:
        cert = ub.certificate
        verify = {
            "oracle": "dense scan of the feasibility condition with bisection refinement",
            "refined": cert.refined,
            "agrees": cert.refined <= ub.value and ub.value - cert.refined <= cert.step,
        }
    prov = ("beta_v([omega_0]) <= sup of beta < s with -beta bary_v in the polytope of "
            "2 pi c_1 - beta [omega_0]; feasibility is affine in beta, so the sup is a minimum of ratios")
    return result, {"beta_upper_bound": "upper_bound", "s_threshold": "exact"}, prov, verify


def _fib_result(rep, spec):
    out = {
        "beta_comp": rep.beta_comp, "achiever": rep.achiever, "fiber_term": rep.fiber_term,
        "basis_terms": list(rep.basis_terms), "sharp": rep.sharp, "conclusions": list(rep.conclusions),
    }
    if rep.brackets:
        out["brackets"] = [
            {"lo": b.lo, "hi": b.hi, "value": b.value, "snapped": b.snapped, "width": b.hi - b.lo}
            for b in rep.brackets
        ]
    if rep.sharp:
        out["beta_Y"] = rep.fiber_term
    return out


def cmd_fibration(args, data):
    spec = parse_fibration(data, exact=args.exact)
    result: dict = {}
    claims = {"beta_comp": "exact"}
    if spec.family is None:
        ok, wit = fibration.compatibly_fano_check(spec) if spec.lam == 1 else (None, [])
        rep = fibration.with_sharpness(fibration.compatible_beta_fano_fiber(spec), spec) if ok else \
            fibration.compatible_beta_fano_fiber(spec)
        result["compatibly_fano"] = ok
        result["compatibility_margins"] = wit
        prov = ("compatible beta of a fibration with [omega_0] = lambda 2 pi c_1(X): minimum of the weighted "
                "fiber beta and the basis terms (beta_a + inf p_a)/(c_a + lambda inf p_a)")
    else:
        fb = data.get("fiber_beta")
        rep = fibration.compatible_beta_general(spec, None if fb is None else to_scalar(fb))
        if fb is None:
            claims["fiber_term"] = "upper_bound"
        prov = ("compatible beta for a general class: per factor the sup of t below the fiber beta with "
                "inf over Delta_t of p_a minus t c_a above -beta_a, minimised over factors")
    result.update(_fib_result(rep, spec))
    claims["beta_comp"] = "exact" if claims.get("fiber_term") != "upper_bound" else "upper_bound"
    if rep.sharp:
        claims["beta_Y"] = "exact"
    else:
        claims["beta_Y"] = "lower_bound"
    verify = None
    if args.verify:
        if spec.family is None:
            other = fibration.compatible_beta_general(spec, rep.fiber_term)
            verify = {"oracle": "general formula by bisection on t", "beta_comp": other.beta_comp,
                      "agrees": other.beta_comp == rep.beta_comp}
        else:
            lam = spec.family.proportionality()
            if lam is not None:
                alt = fibration.FibrationSpec(
                    geometry.polytope_from_halfspaces(spec.family.normals, spec.family.offsets_c1),
                    spec.factors, spec.weight_v, lam, None, spec.basis_normalization, spec.fiber_toric,
                )
                other = fibration.compatible_beta_fano_fiber(alt)
                verify = {"oracle": "closed form for the proportional class", "beta_comp": other.beta_comp,
                          "agrees": other.beta_comp == rep.beta_comp}
            else:
                verify = {"oracle": "bracket widths", "agrees": all(b.snapped or b.hi - b.lo < 1e-12 for b in rep.brackets)}
    return result, claims, prov, verify


def cmd_p1_bundle(args, data):
    p, c, lam = to_scalar(args.p), to_scalar(args.c), to_scalar(args.lam)
    d = args.d
    beta = fibration.p1_beta(p, c, d, lam)
    bary = dh.barycenter_p1_closed_form(p, c, d, lam)
    result = {"beta": beta, "barycenter": bary, "p": p, "c": c, "d": d, "lambda": lam}
    claims = {"beta": "exact"}
    if args.beta_basis is not None:
        spec = fibration.p1_bundle_spec(p, c, d, lam, to_scalar(args.beta_basis))
        rep = fibration.compatible_beta_fano_fiber(spec)
        if lam == 1 and fibration.compatibly_fano_check(spec)[0]:
            rep = fibration.with_sharpness(rep, spec)
        result["fibration"] = _fib_result(rep, spec)
        claims["beta_comp"] = "exact"
        claims["beta_Y"] = "exact" if rep.sharp else "lower_bound"
    verify = None
    if args.verify:
        seg = geometry.polytope_from_vertices([(Fraction(-1),), (Fraction(1),)])
        w = PolyProduct((((p * lam,), c, d),))
        generic = invariants.fano_toric_beta(seg, w).value / lam
        verify = {"oracle": "generic pipeline: exact barycenter on [-1, 1] and ray shooting",
                  "beta": generic, "agrees": generic == beta}
    prov = "P^1 fiber with weight (p lambda u + c)^d on [-1, 1]: beta = (1/lambda) / (1 + |barycenter|)"
    return result, claims, prov, verify


def cmd_zz(args, data):
    r, db, b0 = to_scalar(args.r), to_scalar(args.delta_b), to_scalar(args.beta0)
    val = fibration.zz_delta(r, db, b0)
    result = {"delta_alg_Y": val}
    if args.beta_b is not None:
        result["equivalence"] = list(fibration.zz_equivalence(r, to_scalar(args.beta_b), db, b0))
    verify = None
    if args.verify:
        alt = min(db * r * b0 / (1 + b0 * (r - 1)), b0)
        verify = {"oracle": "direct evaluation", "value": alt, "agrees": alt == val}
    prov = "algebraic delta of a P^1 bundle: min(delta_B r beta0 / (1 + beta0 (r - 1)), beta0)"
    return result, {"delta_alg_Y": "exact"}, prov, verify


def cmd_sgr(args, data):
    if args.n is None and args.r is None and not args.scan:
        raise ValidationError("sgr needs --n, --r or --scan")
    result: dict = {}
    if args.n is not None:
        result["n"] = args.n
        result["beta"] = fibration.sgr_beta(args.n)
        result["dimension"] = args.n * (args.n + 3) // 2
    if args.r is not None:
        ok, margin = fibration.sgr_compatibly_fano_probe(args.r)
        result["probe"] = {"r": args.r, "n": args.r ** 3 - 2, "compatibly_fano_inequality": ok, "margin": margin}
    if args.scan:
        result["first_failing_r"] = fibration.sgr_first_failure(args.scan)
    verify = None
    if args.verify and args.n is not None:
        f = oracle.sgr_beta_float(args.n)
        verify = {"oracle": "log-gamma evaluation", "beta": f, "agrees": _close(result["beta"], f, 1e-9)}
    prov = "greatest Ricci lower bound of the odd symplectic Grassmannian SGr(n, 2n+1): 2 (2n+1)! / ((n+2) (n! 2^n)^2)"
    claims = {k: "exact" for k in result if k in ("beta", "probe", "first_failing_r")}
    return result, claims, prov, verify


def _condition_claims(rep) -> dict:
    """asserted flags, exact decisions (certified or purely rational), numerical grid results."""
    out = {}
    for k, v in rep.verdicts.items():
        if "asserted" in v.note:
            out[k] = "asserted"
        elif v.note.startswith("certified") or v.note == "" or v.note.startswith("not applicable"):
            out[k] = "exact"
        else:
            out[k] = "numerical"
    return out


def _verdicts(rep):
    return {k: {"holds": v.holds, "margin": v.margin, "witness": v.witness, "note": v.note} for k, v in rep.verdicts.items()}


def cmd_check_cscK(args, data):
    _require(data, "delta_eps")
    v = parse_weight(data.get("v"), exact=args.exact)
    w = parse_weight(data.get("w"), exact=args.exact)
    d = conditions.DeltaEstimate(to_scalar(data["delta_eps"]), data.get("delta_provenance", "user-asserted"))
    futaki = bool(data.get("futaki_vanishes", False))
    if data.get("theorem", "general") == "p1":
        rep = conditions.p1_cscK_check(v, w, d, futaki, grid=args.grid)
        prov = ("sufficient conditions on P^1 with [omega_0] = 2 pi c_1: delta_eps > 1, inf w_check > 0 "
                "over [-1, 1] x [-(delta_eps - 1), delta_eps - 1], and vanishing weighted Futaki invariant")
    else:
        _require(data, "class_family", "n")
        F = parse_family(data["class_family"])
        rep = conditions.exi_delta_check(F, v, w, d, int(data["n"]), futaki, grid=args.grid)
        prov = ("sufficient conditions for a weighted cscK metric: vanishing Futaki invariant, theta_eps Kähler, "
                "inf w_check + (n-1)(s - delta_eps) > 0, 1 + inf v_hat > 0, convexity of w_check in x")
    result = {"overall": rep.overall, "conditions": _verdicts(rep), "delta_provenance": d.provenance}
    claims = _condition_claims(rep)
    verify = None
    if args.verify:
        verify = _verify_w_check(args, data, v, w, d, rep)
    return result, claims, prov, verify


def _product(A, B):
    return geometry.polytope_from_vertices([tuple(a) + tuple(b) for a in A.vertices for b in B.vertices])


def _verify_w_check(args, data, v, w, d, rep):
    """Grid minimisation of w_check over the full product, compared with the reported infimum."""
    key = "inf_w_check" if "inf_w_check" in rep.verdicts else "iii_inf_w_check"
    verdict = rep.verdicts[key]
    if verdict.witness is None:
        return {"oracle": "grid minimisation of w_check", "agrees": True, "note": "not applicable"}
    if data.get("theorem", "general") == "p1":
        n = 1
        Dx = geometry.polytope_from_vertices([(Fraction(-1),), (Fraction(1),)])
        r = d.delta_eps - 1
        Dy = geometry.polytope_from_vertices([(-r,), (r,)])
    else:
        n = int(data["n"])
        F = parse_family(data["class_family"])
        Dx = geometry.polytope_from_halfspaces(F.normals, F.offsets_omega0)
        Dy = conditions.theta_eps_polytope(F, d)[0]
    k = Dx.ambient_dim
    main = check_w_eps(v, w, d.delta_eps, n, verdict.witness)
    val, _ = oracle.grid_inf(
        lambda z: check_w_eps(v, w, d.delta_eps, n, ProductPoint(z[:k], z[k:])), _product(Dx, Dy), _cfg(args)
    )
    return {"oracle": "grid minimisation of w_check over the product", "inf_w_check": val,
            "agrees": _close(main, val, 1e-6)}


def cmd_check_j(args, data):
    _require(data, "x_domain")
    v = parse_weight(data.get("v"), exact=args.exact)
    w = parse_weight(data.get("w_hat"), exact=args.exact)
    Dx = parse_polytope(data["x_domain"])
    Dy = parse_polytope(data.get("y_domain", data["x_domain"]))
    rep = conditions.j_hypotheses_check(v, w, Dx, Dy, data.get("asserted", {}), grid=args.grid)
    result = {"overall": rep.overall, "conditions": _verdicts(rep)}
    claims = _condition_claims(rep)
    verify = None
    if args.verify:
        D2 = _product(Dx, Dx)
        k = Dx.ambient_dim
        val, _ = oracle.grid_inf(lambda z: hat_v(v, z[:k], z[k:]), D2, _cfg(args))
        m = rep.verdicts["hat_v_bound"].margin
        verify = {"oracle": "grid minimisation of v_hat over the product", "inf_v_hat": val,
                  "agrees": _close(m - 1, val, 1e-6)}
    prov = ("hypotheses for the weighted J-equation: convexity of w_bar in x, 1 + inf v_hat > 0, "
            "normalization identity and chi bound as asserted flags")
    return result, claims, prov, verify


HANDLERS = {
    "barycenter": cmd_barycenter,
    "threshold": cmd_threshold,
    "beta-toric": cmd_beta_toric,
    "beta-upper": cmd_beta_upper,
    "fibration": cmd_fibration,
    "p1-bundle": cmd_p1_bundle,
    "zz": cmd_zz,
    "sgr": cmd_sgr,
    "check-cscK": cmd_check_cscK,
    "check-j": cmd_check_j,
}

JSON_INPUT = {"barycenter", "threshold", "beta-toric", "beta-upper", "fibration", "check-cscK", "check-j"}


# -- parser -----------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, with_input: bool) -> None:
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="exact", action="store_true", default=True, help="exact rational mode (default)")
    mode.add_argument("--float", dest="exact", action="store_false", help="report floats; accept expression weights")
    out = p.add_mutually_exclusive_group()
    out.add_argument("--json", dest="fmt", action="store_const", const="json", default="json")
    out.add_argument("--text", dest="fmt", action="store_const", const="text")
    p.add_argument("--tol", default="1/10000000000", help="cubature tolerance (rational)")
    p.add_argument("--grid", type=int, default=8, help="grid density for infima and convexity probes")
    p.add_argument("--seed", type=int, default=0, help="seed for Monte-Carlo oracles")
    p.add_argument("--samples", type=int, default=100_000, help="Monte-Carlo sample count")
    p.add_argument("--verify", action="store_true", help="re-derive the report with an independent oracle")
    if with_input:
        p.add_argument("--input", "-i", help="JSON file path or inline JSON object")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wkahler", description="Weighted Kähler invariants calculator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        _common(p, name in JSON_INPUT)
    p = sub.choices["p1-bundle"]
    p.add_argument("--p", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lambda", dest="lam", default="1")
    p.add_argument("--beta-basis", default=None, help="basis beta, to also report the compatible beta")
    p = sub.choices["zz"]
    p.add_argument("--r", required=True)
    p.add_argument("--delta-b", required=True)
    p.add_argument("--beta0", required=True)
    p.add_argument("--beta-b", default=None, help="basis beta, to evaluate the three equivalent conditions")
    p = sub.choices["sgr"]
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int, help="compatibly Fano probe with n = r^3 - 2")
    p.add_argument("--scan", type=int, default=0, metavar="RMAX", help="find the first failing r up to RMAX")
    p = sub.choices["beta-upper"]
    p.add_argument("--scan-steps", type=int, default=1000)
    return parser


def _text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and any(isinstance(x, (dict, list)) for x in (v.values() if isinstance(v, dict) else v)):
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k:<28} {json.dumps(v) if not isinstance(v, str) else v}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            lines.append(f"{pad}[{i}]")
            lines.extend(_text(v, indent + 1))
    else:
        lines.append(f"{pad}{obj}")
    return lines


def run(argv=None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    first = next((a for a in argv if not a.startswith("-")), None)
    if first is not None and first not in SUBCOMMANDS:
        print(f"wkahler: unknown subcommand {first!r}; expected one of {', '.join(SUBCOMMANDS)}", file=stderr)
        return EXIT_USAGE
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        data = _load(args.input) if args.command in JSON_INPUT else {}
        result, claims, prov, verify = HANDLERS[args.command](args, data)
        report = {
            "subcommand": args.command,
            "mode": "exact" if args.exact else "float",
            "claims": claims,
            "provenance": prov,
            "result": result,
        }
        if verify is not None:
            report["verify"] = verify
        report = jsonable(report, exact=args.exact)
        validate(report, OUTPUT_SCHEMA, "report")
    except MalformedInput as exc:
        print(f"wkahler: {exc}", file=stderr)
        return EXIT_DATA
    except (ValidationError, ZeroDivisionError, OverflowError) as exc:
        print(f"wkahler: validation error: {exc}", file=stderr)
        return EXIT_VALIDATION
    if args.fmt == "json":
        stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    else:
        stdout.write("\n".join(_text(report)) + "\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())
