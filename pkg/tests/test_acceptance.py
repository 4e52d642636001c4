"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import json
import math
import time
from fractions import Fraction as Q

import jsonschema
import pytest

from _fixtures import (
    CLI_CASES,
    ONE,
    P2,
    PRODUCT_FIXTURES,
    SEGMENT,
    SQUARE,
    affine_power,
    p1_fixtures,
    product_box,
    run_cli,
    toric_fixtures,
)
from wkahler.conditions import DeltaEstimate, exi_delta_check, inf_product, j_hypotheses_check, p1_cscK_check
from wkahler.dh import Measure, barycenter, vol_v
from wkahler.fibration import (
    compatible_beta_fano_fiber,
    compatible_beta_general,
    compatibly_fano_check,
    p1_beta,
    p1_bundle_spec,
    sgr_beta,
    sgr_compatibly_fano_probe,
    sgr_first_failure,
    toric_fiber_sharpness,
    zz_delta,
    zz_equivalence,
)
from wkahler.geometry import ToricClassFamily, kahler_threshold
from wkahler.invariants import beta_upper_bound, fano_toric_beta, scaling_transport
from wkahler.oracle import OracleConfig, grid_inf, mc_barycenter
from wkahler.serialize import OUTPUT_SCHEMA
from wkahler.weights import Constant, PolyProduct


class Criterion:
    """Collects labelled checks and prints one verdict line for the criterion."""

    def __init__(self, number: int, title: str, capsys):
        self.number = number
        self.title = title
        self.capsys = capsys
        self.failures: list[str] = []
        self.count = 0

    def check(self, label: str, ok) -> None:
        self.count += 1
        if not ok:
            self.failures.append(label)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None:
            self.failures.append(f"raised {exc_type.__name__}: {exc}")
        status = "PASS" if not self.failures else "FAIL"
        line = f"{status} criterion {self.number}: {self.title} ({self.count} checks)"
        if self.failures:
            line += " -- failed: " + "; ".join(self.failures[:5])
        with self.capsys.disabled():
            print("\n" + line)
        assert not self.failures, line
        return False


@pytest.fixture
def criterion(capsys):
    return lambda n, title: Criterion(n, title, capsys)


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def test_criterion_1_golden_values(criterion):
    with criterion(1, "golden exact values") as c:
        v, dt = timed(p1_beta, 1, 3, 2, 1)
        c.check("p1_beta(1,3,2,1) = 14/17", v == Q(14, 17) and dt < 1)
        spec = p1_bundle_spec(1, 3, 2, beta_basis=1)
        rep, dt = timed(compatible_beta_fano_fiber, spec)
        c.check("P^2 basis: beta_comp = 14/17", rep.beta_comp == Q(14, 17) and dt < 1)
        c.check("P^2 basis: beta(Y) = 14/17", toric_fiber_sharpness(rep, spec) == Q(14, 17))
        v, dt = timed(p1_beta, 2, 3, 2, 1)
        c.check("p1_beta(2,3,2,1) = 31/43", v == Q(31, 43) and dt < 1)
        v, dt = timed(p1_beta, 1, 2, 3, 1)
        c.check("p1_beta(1,2,3,1) = 50/71", v == Q(50, 71) and dt < 1)
        spec = p1_bundle_spec(1, 2, 3, beta_basis=Q(14, 17))
        c.check("basis-achieved example is compatibly Fano", compatibly_fano_check(spec)[0])
        rep, dt = timed(compatible_beta_fano_fiber, spec)
        c.check("basis-achieved beta_comp = 11/17", rep.beta_comp == Q(11, 17) and rep.fiber_term == Q(50, 71))
        c.check("achiever is the basis", rep.achiever == "basis:0" and dt < 1)
        v, dt = timed(zz_delta, 2, Q(14, 17), Q(50, 71))
        c.check("zz_delta(2, 14/17, 50/71) = 1400/2057", v == Q(1400, 2057) and dt < 1)


def test_criterion_2_dual_path_identities(criterion):
    fixtures = p1_fixtures()
    with criterion(2, f"dual-path identities on {len(fixtures)} fixtures") as c:
        c.check("at least 20 fixtures", len(fixtures) >= 20)
        for p, cc, d, lam in fixtures:
            tag = f"(p,c,d,lam)=({p},{cc},{d},{lam})"
            generic = fano_toric_beta(SEGMENT, affine_power(p * lam, cc, d)).value / lam
            c.check(f"closed form vs generic pipeline {tag}", p1_beta(p, cc, d, lam) == generic)
            for beta_b in (Q(1), Q(14, 17), Q(1, 3)):
                spec = p1_bundle_spec(p, cc, d, lam, beta_b)
                closed = compatible_beta_fano_fiber(spec)
                general = compatible_beta_general(spec)
                c.check(f"bisection vs closed form {tag} beta_B={beta_b}", general.beta_comp == closed.beta_comp)
                c.check(
                    f"bracket certificate {tag}",
                    all(b.snapped or b.hi - b.lo < 1e-12 for b in general.brackets),
                )


def _families():
    out = []
    for P, v in toric_fixtures():
        out.append((ToricClassFamily.proportional(P, 1), v))
    for p, cc, d, lam in p1_fixtures():
        out.append((ToricClassFamily.proportional(SEGMENT, lam), affine_power(p, cc, d)))
    return out


def test_criterion_3_upper_bound_consistency(criterion):
    with criterion(3, "general upper bound below the Kähler threshold") as c:
        for F, v in _families():
            c.check(f"bound <= threshold for {v}", beta_upper_bound(F, v) <= kahler_threshold(F))
        even = PolyProduct(tuple((n, Q(3), 1) for n in ((Q(1), Q(0)), (Q(-1), Q(0)), (Q(0), Q(1)), (Q(0), Q(-1)))))
        for P, v in ((SEGMENT, ONE), (SQUARE, ONE), (P2, ONE), (SQUARE, even), (SEGMENT, PolyProduct((((Q(1),), Q(2), 1), ((Q(-1),), Q(2), 1))))):
            F = ToricClassFamily.proportional(P, 1)
            c.check(f"symmetric data reaches the threshold ({len(P.vertices)} vertices)", beta_upper_bound(F, v) == kahler_threshold(F))
            c.check("symmetric barycenter is zero", all(x == 0 for x in barycenter(Measure(P, v))))


def test_criterion_4_scaling_law(criterion):
    with criterion(4, "scaling law for t in {1/2, 2, 3}") as c:
        for P, v in toric_fixtures():
            base = beta_upper_bound(ToricClassFamily.proportional(P, 1), v)
            c.check("proportional bound equals the toric value", base == fano_toric_beta(P, v).value)
            for t in (Q(1, 2), Q(2), Q(3)):
                scaled = beta_upper_bound(ToricClassFamily.proportional(P, t), v.rescale(t))
                c.check(f"t={t}, weight {v}", scaling_transport(scaled, Q(1) / t) == base and scaled == scaling_transport(base, t))


def test_criterion_5_sgr_catalog(criterion):
    with criterion(5, "odd symplectic Grassmannian values and probe") as c:
        c.check("sgr_beta(1) = 1", sgr_beta(1) == 1)
        c.check("sgr_beta(2) = 15/16", sgr_beta(2) == Q(15, 16))
        t0 = time.perf_counter()
        for n in (100, 200, 400):
            ratio = float(sgr_beta(n)) * math.sqrt(math.pi * n) / 4
            c.check(f"asymptotic ratio at n={n} is {ratio:.4f}", 0.95 <= ratio <= 1.05)
        c.check("asymptotic check under 5 s", time.perf_counter() - t0 < 5)
        r0 = sgr_first_failure()
        c.check(f"first failing r = {r0}", r0 == 6)
        for r in range(2, r0):
            ok, margin = sgr_compatibly_fano_probe(r)
            c.check(f"r={r} satisfies the inequality", ok and margin == r * sgr_beta(r ** 3 - 2) - 1)
        for r in range(r0, 31):
            ok, margin = sgr_compatibly_fano_probe(r)
            c.check(f"r={r} fails with exact margin", not ok and isinstance(margin, Q) and margin < 0)


def test_criterion_6_oracle_agreement(criterion):
    cfg = OracleConfig(samples=100_000, seed=0)
    with criterion(6, "exact integration vs Monte-Carlo, inf_product vs grid") as c:
        t0 = time.perf_counter()
        fixtures = [(P, v) for P, v in toric_fixtures()] + [
            (SEGMENT, affine_power(p * lam, cc, d)) for p, cc, d, lam in p1_fixtures()[:9]
        ]
        for P, v in fixtures:
            M = Measure(P, v)
            vol, bary = vol_v(M), barycenter(M)
            est = mc_barycenter(P, v, cfg)
            if est.volume_se == 0:
                c.check(f"volume of {v}", abs(float(vol) - est.volume) < 1e-9 * max(1.0, est.volume))
            else:
                c.check(f"volume of {v}", abs(float(vol) - est.volume) <= 4 * est.volume_se)
            for b, e, se in zip(bary, est.barycenter, est.barycenter_se):
                c.check(f"barycenter of {v}", abs(float(b) - e) <= 4 * se)
        c.check("Monte-Carlo under 10 s", time.perf_counter() - t0 < 10)
        for f, Dx, Dy, grid in PRODUCT_FIXTURES:
            r = inf_product(f, Dx, Dy)
            k = Dx.ambient_dim
            g, _ = grid_inf(lambda z: f(tuple(z[:k]), tuple(z[k:])), product_box(Dx, Dy), OracleConfig(grid=grid))
            c.check(f"inf_product {float(r.value):.6f} vs grid {float(g):.6f}", abs(float(r.value) - float(g)) < 1e-6)


def _zz_grid():
    pts = []
    rs = [Q(11, 10), Q(3, 2), Q(2), Q(3), Q(7)]
    bases = [Q(k, 10) for k in range(1, 11)]
    beta0s = [Q(k, 20) for k in range(1, 21)]
    for r in rs:
        for b in bases:
            for b0 in beta0s:
                pts.append((r, b, b, b0))
    extra = [Q(6, 5), Q(2), Q(3), Q(5, 4)]
    i = 0
    while len(pts) < 1000:
        r = rs[i % len(rs)]
        b0 = beta0s[(i * 7) % len(beta0s)]
        pts.append((r, Q(1), extra[i % len(extra)], b0))
        i += 1
    return pts


def test_criterion_7_zz_equivalence(criterion):
    grid = _zz_grid()
    with criterion(7, f"three-way agreement on a {len(grid)}-point grid") as c:
        t0 = time.perf_counter()
        c.check("grid has 1000 points", len(grid) == 1000)
        mixed = set()
        for r, b, db, b0 in grid:
            flags = zz_equivalence(r, b, db, b0)
            mixed.add(flags[0])
            c.check(f"agreement at {(r, b, db, b0)}", flags[0] == flags[1] == flags[2])
        c.check("grid exercises both outcomes", mixed == {True, False})
        c.check("under 5 s", time.perf_counter() - t0 < 5)


def test_criterion_8_condition_checkers(criterion):
    one, two = Constant(Q(1)), Constant(Q(2))
    with criterion(8, "condition checkers") as c:
        c.check("delta = 1 fails", p1_cscK_check(one, two, DeltaEstimate(Q(1))).overall is False)
        tiny = 1 + Q(1, 10 ** 9)
        c.check("delta = 1 + 1e-9 passes", p1_cscK_check(one, two, DeltaEstimate(tiny)).overall is True)
        for delta in (Q(1, 2), Q(999, 1000), Q(1001, 1000), Q(3, 2), Q(3)):
            c.check(f"p1 verdict iff delta > 1 at {delta}", p1_cscK_check(one, two, DeltaEstimate(delta)).overall == (delta > 1))
        P1 = ToricClassFamily.make([(1,), (-1,)], [1, 1], [1, 1])
        for delta in (Q(3, 2), Q(2), Q(5, 2)):
            rep = exi_delta_check(P1, one, two, DeltaEstimate(delta), 1, True)
            c.check(f"constant family passes at delta = {delta}", rep.overall)
            margins = [v.margin for v in rep.verdicts.values() if v.margin is not None]
            c.check(f"positive margins at delta = {delta}", margins and all(m > 0 for m in margins))
        rep = j_hypotheses_check(affine_power(1, 2, 3), two, SEGMENT, SEGMENT, {"normalization": True, "chi_bound": True})
        m = rep.verdicts["hat_v_bound"].margin
        c.check(f"1 + inf v_hat = {m} for (u+2)^3", abs(float(m) + 5) < 1e-12 and not rep.overall)


def test_criterion_9_cli_contract(criterion):
    with criterion(9, "CLI round trip, exit codes, verify, determinism") as c:
        for name, argv in sorted(CLI_CASES.items()):
            code, out, err = run_cli(argv + ["--verify", "--samples", "20000"])
            c.check(f"{name} exits 0", code == 0)
            if code != 0:
                continue
            report = json.loads(out)
            try:
                jsonschema.validate(report, OUTPUT_SCHEMA)
                valid = True
            except jsonschema.ValidationError:
                valid = False
            c.check(f"{name} validates", valid and json.dumps(report, indent=2, sort_keys=True) + "\n" == out)
            c.check(f"{name} verify agrees", report["verify"]["agrees"] is True)
            c.check(f"{name} byte-identical rerun", run_cli(argv + ["--verify", "--samples", "20000"])[1] == out)
        c.check("validation error exits 2", run_cli(["p1-bundle", "--p", "1", "--c", "1", "--d", "2"])[0] == 2)
        c.check("unknown subcommand exits 64", run_cli(["nope"])[0] == 64)
        c.check("malformed JSON exits 65", run_cli(["barycenter", "-i", "{bad"])[0] == 65)
        c.check("p1-bundle golden", json.loads(run_cli(["p1-bundle", "--p", "1", "--c", "3", "--d", "2", "--lambda", "1"])[1])["result"]["beta"] == "14/17")
        c.check("sgr golden", json.loads(run_cli(["sgr", "--n", "2"])[1])["result"]["beta"] == "15/16")
