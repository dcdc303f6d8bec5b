"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line with the measured quantity and
the pinned tolerance (run ``pytest -s`` to see them).
"""
import json
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from ckdvlab import bilinear, critical, dioph, resonance, spectral
from ckdvlab.exact import fmt, make_surd, parse_number, sign, sqrt_exact
from ckdvlab.system import Matrix2, ReducedSystem, SpaceType, reduced_preset, scale

GOLDEN = Path(__file__).parent / "golden" / "applications.json"

# pinned tolerances
SR_RUNTIME = 1.0
STREAM_COVER = 0.05
SIG_R1_DELTA = 3
SIG_RUNTIME = 10.0
SLOPE_TOL_CLOSED = 1e-6
SLOPE_TOL_CONV = 0.15
LIN_SLOPE_TOL = 1e-6
DRIFT_TOL = 1e-6
MEAN_TOL = 1e-12
RUN_RUNTIME = 60.0
SCALE_TOL = 1e-8
TRIAD_RATIO = 10
TRIAD_RUNTIME = 30.0
DIOPH_RUNTIME = 10.0


def report(n, ok, detail):
    print(f"[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def _is_rational_square(q: Fraction) -> bool:
    # q is reduced, so it is a square iff numerator and denominator are
    if q < 0:
        return False
    a, b = q.numerator, q.denominator
    return math.isqrt(a) ** 2 == a and math.isqrt(b) ** 2 == b


def _random_r(rng):
    if rng.random() < 0.3:
        # force the square branch: 12 r - 3 = (p/q)^2
        p, q = rng.randint(0, 40), rng.randint(1, 12)
        return (Fraction(p, q) ** 2 + 3) / 12
    return Fraction(1, 4) + Fraction(rng.randint(0, 4000), rng.randint(1, 300))


def test_c1_sr_exactness():
    rng = random.Random(20240601)
    rs = [_random_r(rng) for _ in range(200)]
    t0 = time.perf_counter()
    bad = []
    squares = 0
    for r in rs:
        rec = critical.s_r(r)
        expect_one = _is_rational_square(12 * r - 3)
        squares += expect_one
        if rec.s not in (Fraction(1, 2), Fraction(1)) or (rec.s == 1) != expect_one:
            bad.append(fmt(r))
    dt = time.perf_counter() - t0
    ok = not bad and dt < SR_RUNTIME and 0 < squares < len(rs)
    report(1, ok, f"200 rationals, {squares} square cases, mismatches={bad[:3]}, {dt:.3f}s < {SR_RUNTIME}s")


def _random_system(rng):
    vals = [0] * 6 + [1, -1, 2, Fraction(1, 2), -3]
    m = lambda: Matrix2([[rng.choice(vals) for _ in range(2)] for _ in range(2)])
    a1 = Fraction(rng.choice([1, -1, 2, 3]))
    theta = rng.choice([1, -1, 2, Fraction(1, 3), Fraction(1, 8), 4, 5, 3, Fraction(1, 4), Fraction(3, 4)])
    return ReducedSystem(a1, a1 * theta, m(), m(), m())


def test_c2_critical_index_sets():
    rng = random.Random(7)
    t0 = time.perf_counter()
    outside = []
    finite = 0
    seen = set()
    for _ in range(10_000):
        sys_ = _random_system(rng)
        k = rng.randint(1, 4)
        cl = critical.classify(sys_, SpaceType(k))
        if not cl.applicable:
            continue
        if cl.s_star not in critical.critical_index_set(k):
            outside.append((k, fmt(cl.s_star)))
        if cl.s_star != math.inf:
            finite += 1
            seen.add(fmt(cl.s_star))
    est, errs = [], []
    for sigma in [Fraction(20 + 2 * i, 10) for i in range(6)]:
        e = float(critical.s_r_stream(dioph.jarnik_construct(sigma)).s)
        est.append(e)
        errs.append(abs(e - min(1.0, (float(sigma) - 1) / 2)))
    dt = time.perf_counter() - t0
    covers = min(est) <= 0.5 + STREAM_COVER and max(est) >= 1 - STREAM_COVER
    ok = not outside and max(errs) <= STREAM_COVER and covers and dt < 30
    report(2, ok, f"{finite} finite thresholds {sorted(seen)} all in C_k (outside={outside[:3]}); "
                  f"stream s_r {[round(e, 3) for e in est]} within {max(errs):.4f} <= {STREAM_COVER} of (sigma-1)/2, "
                  f"spanning [1/2,1]={covers}; {dt:.1f}s")


def test_c3_application_golden():
    rows = json.loads(GOLDEN.read_text())
    bad = []
    for g in rows:
        params = {k: parse_number(v) for k, v in g["params"].items()}
        recs = [c for c in critical.classify_application(g["preset"], **params) if c.space.k == g["space"]]
        got = [(fmt(c.s_star), c.kind, None if c.gwp is None else c.gwp.render()) for c in recs]
        if got != [(g["s_star"], g["kind"], g["gwp"])]:
            bad.append((g["preset"], g["params"], got))
    report(3, not bad, f"{len(rows)} golden rows, mismatches={bad}")


def _oracle_delta(r: Fraction, K: int) -> Fraction:
    # integer arithmetic: q H = q k1^3 + p k2^3 + q k3^3 with r = p/q
    p, q = r.numerator, r.denominator
    k = np.arange(-K, K + 1, dtype=np.int64)
    k1, k3 = np.meshgrid(k, k, indexing="ij")
    k2 = -k1 - k3
    mask = (k1 != 0) & (k3 != 0) & (k2 != 0) & (np.abs(k2) <= K)
    k1, k2, k3 = k1[mask], k2[mask], k3[mask]
    qH = q * k1 ** 3 + p * k2 ** 3 + q * k3 ** 3
    num = q + np.abs(qH)
    den = q * np.abs(k1 * k2 * k3)
    i = int(np.argmin(num / den))
    best = Fraction(int(num[i]), int(den[i]))
    # float argmin may tie; confirm exactly over near-minimal entries
    near = np.nonzero(num / den <= float(best) * (1 + 1e-9))[0]
    return min(Fraction(int(num[j]), int(den[j])) for j in near)


def test_c4_significance():
    t0 = time.perf_counter()
    w = resonance.LatticeWindow(1, 60)
    out = {}
    for r in (Fraction(1, 8), Fraction(-1), Fraction(1)):
        rep = resonance.significance_scan(resonance.h2_triple(r), w)
        out[r] = rep
    dt = time.perf_counter() - t0
    oracle = {r: _oracle_delta(r, 60) for r in out}
    agree = all(out[r].delta_min == oracle[r] for r in out)
    ok = (agree and out[Fraction(1)].delta_min >= SIG_R1_DELTA
          and out[Fraction(1, 8)].delta_min > 0 and out[Fraction(-1)].delta_min > 0
          and out[Fraction(1, 8)].delta_struct > 0 and out[Fraction(-1)].delta_struct > 0
          and dt < SIG_RUNTIME)
    detail = ", ".join(f"r={fmt(r)}: delta={float(v.delta_min):.5f} struct={float(v.delta_struct):.5f}"
                       for r, v in out.items())
    report(4, ok, f"{detail}; integer oracle agrees={agree}; scan {dt:.2f}s < {SIG_RUNTIME}s")


def _boundary_point(cid):
    e = lambda s, b: bilinear.predicted_exponent(cid, s, b)
    e0, e1 = e(0, 0.5), e(1, 0.5) - e(0, 0.5)
    if abs(e1) > 1e-12:
        return -e0 / e1, 0.5
    f0, f1 = e(0, 0), e(0, 1) - e(0, 0)
    if abs(f1) > 1e-12:
        b = -f0 / f1
        req = bilinear.CASES[cid].get("requires", "")
        if (req == "b>=1/2" and b < 0.5) or (req == "b<1/2" and b >= 0.5):
            return None
        return 0.0, b
    return None


def test_c5_sharpness_exponents():
    t0 = time.perf_counter()
    pts = [(-0.6, 0.5), (0.2, 0.5), (0.9, 0.5), (-0.25, 0.6), (0.5, 0.4)]
    worst_closed = worst_conv = 0.0
    worst_boundary = 0.0
    n_closed = n_conv = n_bd = 0
    for cid in bilinear.case_ids():
        if bilinear.CASES[cid].get("convergent"):
            rep = bilinear.fit_exponent(cid, 0.9, 0.5, r=Fraction(1, 2))
            assert len(rep.rows) >= 8
            worst_conv = max(worst_conv, abs(rep.slope - rep.predicted))
            n_conv += 1
            continue
        for s, b in pts:
            rep = bilinear.fit_exponent(cid, s, b)
            worst_closed = max(worst_closed, abs(rep.slope - rep.predicted), abs(rep.exact_slope - rep.predicted))
            n_closed += 1
        bp = _boundary_point(cid)
        if bp is not None:
            rep = bilinear.fit_exponent(cid, *bp)
            worst_boundary = max(worst_boundary, abs(rep.slope), abs(rep.exact_slope))
            assert not rep.fails
            n_bd += 1
    dt = time.perf_counter() - t0
    ok = (worst_closed <= SLOPE_TOL_CLOSED and worst_conv <= SLOPE_TOL_CONV
          and worst_boundary <= SLOPE_TOL_CLOSED and dt < 20)
    report(5, ok, f"closed-form {n_closed} fits max |dev|={worst_closed:.2e} <= {SLOPE_TOL_CLOSED}; "
                  f"convergent {n_conv} fits max |dev|={worst_conv:.3f} <= {SLOPE_TOL_CONV}; "
                  f"{n_bd} boundary slopes max {worst_boundary:.2e}; {dt:.1f}s")


def test_c6_linear_multiplier():
    a1, a2 = Fraction(1), Fraction(-1)
    scan = bilinear.linear_multiplier_scan(a1, a2, 0, 0, K=1000)
    # oracle: min over tau of <L1><L2> is 1 + |(a2 - a1) k^3|
    k = np.arange(1, 1001, dtype=float)
    prod = 1 + abs(float(a2 - a1)) * k ** 3
    per_k = bool(np.all(prod >= abs(float(a2 - a1)) / 2 * k ** 3))
    sup_oracle = float(np.max(k / np.sqrt(prod)))
    slopes = {}
    for b in (Fraction(1, 2), Fraction(3, 4), Fraction(1)):
        slopes[b] = bilinear.fit_exponent("lin-fail-hi", 0, b).slope
    slope_dev = max(abs(v - min(1.0, float(b))) for b, v in slopes.items())
    ok = (scan.bound_holds and per_k and abs(scan.sup - sup_oracle) < 1e-12
          and math.isfinite(scan.sup) and slope_dev <= LIN_SLOPE_TOL)
    report(6, ok, f"sup={scan.sup:.6f} (oracle {sup_oracle:.6f}), per-k bound holds={scan.bound_holds and per_k}; "
                  f"alpha1=alpha2 slopes {[round(v, 9) for v in slopes.values()]} vs min{{1,b}}, "
                  f"dev {slope_dev:.1e} <= {LIN_SLOPE_TOL}")


U0 = "0.3*cos(x) + 0.1*cos(2*x + 0.5) + 0.05"
V0 = "0.2*cos(x - 0.3) + 0.1*cos(3*x) + 0.02"

RUNS = [
    ("majda-biello", {"a2": Fraction(1)}, (True, True)),
    ("hirota-satsuma", {"a1": Fraction(1, 2), "c12": Fraction(1)}, (True, False)),
    ("gear-grimshaw", {"rho1": Fraction(1), "rho2": Fraction(1), "sigma1": Fraction(1), "sigma2": Fraction(1)},
     (True, True)),
]


@pytest.mark.parametrize("name,params,flat", RUNS, ids=[r[0] for r in RUNS])
def test_c7_conservation(name, params, flat):
    grid = spectral.Grid(1, 256)
    sys_ = reduced_preset(name, **params)
    t0 = time.perf_counter()
    _, led = spectral.simulate(sys_, grid, U0, V0, 1.0, 1e-4, preset_id=name, params=params, every=100)
    dt = time.perf_counter() - t0
    d1, d2 = led.drift()
    mu, mv = led.mean_drift()
    mean_ok = (not flat[0] or mu <= MEAN_TOL) and (not flat[1] or mv <= MEAN_TOL)
    ok = d1 <= DRIFT_TOL and d2 <= DRIFT_TOL and mean_ok and dt < RUN_RUNTIME
    report(7, ok, f"{name}: drift E1={d1:.2e} E2={d2:.2e} <= {DRIFT_TOL}; mean drift u={mu:.1e} v={mv:.1e} "
                  f"(flat required: {flat}) <= {MEAN_TOL}; {dt:.1f}s < {RUN_RUNTIME}s")


def test_c8_scaling_consistency():
    mb = reduced_preset("majda-biello", a2=2)
    sp = SpaceType(1, Fraction(1, 10), Fraction(1, 20))
    u0 = lambda x: 0.1 + 0.2 * np.cos(x)
    v0 = lambda x: 0.05 + 0.1 * np.cos(2 * x + 0.3)
    disc = spectral.scaling_consistency(mb, sp, 2, u0, v0, 0.5, N=64, dt=1e-3)
    # B-scaling law for Type IV, exact
    gg = reduced_preset("gear-grimshaw", rho1=2, rho2=1, sigma1=1, sigma4=3)
    exact = all(scale(gg, SpaceType(4), lam).B_lambda == gg.B * (Fraction(1) / lam ** 2)
                for lam in (Fraction(2), Fraction(3), Fraction(7, 2)))
    disc4 = spectral.scaling_consistency(gg, SpaceType(4), 2, lambda x: 0.2 * np.cos(x),
                                         lambda x: 0.1 * np.cos(2 * x), 0.5, N=64, dt=1e-3)
    disc3 = spectral.scaling_consistency(mb, sp, 3, u0, v0, 0.5, N=64, dt=1e-3)
    ok = disc < SCALE_TOL and exact and disc4 < SCALE_TOL and disc3 < SCALE_TOL
    report(8, ok, f"Type I M-B lambda=2 discrepancy {disc:.2e} < {SCALE_TOL}; Type IV B_lambda = B/lambda^2 exact={exact}, "
                  f"dual path {disc4:.2e}; lambda=3 Type I {disc3:.2e}")


def test_c9_resonant_triad():
    t0 = time.perf_counter()
    res = spectral.resonant_triad_experiment(Fraction(1, 3))
    res2 = spectral.resonant_triad_experiment(Fraction(1, 3))
    dt = time.perf_counter() - t0
    ex, de = res["exact"], res["detuned"]
    ok = (res["ratio"] >= TRIAD_RATIO and ex["secular"] and not de["secular"]
          and res["ratio"] == res2["ratio"] and ex["k3"] == de["k3"] and dt < TRIAD_RUNTIME)
    report(9, ok, f"arms ({ex['k1']},{ex['k2']}) H={ex['H']} vs ({de['k1']},{de['k2']}) H={de['H']}, |k3|={ex['k3']}, "
                  f"T={ex['T']:.3f}: ratio {res['ratio']:.3e} >= {TRIAD_RATIO}; deterministic; {dt:.1f}s")


def _random_surd(rng):
    d = rng.choice([2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23, 29, 30, 31])
    a = Fraction(rng.randint(-30, 30), rng.randint(1, 9))
    b = Fraction(rng.choice([-1, 1]) * rng.randint(1, 20), rng.randint(1, 9))
    return make_surd(a, b, d)


def test_c10_diophantine_properties():
    rng = random.Random(99)
    t0 = time.perf_counter()
    failures = []
    for _ in range(1000):
        x = _random_surd(rng)
        conv = dioph.convergents(x, 12)
        for c, c1 in zip(conv, conv[1:]):
            err = x - Fraction(c.p, c.q)
            # |x - p/q| q q' < 1, exactly
            e = err * (c.q * c1.q)
            if not (sign(e - 1) < 0 and sign(e + 1) > 0):
                failures.append(("convergent law", fmt(x), c.n))
        s = Fraction(rng.choice([-1, 1]) * rng.randint(1, 50), rng.randint(1, 50))
        t = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
        m = dioph.mu(x).value
        if not (m == 2 and dioph.mu(x * s).value == m and dioph.mu(x + t).value == m
                and dioph.mu(1 / x).value == m):
            failures.append(("mu invariance", fmt(x)))
        if dioph.minimal_type_index(x) != dioph.mu(x).value - 2:
            failures.append(("nu = mu - 2", fmt(x)))
    oh = 0
    while oh < 1000:
        a2 = Fraction(rng.randint(1, 400), rng.randint(1, 100))
        if not (0 < a2 <= 4) or a2 == 1:
            continue
        oh += 1
        rho = sqrt_exact(12 / a2 - 3)
        c1, c2 = Fraction(1, 2) - rho / 6, Fraction(1, 2) + rho / 6
        root = sqrt_exact(3 * a2 * (4 - a2))
        d1 = (-3 * a2 - root) / (2 * (1 - a2))
        d2 = (-3 * a2 + root) / (2 * (1 - a2))
        nus = {dioph.minimal_type_index(v) for v in (c1, c2, d1, d2, rho)}
        if len(nus) != 1:
            failures.append(("Oh index", fmt(a2), nus))
        if c1 != 0 and (d1 - 1 / c1 != 0 or d2 - 1 / c2 != 0):
            failures.append(("d = 1/c", fmt(a2)))
    dt = time.perf_counter() - t0
    ok = not failures and dt < DIOPH_RUNTIME
    report(10, ok, f"1000 surds + 1000 a2 values; failures={failures[:3]}; {dt:.2f}s < {DIOPH_RUNTIME}s")
