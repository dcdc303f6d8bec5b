import math
from fractions import Fraction

import pytest

from ckdvlab import bilinear, resonance as rs
from ckdvlab.errors import IncompatibleBoxes, ROutOfRange, ZeroK2
from ckdvlab.exact import sqrt_exact

F = Fraction


def test_h_roots_cases():
    assert rs.h_roots(F(1, 3)).roots == (F(-2, 3), F(-1, 3))
    assert rs.h_roots(F(1, 4)).case == "DoubleRoot"
    assert rs.h_roots(0).case == "NoRealRoots"
    x1, x2 = rs.h_roots(F(1, 2)).roots
    assert x1 == F(-1, 2) - sqrt_exact(3) / 6
    assert rs.h_r(F(1, 2), x1) == 0 and rs.h_r(F(1, 2), x2) == 0


def test_compact_form_matches_direct_sum():
    for args in [(F(1, 2), 2, 1, 3, 5, -7), (F(1, 8), -1, 0, 2, F(3, 2), F(1, 3)), (3, 1, 0, 0, -4, 9)]:
        direct, compact = rs.h2_compact_check(*args)
        assert direct == compact
    with pytest.raises(ZeroK2):
        rs.h2_compact_check(1, 1, 0, 0, 1, 0)


def test_resonance_vanishes_on_rational_root_line():
    t = rs.h2_triple(F(1, 3))
    for q in (3, 6, -9):
        assert rs.resonance_H(t, F(-2, 3) * q, q) == 0


def test_h_grows_linearly_along_convergents():
    rows, slope = rs.resonant_H_decay(F(1, 2), 10)
    assert rows[0] == (-3, 4, F(4))
    assert abs(slope - 1) < 0.05
    with pytest.raises(ROutOfRange):
        rs.resonant_H_decay(F(1, 8))


def test_significance_scan_gap_below_quarter():
    rep = rs.significance_scan(rs.h2_triple(F(1, 8)), rs.LatticeWindow(1, 20), delta=F(1, 2))
    assert rep.delta_min == F(1001, 2000) and rep.passed
    assert rep.argmin == (-10, 20, -10)
    assert rep.checked == 1140


def test_significance_degenerates_at_rational_root():
    rep = rs.significance_scan(rs.h2_triple(F(1, 3)), rs.LatticeWindow(1, 12))
    # H = 0 at (k1, k2) = (-2, 3) so <H> = 1 and the ratio is 1 / |k1 k2 k3|
    assert rep.delta_min <= F(1, 2 * 3 * 1)


def test_near_resonances_scaled_order_prefers_convergents():
    x1 = rs.h_roots(F(1, 2)).roots[0]
    out = rs.near_resonances(F(1, 2), rs.LatticeWindow(1, 30), F(1, 50), order="scaled")
    assert out
    assert all(d <= F(1, 50) for *_, d in out)
    k1, k2, _ = out[0]
    assert abs(float(k1 / k2) - float(x1)) < 1e-2 or abs(k1 / k2 - rs.h_roots(F(1, 2)).roots[1]) < F(1, 50)


def test_omega_count_under_bound():
    o = rs.omega_count(rs.h2_triple(F(1, 2)), 2, 64, 1, rs.LatticeWindow(1, 40))
    assert o.ok and o.pairs == 4
    assert math.isclose(o.bound, 16.0)


def test_rows_csv_header():
    rows = rs.scan_rows(rs.h2_triple(F(1, 8)), rs.LatticeWindow(1, 3), limit=2)
    text = rs.rows_csv(rows)
    assert text.splitlines()[0] == "k1,k2,k3,H,ratio"
    assert len(text.splitlines()) == 3


def test_box_convolution_matches_quadrature():
    cases = [
        (bilinear.Box(1, 0, 2), bilinear.Box(2, 1, 1), bilinear.Box(-3, -1, 5)),
        (bilinear.Box(5, 10, 3), bilinear.Box(-2, -4, F(1, 2)), bilinear.Box(-3, -6, 4)),
    ]
    for b1, b2, b3 in cases:
        exact = bilinear.box_convolution(b1, b2, b3, lam=2)
        assert math.isclose(float(exact), bilinear.box_convolution_quad(b1, b2, b3, lam=2), rel_tol=1e-10)
    with pytest.raises(IncompatibleBoxes):
        bilinear.box_convolution(bilinear.Box(1, 0, 1), bilinear.Box(1, 0, 1), bilinear.Box(-2, 10, 1))


def test_every_case_has_metadata():
    ids = bilinear.case_ids()
    assert "lin-fail-hi" in ids and "div2-a" in ids
    for cid in ids:
        meta = bilinear.CASES[cid]
        assert {"estimate", "requires", "exponent", "label", "build"} <= set(meta)
        assert (meta.get("convergent") is not None) == ("convergent" in cid)


def test_closed_form_fit_div2a():
    rep = bilinear.fit_exponent("div2-a", F(-1, 2), F(1, 2))
    assert abs(rep.slope - rep.predicted) < 1e-6
    assert not rep.fails
    rep = bilinear.fit_exponent("div2-a", -1, F(1, 2))
    assert rep.fails and abs(rep.slope - 0.5) < 1e-6


def test_linear_multiplier_scan():
    scan = bilinear.linear_multiplier_scan(1, -1, 0, 0, 1000)
    assert math.isclose(scan.sup, 1 / math.sqrt(3), rel_tol=1e-12)
    assert scan.bound_holds


def test_lin_fail_hi_slope_tracks_b():
    for b in (F(1, 2), F(3, 4), F(1)):
        rep = bilinear.fit_exponent("lin-fail-hi", 0, b)
        assert abs(rep.slope - float(b)) < 1e-6
