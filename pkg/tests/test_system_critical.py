import random
from fractions import Fraction

import pytest

from ckdvlab import critical, system
from ckdvlab.errors import (DegenerateA1, InapplicableSpace, InvalidParams, ROutOfRange,
                            UnknownPreset, ZeroEigenvalue)
from ckdvlab.exact import INF, sqrt_exact
from ckdvlab.system import Matrix2, SpaceType


def _jet(rng):
    return tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(2))


def _check_reduction(g, rng, trials=20):
    red = system.reduce(g)
    M = red.M
    for _ in range(trials):
        W, Wx, Wxxx = _jet(rng), _jet(rng), _jet(rng)
        U, Ux, Uxxx = ((M[0, 0] * a[0] + M[0, 1] * a[1], M[1, 0] * a[0] + M[1, 1] * a[1])
                       for a in (W, Wx, Wxxx))
        lhs = system.general_rhs(g, U, Ux, Uxxx)
        w = system.coef_rhs(red, W, Wx, Wxxx)
        rhs = (M[0, 0] * w[0] + M[0, 1] * w[1], M[1, 0] * w[0] + M[1, 1] * w[1])
        assert lhs == rhs


def test_reduction_commutes_with_change_of_variables():
    rng = random.Random(4)
    _check_reduction(system.preset("abcd"), rng)
    _check_reduction(system.preset("gear-grimshaw", rho1=1, rho2=1, sigma1=1, sigma2=2,
                                   sigma3=Fraction(1, 2), sigma4=3), rng)
    # random G-G with rational eigenvalues: rho1 = rho2 = 1 gives 1 +- sigma3
    for _ in range(5):
        s = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(4)]
        if s[2] in (0, 1, -1):
            continue
        g = system.preset("gg", rho1=1, rho2=1, sigma1=s[0], sigma2=s[1], sigma3=s[2], sigma4=s[3])
        _check_reduction(g, rng)


def test_gg_reduction_values():
    red = system.reduced_preset("gg", rho1=1, rho2=1, sigma3=Fraction(1, 2))
    assert (red.a1, red.a2, red.theta) == (Fraction(3, 2), Fraction(1, 2), Fraction(1, 3))
    assert red.M == Matrix2([[1, 1], [1, -1]])
    with pytest.raises(ZeroEigenvalue):
        system.reduced_preset("gg", rho1=1, rho2=4, sigma3=Fraction(1, 2))


def test_abcd_preset():
    red = system.reduced_preset("abcd")
    assert (red.a1, red.a2) == (Fraction(1, 6), Fraction(-1, 6))
    assert red.B == Matrix2([[1, 0], [0, -1]])
    assert red.C == Matrix2([["-3/2", "1/2"], ["-1/2", "3/2"]])
    assert red.D == Matrix2([["1/2", "1/2"], ["-1/2", "-1/2"]])


def test_divergence_forms_and_spaces():
    assert system.divergence_form(system.reduced_preset("mb")) == system.DivergenceForm.FULL
    hs = system.reduced_preset("hs", a1=1, c12=1)
    assert system.divergence_form(hs) == system.DivergenceForm.U_ONLY
    table = {sp.k: (ok, why) for sp, ok, why in system.applicable_spaces(hs)}
    assert table[2][0] and table[4][0]
    assert not table[1][0] and "mean of v not preserved" in table[1][1]
    assert not table[3][0]
    with pytest.raises(InapplicableSpace):
        system.scale(hs, SpaceType(3), 2)


def test_space_type_drops_unfixed_means():
    assert SpaceType(3, 5, 7).shifts == (0, 7)
    assert SpaceType(2, 5, 7).shifts == (5, 0)
    assert SpaceType(4, 5, 7).shifts == (0, 0)
    with pytest.raises(InvalidParams):
        SpaceType(5)


def test_first_order_law_scales_like_lambda_minus_two():
    mb = system.reduced_preset("mb", a2=2)
    sp = SpaceType(1, 1, 2)
    base = system.first_order_law(mb, sp)
    # B=0, C=[[0,-1],[0,0]], D=[[0,0],[-1,-1]]: -C diag(1,2) - D diag(2,1)
    assert base == Matrix2([[0, 2], [2, 1]])
    sc = system.scale(mb, sp, 3)
    assert sc.B_lambda == base * Fraction(1, 9)
    assert sc.as_reduced().C == mb.C


def test_text_format_roundtrip():
    for red in (system.reduced_preset("abcd"), system.reduced_preset("hs", a1=Fraction(1, 8), c12=1),
                system.reduced_preset("gg", rho1=1, rho2=1, sigma3=Fraction(1, 2))):
        back = system.parse_system(system.format_system(red))
        assert back == red


def test_gg_regimes():
    assert system.gg_regime(1, 1, Fraction(1, 2)) == (Fraction(3, 2), Fraction(1, 2), Fraction(1, 3), "midpos")
    assert system.gg_regime(1, 8, Fraction(1, 2))[3] == "neg"
    assert system.gg_regime(10, 1, Fraction(1, 10))[3] == "lowpos"
    with pytest.raises(DegenerateA1):
        system.gg_regime(1, 1, 0)


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        system.preset("kdv")


def test_s_r_values():
    assert critical.s_value(Fraction(1, 3)) == 1        # rho = 1
    assert critical.s_value(Fraction(7, 12)) == 1       # rho = 2
    rec = critical.s_r(4)
    assert rec.rho == 3 * sqrt_exact(5) and rec.s == Fraction(1, 2)
    assert critical.s_value(Fraction(1, 2)) == Fraction(1, 2)
    with pytest.raises(ROutOfRange):
        critical.s_r(Fraction(1, 8))


def test_critical_index_sets():
    k1 = critical.critical_index_set(1)
    assert Fraction(-1, 2) in k1 and INF in k1 and Fraction(3, 4) in k1
    assert Fraction(-1, 4) not in k1 and 0 not in k1
    k2 = critical.critical_index_set(2)
    assert Fraction(-1, 4) in k2 and Fraction(1, 4) not in k2


def test_classify_mb_open_threshold():
    mb = system.reduced_preset("mb", a2=2)
    cl = critical.classify(mb, SpaceType(2))
    assert cl.applicable and cl.s_star == Fraction(1, 2) and cl.kind == critical.OPEN
    assert cl.to_dict()["s_star"] == "1/2"
