import math

import numpy as np
import pytest
from scipy.linalg import expm

from ckdvlab import spectral as sp, system
from ckdvlab.errors import ParseError, PresetMismatch


def test_expm2_matches_scipy():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(50, 2, 2)) + 1j * rng.normal(size=(50, 2, 2))
    A[0] = [[1e-9, 2e-9], [0, -1e-9]]      # small-d branch
    A[1] = [[0.5j, 1], [0, 0.5j]]          # nilpotent part
    E = sp.expm2(A)
    for i in range(50):
        assert np.allclose(E[i], expm(A[i]), atol=1e-12, rtol=1e-12)


def test_grid_wavenumbers_scale_with_lambda():
    g = sp.Grid(2, 16)
    assert math.isclose(g.length, 4 * math.pi)
    assert np.allclose(g.k, np.arange(9) / 2)
    assert not g.keep[6] and g.keep[5]        # 3n < N
    with pytest.raises(Exception):
        sp.Grid(1, 7)


def test_profile_grammar():
    terms = sp.parse_profile("0.3*cos(x) + 0.1*cos(2*x + 0.5) - cos(3*x - 0.25) + 0.2")
    assert terms == [(0.3, 1.0, 0.0), (0.1, 2.0, 0.5), (-1.0, 3.0, -0.25), (0.2, 0.0, 0.0)]
    assert sp.parse_profile("0") == []
    assert sp.parse_profile("1e-3*cos(1/2*x)") == [(1e-3, 0.5, 0.0)]
    x = np.linspace(0, 1, 5)
    assert np.allclose(sp.eval_profile(terms[:1], x), 0.3 * np.cos(x))
    with pytest.raises(ParseError):
        sp.parse_profile("sin(x)")


def test_if_rk4_agrees_with_strang_richardson():
    sys_ = system.ReducedSystem(1, 1, system.Matrix2.zero(),
                                system.Matrix2([[-1, 0], [0, 0]]), system.Matrix2.zero())
    g = sp.Grid(1, 64)
    st = sp.to_state(g, 0.3 * np.cos(g.x) + 0.1 * np.sin(2 * g.x), 0 * g.x)
    solver = sp.Solver(sys_, g)
    a = solver.run(st, 0.5, 5e-3)
    b = solver.strang_richardson(st, 0.5, 5e-3, sub=4)
    ua, _ = sp.to_physical(g, a)
    ub, _ = sp.to_physical(g, b)
    assert np.max(np.abs(ua - ub)) < 5e-9


@pytest.mark.parametrize("preset,params", [
    ("majda-biello", {"a2": 2}),
    ("hirota-satsuma", {"a1": 0.5, "c12": 1}),
])
def test_short_run_conserves_energies(preset, params):
    red = system.reduced_preset(preset, **params)
    g = sp.Grid(1, 64)
    u0 = 0.3 * np.cos(g.x) + 0.1 * np.cos(2 * g.x + 0.5)
    v0 = 0.2 * np.cos(g.x - 0.3)
    st, led = sp.simulate(red, g, u0, v0, 0.5, 1e-3, preset, params, every=50)
    d1, d2 = led.drift()
    assert d1 < 1e-9 and d2 < 1e-9
    assert abs(led.mean_u[-1] - led.mean_u[0]) < 1e-12
    assert led.to_csv().splitlines()[0].startswith("t,")


def test_energy_preset_mismatch():
    g = sp.Grid(1, 16)
    st = sp.to_state(g, np.cos(g.x), np.cos(g.x))
    with pytest.raises(PresetMismatch):
        sp.energies("majda-biello", g, st, sys=system.reduced_preset("hs"))


def test_ledger_requires_increasing_time():
    led = sp.EnergyLedger()
    led.record(0.0, 1.0, 1.0)
    with pytest.raises(Exception):
        led.record(0.0, 1.0, 1.0)


def test_triad_resonance_exact_vs_detuned():
    res = sp.resonant_triad_experiment(__import__("fractions").Fraction(1, 3))
    assert res["exact"]["H"] == 0 and res["detuned"]["H"] != 0
    assert res["ratio"] > 10
