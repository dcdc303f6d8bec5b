"""Exact vs detuned triad for r = 1/3, where h_r has the rational root -2/3."""
from fractions import Fraction

from ckdvlab.spectral import resonant_triad_experiment

res = resonant_triad_experiment(Fraction(1, 3))
for arm in ("exact", "detuned"):
    d = res[arm]
    print(f"{arm:8s} k=({d['k1']},{d['k2']},{d['k3']})  H={d['H']}  gain={d['gain']:.3e}")
print(f"ratio {res['ratio']:.3e}")
