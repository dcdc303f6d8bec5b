"""Print the critical threshold of each space type for a few systems."""
from fractions import Fraction

from ckdvlab import critical, system

SYSTEMS = [
    ("majda-biello a2=2", system.reduced_preset("majda-biello", a2=2)),
    ("majda-biello a2=4", system.reduced_preset("majda-biello", a2=4)),
    ("hirota-satsuma a1=1/8, c12=1", system.reduced_preset("hirota-satsuma", a1=Fraction(1, 8), c12=1)),
    ("gear-grimshaw sigma3=1/2", system.reduced_preset("gear-grimshaw", sigma3=Fraction(1, 2))),
    ("abcd-coupled", system.reduced_preset("abcd")),
]

for name, red in SYSTEMS:
    cells = []
    for k in (1, 2, 3, 4):
        cl = critical.classify(red, system.SpaceType(k))
        cells.append(f"H{k}: " + ("n/a" if not cl.applicable else cl.threshold.render()))
    print(f"{name:32s} " + "  ".join(f"{c:12s}" for c in cells))
