"""Phase and resonance functions on the scaled lattice.

Frequencies live on Z_lam = (1/lam) Z.  Every H value is an exact
rational; root distances for surd roots are exact ``Surd`` values, so
sorting and tolerance tests carry no rounding.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dioph import convergents
from .errors import InvalidParams, ROutOfRange, ZeroK2
from .exact import Surd, fmt, sign, sqrt_exact, to_float


def _q(x):
    return x if isinstance(x, (Fraction, Surd)) else Fraction(x)


def bracket1(x):
    """<x> = 1 + |x|."""
    return 1 + abs(x)


@dataclass(frozen=True)
class Phase:
    alpha: Fraction
    beta: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "alpha", _q(self.alpha))
        object.__setattr__(self, "beta", _q(self.beta))
        if self.alpha == 0:
            raise InvalidParams("phase needs alpha != 0")


@dataclass(frozen=True)
class Triple:
    p1: Phase
    p2: Phase
    p3: Phase

    @property
    def r(self):
        return self.p2.alpha / self.p1.alpha

    def phases(self):
        return self.p1, self.p2, self.p3


def h2_triple(r, alpha1=1, beta1=0, beta2=0) -> Triple:
    """((a1, b1), (r a1, b2), (a1, b1)): the triple behind the u-equation estimate."""
    a1 = _q(alpha1)
    p1 = Phase(a1, beta1)
    return Triple(p1, Phase(_q(r) * a1, beta2), p1)


@dataclass(frozen=True)
class LatticeWindow:
    lam: Fraction = Fraction(1)
    K: Fraction = Fraction(50)

    def __post_init__(self):
        object.__setattr__(self, "lam", _q(self.lam))
        object.__setattr__(self, "K", _q(self.K))
        if self.lam < 1:
            raise InvalidParams("lambda must be >= 1")
        if self.K < 1 / self.lam:
            raise InvalidParams("window must contain a nonzero frequency")

    @property
    def nmax(self) -> int:
        return math.floor(self.K * self.lam)

    def freq(self, n: int) -> Fraction:
        return Fraction(n) / self.lam


def phi(p: Phase, k):
    k = _q(k)
    return p.alpha * k ** 3 - p.beta * k


def resonance_H(t: Triple, k1, k2):
    k1, k2 = _q(k1), _q(k2)
    k3 = -k1 - k2
    return phi(t.p1, k1) + phi(t.p2, k2) + phi(t.p3, k3)


def h_r(r, x):
    return x * x + x + (1 - _q(r)) / 3


# -- roots of h_r ---------------------------------------------------------------

@dataclass(frozen=True)
class RootsReport:
    r: Fraction
    case: str  # NoRealRoots | DoubleRoot | TwoRoots
    roots: tuple = ()

    @property
    def x1(self):
        return self.roots[0] if self.roots else None

    @property
    def x2(self):
        return self.roots[-1] if self.roots else None

    def to_dict(self):
        return {"r": fmt(self.r), "case": self.case, "roots": [fmt(x) for x in self.roots]}


def h_roots(r) -> RootsReport:
    r = _q(r)
    if isinstance(r, Surd):
        raise InvalidParams("h_roots expects a rational r")
    disc = 12 * r - 3
    if disc < 0:
        return RootsReport(r, "NoRealRoots")
    if disc == 0:
        return RootsReport(r, "DoubleRoot", (Fraction(-1, 2),))
    rho = sqrt_exact(disc)
    x1 = Fraction(-1, 2) - rho / 6
    x2 = Fraction(-1, 2) + rho / 6
    return RootsReport(r, "TwoRoots", (x1, x2))


def h2_compact_check(r, alpha1, beta1, beta2, k1, k2):
    """(direct, compact) values of H for the h2 triple."""
    k1, k2 = _q(k1), _q(k2)
    if k2 == 0:
        raise ZeroK2("compact form needs k2 != 0")
    t = h2_triple(r, alpha1, beta1, beta2)
    direct = resonance_H(t, k1, k2)
    a1 = _q(alpha1)
    compact = -3 * a1 * k2 ** 3 * h_r(r, k1 / k2) + (_q(beta1) - _q(beta2)) * k2
    return direct, compact


# -- significance ------------------------------------------------------------------

@dataclass
class SignificanceReport:
    delta_min: Fraction
    argmin: tuple
    delta_struct: Fraction
    struct_argmin: tuple
    checked: int
    requested: Fraction | None = None

    @property
    def passed(self) -> bool:
        return self.requested is None or self.delta_min >= self.requested

    def to_dict(self):
        return {
            "delta_min": fmt(self.delta_min),
            "argmin": [fmt(k) for k in self.argmin],
            "delta_struct": fmt(self.delta_struct),
            "struct_argmin": [fmt(k) for k in self.struct_argmin],
            "checked": self.checked,
            "pass": self.passed,
        }


def significance_scan(t: Triple, w: LatticeWindow, delta=None) -> SignificanceReport:
    """Exhaustive min of <H>/|k1 k2 k3| over nonzero window triples.

    Also tracks min <H>/(1 + |k2| sum k_i^2), the lower bound shape used for
    the gapped ratios r < 1/4.
    """
    n = w.nmax
    best = best_s = None
    arg = arg_s = None
    count = 0
    lam = w.lam
    for n1 in range(-n, n + 1):
        if n1 == 0:
            continue
        k1 = Fraction(n1) / lam
        for n3 in range(-n, n + 1):
            n2 = -n1 - n3
            if n3 == 0 or n2 == 0 or abs(n2) > n:
                continue
            k3 = Fraction(n3) / lam
            k2 = Fraction(n2) / lam
            H = phi(t.p1, k1) + phi(t.p2, k2) + phi(t.p3, k3)
            b = bracket1(H)
            ratio = b / abs(k1 * k2 * k3)
            sratio = b / (1 + abs(k2) * (k1 * k1 + k2 * k2 + k3 * k3))
            count += 1
            if best is None or ratio < best:
                best, arg = ratio, (k1, k2, k3)
            if best_s is None or sratio < best_s:
                best_s, arg_s = sratio, (k1, k2, k3)
    if best is None:
        raise InvalidParams("window admits no nonzero triple")
    return SignificanceReport(best, arg, best_s, arg_s, count,
                              None if delta is None else _q(delta))


# -- near resonances -----------------------------------------------------------

def _absx(x):
    return x if sign(x) >= 0 else -x


def near_resonances(r, w: LatticeWindow, tol, order: str = "distance"):
    """Window pairs with |k1/k2 - x_ir| <= tol, nearest first.

    ``order="scaled"`` sorts by |k2| * distance = |k1 - x k2| instead; under
    that order the leaders are continued fraction convergents, while plain
    distance can favour a semiconvergent.
    """
    r = _q(r)
    rep = h_roots(r)
    if rep.case == "NoRealRoots":
        return []
    tol = Fraction(tol)
    ftol = float(tol) * (1 + 1e-9) + 1e-15
    n = w.nmax
    found = {}
    for x in rep.roots:
        xf = to_float(x)
        for n2 in range(-n, n + 1):
            if n2 == 0:
                continue
            c = math.floor(xf * n2)
            for n1 in range(c - 1, c + 3):
                if abs(n1) > n or abs(n1 / n2 - xf) > ftol:
                    continue
                d = _absx(Fraction(n1, n2) - x)
                if d <= tol and ((n1, n2) not in found or d < found[(n1, n2)]):
                    found[(n1, n2)] = d
    out = [(w.freq(a), w.freq(b), d) for (a, b), d in found.items()]
    if order == "scaled":
        out.sort(key=lambda e: (abs(e[1]) * e[2], abs(e[1]), e[1]))
    elif order == "distance":
        out.sort(key=lambda e: (e[2], abs(e[1]), e[1]))
    else:
        raise InvalidParams(f"unknown order {order!r}")
    return out


def resonant_H_decay(r, depth: int = 12, root: int = 1, alpha1=1):
    """|H2| at convergents p/q of a surd root, with the fitted slope in log q.

    Near an irrational root h_r(p/q) ~ 1/q^2, so |H2| = 3|a1| q^3 |h_r(p/q)|
    grows like q.
    """
    rep = h_roots(r)
    if rep.case != "TwoRoots":
        raise ROutOfRange("need r > 1/4")
    x = rep.roots[0] if root == 1 else rep.roots[1]
    if isinstance(x, Fraction):
        raise InvalidParams("root is rational; H vanishes on a lattice line")
    t = h2_triple(r, alpha1)
    rows = []
    for c in convergents(x, depth):
        if c.q < 2:
            continue
        rows.append((c.p, c.q, resonance_H(t, c.p, c.q)))
    qs = np.log([float(q) for _, q, _ in rows])
    hs = np.log([abs(float(h)) for *_, h in rows])
    slope = float(np.polyfit(qs, hs, 1)[0]) if len(rows) >= 2 else float("nan")
    return rows, slope


# -- counting ------------------------------------------------------------------

@dataclass
class OmegaReport:
    measure: float
    pairs: int
    bound: float
    M: float
    intervals: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.measure <= self.bound


def _union_length(iv):
    iv = sorted(iv)
    total = 0.0
    cur_a = cur_b = None
    for a, b in iv:
        if cur_b is None or a > cur_b:
            if cur_b is not None:
                total += cur_b - cur_a
            cur_a, cur_b = a, b
        else:
            cur_b = max(cur_b, b)
    if cur_b is not None:
        total += cur_b - cur_a
    return total


def omega_count(t: Triple, delta, M, k3, w: LatticeWindow, C=1.0, gamma=Fraction(1, 100)) -> OmegaReport:
    """Measure of {eta : M/2 <= |eta| <= 2M, <eta + H> <= delta <H>^gamma} at fixed k3.

    For each admissible (k1, k2) the eta set is an interval about -H; the
    reported measure is the exact length of their union clipped to the
    dyadic shell.
    """
    M = float(M)
    if M < 1:
        raise InvalidParams("M must be >= 1")
    k3 = _q(k3)
    n = w.nmax
    lam = w.lam
    ivs = []
    pairs = 0
    shell = ((-2 * M, -M / 2), (M / 2, 2 * M))
    for n1 in range(-n, n + 1):
        k1 = Fraction(n1) / lam
        k2 = -k1 - k3
        if n1 == 0 or k2 == 0 or abs(k2) > w.K:
            continue
        H = resonance_H(t, k1, k2)
        rad = float(delta) * float(bracket1(H)) ** float(gamma) - 1
        if rad < 0:
            continue
        c = -float(H)
        hit = False
        for lo, hi in shell:
            a, b = max(lo, c - rad), min(hi, c + rad)
            if a < b:
                ivs.append((a, b))
                hit = True
        pairs += hit
    bound = C * float(lam) ** 1.5 * M ** (2 / 3)
    return OmegaReport(_union_length(ivs), pairs, bound, M, ivs)


# -- output --------------------------------------------------------------------

def rows_csv(rows) -> str:
    """CSV with columns k1,k2,k3,H,ratio."""
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["k1", "k2", "k3", "H", "ratio"])
    for k1, k2, k3, H, ratio in rows:
        wr.writerow([fmt(k1), fmt(k2), fmt(k3), fmt(H), fmt(ratio)])
    return buf.getvalue()


def scan_rows(t: Triple, w: LatticeWindow, limit: int | None = None):
    """(k1,k2,k3,H,ratio) rows of the scan, smallest ratio first."""
    n = w.nmax
    out = []
    for n1 in range(-n, n + 1):
        for n3 in range(-n, n + 1):
            n2 = -n1 - n3
            if 0 in (n1, n2, n3) or abs(n2) > n:
                continue
            k1, k2, k3 = (Fraction(v) / w.lam for v in (n1, n2, n3))
            H = resonance_H(t, k1, k2)
            out.append((k1, k2, k3, H, bracket1(H) / abs(k1 * k2 * k3)))
    out.sort(key=lambda e: e[4])
    return out[:limit] if limit else out
