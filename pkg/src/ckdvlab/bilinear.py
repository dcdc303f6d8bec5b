"""Counterexample box families for the bilinear and linear estimates.

Each family places three boxes B_i = {k = k_i, |tau - c_i| <= w_i} on the
lattice so that B_i + B_j lands inside -B_l.  Testing the weighted
functional on f_i = +-1_{B_i} gives a ratio R(N); its growth exponent in N
decides whether the estimate can hold.

Frequencies and centers are exact polynomials in N, so besides the exact
bracket of R(N) we can read off the leading-order bracket, whose log-log
slope is exactly the growth exponent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dioph import convergents
from .errors import IncompatibleBoxes, InvalidParams, ROutOfRange, UnknownCase
from .exact import Surd, fmt
from .resonance import h_roots


# -- exact polynomials in N ------------------------------------------------------

class Poly:
    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        c = {}
        for d, v in (coeffs or {}).items():
            v = Fraction(v)
            if v:
                c[d] = v
        self.c = c

    @classmethod
    def const(cls, v):
        return cls({0: v})

    @classmethod
    def mono(cls, coef, deg=1):
        return cls({deg: coef})

    def _lift(self, o):
        return o if isinstance(o, Poly) else Poly.const(o)

    def __add__(self, o):
        o = self._lift(o)
        out = dict(self.c)
        for d, v in o.c.items():
            out[d] = out.get(d, 0) + v
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({d: -v for d, v in self.c.items()})

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        out = {}
        for d1, v1 in self.c.items():
            for d2, v2 in o.c.items():
                out[d1 + d2] = out.get(d1 + d2, 0) + v1 * v2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    @property
    def degree(self):
        return max(self.c) if self.c else -1

    def lead(self):
        d = self.degree
        return (d, self.c[d]) if d >= 0 else (0, Fraction(0))

    def __call__(self, N):
        return sum((v * Fraction(N) ** d for d, v in self.c.items()), Fraction(0))

    def is_const(self):
        return self.degree <= 0

    def __repr__(self):
        if not self.c:
            return "0"
        return " + ".join(f"{fmt(v)}*N^{d}" if d else fmt(v) for d, v in sorted(self.c.items(), reverse=True))


N_ = Poly.mono(1)


def _P(x):
    return x if isinstance(x, Poly) else Poly.const(x)


# -- boxes ---------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    k: Fraction
    tau_center: Fraction
    tau_halfwidth: Fraction

    def __post_init__(self):
        if self.tau_halfwidth < 0:
            raise InvalidParams("halfwidth must be >= 0")

    @property
    def interval(self):
        return (self.tau_center - self.tau_halfwidth, self.tau_center + self.tau_halfwidth)


def sum_box_index(b1: Box, b2: Box, b3: Box):
    """Index l (0-based) with B_i + B_j inside -B_l, or None."""
    bs = (b1, b2, b3)
    if b1.k + b2.k + b3.k != 0:
        return None
    s = abs(sum(b.tau_center for b in bs))
    for l in range(3):
        others = sum(bs[i].tau_halfwidth for i in range(3) if i != l)
        if s + others <= bs[l].tau_halfwidth:
            return l
    return None


def box_convolution(b1: Box, b2: Box, b3: Box, lam=1):
    """Measure of {(k1,tau1,k2,tau2) : (k_i, tau_i) in B_i, k3, tau3 = -(..)}."""
    bs = (b1, b2, b3)
    if any(b.tau_halfwidth == 0 for b in bs):
        return Fraction(0)
    l = sum_box_index(b1, b2, b3)
    if l is None:
        raise IncompatibleBoxes("no box contains minus the sum of the other two")
    lam = Fraction(lam)
    val = Fraction(1)
    for i in range(3):
        if i != l:
            val *= 2 * bs[i].tau_halfwidth
    return val / (lam * lam)


def box_convolution_quad(b1: Box, b2: Box, b3: Box, lam=1) -> float:
    """tau-quadrature of the same measure, ignoring the inclusion shortcut."""
    from scipy.integrate import quad

    if b1.k + b2.k + b3.k != 0:
        return 0.0
    a1, c1 = (float(x) for x in b1.interval)
    a2, c2 = (float(x) for x in b2.interval)
    a3, c3 = (float(x) for x in b3.interval)
    if c1 <= a1 or c2 <= a2 or c3 <= a3:
        return 0.0

    def inner(t1):
        # tau2 in [a2, c2] and -t1 - tau2 in [a3, c3]
        lo = max(a2, -t1 - c3)
        hi = min(c2, -t1 - a3)
        return max(0.0, hi - lo)

    pts = sorted({a1, c1, -a2 - c3, -c2 - c3, -a2 - a3, -c2 - a3})
    pts = [p for p in pts if a1 < p < c1]
    width = c1 - a1
    val, _ = quad(inner, a1, c1, points=pts or None, limit=200,
                  epsabs=1e-13 * max(1.0, width), epsrel=1e-13)
    return val / float(lam) ** 2


# -- functionals and families -----------------------------------------------------

ESTIMATES = {
    # name: (index of the alpha used by each L_i as 1/2 label, weight position)
    "D1": (("a1", "a1", "a2"), 2),
    "D2": (("a1", "a2", "a1"), 2),
    "ND1": (("a1", "a2", "a1"), 0),
    "ND2": (("a1", "a2", "a1"), 1),
}


@dataclass(frozen=True)
class WeightedFunctional:
    s: float
    b: float
    estimate: str

    def __post_init__(self):
        if self.estimate not in ESTIMATES:
            raise InvalidParams(f"unknown estimate {self.estimate!r}")

    @property
    def weight_index(self):
        return ESTIMATES[self.estimate][1]

    @property
    def L_exponents(self):
        return (self.b, self.b, 1 - self.b)


@dataclass(frozen=True)
class PolyBox:
    k: Poly
    center: Poly
    hw: Fraction

    def at(self, N) -> Box:
        return Box(self.k(N), self.center(N), Fraction(self.hw))


@dataclass
class BoxFamily:
    case_id: str
    estimate: str
    r: Fraction
    alpha1: Fraction
    kind: str  # poly | convergent | linear
    signs: tuple
    zero_free: tuple  # indices of f_i that must vanish at k = 0
    poly_boxes: tuple = ()
    convergent_boxes: list = field(default_factory=list)  # (n_j, (Box, Box, Box))
    betas: tuple = (Fraction(0), Fraction(0))
    note: str = ""

    @property
    def alpha2(self):
        return self.r * self.alpha1

    def alphas(self):
        a = {"a1": self.alpha1, "a2": self.alpha2}
        if self.estimate == "LIN":
            return (self.alpha1, self.alpha1)
        return tuple(a[n] for n in ESTIMATES[self.estimate][0])

    def boxes(self, N):
        if self.kind == "convergent":
            for n, bs in self.convergent_boxes:
                if n == N:
                    return bs
            raise InvalidParams(f"no convergent with denominator {N}")
        return tuple(pb.at(N) for pb in self.poly_boxes)

    def grid(self):
        if self.kind != "convergent":
            raise InvalidParams("only convergent families carry their own grid")
        return [n for n, _ in self.convergent_boxes]

    def check_inclusion(self, N) -> bool:
        if self.kind == "linear":
            return True
        bs = self.boxes(N)
        return sum_box_index(*bs) is not None


def _q(x):
    return x if isinstance(x, (Fraction, Surd)) else Fraction(x)


def _rational_root(r):
    rep = h_roots(r)
    x = rep.x1
    if rep.case != "TwoRoots" or not isinstance(x, Fraction):
        raise ROutOfRange("rational-root families need sqrt(12r-3) rational and r > 1/4")
    if not (-1 < x < 0):
        raise ROutOfRange("rational-root families need the root x1 in (-1, 0)")
    return x.numerator, x.denominator


def _surd_convergents(r, nmax=1 << 30):
    rep = h_roots(r)
    x = rep.x1
    if rep.case != "TwoRoots" or isinstance(x, Fraction):
        raise ROutOfRange("convergent families need an irrational root")
    out = []
    depth = 8
    while True:
        cs = convergents(x, depth)
        if cs[-1].q > nmax or len(cs) < depth:
            break
        depth *= 2
    for c in cs:
        if c.q > nmax:
            break
        # the constructions assume m < 0 < m + n
        if c.q >= 2 and c.p < 0 < c.p + c.q:
            out.append((c.p, c.q))
    return out


# Case builders return (estimate, boxes as PolyBox triple, signs, zero_free).
# a1, a2 are the two dispersion coefficients; N is the polynomial variable.

def _b(k, c, w):
    return PolyBox(_P(k), _P(c), Fraction(w))


def _cases():
    N = N_
    C = {}

    def reg(cid, est, r_default, exponent, label, requires=None):
        def deco(fn):
            C[cid] = dict(estimate=est, r=r_default, exponent=exponent,
                          label=label, build=fn, requires=requires)
            return fn
        return deco

    # D2: triple (a1, a2, a1), weight |k3|
    @reg("div2-a", "D2", -1, lambda s, b, z: 3 * b - s - 2, "3b-s-2", "r<1/4")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(N, a2 * N**3, 1), _b(-2 * N, -(a1 + a2) * N**3, 2))

    @reg("div2-a2", "D2", -1, lambda s, b, z: 1 - s - 3 * b, "1-s-3b", "r<1/4")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(-2 * N, -2 * a1 * N**3, 2), _b(N, a1 * N**3, 1))

    @reg("div2-b", "D2", 1, lambda s, b, z: 3 * b - s - 2, "3b-s-2", "r=1")
    def _(a1, a2):
        return C["div2-a"]["build"](a1, a2)

    @reg("div2-b2", "D2", 1, lambda s, b, z: 1 - s - 3 * b, "1-s-3b", "r=1")
    def _(a1, a2):
        return C["div2-a2"]["build"](a1, a2)

    @reg("div2-c", "D2", 1, lambda s, b, z: 1, "1", "r=1")
    def _(a1, a2):
        return (_b(0, 0, 1), _b(N, a2 * N**3, 1), _b(-N, -a2 * N**3, 2))

    @reg("div2-d-low", "D2", Fraction(1, 3), lambda s, b, z: 2 * b - 1, "2b-1", "r>=1/4, r!=1")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(1, a2, 1), _b(-N - 1, -a1 * N**3 - a2, 2))

    @reg("div2-d-high", "D2", Fraction(1, 3), lambda s, b, z: 1 - 2 * b, "1-2b", "r>=1/4, r!=1")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(1, -a1 * N**3 + a1 * (N + 1)**3, 2),
                _b(-N - 1, -a1 * (N + 1)**3, 1))

    @reg("div2-e", "D2", 2, lambda s, b, z: 1, "1", "k2 = 0 allowed")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(0, 0, 1), _b(-N, -a1 * N**3, 2))

    # ND2: triple (a1, a2, a1), weight |k2|
    @reg("nondiv2-a", "ND2", -1, lambda s, b, z: 3 * b - 2 * s - 2, "3b-2s-2", "r<1/4")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(-N, -a2 * N**3, 1), _b(0, -(a1 - a2) * N**3, 2))

    @reg("nondiv2-a2", "ND2", -1, lambda s, b, z: 1 - 2 * s - 3 * b, "1-2s-3b", "r<1/4")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(-N, -a1 * N**3, 2), _b(0, 0, 1))

    @reg("nondiv2-b", "ND2", 1, lambda s, b, z: 1 - 2 * s, "1-2s", "r=1")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(-N, -a1 * N**3, 1), _b(0, 0, 2))

    @reg("nondiv2-c", "ND2", 1, lambda s, b, z: 1, "1", "r=1")
    def _(a1, a2):
        return (_b(0, 0, 1), _b(N, a2 * N**3, 1), _b(-N, -a2 * N**3, 2))

    @reg("nondiv2-d-low", "ND2", Fraction(1, 3), lambda s, b, z: 3 * b - 2, "3b-2", "r>=1/4, r!=1")
    def _(a1, a2):
        return (_b(0, 0, 1), _b(N, a2 * N**3, 1), _b(-N, -a2 * N**3, 2))

    @reg("nondiv2-d-high", "ND2", Fraction(1, 3), lambda s, b, z: 1 - 3 * b, "1-3b", "r>=1/4, r!=1")
    def _(a1, a2):
        return (_b(0, 0, 1), _b(N, a1 * N**3, 2), _b(-N, -a1 * N**3, 1))

    # D1: triple (a1, a1, a2), weight |k3|
    @reg("div1-a", "D1", -1, lambda s, b, z: 3 * b - s - 2, "3b-s-2", "r<1/4")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(N, a1 * N**3, 1), _b(-2 * N, -2 * a1 * N**3, 2))

    @reg("div1-a2", "D1", -1, lambda s, b, z: 1 - s - 3 * b, "1-s-3b", "r<1/4")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(-2 * N, -(a1 + a2) * N**3, 2), _b(N, a2 * N**3, 1))

    @reg("div1-b", "D1", 1, lambda s, b, z: 3 * b - s - 2, "3b-s-2", "r=1")
    def _(a1, a2):
        return C["div1-a"]["build"](a1, a2)

    @reg("div1-b2", "D1", 1, lambda s, b, z: 1 - s - 3 * b, "1-s-3b", "r=1")
    def _(a1, a2):
        return C["div1-a2"]["build"](a1, a2)

    @reg("div1-c", "D1", 1, lambda s, b, z: 1, "1", "r=1")
    def _(a1, a2):
        return (_b(0, 0, 1), _b(N, a1 * N**3, 1), _b(-N, -a1 * N**3, 2))

    # ND1: triple (a1, a2, a1), weight |k1|
    @reg("nondiv1-a", "ND1", -1, lambda s, b, z: 3 * b - 2 * s - 2, "3b-2s-2", "r<1/4")
    def _(a1, a2):
        return C["nondiv2-a"]["build"](a1, a2)

    @reg("nondiv1-a2", "ND1", -1, lambda s, b, z: 1 - 2 * s - 3 * b, "1-2s-3b", "r<1/4")
    def _(a1, a2):
        return C["nondiv2-a2"]["build"](a1, a2)

    @reg("nondiv1-b", "ND1", 1, lambda s, b, z: 1 - 2 * s, "1-2s", "r=1")
    def _(a1, a2):
        return C["nondiv2-b"]["build"](a1, a2)

    @reg("nondiv1-e", "ND1", 2, lambda s, b, z: 1, "1", "k2 = 0 allowed")
    def _(a1, a2):
        return (_b(N, a1 * N**3, 1), _b(0, 0, 1), _b(-N, -a1 * N**3, 2))

    # rational root x1 = p/q: H vanishes on the ray (pN, qN)
    for est, cid in (("D2", "div2-d-rational"), ("ND2", "nondiv2-d-rational"),
                     ("ND1", "nondiv1-d-rational"), ("D1", "div1-d-rational")):
        def mk(est=est):
            def build(a1, a2, p, q):
                if est == "D1":
                    # H1 = a1 k1^3 + a1 k2^3 + a2 k3^3 vanishes at k1 = pN, k3 = qN
                    return (_b(p * N, a1 * (p * N)**3, 1),
                            _b(-(p + q) * N, -a1 * (p * N)**3 - a2 * (q * N)**3, 2),
                            _b(q * N, a2 * (q * N)**3, 1))
                return (_b(p * N, a1 * (p * N)**3, 1), _b(q * N, a2 * (q * N)**3, 1),
                        _b(-(p + q) * N, -a1 * (p * N)**3 - a2 * (q * N)**3, 2))
            return build
        C[cid] = dict(estimate=est, r=Fraction(1, 3), exponent=lambda s, b, z: 1 - s,
                      label="1-s", build=mk(), requires="sqrt(12r-3) rational", rational=True)

    # convergent families: (m_j, n_j) from the continued fraction of x1
    for est, stem in (("D2", "div2"), ("ND2", "nondiv2"), ("ND1", "nondiv1"), ("D1", "div1")):
        for variant, expo, label in (("", lambda s, b, z: 1 - s - z * (1 - b), "1-s-zeta(1-b)"),
                                     ("2", lambda s, b, z: 1 - s - z * b, "1-s-zeta*b")):
            C[f"{stem}-d-convergent{variant}"] = dict(
                estimate=est, r=Fraction(1, 2), exponent=expo, label=label,
                build=None, requires="sqrt(12r-3) irrational", convergent=variant or "1")

    C["lin-fail-hi"] = dict(estimate="LIN", r=Fraction(1), exponent=lambda s, b, z: b,
                            label="b (= min{1,b} on [1/2,1])", build=None, requires="b>=1/2")
    C["lin-fail-lo"] = dict(estimate="LIN", r=Fraction(1), exponent=lambda s, b, z: 1 - b,
                            label="1-b", build=None, requires="b<1/2")
    return C


CASES = _cases()

ZERO_FREE = {"D2": (1,), "ND2": (1,), "D1": (), "ND1": (1,), "LIN": ()}
SIGNS = {"D1": (-1, -1, -1), "D2": (-1, -1, -1), "ND1": (1, 1, 1), "ND2": (1, 1, 1), "LIN": (1, 1)}


def case_ids():
    return sorted(CASES)


def _convergent_boxes(est, variant, a1, a2, pairs):
    out = []
    for m, n in pairs:
        m, n = Fraction(m), Fraction(n)
        if est == "D1":
            # k1 = m, k3 = n, k2 = -(m+n); H1 = a1 m^3 - a1 (m+n)^3 + a2 n^3
            B1 = Box(m, a1 * m**3, Fraction(1))
            if variant == "1":
                B2 = Box(-(m + n), -a1 * (m + n)**3, Fraction(1))
                B3 = Box(n, -a1 * m**3 + a1 * (m + n)**3, Fraction(2))
            else:
                B3 = Box(n, a2 * n**3, Fraction(1))
                B2 = Box(-(m + n), -a1 * m**3 - a2 * n**3, Fraction(2))
        else:
            B1 = Box(m, a1 * m**3, Fraction(1))
            if variant == "1":
                B2 = Box(n, a2 * n**3, Fraction(1))
                B3 = Box(-(m + n), -a1 * m**3 - a2 * n**3, Fraction(2))
            else:
                B3 = Box(-(m + n), -a1 * (m + n)**3, Fraction(1))
                B2 = Box(n, -a1 * m**3 + a1 * (m + n)**3, Fraction(2))
        out.append((int(n), (B1, B2, B3)))
    return out


def counterexample_family(case_id: str, r=None, alpha1=1, beta1=0, beta2=None,
                          nmax: int = 1 << 30) -> BoxFamily:
    if case_id not in CASES:
        raise UnknownCase(f"unknown case {case_id!r}; known: {', '.join(case_ids())}")
    meta = CASES[case_id]
    r = _q(meta["r"] if r is None else r)
    a1 = _q(alpha1)
    a2 = r * a1
    est = meta["estimate"]
    fam = BoxFamily(case_id, est, r, a1, "poly", SIGNS[est], ZERO_FREE[est])
    if case_id == "div2-e" or case_id == "nondiv1-e":
        fam.zero_free = ()
        fam.note = "k2 = 0 box: no zero-mean restriction on w2"
    if est == "LIN":
        b1 = _q(beta1)
        b2 = _q(1 if beta2 is None else beta2)
        if b1 == b2:
            raise InvalidParams("linear failure family needs beta1 != beta2")
        fam.kind = "linear"
        fam.betas = (b1, b2)
        beta_box = b1 if case_id == "lin-fail-hi" else b2
        fam.poly_boxes = (_b(N_, a1 * N_**3 - beta_box * N_, 1),)
        return fam
    if meta.get("convergent"):
        fam.kind = "convergent"
        fam.convergent_boxes = _convergent_boxes(est, meta["convergent"], a1, a2,
                                                 _surd_convergents(r, nmax))
        return fam
    if meta.get("rational"):
        p, q = _rational_root(r)
        fam.poly_boxes = meta["build"](a1, a2, Fraction(p), Fraction(q))
        return fam
    fam.poly_boxes = meta["build"](a1, a2)
    return fam


# -- ratio evaluation ------------------------------------------------------------

def _jbr(x):
    return 1 + abs(x)


def _L_range(P, w):
    """Exact range of <L> over |L - P| <= w."""
    P = abs(P)
    return 1 + max(Fraction(0), P - w), 1 + P + w


@dataclass
class RatioBracket:
    low: float
    high: float
    log_low: float
    log_high: float


def _weight_log(fun: WeightedFunctional, ks):
    kw = abs(ks[fun.weight_index])
    if kw == 0:
        return -math.inf
    s = fun.s
    return (math.log(kw) + s * math.log(_jbr(ks[2]))
            - s * math.log(_jbr(ks[0])) - s * math.log(_jbr(ks[1])))


def _functional_for(fam: BoxFamily, s, b):
    return WeightedFunctional(s, b, fam.estimate)


def functional_ratio(fam: BoxFamily, s, b, N, lam=1) -> RatioBracket:
    """Bracket of R(N) = functional / prod ||f_i|| evaluated exactly on the boxes."""
    s, b = float(s), float(b)
    if fam.kind == "linear":
        return _linear_ratio(fam, b, N)
    fun = _functional_for(fam, s, b)
    bs = fam.boxes(N)
    conv = box_convolution(*bs, lam=lam)
    if conv == 0:
        return RatioBracket(0.0, 0.0, -math.inf, -math.inf)
    ks = [x.k for x in bs]
    al = fam.alphas()
    lw = _weight_log(fun, ks)
    lo = hi = lw + math.log(conv)
    lam = Fraction(lam)
    for i, (box, a, e) in enumerate(zip(bs, al, fun.L_exponents)):
        P = box.tau_center - a * box.k**3
        rl, rh = _L_range(P, box.tau_halfwidth)
        if e >= 0:
            lo -= e * math.log(rh)
            hi -= e * math.log(rl)
        else:
            lo -= e * math.log(rl)
            hi -= e * math.log(rh)
        norm = 0.5 * math.log(2 * box.tau_halfwidth / lam)
        lo -= norm
        hi -= norm
    return RatioBracket(math.exp(lo) if lo < 700 else math.inf,
                        math.exp(hi) if hi < 700 else math.inf, lo, hi)


def _linear_ratio(fam: BoxFamily, b, N) -> RatioBracket:
    box = fam.poly_boxes[0].at(N)
    b1, b2 = fam.betas
    a = fam.alpha1
    logs = []
    for beta, e in ((b1, b), (b2, 1 - b)):
        P = box.tau_center - (a * box.k**3 - beta * box.k)
        logs.append((_L_range(P, box.tau_halfwidth), e))
    # mean of the multiplier over E is the functional over ||1_E||^2
    lo = hi = math.log(abs(box.k))
    for (rl, rh), e in logs:
        if e >= 0:
            lo -= e * math.log(rh)
            hi -= e * math.log(rl)
        else:
            lo -= e * math.log(rl)
            hi -= e * math.log(rh)
    return RatioBracket(math.exp(lo), math.exp(hi), lo, hi)


# -- leading-order bracket -----------------------------------------------------------

def _mono_log(p: Poly, plus_one: bool):
    """(log coefficient, degree) of |p| or 1 + |p| to leading order."""
    d, c = p.lead()
    if d >= 1:
        return math.log(abs(c)), d
    v = abs(c) + (1 if plus_one else 0)
    return (math.log(v) if v else -math.inf), 0


def asymptotic_bracket(fam: BoxFamily, s, b):
    """Leading-order (log c_low, log c_high, exponent) with R ~ c N^exponent."""
    if fam.kind not in ("poly", "linear"):
        raise InvalidParams("asymptotic bracket needs a polynomial family")
    s, b = float(s), float(b)
    if fam.kind == "linear":
        pb = fam.poly_boxes[0]
        lc, e = _mono_log(pb.k, False)
        lo = hi = lc
        expo = float(e)
        for beta, ex in zip(fam.betas, (b, 1 - b)):
            P = pb.center - (fam.alpha1 * pb.k**3 - beta * pb.k)
            lo, hi, expo = _apply_L(P, pb.hw, ex, lo, hi, expo)
        return lo, hi, expo
    fun = _functional_for(fam, s, b)
    pbs = fam.poly_boxes
    lc, e = _mono_log(pbs[fun.weight_index].k, False)
    if lc == -math.inf:
        return -math.inf, -math.inf, 0.0
    lo = hi = lc
    expo = float(e)
    for i, sgn in ((2, 1), (0, -1), (1, -1)):
        lc, e = _mono_log(pbs[i].k, True)
        lo += sgn * s * lc
        hi += sgn * s * lc
        expo += sgn * s * e
    al = fam.alphas()
    for pb, a, ex in zip(pbs, al, fun.L_exponents):
        lo, hi, expo = _apply_L(pb.center - a * pb.k ** 3, pb.hw, ex, lo, hi, expo)
    # box measures are N-independent
    bs = fam.boxes(2)
    conv = box_convolution(*bs)
    norm = sum(0.5 * math.log(2 * x.tau_halfwidth) for x in bs)
    add = math.log(conv) - norm
    return lo + add, hi + add, expo


def _apply_L(P: Poly, w, ex, lo, hi, expo):
    d, c = P.lead()
    if d >= 1:
        lc = math.log(abs(c))
        return lo - ex * lc, hi - ex * lc, expo - ex * d
    rl, rh = _L_range(c, Fraction(w))
    if ex >= 0:
        return lo - ex * math.log(rh), hi - ex * math.log(rl), expo
    return lo - ex * math.log(rl), hi - ex * math.log(rh), expo


# -- fitting --------------------------------------------------------------------

@dataclass
class ExponentFit:
    slope: float
    intercept: float
    residual: float
    slope_low: float
    slope_high: float


@dataclass
class FitReport:
    case: str
    s: float
    b: float
    predicted: float
    label: str
    fit: ExponentFit
    exact_slope: float | None = None
    rows: list = field(default_factory=list)

    @property
    def slope(self):
        return self.fit.slope

    @property
    def fails(self) -> bool:
        return self.fit.slope > max(self.fit.residual, 1e-9)

    def to_dict(self):
        return {
            "case": self.case,
            "s": self.s,
            "b": self.b,
            "predicted_exponent": self.predicted,
            "exponent_formula": self.label,
            "fitted_slope": self.fit.slope,
            "slope_low": self.fit.slope_low,
            "slope_high": self.fit.slope_high,
            "residual": self.fit.residual,
            "exact_bracket_slope": self.exact_slope,
            "fails": self.fails,
        }


def _linfit(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    A = np.vstack([x, np.ones_like(x)]).T
    (m, c), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.max(np.abs(A @ np.array([m, c]) - y))) if len(x) else 0.0
    return float(m), float(c), res


def _fit_pairs(xs, lows, highs):
    mid = [(a + b) / 2 for a, b in zip(lows, highs)]
    m, c, res = _linfit(xs, mid)
    ml, _, _ = _linfit(xs, lows)
    mh, _, _ = _linfit(xs, highs)
    return ExponentFit(m, c, res, ml, mh)


def default_grid(lo=4, hi=20):
    return [2 ** e for e in range(lo, hi + 1)]


def zeta_r(r, eps0=0.0):
    """max{eps0, 3 - sigma_r + eps0}; sigma_r = 2 for surd roots, 1 for rational."""
    rep = h_roots(r)
    sigma = 1 if isinstance(rep.x1, Fraction) else 2
    return max(eps0, 3 - sigma + eps0)


def predicted_exponent(case_id, s, b, r=None):
    meta = CASES[case_id]
    r = meta["r"] if r is None else r
    z = zeta_r(r) if meta.get("convergent") else 0.0
    return float(meta["exponent"](float(s), float(b), z))


def fit_exponent(case_id: str, s, b, N_grid=None, r=None, alpha1=1, beta1=0, beta2=None,
                 check_grid=None, min_convergents: int = 8) -> FitReport:
    fam = counterexample_family(case_id, r=r, alpha1=alpha1, beta1=beta1, beta2=beta2)
    s, b = float(s), float(b)
    pred = predicted_exponent(case_id, s, b, fam.r)
    label = CASES[case_id]["label"]
    if fam.kind == "convergent":
        grid = fam.grid()
        if len(grid) < min_convergents:
            raise InvalidParams(f"only {len(grid)} usable convergents")
        xs, lows, highs, rows = [], [], [], []
        for n in grid:
            br = functional_ratio(fam, s, b, n)
            xs.append(math.log(n))
            lows.append(br.log_low)
            highs.append(br.log_high)
            rows.append((n, br.low, br.high))
        return FitReport(case_id, s, b, pred, label, _fit_pairs(xs, lows, highs), None, rows)
    grid = list(N_grid or default_grid())
    if len(grid) < 5:
        raise InvalidParams("N grid needs at least 5 points")
    for N in grid:
        if not fam.check_inclusion(N):
            raise IncompatibleBoxes(f"{case_id}: inclusion fails at N={N}")
    clo, chi, expo = asymptotic_bracket(fam, s, b)
    if clo == -math.inf:
        raise InvalidParams(f"{case_id}: functional vanishes identically")
    xs = [math.log(N) for N in grid]
    lows = [clo + expo * x for x in xs]
    highs = [chi + expo * x for x in xs]
    fit = _fit_pairs(xs, lows, highs)
    rows = []
    for N in grid:
        br = functional_ratio(fam, s, b, N)
        rows.append((N, br.low, br.high))
    big = check_grid or [2 ** e for e in range(30, 51, 5)]
    ex_lows, ex_highs = [], []
    for N in big:
        br = functional_ratio(fam, s, b, N)
        ex_lows.append(br.log_low)
        ex_highs.append(br.log_high)
    exact = _fit_pairs([math.log(N) for N in big], ex_lows, ex_highs).slope
    return FitReport(case_id, s, b, pred, label, fit, exact, rows)


def resonant_H_exponents(r, depth: int = 10, alpha1=1):
    """Per-convergent exponent log<H2>/log n_j at convergents of x1 (vs zeta_r)."""
    from .resonance import h2_triple, resonance_H

    rep = h_roots(r)
    if rep.case != "TwoRoots" or r == 1:
        raise ROutOfRange("need r in [1/4, inf) minus {1}")
    x = rep.x1
    if isinstance(x, Fraction):
        raise ROutOfRange("rho_r is rational; H2 vanishes on the root ray")
    t = h2_triple(r, alpha1)
    out = []
    for j, c in enumerate(convergents(x, depth)):
        if c.q < 2:
            continue
        H = resonance_H(t, c.p, c.q)
        br = 1 + abs(H)
        out.append((j, c.q, br, math.log(br) / math.log(c.q)))
    return out, zeta_r(r)


# -- linear multiplier -------------------------------------------------------------

@dataclass
class LinearScan:
    sup: float
    argmax: Fraction
    bound_holds: bool
    worst_margin: Fraction
    small_k_max: float


def linear_multiplier_scan(alpha1, alpha2, beta1=0, beta2=0, K=1000, lam=1) -> LinearScan:
    """sup over tau of |k| / (<L1><L2>)^{1/2} for each k, maximised over the window.

    With L1 - L2 = (a2 - a1) k^3 - (b2 - b1) k =: D fixed, the product
    (1 + |x|)(1 + |x - D|) is minimised at x = 0, giving 1 + |D|.
    """
    a1, a2, b1, b2 = (Fraction(v) for v in (alpha1, alpha2, beta1, beta2))
    lam = Fraction(lam)
    if a1 == a2:
        raise InvalidParams("use the failure family when alpha1 = alpha2")
    best, arg = -1.0, None
    ok = True
    worst = None
    small = 0.0
    nmax = math.floor(Fraction(K) * lam)
    half = abs(a2 - a1) / 2
    for n in range(-nmax, nmax + 1):
        if n == 0:
            continue
        k = Fraction(n) / lam
        D = (a2 - a1) * k**3 - (b2 - b1) * k
        prod = 1 + abs(D)
        m = abs(float(k)) / math.sqrt(float(prod))
        if m > best:
            best, arg = m, k
        if abs(k) <= 1:
            small = max(small, m)
        else:
            margin = prod - half * abs(k) ** 3
            if worst is None or margin < worst:
                worst = margin
            if margin < 0:
                ok = False
    return LinearScan(best, arg, ok, worst if worst is not None else Fraction(0), small)


def csv_rows(rows) -> str:
    lines = ["N,R_low,R_high"]
    lines += [f"{n},{lo!r},{hi!r}" for n, lo, hi in rows]
    return "\n".join(lines) + "\n"
