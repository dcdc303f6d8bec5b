"""Critical well-posedness index of a coupled KdV-KdV system.

``s_r`` evaluates the threshold attached to a dispersion ratio r >= 1/4::

    s_r = 1               if sigma_r = 1 or sigma_r >= 3
    s_r = (sigma_r - 1)/2 if 2 <= sigma_r < 3

with sigma_r the irrationality exponent of rho_r = sqrt(12 r - 3).

``classify`` walks the clause lists for the four space types and returns
the smallest threshold among the satisfied clauses.  ``classify_application``
is a separate hand transcription of the published tables for the named
systems; the two are cross-checked in the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .dioph import CFStream, IrrationalityExponent, mu
from .errors import InvalidParams, ROutOfRange, UnknownPreset
from .exact import INF, SqrtSurd, Surd, fmt, is_square_fraction, is_zero, sqrt_exact
from .system import (ReducedSystem, SpaceType, first_order_law, gg_regime, preset,
                     reduced_preset, space_applicability)

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)
CLOSED, OPEN = "Closed", "Open"


# -- s_r ------------------------------------------------------------------

@dataclass(frozen=True)
class SRecord:
    r: object
    rho: object
    sigma: IrrationalityExponent
    s: object
    exact: bool = True

    def to_dict(self):
        rho = self.rho.serialize() if isinstance(self.rho, CFStream) else fmt(self.rho)
        sig = self.sigma.value
        return {
            "r": fmt(self.r) if self.r is not None else None,
            "rho": rho,
            "sigma": sig if isinstance(sig, int) else fmt(sig),
            "s_r": fmt(self.s),
            "exact": self.exact,
        }


def s_r(r) -> SRecord:
    if isinstance(r, int):
        r = Fraction(r)
    if r < QUARTER:
        raise ROutOfRange(f"s_r needs r >= 1/4, got {fmt(r)}")
    rho2 = 12 * r - 3
    if isinstance(rho2, Surd):
        rho = SqrtSurd(rho2)
        return SRecord(r, rho, IrrationalityExponent(2, True), HALF)
    root = is_square_fraction(rho2)
    if root is not None:
        return SRecord(r, root, IrrationalityExponent(1, True), Fraction(1))
    return SRecord(r, sqrt_exact(rho2), IrrationalityExponent(2, True), HALF)


def s_value(r):
    return s_r(r).s


def s_r_stream(rho, **kw) -> SRecord:
    """s_r from an estimated exponent of rho (a stream modelling irrational r)."""
    sig = mu(rho, **kw)
    v = sig.value
    if v == 1 or v >= 3:
        s = 1.0 if not sig.exact else Fraction(1)
    else:
        s = (float(v) - 1) / 2 if not sig.exact else Fraction(v - 1, 2)
    return SRecord(None, rho, sig, s, sig.exact)


# -- thresholds and clauses ------------------------------------------------

@dataclass(frozen=True)
class Threshold:
    value: object
    kind: str = CLOSED

    def key(self):
        return (self.value, 0 if self.kind == CLOSED else 1)

    def __lt__(self, other):
        return self.key() < other.key()

    def __le__(self, other):
        return self.key() <= other.key()

    def render(self):
        if self.value == INF:
            return "inf"
        return f"s>={fmt(self.value)}" if self.kind == CLOSED else f"s>{fmt(self.value)}"


INFINITE = Threshold(INF, CLOSED)


@dataclass(frozen=True)
class Clause:
    space: int
    label: str
    condition: str
    threshold: Threshold


@dataclass
class Classification:
    space: SpaceType
    applicable: bool
    reason: str
    clauses: list = field(default_factory=list)
    s_star: object = INF
    kind: str = CLOSED
    gwp: Threshold | None = None
    b_tilde: object = None

    @property
    def threshold(self):
        return Threshold(self.s_star, self.kind)

    def to_dict(self):
        return {
            "space": self.space.k,
            "means": [fmt(self.space.m1), fmt(self.space.m2)],
            "applicable": self.applicable,
            "reason": self.reason,
            "s_star": fmt(self.s_star),
            "kind": self.kind,
            "clauses": [
                {"label": c.label, "condition": c.condition, "threshold": c.threshold.render()}
                for c in self.clauses
            ],
            "gwp": None if self.gwp is None else self.gwp.render(),
        }


def _finish(cl: Classification) -> Classification:
    if cl.clauses:
        best = min(c.threshold for c in cl.clauses)
        cl.s_star, cl.kind = best.value, best.kind
    else:
        cl.s_star, cl.kind = INF, CLOSED
    return cl


PRECONDITIONS = {
    1: (),
    2: ("c22", "d11", "d12"),
    3: ("c11", "d21", "d22"),
    4: ("c11", "c22", "d11", "d22"),
}


def _coeffs(sys: ReducedSystem):
    C, D = sys.C, sys.D
    return {
        "c11": C[0, 0], "c12": C[0, 1], "c21": C[1, 0], "c22": C[1, 1],
        "d11": D[0, 0], "d12": D[0, 1], "d21": D[1, 0], "d22": D[1, 1],
    }


class _Clauses:
    def __init__(self, k):
        self.k = k
        self.items = []

    def add(self, label, cond, value, kind=CLOSED):
        self.items.append(Clause(self.k, label, cond, Threshold(value, kind)))


def _z(*xs):
    return all(is_zero(x) for x in xs)


def _regimes(theta):
    return {
        "neg": theta < 0,
        "one": theta == 1,
        "pos": theta > 0 and theta != 1,
        "low": 0 < theta < QUARTER,
        "mid": QUARTER <= theta <= 4 and theta != 1,
        "high": theta > 4,
    }


def _clauses_k1(c, bt, th, out):
    R = _regimes(th)
    d1, d2 = c["d11"], c["d21"]
    g12 = _z(c["c12"], d2)   # cross terms feeding u from v vanish
    g21 = _z(c["c21"], d1)
    eq = bt[0, 0] == bt[1, 1]
    if R["neg"]:
        out.add("k1.a", "theta<0", -HALF)
    if R["one"] and _z(bt[0, 1], bt[1, 0]):
        out.add("k1.b", "theta=1, b~12=b~21=0", -HALF)
    if R["pos"]:
        out.add("k1.c", "theta>0, theta!=1", Fraction(1))
    if R["low"]:
        if g12:
            out.add("k1.d.1", "0<theta<1/4, c12=d2=0", -HALF)
        elif eq:
            out.add("k1.d.2", "0<theta<1/4, c12^2+d2^2>0, b~11=b~22", s_value(1 / th), OPEN)
    if R["mid"] and eq:
        if g12 and not g21:
            out.add("k1.e.1", "1/4<=theta<=4, c12=d2=0, c21^2+d1^2>0", s_value(th), OPEN)
        elif not g12 and g21:
            out.add("k1.e.2", "1/4<=theta<=4, c12^2+d2^2>0, c21=d1=0", s_value(1 / th), OPEN)
        elif not g12 and not g21:
            out.add("k1.e.3", "1/4<=theta<=4, both couplings present",
                    max(s_value(th), s_value(1 / th)), OPEN)
    if R["high"]:
        if g21:
            out.add("k1.f.1", "theta>4, c21=d1=0", -HALF)
        elif eq:
            out.add("k1.f.2", "theta>4, c21^2+d1^2>0, b~11=b~22", s_value(th), OPEN)


def _clauses_k2(c, bt, th, out):
    R = _regimes(th)
    eq = bt[0, 0] == bt[1, 1]
    z = _z(c["c12"], c["d21"], c["d22"])
    same = c["d21"] == c["d22"]
    if R["neg"]:
        if same:
            out.add("k2.a.1", "theta<0, d21=d22", -HALF)
        else:
            out.add("k2.a.2", "theta<0, d21!=d22", -QUARTER)
    if R["one"] and _z(bt[0, 1], bt[1, 0], c["c12"], c["d21"]):
        if is_zero(c["d22"]):
            out.add("k2.b.1", "theta=1, b~12=b~21=0, c12=d21=d22=0", -HALF)
        else:
            out.add("k2.b.2", "theta=1, b~12=b~21=0, c12=d21=0, d22!=0", HALF)
    if R["pos"]:
        out.add("k2.c", "theta>0, theta!=1", Fraction(1))
    if R["low"]:
        if z:
            out.add("k2.d.1", "0<theta<1/4, c12=d21=d22=0", -HALF)
        elif eq:
            out.add("k2.d.2", "0<theta<1/4, c12^2+d21^2+d22^2>0, b~11=b~22",
                    s_value(1 / th), OPEN)
    if R["mid"] and eq:
        c21 = is_zero(c["c21"])
        if z and not c21:
            out.add("k2.e.1", "1/4<=theta<=4, c12=d21=d22=0, c21!=0", s_value(th), OPEN)
        elif not z and c21:
            out.add("k2.e.2", "1/4<=theta<=4, c12^2+d21^2+d22^2>0, c21=0", s_value(1 / th), OPEN)
        elif not z and not c21:
            out.add("k2.e.3", "1/4<=theta<=4, c12^2+d21^2+d22^2>0, c21!=0",
                    max(s_value(th), s_value(1 / th)), OPEN)
    if R["high"]:
        if is_zero(c["c21"]):
            if same:
                out.add("k2.f.1", "theta>4, c21=0, d21=d22", -HALF)
            else:
                out.add("k2.f.2", "theta>4, c21=0, d21!=d22", -QUARTER)
        elif eq:
            out.add("k2.f.3", "theta>4, c21!=0, b~11=b~22", s_value(th), OPEN)


def _clauses_k3(c, bt, th, out):
    R = _regimes(th)
    eq = bt[0, 0] == bt[1, 1]
    same = c["d11"] == c["d12"]
    z = _z(c["c21"], c["d11"], c["d12"])
    c12 = is_zero(c["c12"])
    if R["neg"]:
        if same:
            out.add("k3.a.1", "theta<0, d11=d12", -HALF)
        else:
            out.add("k3.a.2", "theta<0, d11!=d12", -QUARTER)
    if R["one"] and _z(bt[0, 1], bt[1, 0], c["c21"], c["d12"]):
        if is_zero(c["d11"]):
            out.add("k3.b.1", "theta=1, b~12=b~21=0, c21=d12=d11=0", -HALF)
        else:
            out.add("k3.b.2", "theta=1, b~12=b~21=0, c21=d12=0, d11!=0", HALF)
    if R["pos"]:
        out.add("k3.c", "theta>0, theta!=1", Fraction(1))
    if R["low"]:
        if c12 and same:
            out.add("k3.d.1", "0<theta<1/4, c12=0, d11=d12", -HALF)
        elif c12:
            out.add("k3.d.2", "0<theta<1/4, c12=0, d11!=d12", -QUARTER)
        elif eq:
            out.add("k3.d.3", "0<theta<1/4, c12!=0, b~11=b~22", s_value(1 / th), OPEN)
    if R["mid"] and eq:
        if c12 and not z:
            out.add("k3.e.1", "1/4<=theta<=4, c12=0, c21^2+d11^2+d12^2>0", s_value(th), OPEN)
        elif not c12 and z:
            out.add("k3.e.2", "1/4<=theta<=4, c12!=0, c21=d11=d12=0", s_value(1 / th), OPEN)
        elif not c12 and not z:
            out.add("k3.e.3", "1/4<=theta<=4, c12!=0, c21^2+d11^2+d12^2>0",
                    max(s_value(th), s_value(1 / th)), OPEN)
    if R["high"]:
        if z:
            out.add("k3.f.1", "theta>4, c21=d11=d12=0", -HALF)
        elif eq:
            out.add("k3.f.2", "theta>4, c21^2+d11^2+d12^2>0, b~11=b~22", s_value(th), OPEN)


def _clauses_k4(c, B, th, out):
    R = _regimes(th)
    eq = B[0, 0] == B[1, 1]
    g12 = _z(c["c12"], c["d21"])
    g21 = _z(c["c21"], c["d12"])
    if R["neg"]:
        if _z(c["d12"], c["d21"]):
            out.add("k4.a.1", "theta<0, d12=d21=0", -HALF)
        else:
            out.add("k4.a.2", "theta<0, d12^2+d21^2>0", -QUARTER)
    if R["pos"]:
        out.add("k4.b", "theta>0, theta!=1", Fraction(1))
    if R["low"]:
        if g12 and is_zero(c["d12"]):
            out.add("k4.c.1", "0<theta<1/4, c12=d12=d21=0", -HALF)
        elif g12:
            out.add("k4.c.2", "0<theta<1/4, c12=d21=0, d12!=0", -QUARTER)
        elif eq:
            out.add("k4.c.3", "0<theta<1/4, c12^2+d21^2>0, b11=b22", s_value(1 / th), OPEN)
    if R["mid"] and eq:
        if g12 and not g21:
            out.add("k4.d.1", "1/4<=theta<=4, c12=d21=0, c21^2+d12^2>0", s_value(th), OPEN)
        elif not g12 and g21:
            out.add("k4.d.2", "1/4<=theta<=4, c12^2+d21^2>0, c21=d12=0", s_value(1 / th), OPEN)
        elif not g12 and not g21:
            out.add("k4.d.3", "1/4<=theta<=4, both couplings present",
                    max(s_value(th), s_value(1 / th)), OPEN)
    if R["high"]:
        if g21 and is_zero(c["d21"]):
            out.add("k4.e.1", "theta>4, c21=d12=d21=0", -HALF)
        elif g21:
            out.add("k4.e.2", "theta>4, c21=d12=0, d21!=0", -QUARTER)
        elif eq:
            out.add("k4.e.3", "theta>4, c21^2+d12^2>0, b11=b22", s_value(th), OPEN)


_WALKERS = {1: _clauses_k1, 2: _clauses_k2, 3: _clauses_k3, 4: _clauses_k4}


def classify(sys: ReducedSystem, sp: SpaceType) -> Classification:
    ok, why = space_applicability(sys, sp.k)
    if not ok:
        return Classification(sp, False, why)
    c = _coeffs(sys)
    missing = [n for n in PRECONDITIONS[sp.k] if not is_zero(c[n])]
    if missing:
        nonzero_mean = not (is_zero(sp.m1) and is_zero(sp.m2))
        detail = ", ".join(f"{n}!=0" for n in missing)
        if nonzero_mean:
            return Classification(sp, False, f"inapplicable (preconditions: {detail})")
        return Classification(sp, True, f"bilinear estimate fails (preconditions: {detail})")
    bt = first_order_law(sys, sp)
    out = _Clauses(sp.k)
    _WALKERS[sp.k](c, bt, sys.theta, out)
    cl = Classification(sp, True, why, out.items, b_tilde=bt)
    cl = _finish(cl)
    if not cl.clauses:
        cl.reason = "no clause satisfied"
    return cl


# -- critical index sets -----------------------------------------------------

@dataclass(frozen=True)
class IndexSet:
    points: tuple
    interval: tuple = (HALF, Fraction(1))

    def __contains__(self, x):
        if x in self.points:
            return True
        if isinstance(x, float) and math.isinf(x):
            return INF in self.points
        lo, hi = self.interval
        return lo <= x <= hi

    def render(self):
        pts = ", ".join(fmt(p) for p in self.points)
        return f"{{{pts}}} U [{fmt(self.interval[0])}, {fmt(self.interval[1])}]"


def critical_index_set(k: int) -> IndexSet:
    if k == 1:
        return IndexSet((-HALF, INF))
    if k in (2, 3, 4):
        return IndexSet((-HALF, -QUARTER, INF))
    raise InvalidParams("k must be 1..4")


# -- application tables -------------------------------------------------------

def _table(space, cases, gwps):
    sp = SpaceType(space)
    clauses = [Clause(space, lab, cond, th) for lab, cond, th in cases]
    cl = Classification(sp, True, "published case table", clauses)
    _finish(cl)
    if not clauses:
        cl.reason = "no published case applies"
    cl.gwp = min(gwps) if gwps else None
    return cl


def _q(v):
    return Fraction(v) if not isinstance(v, (Fraction, Surd)) else v


def classify_application(name: str, **params):
    """Published LWP/GWP tables for the named systems (homogeneous spaces)."""
    key = name.lower().replace("_", "-")
    one, zero = Fraction(1), Fraction(0)
    if key in ("majda-biello", "mb", "m-b"):
        a2 = _q(params.get("a2", 1))
        if a2 == 0:
            raise InvalidParams("a2 must be nonzero")
        if a2 < 0 or a2 > 4:
            return [_table(2, [("mb.1", "a2<0 or a2>4", Threshold(-HALF))], [Threshold(zero)])]
        if a2 == 1:
            return [_table(1, [("mb.2", "a2=1", Threshold(-HALF))], [Threshold(zero)])]
        return [_table(2, [("mb.3", "a2 in (0,4]\\{1}", min(Threshold(one), Threshold(s_value(1 / a2), OPEN)))],
                       [Threshold(one)])]
    if key in ("hirota-satsuma", "hs", "h-s"):
        a1 = _q(params.get("a1", 1))
        c12 = _q(params.get("c12", 0))
        if a1 == 0:
            raise InvalidParams("a1 must be nonzero")
        cases, gwps = [], []
        if a1 < QUARTER:
            cases.append(("hs.1", "a1<1/4, a1!=0", Threshold(-QUARTER)))
            if c12 > 0:
                gwps.append(Threshold(zero))
        elif a1 == 1:
            if c12 == 0:
                cases.append(("hs.2", "a1=1, c12=0", Threshold(HALF)))
        else:
            cases.append(("hs.3", "a1>=1/4, a1!=1",
                          min(Threshold(one), Threshold(s_value(a1), OPEN))))
            if c12 > 0 and a1 < 1:
                gwps.append(Threshold(one))
        return [_table(2, cases, gwps)]
    if key in ("gear-grimshaw", "gg", "g-g"):
        r1 = _q(params.get("rho1", 1))
        r2 = _q(params.get("rho2", 1))
        s1, s2 = _q(params.get("sigma1", 0)), _q(params.get("sigma2", 0))
        s3, s4 = _q(params.get("sigma3", 0)), _q(params.get("sigma4", 0))
        if r1 <= 0 or r2 <= 0:
            raise InvalidParams("rho1 and rho2 must be positive")
        cases, gwps = [], []
        if s3 == 0:
            if r1 == 1:
                cases.append(("gg0.1", "rho1=1", Threshold(-HALF)))
                gwps.append(Threshold(zero))
            else:
                cases.append(("gg0.2", "rho1!=1", Threshold(one)))
                gwps.append(Threshold(one))
            if r1 < QUARTER:
                if s2 == 0:
                    cases.append(("gg0.3.1", "rho1<1/4, sigma2=0", Threshold(-HALF)))
                    gwps.append(Threshold(zero))
                elif s4 == 0:
                    cases.append(("gg0.3.2", "rho1<1/4, sigma2!=0, sigma4=0",
                                  Threshold(s_value(1 / r1), OPEN)))
            if QUARTER <= r1 <= 4 and r1 != 1 and s4 == 0:
                if s1 == 0 and s2 != 0:
                    cases.append(("gg0.4.1", "sigma1=0, sigma2!=0", Threshold(s_value(1 / r1), OPEN)))
                elif s1 != 0 and s2 == 0:
                    cases.append(("gg0.4.2", "sigma1!=0, sigma2=0", Threshold(s_value(r1), OPEN)))
                elif s1 != 0 and s2 != 0:
                    cases.append(("gg0.4.3", "sigma1, sigma2 != 0",
                                  Threshold(max(s_value(r1), s_value(1 / r1)), OPEN)))
            if r1 > 4:
                if s1 == 0:
                    cases.append(("gg0.5.1", "rho1>4, sigma1=0", Threshold(-HALF)))
                    gwps.append(Threshold(zero))
                elif s4 == 0:
                    cases.append(("gg0.5.2", "rho1>4, sigma1!=0, sigma4=0",
                                  Threshold(s_value(r1), OPEN)))
            return [_table(1, cases, gwps)]
        lam1, lam2, theta, regime = gg_regime(r1, r2, s3)
        if regime == "neg":
            cases.append(("gg1.1", "rho2*sigma3^2>1", Threshold(-HALF)))
            gwps.append(Threshold(zero))
        else:
            cases.append(("gg1.2", "rho2*sigma3^2<1", Threshold(one)))
            gwps.append(Threshold(one))
            if s4 == 0 and regime == "lowpos":
                cases.append(("gg1.3", "0<theta<1/4, sigma4=0", Threshold(s_value(1 / theta), OPEN)))
            if s4 == 0 and regime == "midpos":
                cases.append(("gg1.4", "1/4<=theta<1, sigma4=0",
                              Threshold(max(s_value(theta), s_value(1 / theta)), OPEN)))
        return [_table(1, cases, gwps)]
    raise UnknownPreset(f"no application table for {name!r}")


def application_system(name: str, **params) -> ReducedSystem:
    """Reduced system matching ``classify_application`` inputs."""
    return reduced_preset(name, **params)
