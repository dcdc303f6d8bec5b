"""Continued fractions, convergents and irrationality exponents.

Real numbers come in four exact flavours:

* ``Fraction``   rational, mu = 1
* ``Surd``       a + b*sqrt(d), mu = 2, eventually periodic expansion
* ``SqrtSurd``   sqrt of an irrational surd, algebraic, mu = 2
* ``CFStream``   a replayable stream of partial quotients (Jarnik or
  Liouville rules, or an explicit periodic pattern)

Inequalities on irrational values are decided with rational brackets that are
refined until the answer is certain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import gmpy2

from .errors import ExhaustedDepth, ParseError, SigmaOutOfRange
from .exact import INF, SqrtSurd, Surd, bracket, fmt, make_surd, parse_number

DEFAULT_BITS = 256
MAX_BITS = 1 << 16


@dataclass(frozen=True)
class Convergent:
    n: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class IrrationalityExponent:
    value: object  # int, Fraction, float or inf
    exact: bool
    depth: int | None = None
    residual: float | None = None

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        return {
            "value": fmt(self.value),
            "exactness": "Exact" if self.exact else "Estimated",
            "depth": self.depth,
            "residual": self.residual,
        }


@dataclass
class CFResult:
    terms: list
    period_start: int | None = None
    period: list | None = None
    terminated: bool = False


# -- streams -------------------------------------------------------------

class CFStream:
    """Partial quotients a_0, a_1, ... produced by a deterministic rule.

    ``rule(prev_terms, p_list, q_list)`` returns the next quotient.  All
    generated data is cached, so replay is free and repeatable.
    """

    def __init__(self, name: str, rule: Callable, bit_budget: int = 1 << 24):
        self.name = name
        self._rule = rule
        self.bit_budget = bit_budget
        self.terms: list[int] = []
        self.p = []
        self.q = []

    def _extend(self):
        a = self._rule(self.terms, self.p, self.q)
        if a < 1 and self.terms:
            raise ValueError("partial quotients must be >= 1")
        if self.q and self.q[-1].bit_length() + a.bit_length() > self.bit_budget:
            raise ExhaustedDepth(f"{self.name}: bit budget {self.bit_budget} reached")
        self.terms.append(a)
        if len(self.terms) == 1:
            self.p.append(a)
            self.q.append(1)
        elif len(self.terms) == 2:
            self.p.append(a * self.p[0] + 1)
            self.q.append(a)
        else:
            self.p.append(a * self.p[-1] + self.p[-2])
            self.q.append(a * self.q[-1] + self.q[-2])

    def term(self, n: int) -> int:
        while len(self.terms) <= n:
            self._extend()
        return self.terms[n]

    def convergent(self, n: int) -> Convergent:
        self.term(n)
        return Convergent(n, self.p[n], self.q[n])

    def bracket(self, bits: int):
        """Consecutive convergents enclose the value."""
        n = 1
        while True:
            c0, c1 = self.convergent(n - 1), self.convergent(n)
            if c0.q * c1.q >= (1 << bits):
                a, b = c0.value, c1.value
                return (a, b) if a <= b else (b, a)
            n += 1

    def __float__(self):
        lo, hi = self.bracket(64)
        return float((lo + hi) / 2)

    def serialize(self, prefix: int = 8) -> dict:
        n = min(prefix, 8)
        try:
            pre = [self.term(i) for i in range(n)]
        except ExhaustedDepth:
            pre = list(self.terms)
        return {"prefix": pre, "rule": self.name}

    def __str__(self):
        return self.name

    __repr__ = __str__


def _iroot(n: int, k: int) -> int:
    return int(gmpy2.iroot(gmpy2.mpz(n), k)[0])


def jarnik_construct(sigma, bit_budget: int = 1 << 24) -> CFStream:
    """Stream with a_{n+1} = max(1, floor(q_n^(sigma-2))), so mu = sigma.

    sigma = inf gives the Liouville-type rule a_{n+1} = q_n^n.
    """
    if isinstance(sigma, str):
        sigma = parse_number(sigma)
    if isinstance(sigma, float) and math.isinf(sigma):
        def rule(terms, p, q):
            if not terms:
                return 0
            n = len(terms) - 1
            return max(1, q[n] ** n)
        return CFStream("liouville", rule, bit_budget)
    sigma = Fraction(sigma) if not isinstance(sigma, float) else Fraction(repr(sigma))
    if sigma < 2:
        raise SigmaOutOfRange(f"sigma must be >= 2, got {fmt(sigma)}")
    e = sigma - 2
    u, v = e.numerator, e.denominator

    def rule(terms, p, q):
        if not terms:
            return 0
        qn = q[len(terms) - 1]
        if u == 0:
            return 1
        return max(1, _iroot(qn ** u, v))

    return CFStream(f"jarnik sigma={fmt(sigma)}", rule, bit_budget)


def periodic_stream(prefix, period) -> CFStream:
    prefix, period = list(prefix), list(period)
    if not period:
        raise ValueError("empty period")

    def rule(terms, p, q):
        n = len(terms)
        if n < len(prefix):
            return prefix[n]
        return period[(n - len(prefix)) % len(period)]

    body = " ".join(str(a) for a in period)
    return CFStream(f"periodic {prefix} [{body}]", rule)


def parse_real(text):
    """Parse a real: number expressions, "jarnik:p/q", "liouville"."""
    text = str(text).strip()
    low = text.lower()
    if low.startswith("jarnik"):
        _, _, s = low.replace("=", ":").partition(":")
        s = s.replace("sigma", "").strip(" :=")
        return jarnik_construct(parse_number(s))
    if low == "liouville":
        return jarnik_construct(INF)
    x = parse_number(text)
    if isinstance(x, float):
        raise ParseError("infinite real")
    return x


# -- continued fractions ---------------------------------------------------

def _surd_pqd(x: Surd):
    """Write x = (P + sqrt(D)) / Q with Q | (D - P^2)."""
    a, b, d = x.a, x.b, x.d
    den = a.denominator * b.denominator
    P = a.numerator * b.denominator
    R = b.numerator * a.denominator  # x = (P + R sqrt(d)) / den
    Q = den
    if R < 0:
        P, R, Q = -P, -R, -Q
    D = R * R * d
    if (D - P * P) % Q:
        P, Q, D = P * abs(Q), Q * abs(Q), D * Q * Q
    return P, Q, D


def _surd_cf(x: Surd, n: int) -> CFResult:
    P, Q, D = _surd_pqd(x)
    s = math.isqrt(D)
    seen = {}
    terms = []
    while True:
        key = (P, Q)
        if key in seen:
            start = seen[key]
            period = terms[start:]
            full = list(terms)
            while len(full) <= n:
                full.append(period[(len(full) - start) % len(period)])
            return CFResult(full[: n + 1], start, period)
        seen[key] = len(terms)
        if Q > 0:
            a = (P + s) // Q
        else:
            a = -((P + s) // (-Q)) - 1
        terms.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q


def _bracket_cf(x, n: int) -> list:
    bits = DEFAULT_BITS
    while True:
        lo, hi = bracket(x, bits)
        out = []
        while len(out) <= n:
            a, b = math.floor(lo), math.floor(hi)
            if a != b:
                break
            out.append(a)
            lo, hi = lo - a, hi - a
            if lo == 0 or hi == 0:
                break
            lo, hi = 1 / hi, 1 / lo
        if len(out) > n:
            return out[: n + 1]
        bits *= 2
        if bits > MAX_BITS * 16:
            raise ExhaustedDepth("precision budget exceeded in continued fraction")


def continued_fraction(x, n: int) -> CFResult:
    """Partial quotients a_0..a_n (fewer for a rational that terminates)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, Fraction):
        terms = []
        p, q = x.numerator, x.denominator
        while q and len(terms) <= n:
            a, r = divmod(p, q)
            terms.append(a)
            p, q = q, r
        return CFResult(terms, terminated=(q == 0))
    if isinstance(x, Surd):
        return _surd_cf(x, n)
    if isinstance(x, CFStream):
        return CFResult([x.term(i) for i in range(n + 1)])
    return CFResult(_bracket_cf(x, n))


def convergents(x, n: int) -> list[Convergent]:
    if isinstance(x, CFStream):
        return [x.convergent(i) for i in range(n + 1)]
    terms = continued_fraction(x, n).terms
    out = []
    p0, q0, p1, q1 = 1, 0, terms[0], 1
    out.append(Convergent(0, p1, q1))
    for i, a in enumerate(terms[1:], start=1):
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append(Convergent(i, p1, q1))
    return out


# -- exact inequality helpers ----------------------------------------------

def _as_fraction_exponent(mu) -> Fraction:
    if isinstance(mu, float):
        return Fraction(repr(mu))
    return Fraction(mu)


def compare_err_power(x, m: int, n: int, mu) -> int:
    """Sign of |x - m/n| * n**mu - 1, decided exactly (mu rational)."""
    return compare_err_power_scaled(x, m, n, _as_fraction_exponent(mu), Fraction(1))


# -- irrationality exponent ------------------------------------------------

def mu(x, depth: int | None = None, bits: int = 4096) -> IrrationalityExponent:
    """Irrationality exponent: exact for algebraic inputs, estimated for streams.

    For streams the estimate is 1 + max ln q_{n+1} / ln q_n over the last
    quarter of the computed convergents; the spread over that tail is the
    reported residual.  Without ``depth`` the stream is extended until
    q_n has ``bits`` bits.
    """
    if isinstance(x, (int, Fraction)):
        return IrrationalityExponent(1, True)
    if isinstance(x, (Surd, SqrtSurd)):
        return IrrationalityExponent(2, True)
    if not isinstance(x, CFStream):
        raise TypeError(f"unsupported real {x!r}")
    if x.name == "liouville":
        return IrrationalityExponent(INF, True)
    if depth is None:
        n = 1
        try:
            while x.convergent(n).q.bit_length() < bits and n < 200000:
                n += 1
        except ExhaustedDepth:
            n -= 1
        depth = n
    else:
        x.convergent(depth)
    logs = [math.log(x.convergent(i).q) for i in range(depth + 1)]
    ratios = [(i, logs[i + 1] / logs[i]) for i in range(depth) if logs[i] > 0]
    if not ratios:
        raise ExhaustedDepth("stream too short for an exponent estimate")
    tail_start = max(ratios[0][0], (3 * depth) // 4)
    tail = [r for i, r in ratios if i >= tail_start] or [ratios[-1][1]]
    est = 1 + max(tail)
    return IrrationalityExponent(est, False, depth, max(tail) - min(tail))


def minimal_type_index(x, **kw):
    """nu = inf for rationals, mu - 2 otherwise."""
    m = mu(x, **kw)
    if m.value == 1:
        return INF
    if isinstance(m.value, float) and math.isinf(m.value):
        return INF
    return m.value - 2


# -- approximation sequences -----------------------------------------------

def approx_sequence(x, mu_target, J: int, max_depth: int = 4000, mediants: bool = False):
    """J pairs (m, n), n increasing and n >= 2, with 0 < |x - m/n| < n^-mu_target.

    Candidates are convergents; with ``mediants`` the intermediate fractions
    between consecutive convergents are tried as well.
    """
    mu_t = _as_fraction_exponent(mu_target)
    out = []
    prev = None
    for i in range(max_depth + 1):
        try:
            if isinstance(x, CFStream):
                c = x.convergent(i)
            else:
                cs = _cached_convergents(x, i)
                if cs is None:
                    break
                c = cs
        except ExhaustedDepth:
            break
        cands = []
        if mediants and prev is not None:
            (p0, q0), (p1, q1) = prev
            a = (c.q - q0) // q1 if q1 else 0
            for t in range(1, a):
                cands.append((p0 + t * p1, q0 + t * q1))
        cands.append((c.p, c.q))
        for m, n in cands:
            if n < 2 or (isinstance(x, Fraction) and x == Fraction(m, n)):
                continue
            if compare_err_power(x, m, n, mu_t) < 0:
                if not out or n > out[-1][1]:
                    out.append((m, n))
                if len(out) == J:
                    return out
        if isinstance(x, Fraction) and Fraction(c.p, c.q) == x:
            break
        prev = ((prev[1] if prev else (1, 0)), (c.p, c.q))
    raise ExhaustedDepth(f"found {len(out)} of {J} approximants")


_CONV_CACHE: dict = {}


def _cached_convergents(x, i):
    key = (type(x).__name__, str(x))
    lst = _CONV_CACHE.get(key)
    if lst is None or len(lst) <= i:
        want = max(i, 2 * len(lst) if lst else 32)
        lst = convergents(x, want)
        if len(_CONV_CACHE) > 256:
            _CONV_CACHE.clear()
        _CONV_CACHE[key] = lst
    return lst[i] if i < len(lst) else None


@dataclass
class TypeBoundResult:
    holds: bool
    witness: tuple | None
    min_ratio: float
    exponent: Fraction = field(default=Fraction(2))


def verify_type_bound(x, eps, K, n_max: int, mu_value=None) -> TypeBoundResult:
    """Check |x - m/n| >= K / n^(mu+eps) for 1 <= n <= n_max.

    Only the nearest integer m to n*x is tested.  The witness, when the bound
    fails, is the violating pair minimising |x - m/n| * n^(mu+eps).  For
    mu = inf no finite exponent is admissible; the bound is then tested with
    exponent 3 + eps, which any Liouville-type number violates eventually.
    """
    eps = _as_fraction_exponent(eps)
    K = _as_fraction_exponent(K)
    if mu_value is None:
        mu_value = mu(x).value
    if isinstance(mu_value, float) and math.isinf(mu_value):
        E = 3 + eps
    elif isinstance(mu_value, float):
        E = Fraction(repr(mu_value)) + eps
    else:
        E = Fraction(mu_value) + eps
    Ef = float(E)
    # fixed point copy of x, precise enough for every n <= n_max
    P = int((float(E) + 2) * max(1, n_max).bit_length()) + 96
    lo, hi = bracket(x, P)
    X = math.floor(lo * (1 << P))
    best = None
    best_ratio = math.inf
    Kf = float(K)
    for n in range(1, n_max + 1):
        nx = n * X
        m = (nx + (1 << (P - 1))) >> P
        err = abs(nx - (m << P)) / (1 << P) / n
        ratio = err * n ** Ef
        if ratio < best_ratio:
            best_ratio = ratio
        if ratio < Kf * (1 + 1e-9):
            # exact confirmation: |x - m/n| n^E < K  <=>  |x - m/n| n^E / K < 1
            sgn = compare_err_power_scaled(x, m, n, E, K)
            if sgn < 0 and (best is None or ratio < best[1]):
                best = ((m, n), ratio)
    if best is None:
        return TypeBoundResult(True, None, best_ratio, E)
    return TypeBoundResult(False, best[0], best_ratio, E)


def compare_err_power_scaled(x, m, n, E, K) -> int:
    """Sign of |x - m/n| * n^E - K (exact)."""
    # |x n - m|^v n^(u-v) compared with K^v
    u, v = E.numerator, E.denominator
    target = K ** v
    diff = x * n - m if isinstance(x, (int, Fraction, Surd)) else None
    if isinstance(diff, (int, Fraction)):
        e = abs(Fraction(diff)) ** v * Fraction(n) ** (u - v)
        return (e > target) - (e < target)
    if isinstance(diff, Surd):
        e = abs(diff) ** v * Fraction(n) ** (u - v) - target
        return e.sign() if isinstance(e, Surd) else (e > 0) - (e < 0)
    bits = DEFAULT_BITS
    while bits <= MAX_BITS * 16:
        lo, hi = bracket(x, bits)
        dlo, dhi = lo * n - m, hi * n - m
        if dlo <= 0 <= dhi:
            bits *= 2
            continue
        alo, ahi = sorted((abs(dlo), abs(dhi)))
        scale = Fraction(n) ** (u - v)
        if ahi ** v * scale < target:
            return -1
        if alo ** v * scale > target:
            return 1
        bits *= 2
    raise ExhaustedDepth("could not decide the type bound")


__all__ = [
    "CFStream", "Convergent", "IrrationalityExponent", "CFResult", "approx_sequence",
    "continued_fraction", "convergents", "jarnik_construct", "minimal_type_index",
    "mu", "parse_real", "periodic_stream", "verify_type_bound", "make_surd",
]
