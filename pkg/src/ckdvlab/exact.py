"""Exact numbers: rationals (``fractions.Fraction``) and quadratic surds.

A ``Surd`` is a + b*sqrt(d) with rational a, b (b != 0) and squarefree d > 1.
Arithmetic closes inside one field Q(sqrt(d)); mixing fields raises
``MixedFieldError``.  ``SqrtSurd`` is the square root of a positive irrational
surd; it only supports bracketing, which is all the continued fraction code
needs.

Order relations are decided exactly.  Numerical brackets are rational
intervals of prescribed width, computed with integer square roots.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import MixedFieldError, ParseError

INF = math.inf

# Trial division bound for squarefree extraction.  Any cofactor left after
# removing primes below the bound is squarefree unless it is a perfect square
# or exceeds bound**3 (see ``squarefree_split``).
TRIAL_BOUND = 1 << 16


def squarefree_split(n: int, bound: int = TRIAL_BOUND):
    """Write n > 0 as f*f*d and return (f, d).

    d is guaranteed squarefree when the cofactor left by trial division is
    below bound**3 or is itself a perfect square.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    f, d = 1, 1
    m = n
    p = 2
    while p <= bound and p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            f *= p ** (e // 2)
            if e % 2:
                d *= p
        p += 1 if p == 2 else 2
    if m > 1:
        s = math.isqrt(m)
        if s * s == m:
            f *= s
        else:
            d *= m
    return f, d


def is_square_fraction(q: Fraction):
    if q < 0:
        return None
    n, m = q.numerator, q.denominator
    a, b = math.isqrt(n), math.isqrt(m)
    if a * a == n and b * b == m:
        return Fraction(a, b)
    return None


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


class Surd:
    """a + b*sqrt(d), immutable.  Build with ``make_surd``."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a: Fraction, b: Fraction, d: int):
        self.a, self.b, self.d = a, b, d

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Surd):
            if other.d != self.d:
                raise MixedFieldError(f"sqrt({self.d}) and sqrt({other.d}) do not mix")
            return other.a, other.b
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return make_surd(self.a + c[0], self.b + c[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return make_surd(self.a - c[0], self.b - c[1], self.d)

    def __rsub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return make_surd(c[0] - self.a, c[1] - self.b, self.d)

    def __mul__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        x, y = c
        return make_surd(self.a * x + self.b * y * self.d, self.a * y + self.b * x, self.d)

    __rmul__ = __mul__

    def conj(self):
        return Surd(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def inverse(self):
        n = self.norm()
        return make_surd(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        if isinstance(other, Surd):
            return self * other.inverse()
        if other == 0:
            raise ZeroDivisionError("surd division by zero")
        o = Fraction(other)
        return make_surd(self.a / o, self.b / o, self.d)

    def __rtruediv__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return self.inverse() * Fraction(other)

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        out, base = Fraction(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- order --------------------------------------------------------------
    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0 or sa == sb:
            return sb if sb else sa
        # opposite signs: compare a^2 with b^2 d (never equal, d squarefree)
        if self.a * self.a > self.b * self.b * self.d:
            return sa
        return sb

    def _cmp(self, other) -> int:
        diff = self - other
        return diff.sign() if isinstance(diff, Surd) else (diff > 0) - (diff < 0)

    def __eq__(self, other):
        if isinstance(other, Surd):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        if isinstance(other, (int, Fraction)):
            return False
        return NotImplemented

    def __hash__(self):
        return hash(("surd", self.a, self.b, self.d))

    def __lt__(self, other):
        if self._coerce(other) is None:
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        if self._coerce(other) is None:
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        if self._coerce(other) is None:
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        if self._coerce(other) is None:
            return NotImplemented
        return self._cmp(other) >= 0

    def __bool__(self):
        return True

    def __float__(self):
        lo, hi = bracket(self, 80)
        return float((lo + hi) / 2)

    def __repr__(self):
        return f"Surd({self})"

    def __str__(self):
        return fmt(self)


def make_surd(a, b, d: int):
    """Normalise a + b*sqrt(d); returns a Fraction when the surd part vanishes."""
    a, b = _frac(a), _frac(b)
    if b == 0 or d == 0:
        return a
    if d < 0:
        raise ValueError("complex surds are not supported")
    f, d2 = squarefree_split(d)
    b = b * f
    if d2 == 1:
        return a + b
    return Surd(a, b, d2)


def sqrt_exact(q):
    """Square root of a non-negative rational (Fraction or Surd result)."""
    q = _frac(q)
    if q < 0:
        raise ValueError("negative radicand")
    r = is_square_fraction(q)
    if r is not None:
        return r
    n, m = q.numerator, q.denominator
    # sqrt(n/m) = sqrt(n*m)/m
    return make_surd(0, Fraction(1, m), n * m)


class SqrtSurd:
    """sqrt(y) for a positive irrational surd y; algebraic of degree 2 or 4."""

    __slots__ = ("y",)

    def __init__(self, y: Surd):
        if not isinstance(y, Surd) or y.sign() <= 0:
            raise ValueError("SqrtSurd needs a positive irrational surd")
        self.y = y

    def sign(self):
        return 1

    def __float__(self):
        return math.sqrt(float(self.y))

    def __str__(self):
        return f"sqrt({fmt(self.y)})"

    __repr__ = __str__

    def __eq__(self, other):
        return isinstance(other, SqrtSurd) and other.y == self.y

    def __hash__(self):
        return hash(("sqrtsurd", self.y))


def sqrt_any(x):
    """sqrt of a rational or surd, staying exact."""
    if isinstance(x, Surd):
        return SqrtSurd(x)
    return sqrt_exact(x)


# -- generic helpers -------------------------------------------------------

def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, Surd))


def sign(x) -> int:
    if isinstance(x, (Surd, SqrtSurd)):
        return x.sign()
    return (x > 0) - (x < 0)


def is_zero(x) -> bool:
    return not isinstance(x, (Surd, SqrtSurd)) and x == 0


def to_float(x) -> float:
    return float(x)


def _sqrt_bracket(q: Fraction, bits: int):
    """Rational interval of width <= 2**-bits containing sqrt(q), q >= 0."""
    scale = 1 << (2 * bits)
    lo_int = (q.numerator * scale) // q.denominator
    s = math.isqrt(lo_int)
    return Fraction(s, 1 << bits), Fraction(s + 1, 1 << bits)


def bracket(x, bits: int = 256):
    """Return (lo, hi) rationals with lo <= x <= hi and hi - lo <= 2**-bits."""
    if isinstance(x, (int, Fraction)):
        q = Fraction(x)
        return q, q
    if isinstance(x, Surd):
        extra = max(0, abs(x.b).numerator.bit_length() - abs(x.b).denominator.bit_length() + 2)
        lo, hi = _sqrt_bracket(Fraction(x.d), bits + extra)
        if x.b > 0:
            return x.a + x.b * lo, x.a + x.b * hi
        return x.a + x.b * hi, x.a + x.b * lo
    if isinstance(x, SqrtSurd):
        # sqrt is 1/(2 sqrt(y))-Lipschitz; y >= ylo > 0 keeps the error bounded
        extra = 8
        while True:
            ylo, yhi = bracket(x.y, bits + extra)
            if ylo > 0:
                break
            extra += 16
        lo, _ = _sqrt_bracket(ylo, bits + extra)
        _, hi = _sqrt_bracket(yhi, bits + extra)
        while hi - lo > Fraction(1, 1 << bits):
            extra += 16
            ylo, yhi = bracket(x.y, bits + extra)
            lo, _ = _sqrt_bracket(ylo, bits + extra)
            _, hi = _sqrt_bracket(yhi, bits + extra)
        return lo, hi
    if hasattr(x, "bracket"):
        return x.bracket(bits)
    raise TypeError(f"cannot bracket {x!r}")


def floor_exact(x) -> int:
    if isinstance(x, (int, Fraction)):
        return math.floor(x)
    bits = 64
    while True:
        lo, hi = bracket(x, bits)
        if math.floor(lo) == math.floor(hi):
            return math.floor(lo)
        bits *= 2


def fmt_fraction(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fmt(x) -> str:
    """Canonical text: "p/q", "a+b*sqrt(d)", "inf"."""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    if isinstance(x, (int, Fraction)):
        return fmt_fraction(x)
    if isinstance(x, Surd):
        if x.b == 1:
            rad = f"sqrt({x.d})"
        elif x.b == -1:
            rad = f"-sqrt({x.d})"
        else:
            rad = f"{fmt_fraction(x.b)}*sqrt({x.d})"
        if x.a == 0:
            return rad
        if rad.startswith("-"):
            return f"{fmt_fraction(x.a)}{rad}"
        return f"{fmt_fraction(x.a)}+{rad}"
    return str(x)


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|(sqrt|inf)|(.))")


class _Parser:
    def __init__(self, text: str):
        self.toks = []
        for m in _TOKEN.finditer(text):
            num, word, op = m.groups()
            if num is not None:
                self.toks.append(("num", num))
            elif word is not None:
                self.toks.append(("word", word))
            elif op is not None and not op.isspace():
                self.toks.append(("op", op))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, val=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (val and tok[1] != val):
            raise ParseError(f"unexpected token {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self):
        v = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            w = self.unary()
            if op == "*":
                v = v * w
            else:
                if is_zero(w):
                    raise ParseError("division by zero")
                v = v / w
        return v

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.atom()

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return Fraction(val)
        if kind == "word" and val == "inf":
            self.take()
            return INF
        if kind == "word" and val == "sqrt":
            self.take()
            self.take("op", "(")
            inner = self.expr()
            self.take("op", ")")
            if isinstance(inner, float) or sign(inner) < 0:
                raise ParseError("sqrt of a negative or infinite value")
            return sqrt_any(inner)
        if (kind, val) == ("op", "("):
            self.take()
            v = self.expr()
            self.take("op", ")")
            return v
        raise ParseError(f"unexpected token {val!r}")


def parse_number(text):
    """Parse "p/q", decimals, "a+b*sqrt(d)" style expressions, or "inf"."""
    if isinstance(text, (int, Fraction, Surd)):
        return text
    if isinstance(text, float):
        return text if math.isinf(text) else Fraction(repr(text))
    p = _Parser(str(text))
    if not p.toks:
        raise ParseError("empty number")
    try:
        v = p.expr()
    except MixedFieldError as exc:
        raise ParseError(str(exc)) from exc
    except (TypeError, ZeroDivisionError) as exc:
        raise ParseError(f"cannot parse {text!r}: {exc}") from exc
    if p.i != len(p.toks):
        raise ParseError(f"trailing input in {text!r}")
    return v


def parse_rational(text) -> Fraction:
    v = parse_number(text)
    if not isinstance(v, (int, Fraction)):
        raise ParseError(f"expected a rational, got {text!r}")
    return Fraction(v)
