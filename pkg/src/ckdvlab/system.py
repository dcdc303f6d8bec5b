"""Coefficient algebra for coupled KdV-KdV systems.

General form::

    U_t + A1 U_xxx + A2 U_x = A3 (u u_x, v v_x) + A4 (u_x v, u v_x)

Coefficient (reduced) form, after diagonalising A1 = M diag(a1, a2) M^-1::

    u_t + a1 u_xxx + b11 u_x = -b12 v_x + c11 u u_x + c12 v v_x + d11 u_x v + d12 u v_x
    v_t + a2 v_xxx + b22 v_x = -b21 u_x + c21 u u_x + c22 v v_x + d21 u_x v + d22 u v_x

All entries are exact (Fraction or Surd).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (DegenerateA1, InapplicableSpace, InvalidParams, NotDiagonalizable,
                     ParseError, UnknownPreset, ZeroEigenvalue)
from .exact import fmt, is_zero, parse_number, sign, sqrt_exact

ZERO = Fraction(0)
ONE = Fraction(1)


class Matrix2:
    """Immutable 2x2 matrix with exact entries."""

    __slots__ = ("e",)

    def __init__(self, rows):
        (a, b), (c, d) = rows
        self.e = tuple(_num(x) for x in (a, b, c, d))

    @classmethod
    def zero(cls):
        return cls([[0, 0], [0, 0]])

    @classmethod
    def identity(cls):
        return cls([[1, 0], [0, 1]])

    @classmethod
    def diag(cls, x, y):
        return cls([[x, 0], [0, y]])

    def __getitem__(self, ij):
        i, j = ij
        return self.e[2 * i + j]

    @property
    def rows(self):
        a, b, c, d = self.e
        return [[a, b], [c, d]]

    def __add__(self, o):
        return Matrix2([[self[0, 0] + o[0, 0], self[0, 1] + o[0, 1]],
                        [self[1, 0] + o[1, 0], self[1, 1] + o[1, 1]]])

    def __sub__(self, o):
        return self + o * -1

    def __mul__(self, s):
        return Matrix2([[x * s for x in row] for row in self.rows])

    __rmul__ = __mul__

    def __matmul__(self, o):
        if isinstance(o, Matrix2):
            return Matrix2([[self[i, 0] * o[0, j] + self[i, 1] * o[1, j] for j in range(2)]
                            for i in range(2)])
        # 2 x n list of columns
        return [[self[i, 0] * o[0][j] + self[i, 1] * o[1][j] for j in range(len(o[0]))]
                for i in range(2)]

    def det(self):
        return self[0, 0] * self[1, 1] - self[0, 1] * self[1, 0]

    def trace(self):
        return self[0, 0] + self[1, 1]

    def inv(self):
        d = self.det()
        if is_zero(d):
            raise InvalidParams("singular matrix")
        return Matrix2([[self[1, 1] / d, -self[0, 1] / d], [-self[1, 0] / d, self[0, 0] / d]])

    def is_diagonal(self):
        return is_zero(self[0, 1]) and is_zero(self[1, 0])

    def __eq__(self, o):
        return isinstance(o, Matrix2) and self.e == o.e

    def __hash__(self):
        return hash(self.e)

    def to_lists(self):
        return [[fmt(x) for x in row] for row in self.rows]

    def __repr__(self):
        return f"Matrix2({self.to_lists()})"


def _num(x):
    if isinstance(x, (int, float, str)):
        return parse_number(x) if not isinstance(x, int) else Fraction(x)
    return x


@dataclass(frozen=True)
class GeneralSystem:
    A1: Matrix2
    A2: Matrix2
    A3: Matrix2
    A4: Matrix2


@dataclass(frozen=True)
class ReducedSystem:
    a1: object
    a2: object
    B: Matrix2
    C: Matrix2
    D: Matrix2
    M: Matrix2 = field(default_factory=Matrix2.identity, compare=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if is_zero(self.a1) or is_zero(self.a2):
            raise InvalidParams("dispersion coefficients must be nonzero")

    @property
    def theta(self):
        return self.a2 / self.a1


@dataclass(frozen=True)
class SpaceType:
    k: int
    m1: Fraction = ZERO
    m2: Fraction = ZERO

    def __post_init__(self):
        if self.k not in (1, 2, 3, 4):
            raise InvalidParams(f"space type must be 1..4, got {self.k}")
        # drop means the space does not fix
        m1 = self.m1 if self.k in (1, 2) else ZERO
        m2 = self.m2 if self.k in (1, 3) else ZERO
        object.__setattr__(self, "m1", _num(m1))
        object.__setattr__(self, "m2", _num(m2))

    @property
    def shifts(self):
        """(m1', m2') entering the first-order coefficient law."""
        return self.m1, self.m2

    def label(self):
        return f"H{self.k}"


@dataclass(frozen=True)
class ScaledSystem:
    lam: Fraction
    space: SpaceType
    a1: object
    a2: object
    B_lambda: Matrix2
    C: Matrix2
    D: Matrix2
    # u^lam(x, t) = lam^amp [u(lam^-1 x, lam^-3 t) - m1]
    amplitude_exp: int = -2
    x_exp: int = -1
    t_exp: int = -3
    # ||u0^lam|| ~ lam^exp for the two regularity ranges
    norm_decay: dict = field(default_factory=lambda: {"s>=-1/2": Fraction(-1), "s>=0": Fraction(-3, 2)})

    def as_reduced(self) -> ReducedSystem:
        return ReducedSystem(self.a1, self.a2, self.B_lambda, self.C, self.D)


class DivergenceForm(str, enum.Enum):
    FULL = "Full"
    U_ONLY = "UOnly"
    V_ONLY = "VOnly"
    NONE = "None"


# -- reduction ------------------------------------------------------------

def _eigvec(A: Matrix2, lam):
    p, q, r, s = A.e
    if not is_zero(q):
        return ONE, (lam - p) / q
    x, y = lam - s, r
    if not is_zero(x):
        return ONE, y / x
    return ZERO, ONE


def reduce(g: GeneralSystem) -> ReducedSystem:
    """Diagonalise A1 and rewrite the system in coefficient form."""
    A1 = g.A1
    if A1.is_diagonal():
        a1, a2 = A1[0, 0], A1[1, 1]
        M = Matrix2.identity()
    else:
        tr, det = A1.trace(), A1.det()
        disc = tr * tr - 4 * det
        if sign(disc) <= 0:
            raise NotDiagonalizable("A1 has repeated or complex eigenvalues")
        root = sqrt_exact(disc) if isinstance(disc, Fraction) else None
        if root is None:
            raise NotDiagonalizable("eigenvalues require a nested radical")
        a1, a2 = (tr + root) / 2, (tr - root) / 2
        v1, v2 = _eigvec(A1, a1), _eigvec(A1, a2)
        M = Matrix2([[v1[0], v2[0]], [v1[1], v2[1]]])
    if is_zero(a1) or is_zero(a2):
        raise ZeroEigenvalue("A1 has a zero eigenvalue")
    Mi = M.inv()
    B = Mi @ g.A2 @ M
    (m11, m12), (m21, m22) = M.rows
    # columns: p p_x, q q_x, p_x q, p q_x
    T3 = [[m11 * m11, m12 * m12, m11 * m12, m11 * m12],
          [m21 * m21, m22 * m22, m21 * m22, m21 * m22]]
    T4 = [[m11 * m21, m12 * m22, m11 * m22, m12 * m21],
          [m11 * m21, m12 * m22, m12 * m21, m11 * m22]]
    P3 = g.A3 @ T3
    P4 = g.A4 @ T4
    S = [[P3[i][j] + P4[i][j] for j in range(4)] for i in range(2)]
    CD = Mi @ S
    C = Matrix2([[CD[0][0], CD[0][1]], [CD[1][0], CD[1][1]]])
    D = Matrix2([[CD[0][2], CD[0][3]], [CD[1][2], CD[1][3]]])
    return ReducedSystem(a1, a2, B, C, D, M)


def general_rhs(g: GeneralSystem, U, Ux, Uxxx):
    """U_t for the general form at one point, given (u, v) jets."""
    u, v = U
    ux, vx = Ux
    lin = g.A1 @ [[Uxxx[0]], [Uxxx[1]]]
    lin2 = g.A2 @ [[ux], [vx]]
    n3 = g.A3 @ [[u * ux], [v * vx]]
    n4 = g.A4 @ [[ux * v], [u * vx]]
    return tuple(-lin[i][0] - lin2[i][0] + n3[i][0] + n4[i][0] for i in range(2))


def coef_rhs(sys: ReducedSystem, W, Wx, Wxxx):
    """W_t for the coefficient form at one point."""
    p, q = W
    px, qx = Wx
    a = (sys.a1, sys.a2)
    B, C, D = sys.B, sys.C, sys.D
    out = []
    for i in range(2):
        val = -a[i] * Wxxx[i] - B[i, 0] * px - B[i, 1] * qx
        val += C[i, 0] * p * px + C[i, 1] * q * qx + D[i, 0] * px * q + D[i, 1] * p * qx
        out.append(val)
    return tuple(out)


# -- structure --------------------------------------------------------------

def divergence_form(sys: ReducedSystem) -> DivergenceForm:
    D = sys.D
    u_ok = D[0, 0] == D[0, 1]
    v_ok = D[1, 0] == D[1, 1]
    if u_ok and v_ok:
        return DivergenceForm.FULL
    if u_ok:
        return DivergenceForm.U_ONLY
    if v_ok:
        return DivergenceForm.V_ONLY
    return DivergenceForm.NONE


def space_applicability(sys: ReducedSystem, k: int):
    """(applicable, reason) for space type k."""
    form = divergence_form(sys)
    u_ok = form in (DivergenceForm.FULL, DivergenceForm.U_ONLY)
    v_ok = form in (DivergenceForm.FULL, DivergenceForm.V_ONLY)
    if k == 1:
        if u_ok and v_ok:
            return True, "both means preserved"
        missing = [n for n, ok in (("u", u_ok), ("v", v_ok)) if not ok]
        return False, " and ".join(f"mean of {n} not preserved" for n in missing)
    if k == 2:
        return (True, "mean of u preserved") if u_ok else (False, "mean of u not preserved")
    if k == 3:
        return (True, "mean of v preserved") if v_ok else (False, "mean of v not preserved")
    return True, "no mean fixed"


def applicable_spaces(sys: ReducedSystem, m1=ZERO, m2=ZERO):
    out = []
    for k in (1, 2, 3, 4):
        ok, why = space_applicability(sys, k)
        out.append((SpaceType(k, m1, m2), ok, why))
    return out


def first_order_law(sys: ReducedSystem, sp: SpaceType, lam=ONE) -> Matrix2:
    """lam^-2 [B - C diag(m1', m2') - D diag(m2', m1')]."""
    m1, m2 = sp.shifts
    lam = _num(lam)
    inner = sys.B - sys.C @ Matrix2.diag(m1, m2) - sys.D @ Matrix2.diag(m2, m1)
    return inner * (ONE / (lam * lam))


def scale(sys: ReducedSystem, sp: SpaceType, lam) -> ScaledSystem:
    lam = _num(lam)
    if lam < 1:
        raise InvalidParams("lambda must be >= 1")
    ok, why = space_applicability(sys, sp.k)
    if not ok:
        raise InapplicableSpace(f"space H{sp.k}: {why}")
    return ScaledSystem(lam, sp, sys.a1, sys.a2, first_order_law(sys, sp, lam), sys.C, sys.D)


# -- presets ------------------------------------------------------------------

PRESETS = ("majda-biello", "hirota-satsuma", "gear-grimshaw", "abcd-coupled")


def _p(params, key, default=None):
    v = params.get(key, default)
    if v is None:
        raise InvalidParams(f"missing parameter {key}")
    return _num(v)


def preset(name: str, **params):
    """Named systems.  M-B and H-S come back reduced; G-G and abcd general."""
    name = name.lower().replace("_", "-")
    if name in ("majda-biello", "mb", "m-b"):
        a2 = _p(params, "a2", 1)
        if is_zero(a2):
            raise InvalidParams("a2 must be nonzero")
        return ReducedSystem(ONE, a2, Matrix2.zero(), Matrix2([[0, -1], [0, 0]]),
                             Matrix2([[0, 0], [-1, -1]]), name="majda-biello")
    if name in ("hirota-satsuma", "hs", "h-s"):
        a1 = _p(params, "a1", 1)
        c12 = _p(params, "c12", 0)
        if is_zero(a1):
            raise InvalidParams("a1 must be nonzero")
        return ReducedSystem(a1, ONE, Matrix2.zero(), Matrix2([[-6 * a1, c12], [0, 0]]),
                             Matrix2([[0, 0], [0, -3]]), name="hirota-satsuma")
    if name in ("gear-grimshaw", "gg", "g-g"):
        r1, r2 = _p(params, "rho1", 1), _p(params, "rho2", 1)
        s1, s2 = _p(params, "sigma1", 0), _p(params, "sigma2", 0)
        s3, s4 = _p(params, "sigma3", 0), _p(params, "sigma4", 0)
        if r1 <= 0 or r2 <= 0:
            raise InvalidParams("rho1 and rho2 must be positive")
        return GeneralSystem(
            Matrix2([[1, s3], [r2 * s3 / r1, 1 / r1]]),
            Matrix2([[0, 0], [0, s4 / r1]]),
            Matrix2([[-1, s1], [r2 * s2 / r1, -1 / r1]]),
            Matrix2([[s2, s2], [r2 * s1 / r1, r2 * s1 / r1]]),
        )
    if name in ("abcd-coupled", "abcd"):
        sixth = Fraction(1, 6)
        return GeneralSystem(
            Matrix2([[0, sixth], [sixth, 0]]),
            Matrix2([[0, 1], [1, 0]]),
            Matrix2([[0, 0], [0, -1]]),
            Matrix2([[-1, -1], [0, 0]]),
        )
    raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")


def reduced_preset(name: str, **params) -> ReducedSystem:
    s = preset(name, **params)
    if isinstance(s, GeneralSystem):
        r = reduce(s)
        return ReducedSystem(r.a1, r.a2, r.B, r.C, r.D, r.M, name=name)
    return s


def gg_regime(rho1, rho2, sigma3):
    """Eigenvalues of the G-G dispersion matrix and the sign regime of theta."""
    rho1, rho2, sigma3 = _num(rho1), _num(rho2), _num(sigma3)
    if rho1 <= 0 or rho2 <= 0:
        raise DegenerateA1("rho1, rho2 must be positive")
    if is_zero(sigma3):
        raise DegenerateA1("sigma3 = 0: A1 is already diagonal")
    g = rho2 * sigma3 * sigma3
    if g == 1:
        raise DegenerateA1("rho2*sigma3^2 = 1 gives a zero eigenvalue")
    root = sqrt_exact((rho1 - 1) ** 2 + 4 * rho1 * g)
    lam1 = (rho1 + 1) / (2 * rho1) + root / (2 * rho1)
    lam2 = (rho1 + 1) / (2 * rho1) - root / (2 * rho1)
    theta = lam2 / lam1
    if g > 1:
        regime = "neg"
    elif rho1 * rho1 + (25 * g - 17) / 4 * rho1 + 1 > 0:
        regime = "lowpos"
    else:
        regime = "midpos"
    return lam1, lam2, theta, regime


# -- text format ----------------------------------------------------------------

def format_system(sys: ReducedSystem) -> str:
    lines = ["[dispersion]", f"a1 = {fmt(sys.a1)}", f"a2 = {fmt(sys.a2)}"]
    for tag, m in (("B", sys.B), ("C", sys.C), ("D", sys.D)):
        lines.append(f"[{tag}]")
        for row in m.to_lists():
            lines.append(" ".join(row))
    return "\n".join(lines) + "\n"


def parse_system(text: str) -> ReducedSystem:
    """Read the [dispersion]/[B]/[C]/[D] key-value format ('#' comments)."""
    section = None
    disp = {}
    mats = {"B": [], "C": [], "D": []}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("dispersion", "B", "C", "D"):
                raise ParseError(f"line {lineno}: unknown section [{section}]")
            continue
        if section is None:
            raise ParseError(f"line {lineno}: content outside a section")
        if section == "dispersion":
            key, eq, val = line.partition("=")
            key = key.strip()
            if not eq or key not in ("a1", "a2"):
                raise ParseError(f"line {lineno}: expected a1 = ... or a2 = ...")
            disp[key] = parse_number(val.strip())
        else:
            row = [parse_number(tok) for tok in line.split()]
            if len(row) != 2:
                raise ParseError(f"line {lineno}: matrix rows need 2 entries")
            mats[section].append(row)
    for key in ("a1", "a2"):
        if key not in disp:
            raise ParseError(f"missing {key} in [dispersion]")
    for tag in ("C", "D"):
        if len(mats[tag]) != 2:
            raise ParseError(f"section [{tag}] needs 2 rows")
    if not mats["B"]:
        mats["B"] = [[0, 0], [0, 0]]
    elif len(mats["B"]) != 2:
        raise ParseError("section [B] needs 2 rows")
    try:
        return ReducedSystem(disp["a1"], disp["a2"], Matrix2(mats["B"]), Matrix2(mats["C"]),
                             Matrix2(mats["D"]))
    except InvalidParams as exc:
        raise ParseError(str(exc)) from exc
