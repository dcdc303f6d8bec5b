"""Pseudospectral solver for the coefficient-form system on the torus of
length 2*pi*lam.

In Fourier variables W = (u_hat, v_hat) obeys

    W_t = i k [k^2 diag(a1, a2) - B] W + NL(W)

The linear part is propagated exactly (2x2 matrix exponential per mode) and
RK4 runs on the interaction-picture nonlinearity (integrating factor /
Lawson form).  Products are formed on the grid with the 2/3 rule.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (InapplicableSpace, InvalidParams, InvalidRoots, NonFinite,
                     ParseError, PresetMismatch)
from .exact import to_float
from .resonance import h_roots
from .system import (Matrix2, ReducedSystem, SpaceType, reduced_preset, scale,
                     space_applicability)


@dataclass(frozen=True)
class Grid:
    lam: float = 1.0
    N: int = 256

    def __post_init__(self):
        if self.N < 8 or self.N % 2:
            raise InvalidParams("N must be even and >= 8")
        if self.lam < 1:
            raise InvalidParams("lambda must be >= 1")

    @property
    def length(self):
        return 2 * math.pi * self.lam

    @property
    def x(self):
        return self.length * np.arange(self.N) / self.N

    @property
    def n(self):
        return np.arange(self.N // 2 + 1)

    @property
    def k(self):
        return self.n / self.lam

    @property
    def keep(self):
        return 3 * self.n < self.N


@dataclass
class State:
    u_hat: np.ndarray
    v_hat: np.ndarray
    t: float = 0.0

    def copy(self):
        return State(self.u_hat.copy(), self.v_hat.copy(), self.t)


def to_state(grid: Grid, u, v, t=0.0, dealias=True) -> State:
    uh = np.fft.rfft(np.asarray(u, float))
    vh = np.fft.rfft(np.asarray(v, float))
    if dealias:
        uh = uh * grid.keep
        vh = vh * grid.keep
    return State(uh, vh, t)


def to_physical(grid: Grid, st: State):
    return np.fft.irfft(st.u_hat, grid.N), np.fft.irfft(st.v_hat, grid.N)


# -- linear propagator --------------------------------------------------------------

def _coeff_float(sys: ReducedSystem):
    f = to_float
    a = (f(sys.a1), f(sys.a2))
    B = np.array([[f(sys.B[i, j]) for j in range(2)] for i in range(2)])
    C = np.array([[f(sys.C[i, j]) for j in range(2)] for i in range(2)])
    D = np.array([[f(sys.D[i, j]) for j in range(2)] for i in range(2)])
    return a, B, C, D


def _linear_symbol(sys, grid: Grid):
    """L[n] as an (m, 2, 2) complex array."""
    a, B, _, _ = _coeff_float(sys)
    k = grid.k
    L = np.zeros((k.size, 2, 2), complex)
    L[:, 0, 0] = 1j * k * (k * k * a[0] - B[0, 0])
    L[:, 1, 1] = 1j * k * (k * k * a[1] - B[1, 1])
    L[:, 0, 1] = -1j * k * B[0, 1]
    L[:, 1, 0] = -1j * k * B[1, 0]
    return L


def expm2(A):
    """exp of a stack of 2x2 matrices via e^m [cosh d I + sinh(d)/d (A - m I)]."""
    m = (A[:, 0, 0] + A[:, 1, 1]) / 2
    p = A[:, 0, 0] - m
    d2 = p * p + A[:, 0, 1] * A[:, 1, 0]
    d = np.sqrt(d2.astype(complex))
    small = np.abs(d) < 1e-6
    sinhc = np.where(small, 1 + d2 / 6 + d2 * d2 / 120, np.sinh(d) / np.where(small, 1, d))
    ch = np.cosh(d)
    em = np.exp(m)
    E = np.empty_like(A, dtype=complex)
    E[:, 0, 0] = em * (ch + sinhc * p)
    E[:, 1, 1] = em * (ch - sinhc * p)
    E[:, 0, 1] = em * sinhc * A[:, 0, 1]
    E[:, 1, 0] = em * sinhc * A[:, 1, 0]
    return E


def _apply(E, uh, vh):
    return E[:, 0, 0] * uh + E[:, 0, 1] * vh, E[:, 1, 0] * uh + E[:, 1, 1] * vh


class Solver:
    """Integrating-factor RK4 with cached propagators for a fixed dt."""

    def __init__(self, sys: ReducedSystem, grid: Grid):
        self.sys = sys
        self.grid = grid
        self.L = _linear_symbol(sys, grid)
        _, _, self.C, self.D = _coeff_float(sys)
        self.ik = 1j * grid.k
        self.keep = grid.keep
        self._cache = {}

    def propagator(self, dt):
        E = self._cache.get(dt)
        if E is None:
            E = expm2(self.L * dt)
            self._cache[dt] = E
        return E

    def nonlinear(self, uh, vh):
        N = self.grid.N
        uh = uh * self.keep
        vh = vh * self.keep
        u = np.fft.irfft(uh, N)
        v = np.fft.irfft(vh, N)
        ux = np.fft.irfft(self.ik * uh, N)
        vx = np.fft.irfft(self.ik * vh, N)
        C, D = self.C, self.D
        fu = C[0, 0] * u * ux + C[0, 1] * v * vx + D[0, 0] * ux * v + D[0, 1] * u * vx
        fv = C[1, 0] * u * ux + C[1, 1] * v * vx + D[1, 0] * ux * v + D[1, 1] * u * vx
        return np.fft.rfft(fu) * self.keep, np.fft.rfft(fv) * self.keep

    def linear_step(self, st: State, dt) -> State:
        if dt <= 0:
            raise InvalidParams("dt must be positive")
        uh, vh = _apply(self.propagator(dt), st.u_hat, st.v_hat)
        return State(uh, vh, st.t + dt)

    def step(self, st: State, dt) -> State:
        Eh = self.propagator(dt / 2)
        E = self.propagator(dt)
        w = (st.u_hat, st.v_hat)
        F = self.nonlinear
        k1 = F(*w)
        ew = _apply(Eh, *w)
        k2 = F(*_apply(Eh, w[0] + dt / 2 * k1[0], w[1] + dt / 2 * k1[1]))
        k3 = F(ew[0] + dt / 2 * k2[0], ew[1] + dt / 2 * k2[1])
        k4 = F(*_apply(Eh, ew[0] + dt * k3[0], ew[1] + dt * k3[1]))
        lw = _apply(E, *w)
        e1 = _apply(E, *k1)
        e23 = _apply(Eh, k2[0] + k3[0], k2[1] + k3[1])
        uh = lw[0] + dt / 6 * (e1[0] + 2 * e23[0] + k4[0])
        vh = lw[1] + dt / 6 * (e1[1] + 2 * e23[1] + k4[1])
        if not (np.all(np.isfinite(uh)) and np.all(np.isfinite(vh))):
            raise NonFinite(f"non-finite coefficients at t={st.t + dt:.6g}")
        return State(uh, vh, st.t + dt)

    def run(self, st: State, T, dt, monitor=None, every=1):
        steps = int(round(T / dt))
        if steps < 0 or abs(steps * dt - T) > 1e-9 * max(1.0, abs(T)):
            raise InvalidParams("T must be a multiple of dt")
        if monitor:
            monitor(st)
        for i in range(steps):
            st = self.step(st, dt)
            if monitor and ((i + 1) % every == 0 or i + 1 == steps):
                monitor(st)
        return st

    # Strang oracle: half linear, full nonlinear (RK4 substeps), half linear

    def _nl_flow(self, uh, vh, h, sub):
        dt = h / sub
        F = self.nonlinear
        for _ in range(sub):
            a = F(uh, vh)
            b = F(uh + dt / 2 * a[0], vh + dt / 2 * a[1])
            c = F(uh + dt / 2 * b[0], vh + dt / 2 * b[1])
            d = F(uh + dt * c[0], vh + dt * c[1])
            uh = uh + dt / 6 * (a[0] + 2 * b[0] + 2 * c[0] + d[0])
            vh = vh + dt / 6 * (a[1] + 2 * b[1] + 2 * c[1] + d[1])
        return uh, vh

    def strang(self, st: State, T, dt, sub=1):
        steps = int(round(T / dt))
        Eh = expm2(self.L * (dt / 2))
        uh, vh = st.u_hat, st.v_hat
        for _ in range(steps):
            uh, vh = _apply(Eh, uh, vh)
            uh, vh = self._nl_flow(uh, vh, dt, sub)
            uh, vh = _apply(Eh, uh, vh)
        return State(uh, vh, st.t + steps * dt)

    def strang_richardson(self, st: State, T, dt, sub=1):
        """(4 S(dt/2) - S(dt)) / 3: the symmetric splitting error is even in dt."""
        a = self.strang(st, T, dt / 2, sub)
        b = self.strang(st, T, dt, sub)
        return State((4 * a.u_hat - b.u_hat) / 3, (4 * a.v_hat - b.v_hat) / 3, a.t)


def linear_step(sys, grid, st, dt):
    return Solver(sys, grid).linear_step(st, dt)


def step(sys, grid, st, dt):
    return Solver(sys, grid).step(st, dt)


def default_dt(sys, grid: Grid, st: State):
    """min(1e-3, 1/(advection scale * k_max))."""
    u, v = to_physical(grid, st)
    _, _, C, D = _coeff_float(sys)
    amp = max(np.max(np.abs(u)), np.max(np.abs(v)), 1e-12)
    scale_ = amp * max(np.max(np.abs(C)), np.max(np.abs(D)), 1e-12)
    kmax = grid.k[grid.keep].max()
    return min(1e-3, 1.0 / (scale_ * kmax))


# -- diagnostics -----------------------------------------------------------------

def _parseval(grid: Grid, ah, bh=None):
    """int a*b over the torus from rfft coefficients."""
    bh = ah if bh is None else bh
    w = np.full(ah.size, 2.0)
    w[0] = 1.0
    if grid.N % 2 == 0:
        w[-1] = 1.0
    return grid.length * float(np.sum(w * (ah * np.conj(bh)).real)) / grid.N ** 2


def _quad(grid: Grid, f):
    return grid.length * float(np.mean(f))


def means(grid: Grid, st: State):
    return float(st.u_hat[0].real) / grid.N, float(st.v_hat[0].real) / grid.N


PRESET_ALIASES = {
    "mb": "majda-biello", "majda-biello": "majda-biello", "m-b": "majda-biello",
    "hs": "hirota-satsuma", "hirota-satsuma": "hirota-satsuma", "h-s": "hirota-satsuma",
    "gg": "gear-grimshaw", "gear-grimshaw": "gear-grimshaw", "g-g": "gear-grimshaw",
}


def energies(preset_id: str, grid: Grid, st: State, params=None, sys: ReducedSystem | None = None):
    """(E1, E2, (mean u, mean v)) for the named system's conserved energies.

    G-G energies are evaluated in the original (u, v) = M W variables.
    """
    params = dict(params or {})
    name = PRESET_ALIASES.get(preset_id.lower())
    if name is None:
        raise PresetMismatch(f"no energies for {preset_id!r}")
    ref = reduced_preset(name, **params)
    if sys is not None and (sys.a1, sys.a2, sys.B, sys.C, sys.D) != (ref.a1, ref.a2, ref.B, ref.C, ref.D):
        raise PresetMismatch(f"system does not match preset {name}")
    ik = 1j * grid.k
    uh, vh = st.u_hat, st.v_hat
    if name == "gear-grimshaw":
        M = np.array([[to_float(ref.M[i, j]) for j in range(2)] for i in range(2)])
        uh, vh = M[0, 0] * uh + M[0, 1] * vh, M[1, 0] * uh + M[1, 1] * vh
    u = np.fft.irfft(uh, grid.N)
    v = np.fft.irfft(vh, grid.N)
    uxh, vxh = ik * uh, ik * vh
    mu = means(grid, State(uh, vh))
    f = lambda key, default=0: float(to_float(Fraction(params.get(key, default)) if not hasattr(params.get(key, default), "bracket") else params.get(key)))
    if name == "majda-biello":
        a2 = f("a2", 1)
        E1 = _parseval(grid, uh) + _parseval(grid, vh)
        E2 = _parseval(grid, uxh) + a2 * _parseval(grid, vxh) - _quad(grid, u * v * v)
    elif name == "hirota-satsuma":
        a1, c12 = f("a1", 1), f("c12", 0)
        E1 = _parseval(grid, uh) + c12 / 3 * _parseval(grid, vh)
        E2 = ((1 - a1) * _parseval(grid, uxh) + c12 * _parseval(grid, vxh)
              - _quad(grid, 2 * (1 - a1) * u ** 3 + c12 * u * v * v))
    else:
        r1, r2 = f("rho1", 1), f("rho2", 1)
        s1, s2, s3, s4 = f("sigma1"), f("sigma2"), f("sigma3"), f("sigma4")
        E1 = r2 * _parseval(grid, uh) + r1 * _parseval(grid, vh)
        E2 = (r2 * _parseval(grid, uxh) + _parseval(grid, vxh) + 2 * r2 * s3 * _parseval(grid, uxh, vxh)
              + _quad(grid, -(r2 / 3) * u ** 3 + r2 * s2 * u * u * v + r2 * s1 * u * v * v - v ** 3 / 3)
              - s4 * _parseval(grid, vh))
    return E1, E2, mu


@dataclass
class EnergyLedger:
    times: list = field(default_factory=list)
    E1: list = field(default_factory=list)
    E2: list = field(default_factory=list)
    mean_u: list = field(default_factory=list)
    mean_v: list = field(default_factory=list)
    modes: dict = field(default_factory=dict)

    def record(self, t, E1=math.nan, E2=math.nan, mu=(math.nan, math.nan), modes=None):
        if self.times and t <= self.times[-1]:
            raise InvalidParams("ledger timestamps must increase")
        self.times.append(t)
        self.E1.append(E1)
        self.E2.append(E2)
        self.mean_u.append(mu[0])
        self.mean_v.append(mu[1])
        for key, val in (modes or {}).items():
            self.modes.setdefault(key, []).append(val)

    def drift(self):
        def rel(xs):
            if not xs or any(math.isnan(x) for x in xs):
                return math.nan
            x0 = xs[0]
            return max(abs(x - x0) for x in xs) / max(1.0, abs(x0))
        return rel(self.E1), rel(self.E2)

    def mean_drift(self):
        return (max(abs(m - self.mean_u[0]) for m in self.mean_u),
                max(abs(m - self.mean_v[0]) for m in self.mean_v))

    def to_csv(self) -> str:
        keys = sorted(self.modes)
        head = ["t", "E1", "E2", "mean_u", "mean_v"] + [f"mode_{k}" for k in keys]
        lines = [",".join(head)]
        for i, t in enumerate(self.times):
            row = [t, self.E1[i], self.E2[i], self.mean_u[i], self.mean_v[i]]
            row += [self.modes[k][i] for k in keys]
            lines.append(",".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"


def mode_energy(grid: Grid, st: State, n: int, field_: str = "u"):
    """|coefficient|^2 of mode n (normalised so cos(nx) has energy 1/4)."""
    h = st.u_hat if field_ == "u" else st.v_hat
    return float(abs(h[abs(n)]) ** 2) / grid.N ** 2


# -- initial data grammar ------------------------------------------------------------

_TERM = re.compile(
    r"^\s*(?:(?P<A>[-+]?[\d.eE+-]+)\s*\*\s*)?cos\(\s*(?:(?P<k>[-+]?[\d./]+)\s*\*\s*)?x"
    r"\s*(?:(?P<sg>[-+])\s*(?P<phi>[\d.eE+-]+))?\s*\)\s*$")


def parse_profile(text: str):
    """Parse sums of A*cos(k*x + phi) and constants into [(A, k, phi)] (k = 0 for constants)."""
    text = re.sub(r"\s+", "", text)
    if not text or text == "0":
        return []
    parts, depth, cur = [], 0, ""
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and cur.strip() and not cur.rstrip().endswith(("e", "E", "*")):
            parts.append(cur)
            cur = ch
        else:
            cur += ch
    parts.append(cur)
    out = []
    for p in parts:
        p = p.strip()
        m = _TERM.match(p)
        sign_ = 1.0
        if m is None and p[:1] in "+-" and _TERM.match(p[1:]):
            sign_ = -1.0 if p[0] == "-" else 1.0
            m = _TERM.match(p[1:])
        if m:
            A = float(m.group("A")) if m.group("A") else 1.0
            k = float(Fraction(m.group("k"))) if m.group("k") else 1.0
            phi = float(m.group("phi")) if m.group("phi") else 0.0
            if m.group("sg") == "-":
                phi = -phi
            out.append((sign_ * A, k, phi))
            continue
        try:
            out.append((float(p), 0.0, 0.0))
        except ValueError:
            raise ParseError(f"cannot parse profile term {p!r}") from None
    return out


def eval_profile(terms, x):
    x = np.asarray(x, float)
    out = np.zeros_like(x)
    for A, k, phi in terms:
        out = out + A * np.cos(k * x + phi)
    return out


# -- experiments -----------------------------------------------------------------

def simulate(sys, grid: Grid, u0, v0, T, dt, preset_id=None, params=None, every=100):
    """Run and record a ledger; u0, v0 are arrays or profile strings."""
    if isinstance(u0, str):
        u0 = eval_profile(parse_profile(u0), grid.x)
    if isinstance(v0, str):
        v0 = eval_profile(parse_profile(v0), grid.x)
    solver = Solver(sys, grid)
    st = to_state(grid, u0, v0)
    led = EnergyLedger()

    def mon(s):
        if preset_id:
            E1, E2, mu = energies(preset_id, grid, s, params)
        else:
            E1 = E2 = math.nan
            mu = means(grid, s)
        led.record(s.t, E1, E2, mu)

    st = solver.run(st, T, dt, mon, every)
    return st, led


def triad_system(r) -> ReducedSystem:
    """u_t + u_xxx = (u v)_x, v_t + r v_xxx = 0: v pumps the u triad."""
    Z = Matrix2.zero()
    return ReducedSystem(Fraction(1), Fraction(r), Z, Z, Matrix2([[1, 1], [0, 0]]), name="triad")


def triad_arm(r, k1: int, k2: int, amplitudes=(0.01, 0.01), T=None, N=32, dt=None, lam=1):
    """Seed u in mode k1 and v in mode k2; record the energy of u in |k1 + k2|."""
    r = Fraction(r)
    grid = Grid(float(lam), N)
    sys = triad_system(r)
    a_u, a_v = amplitudes
    x = grid.x
    k1f, k2f = k1 / lam, k2 / lam
    u0 = a_u * np.cos(k1f * x)
    v0 = a_v * np.cos(k2f * x)
    k3 = abs(k1 + k2)
    if T is None:
        T = 20 * 2 * math.pi / abs(float(r) * k2f ** 3)
    dt = dt or T / max(200, int(math.ceil(T / 0.005)))
    steps = int(round(T / dt))
    dt = T / steps
    solver = Solver(sys, grid)
    st = to_state(grid, u0, v0)
    led = EnergyLedger()
    e0 = mode_energy(grid, st, k3)
    led.record(0.0, modes={k3: e0})
    for i in range(steps):
        st = solver.step(st, dt)
        led.record(st.t, modes={k3: mode_energy(grid, st, k3)})
    gain = max(e - e0 for e in led.modes[k3])
    H = k1 ** 3 + float(r) * k2 ** 3 - (k1 + k2) ** 3
    return {"k1": k1, "k2": k2, "k3": k3, "H": H, "T": T, "gain": gain, "ledger": led}


def secular(ledger: EnergyLedger, k3: int) -> bool:
    """True when the late-window peak exceeds twice the early one (t^2 growth gives 4)."""
    e = ledger.modes[k3]
    e0 = e[0]
    h = len(e) // 2
    early = max(x - e0 for x in e[: h + 1])
    late = max(x - e0 for x in e[h:])
    return late > 2 * early


def resonant_triad_experiment(r, detune: int = -2, amplitudes=(0.01, 0.01), T=None, N=32, lam=1,
                              arm=None):
    """Exact arm k1 = x1 k2 from a rational root vs the arm k1 + detune.

    ``arm=(k1, k2)`` replaces the root-derived pair, which is how ratios
    without rational roots are compared.
    """
    if arm is None:
        rep = h_roots(r)
        if rep.case == "NoRealRoots" or not isinstance(rep.x1, Fraction):
            raise InvalidRoots("exact arm needs a rational root of h_r")
        k1, k2 = rep.x1.numerator, rep.x1.denominator
    else:
        k1, k2 = arm
    exact = triad_arm(r, k1, k2, amplitudes, T, N, lam=lam)
    det = triad_arm(r, k1 + detune, k2, amplitudes, exact["T"], N, lam=lam)
    for a in (exact, det):
        a["secular"] = secular(a["ledger"], a["k3"])
    if det["gain"] > 0:
        ratio = exact["gain"] / det["gain"]
    else:
        ratio = math.inf if exact["gain"] > 0 else math.nan
    return {"exact": exact, "detuned": det, "ratio": ratio}


def scaling_consistency(sys: ReducedSystem, sp: SpaceType, lam, u0, v0, T, N=64, dt=1e-3):
    """Max discrepancy between transforming a T-trajectory and solving the scaled problem.

    u0, v0 are callables of x on [0, 2 pi); u0 should carry the mean m1 of
    the space (and v0 the mean m2) for space types that fix means.
    """
    ok, why = space_applicability(sys, sp.k)
    if not ok:
        raise InapplicableSpace(f"space H{sp.k}: {why}")
    lamq = Fraction(lam)
    lamf = float(lamq)
    gA = Grid(1.0, N)
    xA = gA.x
    stA = to_state(gA, u0(xA), v0(xA))
    m1, m2 = (float(m) for m in sp.shifts)
    steps = int(round(T / dt))
    endA = Solver(sys, gA).run(stA, steps * dt, dt)
    uA, vA = to_physical(gA, endA)
    uA = (uA - m1) / lamf ** 2
    vA = (vA - m2) / lamf ** 2
    if lamq == 1 and m1 == 0 and m2 == 0:
        scaled = sys
    else:
        sc = scale(sys, sp, lamq)
        scaled = sc.as_reduced()
    gB = Grid(lamf, N)
    xB = gB.x
    u0B = (u0(xB / lamf) - m1) / lamf ** 2
    v0B = (v0(xB / lamf) - m2) / lamf ** 2
    stB = to_state(gB, u0B, v0B)
    dtB = lamf ** 3 * dt
    endB = Solver(scaled, gB).run(stB, steps * dtB, dtB)
    uB, vB = to_physical(gB, endB)
    return float(max(np.max(np.abs(uA - uB)), np.max(np.abs(vA - vB))))
