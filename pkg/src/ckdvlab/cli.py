"""Command line front end.

Every subcommand prints one JSON document on stdout (sorted keys, exact
rationals as "p/q" strings, infinities as "inf") and, with ``--out DIR``,
writes the same document plus any CSV tables into DIR.

Exit codes: 0 ok, 2 parse error, 3 invalid parameters, 4 inapplicable
space, 5 numerical failure, 6 exhausted depth, 7 internal error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from fractions import Fraction

from . import bilinear, critical, dioph, resonance, spectral
from .errors import CkdvError, InvalidParams, ParseError
from .exact import Surd, SqrtSurd, fmt, parse_number
from .system import SpaceType, parse_system, reduced_preset

PARAM_KEYS = ("a1", "a2", "c12", "rho1", "rho2", "sigma1", "sigma2", "sigma3", "sigma4")


def jsonable(o):
    if isinstance(o, dict):
        return {str(k): jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [jsonable(v) for v in o]
    if isinstance(o, bool) or o is None or isinstance(o, (int, str)):
        return o
    if isinstance(o, float):
        if math.isnan(o):
            return "nan"
        if math.isinf(o):
            return "inf" if o > 0 else "-inf"
        return o
    if isinstance(o, (Fraction, Surd, SqrtSurd)):
        return fmt(o)
    if hasattr(o, "to_dict"):
        return jsonable(o.to_dict())
    return str(o)


def dump(doc) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, indent=2) + "\n"


def _num(text):
    try:
        return parse_number(str(text))
    except ParseError:
        raise
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"bad number {text!r}: {e}") from None


def _params(args) -> dict:
    return {k: _num(getattr(args, k)) for k in PARAM_KEYS if getattr(args, k, None) is not None}


def _add_params(p):
    g = p.add_argument_group("system coefficients (exact: 3, -1/2, sqrt(2) ...)")
    g.add_argument("--a1", help="u dispersion coefficient (hirota-satsuma)")
    g.add_argument("--a2", help="v dispersion coefficient (majda-biello)")
    g.add_argument("--c12", help="v v_x coupling in the u equation (hirota-satsuma)")
    for k in ("rho1", "rho2", "sigma1", "sigma2", "sigma3", "sigma4"):
        g.add_argument(f"--{k}", help=f"gear-grimshaw {k}")


def _system(args):
    if getattr(args, "file", None):
        try:
            with open(args.file) as fh:
                return parse_system(fh.read()), None
        except OSError as e:
            raise ParseError(str(e)) from None
    if not getattr(args, "preset", None):
        raise InvalidParams("give --preset or --file")
    return reduced_preset(args.preset, **_params(args)), args.preset


# -- subcommands ---------------------------------------------------------------

def cmd_classify(args):
    if args.application:
        if not args.preset:
            raise InvalidParams("--application needs --preset")
        recs = critical.classify_application(args.preset, **_params(args))
        if args.space:
            recs = [c for c in recs if c.space.k in args.space]
        return {"records": [c.to_dict() for c in recs]}, {}
    sys_, _ = _system(args)
    m1, m2 = _num(args.m1), _num(args.m2)
    out = []
    for k in args.space or (1, 2, 3, 4):
        out.append(critical.classify(sys_, SpaceType(k, m1, m2)).to_dict())
    return {"records": out}, {}


def cmd_srindex(args):
    if args.jarnik is not None:
        stream = dioph.jarnik_construct(_num(args.jarnik))
        return critical.s_r_stream(stream, depth=args.depth).to_dict(), {}
    if args.r is None:
        raise InvalidParams("give --r or --jarnik")
    return critical.s_r(_num(args.r)).to_dict(), {}


def cmd_dioph(args):
    x = dioph.parse_real(args.x)
    cf = dioph.continued_fraction(x, args.depth)
    conv = dioph.convergents(x, args.depth)
    doc = {
        "x": args.x,
        "terms": cf.terms,
        "terminated": cf.terminated,
        "period_start": cf.period_start,
        "period": cf.period,
        "convergents": [[c.n, c.p, c.q] for c in conv],
    }
    if args.mu:
        doc["mu"] = dioph.mu(x).to_dict()
    return doc, {}


def cmd_resonance(args):
    r = _num(args.r)
    t = resonance.h2_triple(r, _num(args.alpha1), _num(args.beta1), _num(args.beta2))
    w = resonance.LatticeWindow(_num(args.lam), _num(args.K))
    doc = {"r": r, "roots": resonance.h_roots(r).to_dict()}
    tables = {}
    if not args.no_scan:
        rep = resonance.significance_scan(t, w, None if args.delta is None else _num(args.delta))
        doc["significance"] = rep.to_dict()
        if args.csv_limit:
            tables["scan.csv"] = resonance.rows_csv(resonance.scan_rows(t, w, args.csv_limit))
    if args.tol is not None:
        near = resonance.near_resonances(r, w, _num(args.tol), args.order)
        doc["near"] = [[k1, k2, d] for k1, k2, d in near[: args.near_limit]]
    return doc, tables


def cmd_sharpness(args):
    if args.list:
        return {"cases": bilinear.case_ids()}, {}
    if args.case is None:
        raise InvalidParams("give --case (or --list)")
    r = None if args.r is None else _num(args.r)
    rep = bilinear.fit_exponent(args.case, float(_num(args.s)), float(_num(args.b)), r=r)
    rows = [(n, lo, hi) for n, lo, hi in rep.rows]
    return rep.to_dict(), {"fit.csv": bilinear.csv_rows(rows)}


def cmd_simulate(args):
    if args.experiment == "triad":
        r = _num(args.r if args.r is not None else "1/3")
        res = spectral.resonant_triad_experiment(r, detune=args.detune, N=args.N)
        doc = {"ratio": res["ratio"]}
        for arm in ("exact", "detuned"):
            a = res[arm]
            doc[arm] = {k: a[k] for k in ("k1", "k2", "k3", "H", "T", "gain", "secular")}
        return doc, {"triad_exact.csv": res["exact"]["ledger"].to_csv(),
                     "triad_detuned.csv": res["detuned"]["ledger"].to_csv()}
    sys_, preset_id = _system(args)
    grid = spectral.Grid(float(_num(args.lam)), args.N)
    u0 = spectral.eval_profile(spectral.parse_profile(args.u0), grid.x / grid.lam)
    v0 = spectral.eval_profile(spectral.parse_profile(args.v0), grid.x / grid.lam)
    st0 = spectral.to_state(grid, u0, v0)
    dt = float(args.dt) if args.dt else spectral.default_dt(sys_, grid, st0)
    T = float(args.T)
    steps = max(1, int(round(T / dt)))
    dt = T / steps
    params = _params(args)
    st, led = spectral.simulate(sys_, grid, u0, v0, T, dt,
                                preset_id=preset_id, params=params, every=max(1, steps // 100))
    d1, d2 = led.drift()
    mu_, mv = led.mean_drift()
    doc = {"T": T, "dt": dt, "N": args.N, "lambda": grid.lam, "steps": steps,
           "E1": [led.E1[0], led.E1[-1]], "E2": [led.E2[0], led.E2[-1]],
           "drift_E1": d1, "drift_E2": d2, "mean_drift": [mu_, mv]}
    return doc, {"ledger.csv": led.to_csv()}


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ckdvlab", description="Coupled KdV well-posedness laboratory.")
    ap.add_argument("--config", help="JSON file of flag defaults (keys are flag names without dashes)")
    ap.add_argument("--out", help="directory for result.json and CSV tables")
    ap.add_argument("--seed", type=int, default=0, help="seed recorded with the run")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="critical regularity per space type")
    p.add_argument("--preset", help="majda-biello, hirota-satsuma, gear-grimshaw, abcd-coupled")
    p.add_argument("--file", help="system file with [dispersion], [B], [C], [D] sections")
    p.add_argument("--space", type=int, action="append", choices=(1, 2, 3, 4),
                   help="space type 1..4 (repeatable; default all)")
    p.add_argument("--m1", default="0", help="mean of u fixed by types 1 and 2")
    p.add_argument("--m2", default="0", help="mean of v fixed by types 1 and 3")
    p.add_argument("--application", action="store_true",
                   help="use the hand-derived case tables of the named preset")
    _add_params(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("srindex", help="the index s_r and exponent of rho_r = sqrt(12r - 3)")
    p.add_argument("--r", help="ratio alpha2/alpha1 (>= 1/4)")
    p.add_argument("--jarnik", help="model rho_r by a constructed number of exponent SIGMA")
    p.add_argument("--depth", type=int, help="convergents used when estimating (default: until q has 4096 bits)")
    p.set_defaults(func=cmd_srindex)

    p = sub.add_parser("dioph", help="continued fraction, convergents and exponent of a real")
    p.add_argument("--x", required=True, help="number expression, 'jarnik:SIGMA' or 'liouville'")
    p.add_argument("--depth", type=int, default=10, help="number of partial quotients")
    p.add_argument("--mu", action="store_true", help="also report the irrationality exponent")
    p.set_defaults(func=cmd_dioph)

    p = sub.add_parser("resonance", help="roots, significance scan and near resonances")
    p.add_argument("--r", required=True, help="ratio alpha2/alpha1")
    p.add_argument("--alpha1", default="1")
    p.add_argument("--beta1", default="0")
    p.add_argument("--beta2", default="0")
    p.add_argument("--lam", default="1", help="period scale lambda >= 1")
    p.add_argument("--K", default="50", help="frequency window |k| <= K")
    p.add_argument("--delta", help="required significance constant")
    p.add_argument("--no-scan", action="store_true", help="skip the exhaustive scan")
    p.add_argument("--csv-limit", type=int, default=0, help="write the N smallest-ratio triples")
    p.add_argument("--tol", help="list pairs with |k1/k2 - root| <= TOL")
    p.add_argument("--order", choices=("distance", "scaled"), default="distance")
    p.add_argument("--near-limit", type=int, default=20)
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("sharpness", help="log-log exponent of a counterexample family")
    p.add_argument("--case", help="family id (see --list)")
    p.add_argument("--list", action="store_true", help="list family ids")
    p.add_argument("--s", default="0", help="regularity s")
    p.add_argument("--b", default="1/2", help="time weight b")
    p.add_argument("--r", help="ratio for root-dependent families")
    p.set_defaults(func=cmd_sharpness)

    p = sub.add_parser("simulate", help="pseudospectral run with energy and mean ledger")
    p.add_argument("--preset")
    p.add_argument("--file")
    p.add_argument("--experiment", choices=("run", "triad"), default="run")
    p.add_argument("--r", help="dispersion ratio for the triad experiment")
    p.add_argument("--detune", type=int, default=-2, help="k1 shift of the detuned triad arm")
    p.add_argument("--T", default="1", help="final time")
    p.add_argument("--N", type=int, default=256, help="grid points")
    p.add_argument("--dt", help="time step (default from the advection scale)")
    p.add_argument("--lam", default="1", help="period scale lambda >= 1")
    p.add_argument("--u0", default="0.3*cos(x) + 0.1*cos(2*x + 0.5)",
                   help="initial u as a sum of A*cos(k*x + phi) terms and constants")
    p.add_argument("--v0", default="0.2*cos(x - 0.3) + 0.1*cos(3*x)", help="initial v, same grammar")
    _add_params(p)
    p.set_defaults(func=cmd_simulate)
    return ap


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"config {path}: {e}") from None
    if not isinstance(cfg, dict):
        raise ParseError("config must be a JSON object")
    return {k.replace("-", "_"): (str(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v)
            for k, v in cfg.items()}


_NEG = re.compile(r"^-(\d|\.\d|\(|sqrt|inf)")


def _attach_negatives(argv):
    """Turn '--s -1/2' into '--s=-1/2' so argparse keeps negative values."""
    out = []
    for tok in argv:
        if out and _NEG.match(tok) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def parse_args(argv):
    argv = _attach_negatives(list(argv))
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        cfg = _load_config(args.config)
        # config supplies defaults; explicit flags still win
        for action in ap._subparsers._group_actions[0].choices[args.command]._actions:
            if action.dest in cfg:
                action.default = cfg[action.dest]
        args = ap.parse_args(argv)
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except CkdvError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    try:
        doc, tables = args.func(args)
    except CkdvError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (ValueError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 7
    doc = {"command": args.command, "seed": args.seed, "result": doc}
    text = dump(doc)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "result.json"), "w") as fh:
            fh.write(text)
        for name, body in tables.items():
            with open(os.path.join(args.out, name), "w") as fh:
                fh.write(body)
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
