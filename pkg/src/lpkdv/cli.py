"""Command-line front end.

Exit codes: 0 on success, 1 with a single ``CODE key=value ...`` line on
stderr when a module raises, 2 on I/O or parse failure. ``verify`` also
exits 1 (code ``VERIFY_FAILED``) when a case does not pass.
"""

import argparse
import json
import sys

import numpy as np

from . import continuum as ct
from . import gen_symmetry as gs
from . import painleve as pv
from .errors import InvalidParams, LpkdvError
from .lattice import (
    LatticeParams,
    Staircase,
    evolve,
    grid_from_csv,
    grid_to_csv,
)
from .soliton import SolitonSpec, centered_window, soliton_grid
from .verify import DEFAULT_SEED, DEFAULT_SPEC, SUITES, Config, report_json, run_suite


class ParseFailure(Exception):
    """Input could not be read or parsed (exit code 2)."""


def _floats(text, count, what):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError as err:
        raise ParseFailure(f"{what}: {err}") from None
    if len(vals) != count:
        raise ParseFailure(f"{what}: expected {count} comma-separated values")
    return vals


def _params(text):
    p, q = _floats(text, 2, "--params")
    return LatticeParams(p, q)


def _window(text):
    vals = _floats(text, 4, "--window")
    if any(v != int(v) for v in vals):
        raise ParseFailure("--window: entries must be integers")
    n0, m0, n, m = (int(v) for v in vals)
    if n < 2 or m < 2:
        raise ParseFailure("--window: N and M must be at least 2")
    return n0, m0, n, m


def _tol(entries):
    out = {}
    for item in entries or ():
        name, sep, val = item.rpartition("=")
        try:
            out[name if sep else "*"] = float(val)
        except ValueError:
            raise ParseFailure(f"--tol: bad value {item!r}") from None
    return out


def _read(path):
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        raise ParseFailure(f"cannot read {path}: {err.strerror}") from None


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as err:
        raise ParseFailure(f"cannot write {out}: {err.strerror}") from None


def _parse_grid(text, allow_nonfinite=False):
    try:
        return grid_from_csv(text, allow_nonfinite)
    except ValueError as err:
        if isinstance(err, LpkdvError):
            raise
        raise ParseFailure(f"grid: {err}") from None


def _parse_json(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseFailure(f"{what}: {err}") from None


# ----------------------------------------------------------------- commands


def cmd_soliton(args):
    if args.spec:
        try:
            spec = SolitonSpec.from_json(_read(args.spec))
        except (KeyError, TypeError, json.JSONDecodeError) as err:
            raise ParseFailure(f"spec: {err}") from None
    else:
        spec = DEFAULT_SPEC
    params = _params(args.params)
    if args.window:
        n0, m0, n, m = _window(args.window)
    else:
        n, m = 40, 40
        n0, m0 = centered_window(spec, params, n, m)
    _emit(grid_to_csv(soliton_grid(spec, params, n0, m0, n, m), params), args.out)


def cmd_evolve(args):
    grid, params = _parse_grid(_read(args.staircase), allow_nonfinite=True)
    if args.params:
        params = _params(args.params)
    v = grid.values
    corner = args.corner
    if corner == "auto":
        if np.all(np.isfinite(v[:, 0])) and np.all(np.isfinite(v[-1, :])):
            corner = "lower-right"
        elif np.all(np.isfinite(v[:, 0])) and np.all(np.isfinite(v[0, :])):
            corner = "lower-left"
        else:
            raise ParseFailure("staircase file needs a full bottom row and a full first or last column")
    try:
        stair = Staircase.from_grid(grid, corner)
    except ValueError as err:
        raise ParseFailure(f"staircase: {err}") from None
    _emit(grid_to_csv(evolve(stair, LatticeParams(params.p, params.q)), params), args.out)


def cmd_verify(args):
    cfg = Config(
        params=_params(args.params),
        window=_window(args.window) if args.window else None,
        seed=args.seed,
        tol=_tol(args.tol),
    )
    report = run_suite(args.suite, cfg)
    _emit(report_json(report), args.out)
    failed = [c["name"] for c in report["cases"] if not c["pass"]]
    if failed:
        print(f"VERIFY_FAILED suite={args.suite} failed={len(failed)} first={failed[0]}", file=sys.stderr)
        return 1
    return 0


def cmd_flow(args):
    try:
        char = gs.Characteristic.from_json(_read(args.characteristic))
    except (KeyError, TypeError, json.JSONDecodeError) as err:
        raise ParseFailure(f"characteristic: {err}") from None
    grid, params = _parse_grid(_read(args.grid))
    if args.params:
        params = _params(args.params)
    res = gs.flow_integrate(char, grid, params, args.eps, args.steps)
    _emit(grid_to_csv(res.grid, params), args.out)


def _reduction_params(data):
    try:
        return pv.ReductionParams(
            float(data["w"]), float(data["c"]), float(data["p"]), float(data["q"]), int(data.get("m", 0))
        )
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, LpkdvError):
            raise
        raise ParseFailure(f"reduction parameters: {err}") from None


def cmd_painleve(args):
    rp = _reduction_params(_parse_json(_read(args.rp), "reduction parameters"))
    if args.state:
        vals = _floats(args.state, 5, "--state")
        st = pv.PainleveState(int(vals[0]), *vals[1:])
    else:
        key = (rp.w, rp.c)
        if (rp.p, rp.q) != (2.0, 1.0) or key not in pv.STRIP_SEEDS:
            raise InvalidParams(
                "no built-in seed for these parameters; pass --state", w=rp.w, c=rp.c, p=rp.p, q=rp.q
            )
        strip = pv.constrained_strip(rp, pv.STRIP_SEEDS[key], max(args.steps + 4, 8))
        rp = rp.at_row(1)
        st = pv.state_from_grid(strip, 2, 1)
    _emit(pv.trajectory_to_csv(pv.trajectory(st, rp, args.steps), rp), args.out)


def cmd_continuum(args):
    deltas = tuple(float(d) for d in args.deltas.split(","))
    if args.profile == "gaussian":
        profile = ct.gaussian_profile
    else:
        profile = lambda k: 0.0 * np.asarray(k, dtype=float)  # noqa: E731
    res = ct.continuum_limit_order(
        p=args.p, deltas=deltas, tau_target=args.tau, k_window=(-args.half_width, args.half_width),
        profile=profile, steps=args.steps,
    )
    q_state = ct.ContinuumState(
        2.0 * args.p - profile(np.arange(-50, 50) + 1) + profile(np.arange(-50, 50) - 1), -50, 0.0, args.p
    )
    report = {
        "schema": "1",
        "profile": args.profile,
        "p": args.p,
        "tau": args.tau,
        "deltas": list(res.deltas),
        "errors": list(res.errors),
        "order": None if np.isnan(res.order) else res.order,
        "status": res.status,
        "time_constant": ct.calibrate_time_scale(q_state) if args.profile == "gaussian" else 1.0 / (2.0 * args.p),
    }
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)


# ------------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(prog="lpkdv", description="Lattice potential KdV toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, params_default="2,1"):
        p.add_argument("--params", default=params_default, help="p,q")
        p.add_argument("--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("soliton", help="sample a soliton on a window")
    p.add_argument("--spec", help="soliton spec JSON (default: one mode kappa0=0.5, c0=1)")
    p.add_argument("--window", help="n0,m0,N,M (default 40x40 on the core)")
    common(p)
    p.set_defaults(func=cmd_soliton)

    p = sub.add_parser("evolve", help="fill a grid from staircase data")
    p.add_argument("staircase", help="grid CSV with nan away from the staircase")
    p.add_argument("--corner", choices=("auto", "lower-left", "lower-right"), default="auto")
    common(p, params_default=None)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p.add_argument("--window", help="n0,m0,N,M for window-dependent cases")
    p.add_argument("--tol", action="append", help="NAME=VALUE or VALUE (all cases); repeatable")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("flow", help="integrate a symmetry flow on a grid")
    p.add_argument("characteristic", help="characteristic JSON")
    p.add_argument("grid", help="grid CSV")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--steps", type=int, default=20)
    common(p, params_default=None)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("painleve", help="iterate the reduced recurrence")
    p.add_argument("rp", help='JSON {"w":..,"c":..,"p":..,"q":..,"m":..}')
    p.add_argument("--state", help="n,y_prev,y,u,u_next (default: built-in constrained strip)")
    p.add_argument("--steps", type=int, default=30)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_painleve)

    p = sub.add_parser("continuum", help="measure the continuum-limit order")
    p.add_argument("--profile", choices=("gaussian", "zero"), default="gaussian")
    p.add_argument("--deltas", default="0.1,0.05,0.025")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--half-width", type=int, default=250)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_continuum)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        with np.errstate(all="ignore"):
            code = args.func(args)
    except ParseFailure as err:
        print(f"PARSE_ERROR {err}", file=sys.stderr)
        return 2
    except LpkdvError as err:
        print(err.one_line(), file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"INVALID_INPUT {str(err).splitlines()[0] if str(err) else type(err).__name__}", file=sys.stderr)
        return 1
    return int(code or 0)


if __name__ == "__main__":
    sys.exit(main())
