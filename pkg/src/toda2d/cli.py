"""Command line: ``toda2d validate|evolve|check``.

Exit codes: 0 success, 1 a check failed, 2 precondition or validation error,
3 I/O or parse error.
"""
import argparse
import json
import sys

import numpy as np

from . import __version__
from .checks import SUITES, Context, run_suite
from .config import dump_json, load_config, snapshot, write_text
from .errors import ParseError, TodaError
from .hierarchy import as_index, evolve, hamiltonian
from .manifold import LoopLaxPoint, validate, validate_loop

DEFAULT_HAMILTONIANS = ["u,0", "u,1", "v,0", "v,1", "-1,0", "-1,1", "0,0", "0,1", "1,0", "-2,0"]


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(obj, out=None):
    text = dump_json(_jsonable(obj))
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def _parse_zeta(text):
    if text is None:
        return None
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ParseError(f"cannot read ζ from {text!r}") from exc


def _loop(cfg):
    if cfg.is_loop:
        return cfg.loop()
    return LoopLaxPoint.from_point(cfg.point(), cfg.x_modes)


def cmd_validate(args):
    cfg = load_config(args.config)
    if cfg.is_loop:
        rep = validate_loop(cfg.loop())
        per_x = rep.diagnostics["per_x"]
        diag = {"x_tail": rep.diagnostics["x_tail"],
                "min_abs_wprime": min(d["min_abs_wprime"] for d in per_x),
                "simple_curve": all(d["simple_curve"] for d in per_x),
                "x_samples": len(per_x)}
    else:
        rep = validate(cfg.point())
        diag = rep.diagnostics
    _emit({"in_M1": rep.in_M1, "in_M0": rep.in_M0, "diagnostics": diag}, args.out)
    return 0


def cmd_evolve(args):
    cfg = load_config(args.config)
    lp = _loop(cfg)
    idx = as_index(args.flow)
    if args.dt <= 0:
        raise ParseError("--dt must be positive")
    names = cfg.hamiltonians or DEFAULT_HAMILTONIANS
    before = {h: hamiltonian(h, lp) for h in names}
    end = evolve([(idx, args.time)], lp, args.dt) if args.time else lp
    drift = []
    for h in names:
        after = hamiltonian(h, end)
        drift.append({"index": h, "initial": before[h], "final": after,
                      "drift": abs(after - before[h])})
    snap = snapshot(end, flow=str(idx), time=args.time, dt=args.dt, drift=drift)
    _emit(snap, args.out)
    if args.out:
        worst = max(d["drift"] for d in drift)
        sys.stderr.write(f"evolved {idx} for t = {args.time}; max Hamiltonian drift {worst:.3e}\n")
    return 0


def cmd_check(args):
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    lp = _loop(cfg)
    ctx = Context(cfg.point(), lp, _parse_zeta(args.zeta), args.window, args.tol, seed)
    records = run_suite(args.suite, ctx, args.threads)
    ok = all(r.passed for r in records)
    report = {"suite": args.suite, "config": args.config, "seed": seed, "window": args.window,
              "zeta": ctx.zeta, "tol_override": args.tol, "pass": ok,
              "checks": [r.as_dict() for r in records]}
    if args.no_timing:
        for c in report["checks"]:
            c.pop("runtime_ms")
    _emit(report, args.out)
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="toda2d", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="membership report for a point or loop point")
    v.add_argument("config")
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("evolve", help="integrate one flow and write a snapshot")
    e.add_argument("config")
    e.add_argument("--flow", required=True, help='index such as "v,1"')
    e.add_argument("--time", type=float, required=True)
    e.add_argument("--dt", type=float, default=1e-3)
    e.add_argument("--out")
    e.set_defaults(func=cmd_evolve)

    c = sub.add_parser("check", help="run an identity-check suite")
    c.add_argument("suite", choices=sorted(SUITES))
    c.add_argument("config")
    c.add_argument("--zeta")
    c.add_argument("--window", type=int, default=8)
    c.add_argument("--tol", type=float)
    c.add_argument("--seed", type=int)
    c.add_argument("--threads", type=int, help="defaults to $TODA_THREADS or 1")
    c.add_argument("--no-timing", action="store_true", help="omit runtime_ms for byte-stable reports")
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TodaError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)},
                                    ensure_ascii=False) + "\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
