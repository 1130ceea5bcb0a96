"""Command-line front end.

Exit codes::

    0   success
    1   audit failure (first witness on stderr)
    2   DomainError
    3   ConvergenceError
    4   RegionError
    5   HypothesisError
    6   GridError
    7   ShapeError
    64  usage error

Floats are written with 17 significant digits; CSV uses LF line endings.
Single runs take flags; ``--config file.json`` supplies defaults and flags win.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .domain import (
    ConvergenceError, DomainError, GridError, HypothesisError, Params,
    RegionError, ShapeError,
)

EXIT_OK = 0
EXIT_AUDIT = 1
EXIT_CODES = (
    (DomainError, 2),
    (ConvergenceError, 3),
    (RegionError, 4),
    (HypothesisError, 5),
    (GridError, 6),
    (ShapeError, 7),
)
EXIT_USAGE = 64

DEFAULTS = {
    "tau": 0.0,
    "samples": 100_000,
    "n": 10_000,
    "depth": 10,
    "restarts": 4,
    "seed": 0,
    "L": 1.0,
    "h": 1.0 / 256,
    "lines": 16,
    "points": 33,
    "y1": 1.0,
    "out": None,
    "threads": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return "null"
        return f"{v:.17g}"
    if v is None:
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return json.dumps(str(v))


def dump_json(obj):
    """JSON text with every float at 17 significant digits."""
    return _fmt(obj) + "\n"


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _threads(args):
    if args.threads is not None:
        return max(1, int(args.threads))
    env = os.environ.get("BELLMAN_SHARP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _params(args):
    return Params(args.p, args.tau)


def _xpoint(text):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x1,x2,x3, got {text!r}")
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return tuple(vals)


# ---------------------------------------------------------------------------


def cmd_eval(args):
    from .bellman import bellman_eval

    v = bellman_eval(args.x, _params(args))
    rec = {"value": v.value, "omega": v.omega, "beta": v.beta, "b": v.b,
           "region": v.region.value, "residual": v.residual, "iterations": v.iterations}
    _emit(dump_json(rec), args.out)
    return EXIT_OK


def _audit_reports(args, params):
    from . import concavity as cc
    from .majorant import majorant_audit
    from .martingale import bellman_process_audit, random_pair

    kind = args.suite
    n = args.samples
    if kind == "concavity":
        reps = []
        if not params.is_p2:
            reps += list(cc.sector_sign_audit(params, n, seed=args.seed).values())
            reps += list(cc.fd_agreement_audit(params, min(n, 1000), seed=args.seed + 1).values())
        reps.append(cc.explicit_concavity_audit(params, n))
        if params.above_two:
            reps.append(cc.q_beta_audit(params, n))
        reps.append(cc.restrictive_concavity_fuzz(params, n, seed=args.seed))
        return reps
    if kind == "rejected-cases":
        return [cc.rejected_case_audit(c, params, n, seed=args.seed) for c in ("C1_1", "C3_1")]
    if kind == "glue":
        return [cc.glue_audit(params, min(n, 10_000))]
    if kind == "majorant":
        return [majorant_audit(params, min(n, 10_000), seed=args.seed)]
    if kind == "supermartingale":
        count = min(n, 1000)
        out = []
        for i in range(count):
            rng = np.random.default_rng([args.seed, i])
            depth = int(rng.integers(1, args.depth + 1))
            out.append(bellman_process_audit(random_pair(params, depth, 1, rng=rng), params))
        worst = max(out, key=lambda r: r.worst_value)
        nfail = sum(r.n_fail for r in out)
        total = sum(r.n_samples for r in out)
        return [cc.AuditReport("supermartingale", params.p, params.tau, total, nfail,
                               worst.worst_witness, worst.worst_value)]
    raise ValueError(kind)


def cmd_audit(args):
    params = _params(args)
    reps = _audit_reports(args, params)
    ok = all(r.passed for r in reps)
    doc = {"suite": args.suite, "p": params.p, "tau": params.tau, "passed": ok,
           "reports": [r.to_dict() for r in reps]}
    _emit(dump_json(doc), args.out)
    if not ok:
        first = next(r for r in reps if not r.passed)
        sys.stderr.write(f"FAIL {first.case}: {first.n_fail}/{first.n_samples}, "
                         f"witness {first.worst_witness}, value {first.worst_value:.17g}\n")
        return EXIT_AUDIT
    return EXIT_OK


def cmd_fuzz(args):
    from .martingale import fuzz_campaign, reports_to_csv

    params = _params(args)
    rows = fuzz_campaign(params, args.n, args.depth, seed=args.seed, threads=_threads(args))
    _emit(reports_to_csv(rows), args.out)
    rel = min(r[7] / (1.0 + r[5]) for r in rows) if rows else 0.0
    sys.stderr.write(f"pairs {len(rows)}, min slack/(1+rhs) {rel:.17g}\n")
    return EXIT_AUDIT if rel < -1e-9 else EXIT_OK


def cmd_extremal(args):
    from .martingale import extremal_sequence, reports_to_csv

    params = _params(args)
    reps = extremal_sequence(params, args.depth, restarts=args.restarts, seed=args.seed)
    _emit(reports_to_csv(reps), args.out)
    sys.stderr.write(f"best ratio {reps[-1].ratio:.17g} of {params.c_sharp:.17g}\n")
    return EXIT_OK


def cmd_envelope(args):
    from .majorant import envelope_study

    grid, err = envelope_study(_params(args), args.L, args.h)
    _emit(grid.to_csv(), args.out)
    sys.stderr.write(dump_json({"max_error": err, "iterations": grid.info["iterations"]}))
    return EXIT_OK


def cmd_characteristics(args):
    from .bellman import characteristic_fan

    rows = characteristic_fan(_params(args), args.lines, args.points, args.y1)
    lines = ["line,u,y1,y2,y3,M"]
    for j, u, y1, y2, y3, m in rows:
        lines.append(f"{j},{u:.17g},{y1:.17g},{y2:.17g},{y3:.17g},{m:.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    ap = _Parser(prog="bellman-sharp", description="Sharp Bellman function toolkit.")
    ap.add_argument("--config", help="JSON file of defaults (flags win)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--p", type=float, required=True)
        sp.add_argument("--tau", type=float)
        sp.add_argument("--out")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--seed", type=int)

    sp = sub.add_parser("eval", help="Bellman value at a point (JSON)")
    common(sp)
    sp.add_argument("--x", type=_xpoint, required=True, help="x1,x2,x3")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("audit", help="run an audit suite (JSON)")
    sp.add_argument("suite", choices=["concavity", "rejected-cases", "glue", "majorant",
                                      "supermartingale"])
    common(sp)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--depth", type=int)
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("fuzz", help="random dyadic pairs (CSV)")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--depth", type=int)
    sp.set_defaults(func=cmd_fuzz)

    sp = sub.add_parser("extremal", help="extremal search, one row per depth (CSV)")
    common(sp)
    sp.add_argument("--depth", type=int)
    sp.add_argument("--restarts", type=int)
    sp.set_defaults(func=cmd_extremal)

    sp = sub.add_parser("envelope", help="grid envelope of the obstacle (CSV)")
    common(sp)
    sp.add_argument("--L", type=float)
    sp.add_argument("--h", type=float)
    sp.set_defaults(func=cmd_envelope)

    sp = sub.add_parser("characteristics", help="characteristic fan polylines (CSV)")
    common(sp)
    sp.add_argument("--lines", type=int)
    sp.add_argument("--points", type=int)
    sp.add_argument("--y1", type=float)
    sp.set_defaults(func=cmd_characteristics)
    return ap


def _merge_config(args, parser):
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config must be a JSON object")
    for key, default in DEFAULTS.items():
        if getattr(args, key, default) is None or not hasattr(args, key):
            setattr(args, key, cfg.get(key, default))
    return args


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _merge_config(args, parser)
    try:
        return args.func(args)
    except tuple(e for e, _ in EXIT_CODES) as exc:
        for etype, code in EXIT_CODES:
            if isinstance(exc, etype):
                sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
