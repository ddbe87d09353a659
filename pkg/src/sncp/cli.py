"""Command-line front end: ``sncp {moments,f,verify,sweep,extremal}``.

Every command prints one JSON object (or CSV) to stdout or ``--out``.
Floats are written with 17 significant digits.  Exit codes: 0 success,
1 usage error, 2 validation error, 3 verification failure, 4 unstable
estimate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import SncpError, UnstableEstimateError
from .extremal import brute_force_overlap_max, maximize_overlap
from .gamma_core import gurland_F
from .moments import LpSpace, f_ball, moment_S, moment_abs_g
from .pairs import (
    diagonal_pair_with_overlap,
    load_pair_file,
    named_pair,
    sphere_pair_with_overlap,
)
from .sampler import resolve_threads
from .sncp_mc import SncpReport, f_ball_mc, f_diag_mc
from .verify import SUITES, Scale, run_suite, with_grids

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_VERIFY, EXIT_UNSTABLE = 0, 1, 2, 3, 4
DEFAULT_SEED = 20240607
SWEEP_HEADER = ["p", "n", "t", "f_exact", "f_mc", "stderr", "gurland_excess"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ----------------------------------------------------------------- output


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _encode(obj):
    """Replace floats by placeholder tokens; returns (tree, table)."""
    table = {}

    def walk(o):
        if isinstance(o, (bool, np.bool_)):
            return bool(o)
        if isinstance(o, (float, np.floating)):
            if not math.isfinite(o):
                return None
            key = f"@@F{len(table)}@@"
            table[key] = _fmt(float(o))
            return key
        if isinstance(o, (int, np.integer)):
            return int(o)
        if isinstance(o, dict):
            return {str(k): walk(v) for k, v in o.items()}
        if isinstance(o, (list, tuple, np.ndarray)):
            return [walk(v) for v in o]
        return o

    return walk(obj), table


def to_json(obj) -> str:
    tree, table = _encode(obj)
    text = json.dumps(tree, indent=2)
    for key, val in table.items():
        text = text.replace(f'"{key}"', val, 1)
    return text + "\n"


def to_csv(rows: list[dict], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        out = []
        for h in header:
            v = r.get(h)
            if v is None or (isinstance(v, float) and not math.isfinite(v)):
                out.append("")
            elif isinstance(v, float):
                out.append(_fmt(v))
            else:
                out.append(str(v))
        w.writerow(out)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _record(args, command: str, params: dict, body: dict, t0: float) -> dict:
    rec = {"command": command, "params": params}
    rec.update(body)
    if not args.no_timestamp:
        rec["runtime_ms"] = (time.perf_counter() - t0) * 1e3
        rec["timestamp"] = datetime.now(timezone.utc).isoformat()
    return rec


def _single(args, rec: dict, header: list[str] | None = None) -> None:
    if args.format == "csv":
        flat = {k: v for k, v in rec.items() if not isinstance(v, (dict, list))}
        flat.update(rec.get("params", {}))
        header = header or list(flat)
        _emit(args, to_csv([flat], header))
    else:
        _emit(args, to_json(rec))


# --------------------------------------------------------------- commands


def cmd_moments(args) -> int:
    t0 = time.perf_counter()
    if args.alpha is None:
        raise UsageError("moments needs --alpha")
    g = moment_abs_g(args.p, args.alpha)
    body = {"E_abs_g_alpha": g}
    if args.m is not None:
        body["E_S_alpha"] = moment_S(args.p, args.m, args.alpha)
        body["value"] = body["E_S_alpha"]
    else:
        body["value"] = g
    params = {"p": args.p, "m": args.m, "alpha": args.alpha}
    _single(args, _record(args, "moments", params, body, t0))
    return EXIT_OK


def _pair_for(args, mode: str):
    sources = sum(x is not None for x in (args.pair_file, args.t, args.pair))
    if sources > 1:
        raise UsageError("give only one of --pair-file, --t, --pair")
    if args.pair_file:
        pair = load_pair_file(args.pair_file)
        if pair.mode != mode:
            raise UsageError(f"pair file mode {pair.mode!r} does not match --mode {mode!r}")
        if args.n is not None and args.n != pair.n:
            raise UsageError("--n disagrees with the pair file")
        return pair
    if args.n is None:
        raise UsageError("--n is required")
    if args.t is not None:
        return sphere_pair_with_overlap(args.n, args.t) if mode == "sphere" else diagonal_pair_with_overlap(args.n, args.t)
    return named_pair(args.pair or ("xi" if mode == "sphere" else "xi_bar"), args.n, mode)


def cmd_f(args) -> int:
    t0 = time.perf_counter()
    mode = args.mode
    method = args.method or ("exact" if mode == "sphere" else "mc-weighted")
    if mode == "diagonal" and method != "mc-weighted":
        raise UsageError("diagonal mode supports only --method mc-weighted")
    pair = _pair_for(args, mode)
    n = pair.n
    params = {"p": args.p, "n": n, "mode": mode, "method": method, "t": pair.overlap}
    if method == "exact":
        report = SncpReport.exact(pair, f_ball(LpSpace(args.p, n), pair.overlap))
        body = {"value": report.value, "std_error": 0.0, "sign": report.sign_verdict,
                "samples": None, "seed": None}
    else:
        threads = resolve_threads(args.threads)
        if mode == "sphere":
            est = f_ball_mc(args.p, n, pair, args.samples, args.seed,
                            "uniform" if method == "mc-uniform" else "weighted", threads)
        else:
            est = f_diag_mc(args.p, n, pair, args.samples, args.seed, threads)
        report = SncpReport.from_estimate(pair, est, method)
        body = {"value": est.mean, "std_error": est.std_error, "sign": report.sign_verdict,
                "samples": est.samples, "seed": args.seed}
        if mode == "sphere":
            body["f_exact"] = f_ball(LpSpace(args.p, n), pair.overlap)
    _single(args, _record(args, "f", params, body, t0),
            ["command", "p", "n", "mode", "method", "t", "value", "std_error", "sign", "samples", "seed"])
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    scale = Scale.quick() if args.quick else Scale()
    scale = with_grids(scale, args.p_grid, args.n_grid)
    threads = resolve_threads(args.threads)

    def progress(res):
        print(res.line(), file=sys.stderr, flush=True)

    results = run_suite(args.suite, args.seed, threads, scale, progress)
    passed = all(r.passed for r in results)
    # thread count is deliberately not part of the report: output must not
    # depend on it
    params = {"suite": args.suite, "seed": args.seed, "scale": scale.name,
              "p_grid": list(scale.p_grid), "n_grid": list(scale.n_grid)}
    body = {"passed": passed, "checks": [r.to_dict(timing=not args.no_timestamp) for r in results]}
    rec = _record(args, "verify", params, body, t0)
    if args.format == "csv":
        rows = [{"id": r.id, "name": r.name, "passed": r.passed} for r in results]
        _emit(args, to_csv(rows, ["id", "name", "passed"]))
    else:
        _emit(args, to_json(rec))
    return EXIT_OK if passed else EXIT_VERIFY


def _parse_grid(text: str, integer: bool = False) -> list:
    """'a,b,c' or 'start:stop:step' (inclusive stop)."""
    conv = int if integer else float
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad grid {text!r}")
        start, stop, step = (conv(x) for x in parts)
        if step <= 0:
            raise UsageError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [conv(start + k * step) for k in range(count)]
    return [conv(x) for x in text.split(",") if x.strip()]


def cmd_sweep(args) -> int:
    var = args.variable
    if args.grid is None:
        raise UsageError("sweep needs --grid")
    grid = _parse_grid(args.grid, integer=(var == "n"))
    t_fixed = 0.5 if args.t is None else args.t
    threads = resolve_threads(args.threads) if args.samples else None
    rows = []
    for k, x in enumerate(grid):
        p = x if var == "p" else args.p
        n = x if var == "n" else args.n
        t = x if var == "t" else t_fixed
        if p is None or n is None:
            raise UsageError("sweep needs the fixed --p / --n")
        row = {"p": float(p), "n": int(n), "t": float(t), "f_exact": f_ball(LpSpace(p, n), t),
               "gurland_excess": gurland_F(1.0 / p) - 3.0}
        if args.samples:
            est = f_ball_mc(p, n, sphere_pair_with_overlap(n, t), args.samples, args.seed,
                            "weighted", threads, stream_index=k)
            row["f_mc"], row["stderr"] = est.mean, est.std_error
        rows.append(row)
    if args.format == "json":
        _emit(args, to_json({"command": "sweep", "variable": var, "rows": rows}))
    else:
        _emit(args, to_csv(rows, SWEEP_HEADER))
    return EXIT_OK


def cmd_extremal(args) -> int:
    t0 = time.perf_counter()
    if args.n is None:
        raise UsageError("extremal needs --n")
    res = maximize_overlap(args.n, args.mode, args.restarts, args.seed)
    body = res.to_dict()
    if args.brute:
        body["brute_force"] = brute_force_overlap_max(args.n, args.mode, seed=args.seed)
    params = {"n": args.n, "mode": args.mode, "restarts": args.restarts, "seed": args.seed}
    _single(args, _record(args, "extremal", params, body, t0),
            ["command", "n", "mode", "best_value", "bound", "stationarity_residual"])
    return EXIT_OK


# ----------------------------------------------------------------- parser


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: $SNC_THREADS or all cores)")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--no-timestamp", action="store_true", help="omit timestamp and runtime fields")

    parser = _Parser(prog="sncp", description="Square negative correlation on l_p balls.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("moments", parents=[common], help="E|g|^alpha and E S^alpha")
    m.add_argument("--p", type=float, required=True)
    m.add_argument("--m", type=int, default=None, help="number of copies in S (omit for E|g|^alpha)")
    m.add_argument("--alpha", type=float, default=None)
    m.set_defaults(func=cmd_moments)

    f = sub.add_parser("f", parents=[common], help="evaluate f for one pair")
    f.add_argument("--p", type=float, required=True)
    f.add_argument("--n", type=int, default=None)
    f.add_argument("--mode", choices=("sphere", "diagonal"), default="sphere")
    f.add_argument("--pair", choices=("e", "xi", "xi_bar"), default=None)
    f.add_argument("--pair-file", default=None)
    f.add_argument("--t", type=float, default=None, help="overlap of a constructed pair")
    f.add_argument("--method", choices=("exact", "mc-weighted", "mc-uniform"), default=None)
    f.add_argument("--samples", type=int, default=1_000_000)
    f.set_defaults(func=cmd_f)

    v = sub.add_parser("verify", parents=[common], help="run the verification suite")
    v.add_argument("--suite", choices=tuple(SUITES), default="all")
    v.add_argument("--p-grid", type=_float_list, default=None)
    v.add_argument("--n-grid", type=_int_list, default=None)
    v.add_argument("--quick", action="store_true", help="reduced sample counts (smoke run)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", parents=[common], help="grid of f values as CSV")
    s.add_argument("--variable", choices=("p", "n", "t"), required=True)
    s.add_argument("--grid", default=None, help="comma list or start:stop:step")
    s.add_argument("--p", type=float, default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--t", type=float, default=None, help="fixed overlap (default 1/2, the xi pair)")
    s.add_argument("--samples", type=int, default=0, help="MC samples per point (0: exact only)")
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("extremal", parents=[common], help="maximize the overlap")
    e.add_argument("--n", type=int, default=None)
    e.add_argument("--mode", choices=("sphere", "diagonal"), default="sphere")
    e.add_argument("--restarts", type=int, default=32)
    e.add_argument("--brute", action="store_true", help="also run the brute-force search (n <= 6)")
    e.set_defaults(func=cmd_extremal)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads is not None and args.threads < 1:
            parser.error("--threads must be >= 1")
    except SystemExit as exc:  # argparse exits on usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.format is None:
        args.format = "csv" if args.command == "sweep" else "json"
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sncp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnstableEstimateError as exc:
        print(f"sncp: unstable estimate: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (SncpError, ValueError) as exc:
        print(f"sncp: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"sncp: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
