"""Command-line sweeps: ``xychain <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical-integrity error,
4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cache import CODE_TAG, ResultCache, default_cache_dir
from .entanglement import HALF_PI, gamma_transform
from .errors import ConfigError, NumericalIntegrityError, OracleMismatchError
from .export import config_digest, export_table, write_sidecar
from .noise import witness_threshold
from .pipeline import Task, lambda_grid, run_tasks
from .scaling import Curve, FitModel, Peak, collapse_quality, find_peak, fit_model, rescale

log = logging.getLogger("xychain")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4

DEFAULT_NU_SCAN = (0.5, 0.75, 1.0, 1.5, 2.0)


def _add_common(p: argparse.ArgumentParser, grid=True):
    p.add_argument("--config", type=Path, help="JSON file whose keys supply option defaults")
    p.add_argument("--gamma", type=float, default=1.0, help="anisotropy (default 1.0)")
    p.add_argument("--N", dest="sizes", type=int, nargs="+", default=[32], help="ring sizes")
    if grid:
        p.add_argument("--lambda", dest="lambda_grid", default="0:2:0.05",
                       help="start:stop:step (inclusive) or comma list (default 0:2:0.05)")
    p.add_argument("--out", type=Path, help="output CSV path")
    p.add_argument("--cache-dir", type=Path, help="cache directory (env XYCHAIN_CACHE_DIR)")
    p.add_argument("--no-cache", action="store_true", help="disable the result cache")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xychain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("tangle", help="generalized tangles T_1..T_k along lambda")
    _add_common(p)
    p.add_argument("--k", type=int, default=4, choices=range(1, 5), help="highest order (default 4)")
    p.add_argument("--max-extent", type=int, help="exploratory: skip subsets wider than this")

    p = sub.add_parser("entropy", help="entropy of four spins spaced L apart")
    _add_common(p)
    p.add_argument("--L", dest="spacings", type=int, nargs="+", default=[1], help="spacings")

    p = sub.add_parser("noise", help="n(q=0), Delta(0,0) and the separability witness")
    _add_common(p)

    p = sub.add_parser("collapse", help="Gamma data collapse of T_4 curves")
    _add_common(p)
    p.add_argument("--nu", type=float, nargs="+", default=list(DEFAULT_NU_SCAN),
                   help="exponents to score; the table uses nu=1 if listed, else the first")

    p = sub.add_parser("mx", help="order-parameter proxy sqrt(<X_0 X_N/2>)")
    _add_common(p)
    p.add_argument("--fit-window", default="0.5:0.95",
                   help="lambda window lo:hi for the log-log exponent fit")

    p = sub.add_parser("oracle-check", help="free fermions vs exact diagonalization")
    p.add_argument("--sizes", type=int, nargs="+", default=[6, 8, 10, 12])
    p.add_argument("--gammas", type=float, nargs="+", default=[0.5, 1.0])
    p.add_argument("--lambdas", type=float, nargs="+", default=[0.25, 0.5, 1.0, 1.5, 2.0])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", type=Path, help="optional CSV of every comparison")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path is not None:
        try:
            cfg = json.loads(Path(cfg_path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {cfg_path}: {exc}") from exc
        sub = parser.subcommands[args.command]
        unknown = set(cfg) - {a.dest for a in sub._actions}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)} in {cfg_path}")
        # flags given explicitly on the command line win over the file
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _validate(args):
    if any(n < 3 for n in args.sizes):
        raise ConfigError(f"every N must be >= 3, got {args.sizes}")
    if not 0.0 <= args.gamma <= 1.0:
        raise ConfigError(f"gamma must be in [0, 1], got {args.gamma}")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    lams = lambda_grid(args.lambda_grid)
    if lams[0] < 0:
        raise ConfigError("lambda must be >= 0")
    return lams


def _cache(args) -> ResultCache:
    if args.no_cache:
        return ResultCache(None)
    return ResultCache(args.cache_dir or default_cache_dir())


def _config_record(args, lams) -> dict:
    skip = {"config", "out", "cache_dir", "no_cache", "workers", "verbose", "lambda_grid"}
    rec = {k: v for k, v in vars(args).items() if k not in skip}
    rec["lambdas"] = [float(x) for x in lams]
    rec["code"] = CODE_TAG
    return rec


def _finish(args, columns, rows, record, extra=None, units=None):
    out = args.out or Path(f"{args.command}.csv")
    digest = config_digest(record)
    meta = {"command": args.command, "config_digest": digest, "code": CODE_TAG}
    meta.update({k: v for k, v in (extra or {}).items() if isinstance(v, (int, float, str))})
    export_table(out, columns, rows, meta, units)
    side = {"config": record, "config_digest": digest}
    side.update(extra or {})
    write_sidecar(out, side)
    print(f"wrote {out}")
    return out


def _perturbations(results, lams, N):
    return [
        {"N": N, "lambda": float(l), "lambda_used": r["lambda_used"]}
        for l, r in zip(lams, results)
        if r.get("lambda_used") is not None
    ]


def _sectors(results, lams, N):
    return {f"{N}@{l:.12g}": r["sector"] for l, r in zip(lams, results)}


def _sweep(args, kind, lams, options=()):
    cache = _cache(args)
    per_size = {}
    t0 = time.perf_counter()
    for N in args.sizes:
        tasks = [Task(kind, N, args.gamma, float(l), tuple(options)) for l in lams]
        per_size[N] = run_tasks(tasks, cache, args.workers)
        log.info("%s N=%d done after %.1fs", kind, N, time.perf_counter() - t0)
    log.info("cache hit rate %.3f", cache.hit_rate)
    meta = {"sectors": {}, "perturbations": []}
    for N, res in per_size.items():
        meta["sectors"].update(_sectors(res, lams, N))
        meta["perturbations"] += _perturbations(res, lams, N)
    return per_size, meta


def cmd_tangle(args):
    lams = _validate(args)
    opts = (("k_max", args.k), ("max_extent", args.max_extent))
    per_size, meta = _sweep(args, "tangle", lams, opts)
    cols = ["N", "lambda"] + [f"T{k}" for k in range(1, args.k + 1)]
    rows, peaks = [], {}
    for N, res in per_size.items():
        rows += [[N, float(l)] + r["values"] for l, r in zip(lams, res)]
        if len(lams) >= 3:
            for k in range(args.k):
                pk = find_peak(Curve(N, args.gamma, f"T{k + 1}", lams, [r["values"][k] for r in res]))
                peaks[f"T{k + 1}@N={N}"] = vars(pk)
    meta["peaks"] = peaks
    meta["truncated"] = args.max_extent is not None
    return _finish(args, cols, rows, _config_record(args, lams), meta)


def cmd_entropy(args):
    lams = _validate(args)
    for L in args.spacings:
        for N in args.sizes:
            if L < 1 or 4 * L > N:
                raise ConfigError(f"spacing L={L} needs 4L <= N={N}")
    per_size, meta = _sweep(args, "entropy", lams, (("spacings", tuple(args.spacings)),))
    rows = []
    for N, res in per_size.items():
        for l, r in zip(lams, res):
            rows += [[N, float(l), L, s] for L, s in zip(args.spacings, r["values"])]
    return _finish(args, ["N", "lambda", "L", "S4"], rows, _config_record(args, lams), meta,
                   {"S4": "bits"})


def cmd_noise(args):
    lams = _validate(args)
    per_size, meta = _sweep(args, "noise", lams)
    multi = len(args.sizes) > 1
    cols = (["N"] if multi else []) + ["lambda", "n0", "delta00", "threshold", "entangled_flag"]
    rows, heights = [], {}
    for N, res in per_size.items():
        thr = witness_threshold(N)
        for l, r in zip(lams, res):
            row = [float(l), r["n0"], r["delta00"], float(thr), bool(r["delta00"] > thr)]
            rows.append(([N] if multi else []) + row)
        if len(lams) >= 3:
            pk = find_peak(Curve(N, args.gamma, "delta00", lams, [r["delta00"] for r in res]))
            heights[N] = pk.height
            meta[f"delta00_peak@N={N}"] = vars(pk)
    if len(heights) >= 3:
        fit = fit_model(list(heights), list(heights.values()), FitModel.POWER)
        meta["peak_height_power_fit"] = {"a": fit.coefficients[0], "exponent": fit.exponent,
                                         "r_squared": fit.r_squared}
    return _finish(args, cols, rows, _config_record(args, lams), meta)


def cmd_collapse(args):
    lams = _validate(args)
    if len(args.sizes) < 2:
        raise ConfigError("collapse needs at least two sizes")
    per_size, meta = _sweep(args, "tangle", lams, (("k_max", 4), ("max_extent", None)))
    t4_curves, g_curves, t4_peaks, peaks = [], [], [], []
    for N, res in per_size.items():
        t4 = Curve(N, args.gamma, "T4", lams, [r["values"][3] for r in res])
        pk = find_peak(t4)
        if not pk.interior:
            raise NumericalIntegrityError(f"T4 has no interior peak at N={N}; widen the lambda grid")
        g, dropped = gamma_transform(t4)
        if dropped.any():
            meta.setdefault("gamma_dropped", []).extend(
                {"N": N, "lambda": float(x)} for x in lams[dropped])
        t4_curves.append(t4)
        g_curves.append(g)
        t4_peaks.append(pk)
        # the extremum of Gamma sits at the T4 maximum
        peaks.append(Peak(pk.lambda_m, 1.0 / (pk.height - HALF_PI), True))
    meta["spread"] = {f"{nu:g}": collapse_quality(g_curves, nu, peaks) for nu in args.nu}
    meta["peaks"] = {str(c.N): {"lambda_m": p.lambda_m, "T4_max": p.height}
                     for c, p in zip(t4_curves, t4_peaks)}
    if len(t4_curves) >= 3:
        fit = fit_model([c.N for c in t4_curves], [p.height for p in t4_peaks], FitModel.LOG)
        meta["peak_height_log_fit"] = {"a": fit.coefficients[0], "b": fit.exponent,
                                       "r_squared": fit.r_squared}
    nu0 = 1.0 if 1.0 in args.nu else args.nu[0]
    rows = []
    for i, (t4, g, p) in enumerate(zip(t4_curves, g_curves, peaks)):
        if i:
            rows.append(None)
        x, y = rescale(g, nu0, p)
        t4_at = dict(zip(t4.lambdas, t4.values))
        rows += [[g.N, float(l), float(xi), float(yi), t4_at[l]] for l, xi, yi in zip(g.lambdas, x, y)]
    meta["nu_table"] = nu0
    return _finish(args, ["N", "lambda", "x_rescaled", "gamma_shifted", "T4"], rows,
                   _config_record(args, lams), meta)


def cmd_mx(args):
    lams = _validate(args)
    try:
        lo, hi = (float(x) for x in args.fit_window.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad fit window {args.fit_window!r}") from exc
    per_size, meta = _sweep(args, "mx", lams)
    rows = []
    for N, res in per_size.items():
        mx = np.array([r["mx"] for r in res])
        rows += [[N, float(l), float(m)] for l, m in zip(lams, mx)]
        sel = (lams >= lo - 1e-12) & (lams <= hi + 1e-12) & (lams < 1) & (mx > 0)
        if sel.sum() >= 5:
            fit = fit_model(1.0 - lams[sel], mx[sel], FitModel.POWER)
            meta[f"exponent@N={N}"] = {"slope": fit.exponent, "r_squared": fit.r_squared}
    return _finish(args, ["N", "lambda", "mx"], rows, _config_record(args, lams), meta)


def cmd_oracle(args):
    from .oracle import run_suite, summarize

    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    comps = run_suite(args.sizes, args.gammas, args.lambdas, args.workers)
    ok, text = summarize(comps, args.tol)
    print(text)
    if args.out:
        export_table(args.out, ["N", "gamma", "lambda", "fermion", "exact", "abs_diff"],
                     [[c.N, c.gamma, c.lam, c.fermion, c.exact, c.error] for c in comps],
                     {"command": "oracle-check", "tolerance": args.tol, "code": CODE_TAG})
    if not ok:
        raise OracleMismatchError(text)
    return None


COMMANDS = {
    "tangle": cmd_tangle,
    "entropy": cmd_entropy,
    "noise": cmd_noise,
    "collapse": cmd_collapse,
    "mx": cmd_mx,
    "oracle-check": cmd_oracle,
}


def run_command(argv=None) -> int:
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleMismatchError as exc:
        print(f"oracle mismatch:\n{exc}", file=sys.stderr)
        return EXIT_ORACLE
    except NumericalIntegrityError as exc:
        print(f"numerical integrity error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
