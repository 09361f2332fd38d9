"""Command-line interface.

Subcommands: approx (unconstrained sweep), approx-convex (convexity-
constrained sweep), sequence (sweep + boundedness + limit extrapolation),
oq2 (constrained sweep on a rescaled interval [-a, a]), verify (cross-module
invariant checks).  Results go to --out as CSV or JSON; per-degree results
are cached under --cache-dir keyed by a content hash, and cache hits are
reported on stderr.

Exit codes: 0 success, 1 configuration error, 2 solver failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import limits, store
from .convex_sip import ConvexSolveError, best_convex_approx, remez_convexity_slack
from .limits import LsBoundViolation, SequenceRow, build_sequence
from .lp import LPError
from .precision import format_scalar, set_precision, to_scalar
from .remez import RemezError, best_approx
from .store import ConfigError, RunConfig
from .targets import TargetSpec, abs_pow

_SOLVER_ERRORS = (RemezError, ConvexSolveError, LPError)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3


def parse_range(text: str):
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    v = int(text)
    return v, v


def parse_windows(text: str):
    return [parse_range(part) for part in text.split(",") if part]


def parse_lambdas(text: str):
    return [to_scalar(part) for part in text.split(",") if part]


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lambdas", default="1",
                        help="comma-separated exponent list, e.g. 1,1.5")
    common.add_argument("--n", dest="n_range", default="0..0",
                        help="degree range min..max")
    common.add_argument("--precision-bits", type=int, default=256)
    common.add_argument("--tol", default="1e-10", help="relative tolerance")
    common.add_argument("--grid-factor", type=int, default=32)
    common.add_argument("--constrained", action="store_true")
    common.add_argument("--model-order", type=int, default=1)
    common.add_argument("--windows", default="", help="e.g. 4..8,8..12")
    common.add_argument("--half-width", default="1")
    common.add_argument("--cache-dir", default=None)
    common.add_argument("--out", default="-")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--strict", action="store_true",
                        help="disable the even-degree fast path")

    parser = argparse.ArgumentParser(
        prog="cvxremez",
        description="Certified minimax polynomial approximation, plain and convex-constrained.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("approx", parents=[common],
                   help="unconstrained best-approximation sweep")
    sub.add_parser("approx-convex", parents=[common],
                   help="convex-constrained sweep")
    sub.add_parser("sequence", parents=[common],
                   help="scaled sequence with boundedness and limit extrapolation")
    sub.add_parser("oq2", parents=[common],
                   help="constrained sweep on the rescaled interval [-a, a]")
    sub.add_parser("verify", parents=[common],
                   help="run the cross-module invariant checks")
    return parser


def config_from_args(args) -> RunConfig:
    try:
        n_min, n_max = parse_range(args.n_range)
        cfg = RunConfig(
            precision_bits=args.precision_bits,
            tol_rel=to_scalar(args.tol),
            grid_factor=args.grid_factor,
            n_min=n_min,
            n_max=n_max,
            lambda_list=parse_lambdas(args.lambdas),
            constrained=bool(args.constrained),
            model_order=args.model_order,
            windows=parse_windows(args.windows),
            half_width=to_scalar(args.half_width),
            cache_dir=args.cache_dir,
            output=args.out,
            format=args.format,
            strict=args.strict,
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


# ---------------------------------------------------------------------------
# cache-aware per-degree solver

def _row_payload_from_result(r, wall_ms: float) -> dict:
    if hasattr(r, "cut_rounds"):
        return {
            "e_lower": r.error_lower,
            "e_upper": r.error_upper,
            "equioscillation_ratio": None,
            "convexity_slack": r.convexity_slack,
            "iterations": r.cut_rounds,
            "wall_ms": wall_ms,
        }
    return {
        "e_lower": r.error_lower,
        "e_upper": r.error_upper,
        "equioscillation_ratio": r.equioscillation_ratio,
        "convexity_slack": None,
        "iterations": r.iterations,
        "wall_ms": wall_ms,
    }


def make_cached_solver(config: RunConfig, diag=None):
    diag = diag if diag is not None else sys.stderr

    def solver(f: TargetSpec, n: int, constrained: bool, tol_rel, grid_factor: int):
        key = store.cache_key(
            f.kind, f.exponent, f.half_width, f.scale, n, constrained,
            config.precision_bits, tol_rel, grid_factor,
        )
        rec = store.cache_load(config.cache_dir, key)
        if rec is not None:
            try:
                result = store.payload_to_result(rec["result"])
                wall = float(rec.get("wall_ms", 0.0))
            except (KeyError, ValueError, TypeError):
                rec = None
            else:
                print(f"cache hit {key[:12]} (n={n})", file=diag)
                return _row_payload_from_result(result, wall)
        t0 = time.perf_counter()
        if constrained:
            result = best_convex_approx(f, n, tol_rel, grid_factor)
        else:
            result = best_approx(f, n, tol_rel, grid_factor)
        wall = (time.perf_counter() - t0) * 1000.0
        store.cache_store(
            config.cache_dir, key,
            {"result": store.result_to_payload(result), "wall_ms": wall},
        )
        return _row_payload_from_result(result, wall)

    return solver


# ---------------------------------------------------------------------------
# commands

def _sweep(config: RunConfig, constrained: bool, half_width=None):
    solver = make_cached_solver(config)
    rows = []
    notes = []
    for lam in config.lambda_list:
        target = abs_pow(lam, half_width if half_width is not None else 1)
        table = build_sequence(
            target, config.n_min, config.n_max, constrained,
            tol_rel=config.tol_rel, grid_factor=config.grid_factor,
            strict=config.strict, solver=solver,
        )
        rows.extend(table.rows)
        notes.extend(table.notes)
    return rows, notes


def _open_out(config: RunConfig):
    if config.output == "-":
        return sys.stdout, False
    return open(config.output, "w", encoding="utf-8"), True


def _emit(config: RunConfig, rows, report_comments=(), reports=None):
    fh, close = _open_out(config)
    try:
        if config.format == "csv":
            store.emit_csv(rows, config, fh, report_comments)
        else:
            store.emit_json(rows, config, fh, reports)
    finally:
        if close:
            fh.close()


def cmd_approx(config: RunConfig):
    rows, notes = _sweep(config, constrained=False)
    _emit(config, rows, notes)
    return rows


def cmd_approx_convex(config: RunConfig):
    rows, notes = _sweep(config, constrained=True)
    _emit(config, rows, notes)
    return rows


def cmd_oq2(config: RunConfig):
    rows, notes = _sweep(config, constrained=True, half_width=config.half_width)
    _emit(config, rows, notes)
    return rows


def default_windows(n_min: int, n_max: int, k: int):
    """Two tail windows over the upper half of the range."""
    lo = max(n_min, n_max // 2, 1)
    mid = lo + (n_max - lo) // 2
    if mid - lo < 2 * (k + 2):
        lo = max(n_min, 1)
        mid = lo + (n_max - lo) // 2
    return [(lo, mid), (mid, n_max)]


def cmd_sequence(config: RunConfig, table_override=None):
    solver = make_cached_solver(config)
    all_rows = []
    comments = []
    reports = {}
    failure = None
    for lam in config.lambda_list:
        target = abs_pow(lam)
        if table_override is not None:
            table = table_override
        else:
            table = build_sequence(
                target, config.n_min, config.n_max, config.constrained,
                tol_rel=config.tol_rel, grid_factor=config.grid_factor,
                strict=config.strict, solver=solver,
            )
        all_rows.extend(table.rows)
        comments.extend(table.notes)
        key = f"lambda={format_scalar(lam, 12)}"
        bounded = None
        try:
            bounded = limits.boundedness_report(table)
            comments.append(
                f"{key} boundedness: sup={format_scalar(bounded[0], 16)} "
                f"tail_increase_ratio={format_scalar(bounded[1], 16)}"
            )
        except ValueError as exc:
            comments.append(f"{key} boundedness skipped: {exc}")
        windows = config.windows or default_windows(
            config.n_min, config.n_max, config.model_order
        )
        try:
            report = limits.extrapolate_limit(table, config.model_order, windows)
        except ValueError as exc:
            comments.append(f"{key} extrapolation rejected: {exc}")
            failure = exc
            continue
        reports[key] = store.report_to_dict(report, bounded)
        for desc, est in report.estimates:
            comments.append(f"{key} estimate[{desc}] = {format_scalar(est, 20)}")
        comments.append(
            f"{key} spread={format_scalar(report.spread, 12)} stable={report.stable}"
        )
    _emit(config, all_rows, comments, reports)
    if failure is not None:
        raise failure
    return all_rows, reports


def cmd_verify(config: RunConfig) -> bool:
    """Cross-module invariant suite; prints one line per check."""
    tol = config.tol_rel
    ok = True

    def report(name: str, passed: bool, detail: str):
        nonlocal ok
        ok = ok and passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    lam1 = to_scalar(1)
    uppers = []
    worst = None
    # ordering and degree monotonicity, lambda = 1, n = 0..6
    rows = []
    for n in range(0, 7):
        r_lo, r_up = _en_cached(config, lam1, n, constrained=False)
        c_lo, c_up = _en_cached(config, lam1, n, constrained=True)
        rows.append((n, r_lo, r_up, c_lo, c_up))
        slack = c_up + to_scalar("1e-12") - r_lo
        if worst is None or slack < worst:
            worst = slack
        uppers.append(c_up)
    report(
        "ordering (unconstrained <= constrained upper)",
        all(r[1] <= r[4] + to_scalar("1e-12") for r in rows),
        f"min slack {format_scalar(worst, 6)}",
    )
    mono = all(uppers[i + 1] <= uppers[i] + to_scalar("1e-15") for i in range(len(uppers) - 1))
    report("constrained degree monotonicity", mono,
           f"uppers n=0..6: {', '.join(format_scalar(u, 8) for u in uppers)}")

    # even/odd pairing at small degrees
    r2 = _en_cached(config, lam1, 2, constrained=False)
    r3 = _en_cached(config, lam1, 3, constrained=False)
    gap = max(r2[0] - r3[1], r3[0] - r2[1])
    passed = gap <= 10 * tol * max(r2[1], r3[1])
    report("even pairing E_2 = E_3", passed, f"certified gap {format_scalar(gap, 6)}")

    # second-derivative comparison bound
    for lam in (to_scalar("2.5"), to_scalar(3)):
        for n in (4, 6):
            try:
                lhs, rhs, ratio = limits.ls_inequality_check(
                    abs_pow(lam), n, tol, config.grid_factor
                )
                report(
                    f"second-derivative bound lambda={format_scalar(lam, 6)} n={n}",
                    True,
                    f"ratio {format_scalar(ratio, 6)}",
                )
            except LsBoundViolation as exc:
                report(
                    f"second-derivative bound lambda={format_scalar(lam, 6)} n={n}",
                    False,
                    str(exc),
                )

    # interval scaling law
    for a in (to_scalar("0.5"), to_scalar(2)):
        for n in (2, 4):
            base = limits.oq2_scaled_error(abs_pow(1), 1, n, tol, config.grid_factor)
            wide = limits.oq2_scaled_error(abs_pow(1), a, n, tol, config.grid_factor)
            scaled = (a * base[0], a * base[1])
            gap = max(scaled[0] - wide[1], wide[0] - scaled[1])
            passed = gap <= to_scalar("1e-10") * max(wide[1], scaled[1])
            report(
                f"interval scaling a={format_scalar(a, 4)} n={n}",
                passed,
                f"certified gap {format_scalar(gap, 6)}",
            )

    slack = remez_convexity_slack(abs_pow(1), 4, tol, config.grid_factor)
    print(
        "INFO unconstrained optimum convexity slack (lambda=1, n=4): "
        f"{format_scalar(slack, 10)}"
    )
    return ok


_EN_CACHE = {}


def _en_cached(config: RunConfig, lam, n: int, constrained: bool):
    key = (format_scalar(lam, 30), n, constrained, config.precision_bits,
           format_scalar(config.tol_rel, 30), config.grid_factor)
    if key not in _EN_CACHE:
        f = abs_pow(lam)
        if constrained:
            r = best_convex_approx(f, n, config.tol_rel, config.grid_factor)
        else:
            r = best_approx(f, n, config.tol_rel, config.grid_factor)
        _EN_CACHE[key] = (r.error_lower, r.error_upper)
    return _EN_CACHE[key]


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        if args.command in ("approx-convex", "oq2"):
            args.constrained = True
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    set_precision(config.precision_bits)
    try:
        if args.command == "approx":
            cmd_approx(config)
        elif args.command == "approx-convex":
            cmd_approx_convex(config)
        elif args.command == "sequence":
            cmd_sequence(config)
        elif args.command == "oq2":
            cmd_oq2(config)
        elif args.command == "verify":
            return EXIT_OK if cmd_verify(config) else EXIT_VERIFY
    except _SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
