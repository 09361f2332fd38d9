"""Scaled error sequences n**lam * E_n and their limit diagnostics.

build_sequence sweeps a degree range with either solver and tabulates the
scaled values; extrapolate_limit fits the tail against a 1/n power model
(Richardson) or accelerates it (iterated Aitken) over several windows and
reports the spread of the window estimates, which is the honest stability
signal: the artifact estimates limits, it cannot prove them.

For even targets the odd-degree errors equal their even-degree neighbours
exactly (symmetrising any competitor polynomial preserves convexity and
never increases the error), which has two consequences used here.  First,
sweeps may compute even degrees only and duplicate each value to the next
odd degree, once that pairing has been re-verified numerically at small
degrees in the same run (strict mode disables this).  Second, the scaled
sequence carries a sawtooth between parities, so extrapolation selects
rows of a single parity for such targets.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import gmpy2

from .convex_sip import ConvexSolveError, best_convex_approx
from .linalg import solve
from .lp import LPError
from .precision import Scalar, get_precision, to_scalar
from .remez import RemezError, best_approx
from .targets import TargetSpec, eval_target, is_convex, second_derivative_target

_SOLVER_ERRORS = (RemezError, ConvexSolveError, LPError)


@dataclass
class SequenceRow:
    n: int
    lam: Scalar
    half_width: Scalar
    constrained: bool
    status: str = "ok"
    e_lower: Optional[Scalar] = None
    e_upper: Optional[Scalar] = None
    scaled_lower: Optional[Scalar] = None
    scaled_upper: Optional[Scalar] = None
    equioscillation_ratio: Optional[Scalar] = None
    convexity_slack: Optional[Scalar] = None
    iterations: Optional[int] = None
    wall_ms: float = 0.0
    detail: str = ""
    duplicated: bool = False


@dataclass
class SequenceTable:
    rows: list
    target: TargetSpec
    constrained: bool
    tol_rel: Scalar
    fast_path_used: bool = False
    notes: list = field(default_factory=list)

    def ok_rows(self):
        return [r for r in self.rows if r.status == "ok"]


@dataclass
class ExtrapolationReport:
    method: str
    model_order: int
    estimates: list  # (window description, estimate)
    spread: Scalar
    stable: bool
    stability_threshold: Scalar


class LsBoundViolation(RuntimeError):
    """The second-derivative comparison bound failed numerically."""


def _default_solver(f, n, constrained, tol_rel, grid_factor):
    t0 = time.perf_counter()
    if constrained:
        r = best_convex_approx(f, n, tol_rel, grid_factor)
        wall = (time.perf_counter() - t0) * 1000.0
        return {
            "e_lower": r.error_lower,
            "e_upper": r.error_upper,
            "equioscillation_ratio": None,
            "convexity_slack": r.convexity_slack,
            "iterations": r.cut_rounds,
            "wall_ms": wall,
        }
    r = best_approx(f, n, tol_rel, grid_factor)
    wall = (time.perf_counter() - t0) * 1000.0
    return {
        "e_lower": r.error_lower,
        "e_upper": r.error_upper,
        "equioscillation_ratio": r.equioscillation_ratio,
        "convexity_slack": None,
        "iterations": r.iterations,
        "wall_ms": wall,
    }


def _scaled(n: int, lam, value):
    if value is None:
        return None
    return to_scalar(n) ** lam * value


def _brackets_match(lo1, up1, lo2, up2, rel_slack, abs_slack) -> bool:
    """Do two certified brackets plausibly hold one common value?"""
    gap = max(lo1 - up2, lo2 - up1)
    return gap <= rel_slack * max(up1, up2) + abs_slack


def build_sequence(
    f: TargetSpec,
    n_min: int,
    n_max: int,
    constrained: bool,
    tol_rel="1e-10",
    grid_factor: int = 32,
    strict: bool = False,
    solver: Optional[Callable] = None,
) -> SequenceTable:
    """One row per degree in [n_min, n_max]; failures become failed rows.

    `solver` may be supplied to route the per-degree computations (the CLI
    passes a cache-aware wrapper); it must match _default_solver's contract.
    """
    if not (0 <= n_min <= n_max):
        raise ValueError("need 0 <= n_min <= n_max")
    tol_rel = to_scalar(tol_rel)
    if constrained and not is_convex(f):
        raise ValueError("target not convex")
    solve_fn = solver or _default_solver
    lam = f.exponent if f.kind == "abs_pow" else to_scalar(1)
    table = SequenceTable(
        rows=[], target=f, constrained=constrained, tol_rel=tol_rel
    )

    memo = {}

    def solved(n: int):
        if n not in memo:
            try:
                memo[n] = ("ok", solve_fn(f, n, constrained, tol_rel, grid_factor))
            except _SOLVER_ERRORS as exc:
                memo[n] = ("failed", str(exc))
        return memo[n]

    fast = (not strict) and f.kind == "abs_pow" and any(
        n % 2 == 1 for n in range(n_min, n_max + 1)
    )
    if fast:
        ok = True
        for even in (2, 4):
            s_even = solved(even)
            s_odd = solved(even + 1)
            if s_even[0] != "ok" or s_odd[0] != "ok":
                ok = False
                break
            a, b = s_even[1], s_odd[1]
            if not _brackets_match(
                a["e_lower"], a["e_upper"], b["e_lower"], b["e_upper"],
                rel_slack=10 * tol_rel,
                abs_slack=gmpy2.exp2(-(get_precision() - 64)),
            ):
                ok = False
                break
        if not ok:
            fast = False
            table.notes.append(
                "even/odd pairing check failed at small degrees; "
                "fast path disabled, all degrees computed directly"
            )
    table.fast_path_used = fast

    def make_row(n: int, source_n: int, duplicated: bool) -> SequenceRow:
        status, payload = solved(source_n)
        row = SequenceRow(
            n=n,
            lam=lam,
            half_width=f.half_width,
            constrained=constrained,
            duplicated=duplicated,
        )
        if status != "ok":
            row.status = "failed"
            row.detail = payload if not duplicated else f"source degree {source_n} failed"
            return row
        row.e_lower = payload["e_lower"]
        row.e_upper = payload["e_upper"]
        row.scaled_lower = _scaled(n, lam, row.e_lower)
        row.scaled_upper = _scaled(n, lam, row.e_upper)
        row.equioscillation_ratio = payload["equioscillation_ratio"]
        row.convexity_slack = payload["convexity_slack"]
        row.iterations = payload["iterations"]
        row.wall_ms = 0.0 if duplicated else payload["wall_ms"]
        return row

    for n in range(n_min, n_max + 1):
        if fast and n % 2 == 1 and n >= 1:
            table.rows.append(make_row(n, n - 1, duplicated=True))
        else:
            table.rows.append(make_row(n, n, duplicated=False))
    return table


def _window_rows(table: SequenceTable, lo: int, hi: int, parity: str):
    rows = [r for r in table.ok_rows() if lo <= r.n <= hi]
    if parity == "even":
        rows = [r for r in rows if r.n % 2 == 0]
    elif parity == "odd":
        rows = [r for r in rows if r.n % 2 == 1]
    return rows


def _median(values):
    vs = sorted(values)
    m = len(vs) // 2
    if len(vs) % 2 == 1:
        return vs[m]
    return (vs[m - 1] + vs[m]) / 2


def _richardson(ns, ss, k: int):
    """Fit s + c_1/n + ... + c_k/n**k through k+1 selected samples."""
    count = len(ns)
    idxs = sorted({round(i * (count - 1) / k) for i in range(k + 1)})
    matrix = []
    rhs = []
    for i in idxs:
        inv = 1 / to_scalar(ns[i])
        row = [to_scalar(1)]
        for _ in range(k):
            row.append(row[-1] * inv)
        matrix.append(row)
        rhs.append(ss[i])
    return solve(matrix, rhs)[0]


def _aitken(values, rounds: int):
    seq = list(values)
    floor = gmpy2.exp2(-(get_precision() - 16))
    for _ in range(rounds):
        if len(seq) < 3:
            break
        nxt = []
        for x, y, z in zip(seq, seq[1:], seq[2:]):
            den = z + x - 2 * y
            if abs(den) <= floor * max(abs(x), abs(y), abs(z), to_scalar(1)):
                nxt.append(z)
            else:
                nxt.append((z * x - y * y) / den)
        seq = nxt
    return seq[-1]


def extrapolate_limit(
    table: SequenceTable,
    k: int,
    windows,
    method: str = "richardson",
    stability_factor="1e-3",
    parity: str = "auto",
) -> ExtrapolationReport:
    """Per-window limit estimates of the scaled sequence, plus their spread."""
    if method not in ("richardson", "aitken"):
        raise ValueError(f"unknown extrapolation method {method!r}")
    if k < 1:
        raise ValueError("model order must be >= 1")
    if not windows:
        raise ValueError("need at least one window")
    if parity == "auto":
        parity = "even" if table.target.kind == "abs_pow" else "any"
    stability_factor = to_scalar(stability_factor)

    estimates = []
    for lo, hi in windows:
        rows = _window_rows(table, lo, hi, parity)
        if len(rows) < k + 2:
            raise ValueError(
                f"window {lo}..{hi} holds {len(rows)} usable rows, need {k + 2}"
            )
        ns = [r.n for r in rows]
        ss = [(r.scaled_lower + r.scaled_upper) / 2 for r in rows]
        noise = gmpy2.exp2(-(get_precision() - 64))
        if any(not s > noise for s in ss):
            raise ValueError(
                f"window {lo}..{hi} has non-positive scaled values "
                "(at or below arithmetic noise); the scaled-limit model does not apply"
            )
        if method == "richardson":
            est = _richardson(ns, ss, k)
        else:
            est = _aitken(ss, k)
        estimates.append((f"n={lo}..{hi}", est))

    values = [e for _, e in estimates]
    spread = max(values) - min(values)
    threshold = stability_factor * abs(_median(values))
    return ExtrapolationReport(
        method=method,
        model_order=k,
        estimates=estimates,
        spread=spread,
        stable=spread <= threshold,
        stability_threshold=threshold,
    )


def boundedness_report(table: SequenceTable):
    """(sup of scaled uppers, tail increase ratio) over the successful rows."""
    rows = table.ok_rows()
    if len(rows) < 8:
        raise ValueError(f"boundedness report needs >= 8 successful rows, got {len(rows)}")
    split = (3 * len(rows)) // 4
    head = max(r.scaled_upper for r in rows[:split])
    tail = max(r.scaled_upper for r in rows[split:])
    sup = max(head, tail)
    if head > 0:
        ratio = tail / head
    else:
        ratio = to_scalar(0) if tail == 0 else gmpy2.inf()
    return sup, ratio


def ls_inequality_check(f: TargetSpec, n: int, tol_rel="1e-10", grid_factor: int = 32):
    """Constrained error at n versus unconstrained error of g'' at n-2.

    Compares the certified upper bound of the constrained value against the
    certified lower bound of the right-hand side, the only direction that is
    sound under two-sided numerics.  Returns (lhs, rhs, ratio) and raises
    LsBoundViolation if the bound fails.
    """
    if f.kind == "abs_pow" and f.exponent < 2:
        raise ValueError("check requires exponent >= 2: f'' must be bounded")
    if n < 2:
        raise ValueError("check requires degree n >= 2")
    tol_rel = to_scalar(tol_rel)
    lhs = best_convex_approx(f, n, tol_rel, grid_factor).error_upper
    g2 = second_derivative_target(f)
    rhs = best_approx(g2, n - 2, tol_rel, grid_factor).error_lower
    floor = gmpy2.exp2(-(get_precision() // 2)) * max(to_scalar(1), abs(g2.scale))
    ratio = to_scalar(0) if rhs <= floor else lhs / rhs
    if lhs > rhs * (1 + tol_rel) + floor:
        raise LsBoundViolation(
            f"upper bound {lhs} exceeds comparison bound {rhs} at degree {n}"
        )
    return lhs, rhs, ratio


def oq2_scaled_error(f: TargetSpec, half_width, n: int, tol_rel="1e-10", grid_factor: int = 32):
    """Constrained error bracket on [-a, a] via the affine substitution."""
    a = to_scalar(half_width)
    if not a > 0:
        raise ValueError("half_width must be > 0")
    g = replace(f, half_width=a)
    r = best_convex_approx(g, n, tol_rel, grid_factor)
    return r.error_lower, r.error_upper
