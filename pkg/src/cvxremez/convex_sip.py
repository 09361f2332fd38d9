"""Best uniform approximation by convex polynomials on [-1, 1].

The quantity computed is the infimum of ||f - P||_inf over polynomials of
degree <= n whose second derivative is nonnegative on all of [-1, 1].  This
is a semi-infinite LP in the coefficients plus a level variable t; it is
solved by cutting planes:

  * the finite LP carries error cuts  +-(f(x) - P(x)) <= t  on a growing
    point set and convexity cuts  P''(y) >= 0  on another, and is always a
    relaxation of the semi-infinite problem, so its value is a valid lower
    bound;
  * separation finds sup |f - P| with the same scan-and-refine machinery the
    exchange solver uses, and min P'' exactly through the polynomial root
    machinery; every violated point becomes a new cut (convexity first);
  * the loop stops when the worst violation is below tol_rel * t.

A final repair step makes the answer two-sided: if min P'' = -delta < 0,
adding (delta/2) x**2 raises P'' uniformly by delta and costs at most
delta/2 in sup error, so the repaired polynomial is feasible and its
measured sup error is a valid upper bound.

Cuts are never dropped within a solve, and each round restarts the LP from
the previous optimal basis, which the solver re-anchors cheaply.

Degrees 0 and 1 have an identically-zero second derivative, so the
constraint is vacuous and the unconstrained exchange answer is returned
directly; pass force_cutting_plane=True to run the general path anyway.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from .cheb import ChebPoly, cheb_basis_values, min_on_domain, roots_in_domain
from .precision import Scalar, get_precision, pi, tiny, to_scalar
from .remez import best_approx, scan_extrema, scan_grid
from .targets import TargetSpec, eval_target, is_convex

MAX_CUT_ROUNDS = 500


@dataclass
class ConvexApproxResult:
    degree: int
    polynomial: ChebPoly
    error_lower: Scalar
    error_upper: Scalar
    convexity_slack: Scalar
    cut_rounds: int
    n_error_cuts: int
    n_convexity_cuts: int


class ConvexSolveError(RuntimeError):
    def __init__(self, message, error_lower=None, error_upper=None):
        super().__init__(message)
        self.error_lower = error_lower
        self.error_upper = error_upper


def _chebyshev_points(count: int):
    p = pi()
    pts = []
    for k in range(count):
        c = gmpy2.cos(p * k / (count - 1))
        if c > 1:
            c = to_scalar(1)
        elif c < -1:
            c = to_scalar(-1)
        pts.append(c)
    pts.sort()
    return pts


def _second_derivative_row(n: int, y):
    _, _, d2 = cheb_basis_values(n, y)
    return d2


def _repair(p: ChebPoly, delta):
    """p + (delta/2) x**2, i.e. add delta/4 to the T_0 and T_2 coefficients."""
    quarter = delta / 4
    return p.plus_scaled_basis(0, quarter).plus_scaled_basis(2, quarter)


def best_convex_approx(
    f: TargetSpec,
    n: int,
    tol_rel="1e-10",
    grid_factor: int = 32,
    force_cutting_plane: bool = False,
) -> ConvexApproxResult:
    """Certified bracket around the best convex-polynomial error at degree n."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    if not is_convex(f):
        raise ValueError("target not convex on [-1, 1]")
    tol_rel = to_scalar(tol_rel)
    if not (0 < tol_rel <= to_scalar("1e-3")):
        raise ValueError("tol_rel must lie in (0, 1e-3]")

    if n <= 1 and not force_cutting_plane:
        r = best_approx(f, n, tol_rel, grid_factor)
        return ConvexApproxResult(
            degree=n,
            polynomial=r.polynomial,
            error_lower=r.error_lower,
            error_upper=r.error_upper,
            convexity_slack=to_scalar(0),
            cut_rounds=0,
            n_error_cuts=0,
            n_convexity_cuts=0,
        )

    from .lp import LPProblem, solve_lp  # local import keeps module load cheap

    k = n + 2  # variables a_0..a_n, t
    grid = scan_grid(n, grid_factor)
    f_grid = [eval_target(f, x) for x in grid]
    f_scale = max(abs(v) for v in f_grid)
    err_floor = tiny(64) * max(to_scalar(1), f_scale)
    prec = get_precision()
    # the certified lower bound is the exact dual value, so the LP only has
    # to be solved comfortably tighter than tol_rel, not to full precision
    lp_tol = gmpy2.exp2(-62) * max(to_scalar(1), f_scale)
    root_tol = gmpy2.exp2(-(prec // 2))

    objective = [to_scalar(0)] * (n + 1) + [to_scalar(1)]
    rows = []
    rhs = []
    seen_error = set()
    seen_convex = set()
    n_error = 0
    n_convex = 0

    def add_error_cut(x, sign: int) -> bool:
        nonlocal n_error
        key = (sign, x)
        if key in seen_error:
            return False
        seen_error.add(key)
        trow = _t_row_cached(n, x)
        row = [-sign * t for t in trow]
        row.append(to_scalar(-1))
        rows.append(row)
        rhs.append(-sign * eval_target(f, x))
        n_error += 1
        return True

    def add_convexity_cut(y) -> bool:
        nonlocal n_convex
        if y in seen_convex:
            return False
        seen_convex.add(y)
        d2row = _second_derivative_row(n, y)
        row = [-v for v in d2row]
        row.append(to_scalar(0))
        rows.append(row)
        rhs.append(to_scalar(0))
        n_convex += 1
        return True

    init_pts = _chebyshev_points(4 * n + 8)
    for x in init_pts + [to_scalar(0)]:
        add_error_cut(x, +1)
        add_error_cut(x, -1)
    for y in init_pts:
        add_convexity_cut(y)

    basis = None
    best_lower = to_scalar(0)
    best_upper = None
    poly = None
    t_val = None
    slack_before = None

    for round_no in range(1, MAX_CUT_ROUNDS + 1):
        problem = LPProblem(objective, [list(r) for r in rows], list(rhs))
        sol = solve_lp(problem, lp_tol, basis)
        if sol.status != "optimal":
            raise ConvexSolveError(
                f"cutting-plane LP came back {sol.status}", best_lower, best_upper
            )
        basis = sol.basis
        poly = ChebPoly(sol.z[: n + 1])
        t_val = sol.z[n + 1]
        if t_val < 0:
            t_val = to_scalar(0)
        # the dual value is a sound lower bound on the relaxation optimum
        # even if the returned vertex is epsilon-suboptimal
        t_dual = sol.dual_objective_value
        if t_dual is None or t_dual < 0:
            t_dual = to_scalar(0)
        if t_dual > best_lower:
            best_lower = t_dual

        # separation, convexity first
        d2 = poly.derivative().derivative()
        conv_candidates = [to_scalar(-1), to_scalar(1)]
        d3 = d2.derivative()
        if not d3.is_zero():
            conv_candidates.extend(roots_in_domain(d3, root_tol))
        neg_points = []
        min_d2 = None
        for y in conv_candidates:
            v = d2.eval(y)
            if min_d2 is None or v < min_d2:
                min_d2 = v
            if v < 0:
                neg_points.append(y)
        conv_viol = -min_d2 if min_d2 < 0 else to_scalar(0)

        def err(x, _p=poly):
            return eval_target(f, x) - _p.eval(x)

        err_grid = [f_grid[i] - poly.eval(grid[i]) for i in range(len(grid))]
        extrema, sup = scan_extrema(err, grid, err_grid, tol_rel)
        err_viol = sup - t_val

        worst = max(err_viol, conv_viol)
        if worst <= tol_rel * t_val + err_floor:
            slack_before = min_d2
            break

        added = False
        for y in neg_points:
            added = add_convexity_cut(y) or added
        slack_limit = t_val * (1 + tol_rel / 8) + err_floor
        for x, v in extrema:
            if abs(v) > slack_limit:
                added = add_error_cut(x, 1 if v > 0 else -1) or added
        if not added:
            raise ConvexSolveError(
                "separation found violations but no new cut points "
                f"(round {round_no}, violation {worst})",
                best_lower,
                best_upper,
            )
    else:
        raise ConvexSolveError(
            f"no convergence within {MAX_CUT_ROUNDS} cut rounds",
            best_lower,
            best_upper,
        )

    # repair to certified feasibility
    delta = -slack_before if slack_before < 0 else to_scalar(0)
    repaired = poly
    for _ in range(4):
        repaired = _repair(poly, delta) if delta > 0 else poly
        d2r = repaired.derivative().derivative()
        if d2r.is_zero():
            break
        _, remin = min_on_domain(d2r)
        if remin >= 0:
            break
        delta += -remin * (1 + gmpy2.exp2(-64))

    err_grid = [f_grid[i] - repaired.eval(grid[i]) for i in range(len(grid))]

    def err_rep(x, _p=repaired):
        return eval_target(f, x) - _p.eval(x)

    _, upper = scan_extrema(err_rep, grid, err_grid, tol_rel)
    lower = best_lower
    if lower > upper:
        lower = upper
    return ConvexApproxResult(
        degree=n,
        polynomial=repaired,
        error_lower=lower,
        error_upper=upper,
        convexity_slack=slack_before,
        cut_rounds=round_no,
        n_error_cuts=n_error,
        n_convexity_cuts=n_convex,
    )


_T_ROW_CACHE = {}


def _t_row_cached(n: int, x):
    key = (n, x, get_precision())
    row = _T_ROW_CACHE.get(key)
    if row is None:
        row = [to_scalar(1)]
        if n >= 1:
            row.append(x)
            two_x = x + x
            for j in range(1, n):
                row.append(two_x * row[j] - row[j - 1])
        if len(_T_ROW_CACHE) > 100_000:
            _T_ROW_CACHE.clear()
        _T_ROW_CACHE[key] = row
    return row


def en_convex_value(f: TargetSpec, n: int, tol_rel="1e-10", grid_factor: int = 32):
    """Certified (lower, upper) bracket around the constrained minimax error."""
    r = best_convex_approx(f, n, tol_rel, grid_factor)
    return r.error_lower, r.error_upper


def remez_convexity_slack(f: TargetSpec, n: int, tol_rel="1e-10", grid_factor: int = 32):
    """min P'' over [-1, 1] for the unconstrained optimum (diagnostic only)."""
    r = best_approx(f, n, tol_rel, grid_factor)
    d2 = r.polynomial.derivative().derivative()
    if d2.is_zero():
        return to_scalar(0)
    _, v = min_on_domain(d2)
    return v
