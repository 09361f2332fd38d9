"""Dense LP solver at working precision.

Problem form: minimise c.z subject to A z <= b with z free (unbounded sign).

The solve runs a two-phase primal simplex on the dual, which for this primal
is the standard-form problem

    minimise b.y   subject to  A^T y = -c,  y >= 0,

so every dual variable is sign-constrained and no variable splitting is
needed.  The simplex multipliers of the dual solve are exactly the primal
solution z, and the reduced costs are the primal slacks b - A z, which is
what makes the returned certificates cheap:

    optimal:    A z <= b + eps,  y >= 0,  A^T y + c = 0 within eps,
                y.(b - A z) <= eps,  and c.z = -b.y within eps.
    infeasible: y holds a Farkas ray:  y >= 0, A^T y = 0, b.y < 0.
    unbounded:  z holds an improving ray:  A z <= 0, c.z < 0.

Anti-cycling follows Dantzig pricing with a permanent switch to Bland's
rule after 10*(rows+cols) pivots without objective progress; the iteration
cap is 1000*(rows+cols).  All pivot decisions are deterministic, so
identical inputs give identical pivot sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import gmpy2

from .linalg import SingularMatrixError, invert, solve
from .precision import Scalar, get_precision, to_scalar

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def _dot(a, b):
    acc = a[0] * b[0]
    for i in range(1, len(a)):
        acc += a[i] * b[i]
    return acc


class LPError(RuntimeError):
    """Explicit solver failure (iteration cap, numerical stall, bad certificate)."""


@dataclass
class LPProblem:
    objective: list
    rows: list
    rhs: list

    def __post_init__(self):
        self.objective = [to_scalar(v) for v in self.objective]
        self.rows = [[to_scalar(v) for v in row] for row in self.rows]
        self.rhs = [to_scalar(v) for v in self.rhs]
        if not self.objective:
            raise ValueError("LPProblem needs at least one variable")
        if not self.rows:
            raise ValueError("LPProblem needs at least one constraint")
        k = len(self.objective)
        if any(len(row) != k for row in self.rows):
            raise ValueError("constraint row length must equal objective length")
        if len(self.rhs) != len(self.rows):
            raise ValueError("rhs length must equal number of rows")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.rows)


@dataclass
class LPSolution:
    status: str
    z: Optional[list] = None
    objective_value: Optional[Scalar] = None
    y: Optional[list] = None
    max_primal_violation: Optional[Scalar] = None
    max_dual_violation: Optional[Scalar] = None
    comp_slackness_gap: Optional[Scalar] = None
    duality_gap: Optional[Scalar] = None
    dual_objective_value: Optional[Scalar] = None
    iterations: int = 0
    basis: Optional[tuple] = None


class _DualTableau:
    """Dense tableau for min h.y s.t. M y = g, y >= 0 (k rows, m columns).

    Columns m..m+k-1 are the phase-1 artificials and are kept for the whole
    solve: their transformed entries are B^{-1}, which both re-anchors a
    warm-start basis and yields the simplex multipliers at the end.
    """

    def __init__(self, columns, g, row_factors):
        self.m = len(columns)
        self.k = len(g)
        self.row_factors = row_factors  # tableau row = factor * original equation
        zero = to_scalar(0)
        one = to_scalar(1)
        self.rows = []
        for r in range(self.k):
            row = [columns[j][r] for j in range(self.m)]
            row.extend(one if r2 == r else zero for r2 in range(self.k))
            row.append(g[r])
            self.rows.append(row)
        self.obj = [zero] * (self.m + self.k + 1)
        self.basis = list(range(self.m, self.m + self.k))
        self.is_basic = [False] * (self.m + self.k)
        for j in self.basis:
            self.is_basic[j] = True
        self.iterations = 0
        prec = get_precision()
        self.eps = gmpy2.exp2(-(prec // 2))

    # -- tableau primitives ------------------------------------------------

    def pivot(self, r: int, col: int):
        rows = self.rows
        prow = rows[r]
        inv = 1 / prow[col]
        if inv != 1:
            for i in range(len(prow)):
                if prow[i] != 0:
                    prow[i] *= inv
        prow[col] = to_scalar(1)
        for row in rows + [self.obj]:
            if row is prow:
                continue
            f = row[col]
            if f == 0:
                continue
            for i in range(len(row)):
                pv = prow[i]
                if pv != 0:
                    row[i] -= f * pv
            row[col] = to_scalar(0)
        self.is_basic[self.basis[r]] = False
        self.basis[r] = col
        self.is_basic[col] = True
        self.iterations += 1

    def set_phase1_objective(self):
        zero = to_scalar(0)
        obj = [zero] * (self.m + self.k + 1)
        for r in range(self.k):
            row = self.rows[r]
            for j in range(self.m):
                if row[j] != 0:
                    obj[j] -= row[j]
            obj[-1] -= row[-1]
        self.obj = obj

    def set_phase2_objective(self, costs):
        """costs has length m (artificials cost 0)."""
        zero = to_scalar(0)
        obj = list(costs) + [zero] * (self.k + 1)
        for r in range(self.k):
            b = self.basis[r]
            cb = costs[b] if b < self.m else zero
            if cb == 0:
                continue
            row = self.rows[r]
            for i in range(len(row)):
                if row[i] != 0:
                    obj[i] -= cb * row[i]
        self.obj = obj

    # -- simplex loop --------------------------------------------------------

    def run(self, allow_artificial_entering: bool, pivot_budget: int, stall_limit: int):
        """Pivot to optimality.  Returns None, or the entering column index
        when the problem is unbounded in that direction."""
        eps = self.eps
        obj = self.obj
        m = self.m
        limit = m if not allow_artificial_entering else m + self.k
        bland = False
        stall = 0
        best_value = -obj[-1]
        while True:
            if self.iterations > pivot_budget:
                raise LPError("simplex iteration cap exceeded")
            enter = -1
            if bland:
                for j in range(limit):
                    if not self.is_basic[j] and obj[j] < -eps:
                        enter = j
                        break
            else:
                best = -eps
                for j in range(limit):
                    if not self.is_basic[j] and obj[j] < best:
                        best = obj[j]
                        enter = j
            if enter < 0:
                return None
            rows = self.rows
            leave = -1
            best_ratio = None
            for r in range(self.k):
                a = rows[r][enter]
                if a > eps:
                    rhs = rows[r][-1]
                    if rhs < 0:
                        rhs = to_scalar(0)
                    ratio = rhs / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[r] < self.basis[leave])
                    ):
                        best_ratio = ratio
                        leave = r
            if leave < 0:
                return enter
            self.pivot(leave, enter)
            value = -self.obj[-1]
            obj = self.obj
            if value < best_value - eps * (1 + abs(best_value)):
                best_value = value
                stall = 0
            else:
                stall += 1
                if stall > stall_limit:
                    bland = True

    def drive_out_artificials(self):
        eps = self.eps
        for r in range(self.k):
            if self.basis[r] < self.m:
                continue
            row = self.rows[r]
            best_j, best_a = -1, eps
            for j in range(self.m):
                if not self.is_basic[j] and abs(row[j]) > best_a:
                    best_j, best_a = j, abs(row[j])
            if best_j >= 0:
                self.pivot(r, best_j)
            # else: redundant equation, artificial stays basic at level 0
        for r in range(self.k):
            if -self.eps < self.rows[r][-1] < 0:
                self.rows[r][-1] = to_scalar(0)

    def install_basis(self, hint) -> bool:
        """Pivot the hinted columns into the basis; False when that fails."""
        eps = self.eps
        taken = [False] * self.k
        for j in hint:
            best_r, best_a = -1, eps
            for r in range(self.k):
                if not taken[r] and abs(self.rows[r][j]) > best_a:
                    best_r, best_a = r, abs(self.rows[r][j])
            if best_r < 0:
                return False
            self.pivot(best_r, j)
            taken[best_r] = True
        for r in range(self.k):
            rhs = self.rows[r][-1]
            if rhs < -self.eps:
                return False
            if rhs < 0:
                self.rows[r][-1] = to_scalar(0)
        return True

    # -- solution pieces ----------------------------------------------------

    def dual_values(self):
        """y for the tableau columns (length m)."""
        y = [to_scalar(0)] * self.m
        for r in range(self.k):
            b = self.basis[r]
            if b < self.m:
                v = self.rows[r][-1]
                y[b] = v if v > 0 else to_scalar(0)
        return y

    def multipliers(self, costs_basic_artificial_zero=True):
        """Simplex multipliers of the current objective row, per original
        equation (row factors undone)."""
        out = []
        for r in range(self.k):
            rc = self.obj[self.m + r]
            # reduced cost of artificial r is cost_art - pi_r
            cost_art = to_scalar(0) if costs_basic_artificial_zero else to_scalar(1)
            pi = cost_art - rc
            out.append(pi * self.row_factors[r])
        return out

    def ray(self, enter: int):
        """Improving ray in y-space for an unbounded entering column."""
        zero = to_scalar(0)
        d = [zero] * self.m
        d[enter] = to_scalar(1)
        for r in range(self.k):
            b = self.basis[r]
            if b < self.m:
                step = -self.rows[r][enter]
                d[b] = step if step > 0 else zero
        return d


def _float_optimal_basis(problem: LPProblem, col_scales, basis_hint):
    """Two-phase simplex on the dual in float64; returns a candidate optimal
    basis (tuple of row indices) or None.  This is only a pathfinder: any
    basis it proposes is re-derived and certified at working precision, and
    every non-optimal outcome falls back to the exact solver."""
    import numpy as np

    k = problem.n_vars
    m = problem.n_rows
    eps = 1e-11
    D = np.empty((k, m))
    for i in range(m):
        s = float(col_scales[i])
        for r in range(k):
            D[r, i] = float(problem.rows[i][r]) / s
    g = np.array([-float(c) for c in problem.objective])
    h = np.array([float(problem.rhs[i]) / float(col_scales[i]) for i in range(m)])
    scale_rows = np.maximum(np.abs(D).max(axis=1), np.abs(g))
    scale_rows[scale_rows == 0] = 1.0
    D /= scale_rows[:, None]
    g = g / scale_rows
    flip = np.where(g < 0, -1.0, 1.0)
    D *= flip[:, None]
    g = g * flip
    if not (np.all(np.isfinite(D)) and np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
        return None

    T = np.zeros((k + 1, m + k + 1))
    T[:k, :m] = D
    T[:k, m : m + k] = np.eye(k)
    T[:k, -1] = g
    basis = list(range(m, m + k))
    budget = 1000 * (m + k)
    iterations = 0

    def pivot(r, col):
        nonlocal iterations
        prow = T[r] / T[r, col]
        colvals = T[:, col].copy()
        colvals[r] = 0.0
        T[:] = T - np.outer(colvals, prow)
        T[r] = prow
        T[:, col] = 0.0
        T[r, col] = 1.0
        basis[r] = col
        iterations += 1

    def run(limit, stall_limit):
        nonlocal iterations
        bland = False
        stall = 0
        best_val = -T[k, -1]
        basic_mask = np.zeros(m + k, dtype=bool)
        while True:
            if iterations > budget:
                return "cap"
            basic_mask[:] = False
            basic_mask[basis] = True
            rc = T[k, :limit].copy()
            rc[basic_mask[:limit]] = np.inf
            if bland:
                neg = np.nonzero(rc < -eps)[0]
                if neg.size == 0:
                    return None
                enter = int(neg[0])
            else:
                enter = int(np.argmin(rc))
                if not rc[enter] < -eps:
                    return None
            colv = T[:k, enter]
            ok = colv > eps
            if not ok.any():
                return enter
            ratios = np.where(ok, np.maximum(T[:k, -1], 0.0) / np.where(ok, colv, 1.0), np.inf)
            best = ratios.min()
            cand = np.nonzero(ratios <= best + eps * (1 + best))[0]
            leave = int(min(cand, key=lambda r: basis[r]))
            pivot(leave, enter)
            val = -T[k, -1]
            if val < best_val - eps * (1 + abs(best_val)):
                best_val = val
                stall = 0
            else:
                stall += 1
                if stall > stall_limit:
                    bland = True

    warm = False
    if basis_hint is not None and len(basis_hint) == k and len(set(basis_hint)) == k:
        if all(0 <= j < m for j in basis_hint):
            ok = True
            for j in basis_hint:
                r_best = -1
                a_best = eps
                for r in range(k):
                    if basis[r] >= m and abs(T[r, j]) > a_best:
                        r_best, a_best = r, abs(T[r, j])
                if r_best < 0:
                    ok = False
                    break
                pivot(r_best, j)
            if ok and (T[:k, -1] >= -1e-9).all():
                T[:k, -1] = np.maximum(T[:k, -1], 0.0)
                warm = True
    if not warm:
        T = np.zeros((k + 1, m + k + 1))
        T[:k, :m] = D
        T[:k, m : m + k] = np.eye(k)
        T[:k, -1] = g
        basis = list(range(m, m + k))
        iterations = 0
        T[k, :m] = -D.sum(axis=0)
        T[k, -1] = -g.sum()
        out = run(m, 10 * (m + k))
        if out is not None:
            return None
        if -T[k, -1] > 1e-9:
            return None  # dual looks infeasible; let the exact path decide
        for r in range(k):
            if basis[r] >= m:
                row = np.abs(T[r, :m]).copy()
                for b in basis:
                    if b < m:
                        row[b] = 0.0
                j = int(np.argmax(row))
                if row[j] > eps:
                    pivot(r, j)

    costs = np.zeros(m + k)
    costs[:m] = h
    T[k, :] = 0.0
    T[k, : m + k] = costs
    for r in range(k):
        b = basis[r]
        cb = costs[b] if b < m else 0.0
        if cb != 0.0:
            T[k] -= cb * T[r]
    out = run(m, 10 * (m + k))
    if out is not None:
        return None
    if any(b >= m for b in basis):
        return None
    return tuple(sorted(int(b) for b in basis))


def _build_tableau(problem: LPProblem, col_scales, g_vector):
    k = problem.n_vars
    m = problem.n_rows
    columns = []
    for i in range(m):
        s = col_scales[i]
        columns.append([problem.rows[i][r] / s for r in range(k)])
    # equation scaling: keep tableau entries O(1) so eps thresholds mean something
    factors = []
    g = []
    for r in range(k):
        mag = max(abs(g_vector[r]), max((abs(col[r]) for col in columns), default=to_scalar(0)))
        f = to_scalar(1) if mag == 0 else 1 / mag
        if g_vector[r] * f < 0:
            f = -f
        factors.append(f)
        g.append(g_vector[r] * f)
    for col in columns:
        for r in range(k):
            col[r] = col[r] * factors[r]
    return _DualTableau(columns, g, factors)


def _zero_column_vars(problem: LPProblem):
    """Primal variables that appear in no constraint."""
    free = []
    for r in range(problem.n_vars):
        if all(row[r] == 0 for row in problem.rows):
            free.append(r)
    return free


def _drop_vars(problem: LPProblem, drop):
    keep = [r for r in range(problem.n_vars) if r not in drop]
    return (
        LPProblem(
            [problem.objective[r] for r in keep],
            [[row[r] for r in keep] for row in problem.rows],
            list(problem.rhs),
        ),
        keep,
    )


def solve_lp(problem: LPProblem, tol, basis_hint: Optional[Sequence[int]] = None) -> LPSolution:
    """Solve min c.z s.t. A z <= b (z free) with certified output.

    `tol` bounds every certificate residual of an optimal return; a result
    that cannot be certified that tightly raises LPError instead of being
    returned.  `basis_hint` is a tuple of row indices from a previous
    solution's `basis`; it is validated and silently ignored when stale.
    """
    tol = to_scalar(tol)
    if not tol > 0:
        raise ValueError("tol must be positive")

    # variables outside every constraint: improving ray or fixed at zero
    loose = _zero_column_vars(problem)
    if loose:
        zero = to_scalar(0)
        for r in loose:
            if problem.objective[r] != 0:
                ray = [zero] * problem.n_vars
                ray[r] = to_scalar(1) if problem.objective[r] < 0 else to_scalar(-1)
                return LPSolution(status=UNBOUNDED, z=ray)
        reduced, keep = _drop_vars(problem, set(loose))
        inner = solve_lp(reduced, tol, basis_hint)
        if inner.z is not None:
            z = [zero] * problem.n_vars
            for pos, r in enumerate(keep):
                z[r] = inner.z[pos]
            inner.z = z
        return inner

    k = problem.n_vars
    m = problem.n_rows
    col_scales = []
    for i in range(m):
        s = max(max(abs(v) for v in problem.rows[i]), abs(problem.rhs[i]))
        col_scales.append(s if s > 0 else to_scalar(1))
    g_vector = [-c for c in problem.objective]
    costs = [problem.rhs[i] / col_scales[i] for i in range(m)]
    budget = 1000 * (m + k)
    stall_limit = 10 * (m + k)

    # fast routes: certify a candidate basis at working precision, repairing
    # it by exact active-set steps when it is a few vertices off.  The first
    # candidate is the caller's previous basis, the second comes from a
    # float64 pathfinder; anything unrepairable falls through to the exact
    # two-phase tableau.
    def _try_basis(cand):
        sol = _certify_basis(problem, cand, tol, iterations=0)
        if sol is not None:
            return sol
        repaired = _polish_active_set(problem, cand, tol)
        if repaired is not None:
            return _certify_basis(problem, repaired, tol, iterations=0)
        return None

    if (
        basis_hint is not None
        and len(basis_hint) == k
        and len(set(basis_hint)) == k
        and all(0 <= j < m for j in basis_hint)
    ):
        sol = _try_basis(tuple(basis_hint))
        if sol is not None:
            return sol
    candidate = _float_optimal_basis(problem, col_scales, basis_hint)
    if candidate is not None:
        sol = _try_basis(candidate)
        if sol is not None:
            return sol
        basis_hint = candidate  # still a good warm start for the exact path

    tab = None
    if basis_hint is not None:
        hint = [int(j) for j in basis_hint]
        if len(hint) == k and len(set(hint)) == k and all(0 <= j < m for j in hint):
            cand = _build_tableau(problem, col_scales, g_vector)
            if cand.install_basis(hint):
                tab = cand

    if tab is None:
        tab = _build_tableau(problem, col_scales, g_vector)
        tab.set_phase1_objective()
        unb = tab.run(False, budget, stall_limit)
        if unb is not None:
            raise LPError("phase 1 unbounded; input is numerically inconsistent")
        if -tab.obj[-1] > tab.eps:
            return _dual_infeasible(problem, tab, col_scales, costs, tol, budget, stall_limit)
        tab.drive_out_artificials()

    tab.set_phase2_objective(costs)
    unb = tab.run(False, budget, stall_limit)
    if unb is not None:
        # dual unbounded: primal infeasible, Farkas ray from the open direction
        ray = tab.ray(unb)
        return _certified_infeasible(problem, ray, col_scales, tol, tab.iterations)
    return _extract_optimal(problem, tab, col_scales, tol)


def _dual_infeasible(problem, tab, col_scales, costs, tol, budget, stall_limit):
    """The dual has no feasible point: primal is unbounded or infeasible."""
    ray_z = tab.multipliers(costs_basic_artificial_zero=False)
    aux = _build_tableau(problem, col_scales, [to_scalar(0)] * problem.n_vars)
    aux.set_phase2_objective(costs)
    aux.drive_out_artificials()
    unb = aux.run(False, budget, stall_limit)
    iterations = tab.iterations + aux.iterations
    if unb is not None:
        return _certified_infeasible(problem, aux.ray(unb), col_scales, tol, iterations)
    # primal feasible, so the phase-1 multipliers certify unboundedness
    norm = max(abs(v) for v in ray_z)
    if norm == 0:
        raise LPError("degenerate unboundedness certificate")
    d = [v / norm for v in ray_z]
    viol = max(sum(row[r] * d[r] for r in range(problem.n_vars)) for row in problem.rows)
    descent = sum(problem.objective[r] * d[r] for r in range(problem.n_vars))
    if viol > tol or descent >= 0:
        raise LPError("unboundedness certificate failed verification")
    return LPSolution(status=UNBOUNDED, z=d, iterations=iterations)


def _certified_infeasible(problem, ray, col_scales, tol, iterations):
    y = [ray[i] / col_scales[i] for i in range(problem.n_rows)]
    norm = max(abs(v) for v in y)
    if norm == 0:
        raise LPError("degenerate infeasibility certificate")
    y = [v / norm for v in y]
    k = problem.n_vars
    resid = to_scalar(0)
    for r in range(k):
        s = sum(y[i] * problem.rows[i][r] for i in range(problem.n_rows))
        resid = max(resid, abs(s))
    value = sum(y[i] * problem.rhs[i] for i in range(problem.n_rows))
    if resid > tol or value >= 0:
        raise LPError("infeasibility certificate failed verification")
    return LPSolution(status=INFEASIBLE, y=y, iterations=iterations)


def _solution_from_zy(problem, z, y, tol, iterations, basis) -> Optional[LPSolution]:
    """Measure every certificate residual on the original data; None when the
    pair (z, y) cannot be certified within tol."""
    k = problem.n_vars
    m = problem.n_rows
    primal_viol = to_scalar(0)
    comp = to_scalar(0)
    b_dot_y = to_scalar(0)
    for i in range(m):
        slack = problem.rhs[i] - _dot(problem.rows[i], z)
        if -slack > primal_viol:
            primal_viol = -slack
        if y[i] != 0:
            comp += y[i] * slack
            b_dot_y += y[i] * problem.rhs[i]
    dual_viol = to_scalar(0)
    for r in range(k):
        s = problem.objective[r]
        for i in range(m):
            if y[i] != 0:
                s += y[i] * problem.rows[i][r]
        dual_viol = max(dual_viol, abs(s))
    objective_value = sum(problem.objective[r] * z[r] for r in range(k))
    gap = abs(objective_value + b_dot_y)
    comp = abs(comp)
    if (
        primal_viol > tol
        or dual_viol > tol
        or comp > tol
        or gap > tol * (1 + abs(objective_value))
    ):
        return None
    return LPSolution(
        status=OPTIMAL,
        z=z,
        objective_value=objective_value,
        y=y,
        max_primal_violation=primal_viol,
        max_dual_violation=dual_viol,
        comp_slackness_gap=comp,
        duality_gap=gap,
        dual_objective_value=-b_dot_y,
        iterations=iterations,
        basis=basis,
    )


class _ActiveSet:
    """Exact active-set state: a basis of k rows with M^{-1} kept explicit.

    Row replacements update the inverse by a Sherman-Morrison rank-1 step
    (k^2 work) with periodic full refactorisation for hygiene; z and the
    multipliers are matvec products against the inverse.
    """

    REFRESH_EVERY = 48

    def __init__(self, problem, basis):
        self.problem = problem
        self.k = problem.n_vars
        self.basis = list(basis)
        self.pivots = 0
        self._refactor()

    def _refactor(self):
        mat = [self.problem.rows[i] for i in self.basis]
        self.binv = invert(mat)  # raises SingularMatrixError on junk bases

    def _left_apply(self, vec):
        """vec^T * binv as a list (used for z, multipliers, row expansion)."""
        k = self.k
        binv = self.binv
        out = [None] * k
        for i in range(k):
            acc = vec[0] * binv[0][i]
            for r in range(1, k):
                acc += vec[r] * binv[r][i]
            out[i] = acc
        return out

    def z(self):
        k = self.k
        binv = self.binv
        rhs = self.problem.rhs
        b = [rhs[i] for i in self.basis]
        out = [None] * k
        for r in range(k):
            row = binv[r]
            acc = row[0] * b[0]
            for i in range(1, k):
                acc += row[i] * b[i]
            out[r] = acc
        return out

    def multipliers(self):
        neg_c = [-v for v in self.problem.objective]
        return self._left_apply(neg_c)

    def expand_row(self, row):
        """w with row = sum_i w_i a_{basis_i} (i.e. M^{-T} row)."""
        return self._left_apply(row)

    def inv_column(self, pos):
        return [self.binv[r][pos] for r in range(self.k)]

    def replace(self, pos, new_row_index):
        old = self.problem.rows[self.basis[pos]]
        new = self.problem.rows[new_row_index]
        v = [new[r] - old[r] for r in range(self.k)]
        u = self.inv_column(pos)
        vb = self._left_apply(v)
        denom = 1 + vb[pos]
        floor = gmpy2.exp2(-(get_precision() - 16))
        self.basis[pos] = new_row_index
        self.pivots += 1
        if abs(denom) <= floor:
            self._refactor()
            return
        for r in range(self.k):
            ur = u[r] / denom
            if ur == 0:
                continue
            row = self.binv[r]
            for i in range(self.k):
                row[i] -= ur * vb[i]
        if self.pivots % self.REFRESH_EVERY == 0:
            self._refactor()


def _polish_active_set(problem, basis, tol, max_steps: int = 800):
    """Exact active-set repair of a near-optimal basis.

    Entry bases come either from the float pathfinder (which drifts by
    cond * 1e-16) or from the previous cutting-plane round (optimal for a
    subset of the rows).  Violated rows are pulled into the basis by
    dual-simplex steps, negative multipliers released by primal steps, all
    at working precision.  Returns a repaired basis or None.
    """
    k = problem.n_vars
    m = problem.n_rows
    eps = tol / 4
    piv_eps = gmpy2.exp2(-(get_precision() // 2))
    try:
        state = _ActiveSet(problem, basis)
    except SingularMatrixError:
        return None
    rows = problem.rows
    rhs = problem.rhs

    for _sweep in range(12):
        if state.pivots > max_steps:
            return None
        z = state.z()
        slacks = [rhs[j] - _dot(rows[j], z) for j in range(m)]
        violated = [j for j in range(m) if slacks[j] < -eps]
        progressed = False
        try:
            # dual-simplex passes: pull violated rows into the basis
            for j in violated:
                s_j = rhs[j] - _dot(rows[j], z)
                if s_j >= -eps:
                    continue
                y_b = state.multipliers()
                w = state.expand_row(rows[j])
                best_i = -1
                best_ratio = None
                for i in range(k):
                    if w[i] > piv_eps:
                        ratio = y_b[i] / w[i] if y_b[i] > 0 else to_scalar(0)
                        if best_ratio is None or ratio < best_ratio:
                            best_ratio = ratio
                            best_i = i
                if best_i < 0:
                    return None
                state.replace(best_i, j)
                if state.pivots > max_steps:
                    return None
                z = state.z()
                progressed = True
            # primal passes: release rows with negative multipliers
            for _ in range(k):
                y_b = state.multipliers()
                neg_pos = min(range(k), key=lambda i: y_b[i])
                if y_b[neg_pos] >= -eps:
                    break
                d = [-v for v in state.inv_column(neg_pos)]
                in_basis = set(state.basis)
                best_j = -1
                best_step = None
                for j in range(m):
                    if j in in_basis:
                        continue
                    adv = _dot(rows[j], d)
                    if adv > piv_eps:
                        step = rhs[j] - _dot(rows[j], z)
                        step = (step if step > 0 else to_scalar(0)) / adv
                        if best_step is None or step < best_step:
                            best_step = step
                            best_j = j
                if best_j < 0:
                    return None
                state.replace(neg_pos, best_j)
                if state.pivots > max_steps:
                    return None
                z = state.z()
                progressed = True
        except SingularMatrixError:
            return None
        if not progressed:
            return tuple(state.basis)
    return None


def _extract_optimal(problem, tab, col_scales, tol) -> LPSolution:
    m = problem.n_rows
    z = tab.multipliers()
    y_scaled = tab.dual_values()
    y = [y_scaled[i] / col_scales[i] for i in range(m)]
    basis = tuple(sorted(b for b in tab.basis if b < m))
    sol = _solution_from_zy(problem, z, y, tol, tab.iterations, basis)
    if sol is None:
        raise LPError("optimality certificates exceed tolerance")
    return sol


def _certify_basis(problem, basis, tol, iterations) -> Optional[LPSolution]:
    """Exact extraction from a candidate optimal basis (row index set).

    Recomputes z from the active rows and y from the dual equality system at
    working precision, then demands primal feasibility of every row and
    nonnegativity of y up to tol/4.  Returns None when the basis does not
    certify, in which case the caller falls back to the exact simplex.
    """
    k = problem.n_vars
    m = problem.n_rows
    if len(basis) != k or len(set(basis)) != k:
        return None
    if any(not (0 <= i < m) for i in basis):
        return None
    active = [problem.rows[i] for i in basis]
    try:
        z = solve(active, [problem.rhs[i] for i in basis])
        dual_mat = [[active[i][r] for i in range(k)] for r in range(k)]
        y_b = solve(dual_mat, [-c for c in problem.objective])
    except SingularMatrixError:
        return None
    slack_floor = -tol / 4
    if any(v < slack_floor for v in y_b):
        return None
    for j in range(m):
        slack = problem.rhs[j] - _dot(problem.rows[j], z)
        if slack < slack_floor:
            return None
    y = [to_scalar(0)] * m
    for pos, i in enumerate(basis):
        y[i] = y_b[pos] if y_b[pos] > 0 else to_scalar(0)
    return _solution_from_zy(problem, z, y, tol, iterations, tuple(sorted(basis)))
