"""Independent oracles for cross-checking the solvers.

Everything here deliberately avoids the package's own solution paths: the
minimax oracles discretize onto a fixed grid and call scipy's HiGHS LP in
float64, the tiny-LP oracle enumerates vertices, and derivatives come from
central differences.  Agreement tolerances account for grid discretization
and float64 arithmetic.
"""

from __future__ import annotations

import itertools

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.optimize import linprog

import gmpy2
from cvxremez.linalg import SingularMatrixError, solve
from cvxremez.precision import to_scalar


def grid_minimax_lp(lam: float, n: int, convex: bool, npts: int = 20001,
                    half_width: float = 1.0, scale: float = 1.0) -> float:
    """Minimax error of degree <= n on a fixed uniform grid (float64 LP).

    The grid includes x = 0 and both endpoints, so the cusp of |x|**lam is
    sampled exactly.  With convex=True, P'' >= 0 is enforced at every grid
    point.  The value lower-bounds the continuum error by the grid gap.
    """
    x = np.linspace(-1.0, 1.0, npts)
    fx = scale * np.abs(half_width * x) ** lam
    eye = np.eye(n + 1)
    T = np.stack([npcheb.chebval(x, eye[j]) for j in range(n + 1)], axis=1)
    c = np.zeros(n + 2)
    c[-1] = 1.0
    ones = np.ones((npts, 1))
    blocks = [np.hstack([T, -ones]), np.hstack([-T, -ones])]
    rhs = [fx, -fx]
    if convex:
        T2 = np.stack(
            [npcheb.chebval(x, npcheb.chebder(eye[j], 2)) for j in range(n + 1)],
            axis=1,
        )
        blocks.append(np.hstack([-T2, np.zeros((npts, 1))]))
        rhs.append(np.zeros(npts))
    res = linprog(
        c,
        A_ub=np.vstack(blocks),
        b_ub=np.concatenate(rhs),
        bounds=[(None, None)] * (n + 2),
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"oracle LP failed: {res.message}")
    return float(res.fun)


def best_constant_bruteforce(f, npts_x: int = 4001, npts_c: int = 10001):
    """Brute-force best constant approximation of f on [-1, 1] (float grid)."""
    xs = np.linspace(-1.0, 1.0, npts_x)
    fx = np.array([float(f(x)) for x in xs])
    cs = np.linspace(fx.min(), fx.max(), npts_c)
    errs = np.abs(fx[None, :] - cs[:, None]).max(axis=1)
    i = int(np.argmin(errs))
    return float(cs[i]), float(errs[i])


def central_difference(f, x, h):
    """(f(x+h) - f(x-h)) / (2h) at working precision."""
    x = to_scalar(x)
    h = to_scalar(h)
    return (f(x + h) - f(x - h)) / (2 * h)


def vertex_enumeration_lp(objective, rows, rhs):
    """Exact optimum of min c.z s.t. A z <= b by enumerating basic vertices.

    Only sensible for a handful of variables; returns (value, z) over all
    feasible vertices, or None when no feasible vertex exists.
    """
    k = len(objective)
    m = len(rows)
    c = [to_scalar(v) for v in objective]
    a = [[to_scalar(v) for v in row] for row in rows]
    b = [to_scalar(v) for v in rhs]
    feas_eps = gmpy2.exp2(-100)
    best = None
    for subset in itertools.combinations(range(m), k):
        try:
            z = solve([a[i] for i in subset], [b[i] for i in subset])
        except SingularMatrixError:
            continue
        ok = True
        for j in range(m):
            s = b[j] - sum(a[j][r] * z[r] for r in range(k))
            if s < -feas_eps:
                ok = False
                break
        if not ok:
            continue
        val = sum(c[r] * z[r] for r in range(k))
        if best is None or val < best[0]:
            best = (val, z)
    return best
