"""Best uniform polynomial approximation on [-1, 1] by Remez exchange.

For a target f and degree n this computes the minimax polynomial together
with a certified bracket: the levelled reference error |h| is a valid lower
bound on the true best error (alternation on n+2 points), and the measured
sup of the final error curve is an upper bound.  The loop is the classical
multi-point exchange: level on the reference, locate all local extrema of
the error by a dense scan with golden-section refinement, exchange the whole
reference against an alternating subset, repeat until sup|e|/|h| - 1 is
below tol_rel.

The scan grid is the union of a uniform and a Chebyshev-distributed grid of
max(2048, grid_factor*(n+2)) panels each, and always contains -1, 0 and 1;
the cusp of |x|**lam targets sits exactly at a grid point, where the error
is evaluated directly rather than through a smooth-extremum refinement.

The textbook initial reference (the extrema of T_{n+1}) is symmetric, which
for even targets at even degree levels to h = 0 and stalls the exchange; on
detecting that, the loop restarts once from the extrema of T_{n+2} with the
left endpoint dropped, which breaks the symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2

from .cheb import ChebPoly
from .linalg import SingularMatrixError, solve
from .precision import Scalar, get_precision, pi, tiny, to_scalar
from .targets import TargetSpec, eval_target

MAX_ITERATIONS = 200


@dataclass(frozen=True)
class Reference:
    """Alternation nodes: strictly increasing, degree + 2 of them."""

    nodes: tuple

    def __post_init__(self):
        nodes = tuple(to_scalar(x) for x in self.nodes)
        if len(nodes) < 2:
            raise ValueError("a reference needs at least 2 nodes")
        for a, b in zip(nodes, nodes[1:]):
            if not a < b:
                raise ValueError("reference nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    def __len__(self):
        return len(self.nodes)


@dataclass
class ApproxResult:
    degree: int
    polynomial: ChebPoly
    error_lower: Scalar
    error_upper: Scalar
    equioscillation_ratio: Scalar
    iterations: int
    reference: Reference


class RemezError(RuntimeError):
    """Exchange failure; carries the best bracket found so far."""

    def __init__(self, message, error_lower=None, error_upper=None):
        super().__init__(message)
        self.error_lower = error_lower
        self.error_upper = error_upper


# ---------------------------------------------------------------------------
# scan machinery (shared with the constrained solver)

_GRID_CACHE = {}


def scan_grid(degree: int, grid_factor: int = 32):
    """Union of uniform and Chebyshev-spaced grids with -1, 0, 1 included."""
    panels = max(2048, grid_factor * (degree + 2))
    key = (panels, get_precision())
    cached = _GRID_CACHE.get(key)
    if cached is not None:
        return cached
    pts = set()
    two = to_scalar(2)
    for i in range(panels + 1):
        pts.add(two * i / panels - 1)
    p = pi()
    for i in range(1, panels):
        c = gmpy2.cos(p * i / panels)
        if c > 1:
            c = to_scalar(1)
        elif c < -1:
            c = to_scalar(-1)
        pts.add(c)
    pts.add(to_scalar(0))
    grid = tuple(sorted(pts))
    if len(_GRID_CACHE) > 32:
        _GRID_CACHE.clear()
    _GRID_CACHE[key] = grid
    return grid


def _golden_iterations(tol_rel) -> int:
    # position accuracy sqrt(tol_rel * 1e-4) of the bracket width suffices:
    # extremum values are quadratically insensitive to position
    rho = math.sqrt(max(float(tol_rel), 1e-30) * 1e-4)
    return min(64, max(32, int(math.log(1 / rho) / 0.4812) + 1))


def _golden_max(fn, a, b, iterations):
    """Golden-section maximisation on [a, b]; returns (x, fn(x))."""
    invphi = (gmpy2.sqrt(to_scalar(5)) - 1) / 2
    best_x, best_v = a, fn(a)
    vb = fn(b)
    if vb > best_v:
        best_x, best_v = b, vb
    h = b - a
    c = b - invphi * h
    d = a + invphi * h
    fc, fd = fn(c), fn(d)
    for _ in range(iterations):
        if fc > best_v:
            best_x, best_v = c, fc
        if fd > best_v:
            best_x, best_v = d, fd
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - invphi * h
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + invphi * h
            fd = fn(d)
    return best_x, best_v


def scan_extrema(err_fn, grid, grid_vals, tol_rel):
    """Locate and refine the local extrema of an error curve.

    Returns (extrema, sup): extrema is a list of (x, err_fn(x)) sorted by x,
    one entry per grid-local extremum after golden-section refinement in the
    bracketing panel; sup is the largest |value| seen anywhere.
    """
    iters = _golden_iterations(tol_rel)
    n_pts = len(grid)
    sup = max(abs(v) for v in grid_vals)
    out = []
    for i in range(n_pts):
        v = grid_vals[i]
        left = grid_vals[i - 1] if i > 0 else None
        right = grid_vals[i + 1] if i + 1 < n_pts else None
        is_max = (left is None or v >= left) and (right is None or v >= right)
        is_min = (left is None or v <= left) and (right is None or v <= right)
        if not (is_max or is_min):
            continue
        if is_max and is_min:
            # flat neighbourhood; keep the grid point as-is
            out.append((grid[i], v))
            continue
        sign = 1 if is_max else -1
        a = grid[i - 1] if i > 0 else grid[i]
        b = grid[i + 1] if i + 1 < n_pts else grid[i]
        x, signed = _golden_max(lambda t: sign * err_fn(t), a, b, iters)
        val = sign * signed
        out.append((x, val))
        if abs(val) > sup:
            sup = abs(val)
    out.sort(key=lambda p: p[0])
    return out, sup


def alternating_extrema(points, floor):
    """Collapse same-sign runs keeping the largest magnitude per run."""
    chain = []
    for x, v in points:
        if abs(v) <= floor:
            continue
        if chain and (chain[-1][1] > 0) == (v > 0):
            if abs(v) > abs(chain[-1][1]):
                chain[-1] = (x, v)
        else:
            chain.append((x, v))
    return chain


def _trim_to(chain, need):
    chain = list(chain)
    excess = len(chain) - need
    if excess <= 0:
        return chain
    if excess % 2 == 1:
        if abs(chain[0][1]) < abs(chain[-1][1]):
            chain.pop(0)
        else:
            chain.pop()
        excess -= 1
    while excess > 0:
        best_i = min(
            range(len(chain) - 1),
            key=lambda i: max(abs(chain[i][1]), abs(chain[i + 1][1])),
        )
        del chain[best_i : best_i + 2]
        excess -= 2
    return chain


# ---------------------------------------------------------------------------
# the exchange loop

def _initial_nodes(n: int):
    p = pi()
    nodes = [gmpy2.cos(p * k / (n + 1)) for k in range(n + 2)]
    return _clean_nodes(nodes)


def _asymmetric_nodes(n: int):
    p = pi()
    nodes = [gmpy2.cos(p * k / (n + 2)) for k in range(n + 2)]
    return _clean_nodes(nodes)


def _clean_nodes(nodes):
    fixed = []
    for x in sorted(nodes):
        if x > 1:
            x = to_scalar(1)
        elif x < -1:
            x = to_scalar(-1)
        fixed.append(x)
    return fixed


def _t_row(n: int, x):
    """T_0(x) .. T_n(x) by the forward recurrence."""
    row = [to_scalar(1)]
    if n >= 1:
        row.append(x)
        two_x = x + x
        for k in range(1, n):
            row.append(two_x * row[k] - row[k - 1])
    return row


def _solve_reference_system(nodes, f_vals, n):
    """Level the error: P(x_k) + (-1)^k h = f(x_k)."""
    matrix = []
    for k, x in enumerate(nodes):
        row = _t_row(n, x)
        row.append(to_scalar(1) if k % 2 == 0 else to_scalar(-1))
        matrix.append(row)
    sol = solve(matrix, f_vals)
    return sol[: n + 1], sol[n + 1]


def best_approx(f: TargetSpec, n: int, tol_rel="1e-10", grid_factor: int = 32) -> ApproxResult:
    """Minimax approximation of degree <= n with a certified error bracket.

    error_lower is the levelled reference error (a de la Vallee Poussin
    lower bound), error_upper the measured sup of the final error curve;
    on success (error_upper - error_lower) <= tol_rel * error_upper.
    """
    if n < 0:
        raise ValueError("degree must be >= 0")
    tol_rel = to_scalar(tol_rel)
    if not (0 < tol_rel <= to_scalar("1e-3")):
        raise ValueError("tol_rel must lie in (0, 1e-3]")

    grid = scan_grid(n, grid_factor)
    f_grid = [eval_target(f, x) for x in grid]
    f_scale = max(abs(v) for v in f_grid)
    zero_floor = tiny(64) * max(to_scalar(1), f_scale)

    nodes = _initial_nodes(n)
    reinit_done = False
    best_lower = to_scalar(0)
    best_upper = None

    for iteration in range(1, MAX_ITERATIONS + 1):
        f_nodes = [eval_target(f, x) for x in nodes]
        try:
            coeffs, h = _solve_reference_system(nodes, f_nodes, n)
        except SingularMatrixError as exc:
            raise RemezError(
                f"reference system is singular at iteration {iteration}: {exc}",
                best_lower,
                best_upper,
            ) from exc
        p = ChebPoly(coeffs)

        def err(x, _p=p):
            return eval_target(f, x) - _p.eval(x)

        err_grid = [f_grid[i] - p.eval(grid[i]) for i in range(len(grid))]
        extrema, sup = scan_extrema(err, grid, err_grid, tol_rel)

        if sup <= zero_floor:
            # the target is itself a polynomial of admissible degree
            return ApproxResult(
                degree=n,
                polynomial=p,
                error_lower=to_scalar(0),
                error_upper=sup,
                equioscillation_ratio=to_scalar(1),
                iterations=iteration,
                reference=Reference(tuple(nodes)),
            )

        abs_h = abs(h)
        if abs_h <= zero_floor:
            if not reinit_done:
                nodes = _asymmetric_nodes(n)
                reinit_done = True
                continue
            raise RemezError(
                "levelled error vanished on an asymmetric reference",
                best_lower,
                best_upper,
            )

        if abs_h > best_lower:
            best_lower = abs_h
        if best_upper is None or sup < best_upper:
            best_upper = sup

        if sup / abs_h - 1 <= tol_rel:
            e_nodes = [f_nodes[k] - p.eval(nodes[k]) for k in range(len(nodes))]
            lower = min(abs(v) for v in e_nodes)
            alternates = all(
                (a > 0) != (b > 0) and a != 0 and b != 0
                for a, b in zip(e_nodes, e_nodes[1:])
            )
            if not alternates:
                lower = abs_h  # solve residue broke a sign; fall back to h
            upper = sup if sup > lower else lower
            return ApproxResult(
                degree=n,
                polynomial=p,
                error_lower=lower,
                error_upper=upper,
                equioscillation_ratio=lower / upper,
                iterations=iteration,
                reference=Reference(tuple(nodes)),
            )

        floor = sup * gmpy2.exp2(-(get_precision() // 2))
        chain = alternating_extrema(extrema, floor)
        if len(chain) < n + 2:
            if not reinit_done:
                nodes = _asymmetric_nodes(n)
                reinit_done = True
                continue
            raise RemezError(
                f"only {len(chain)} alternating extrema for a degree-{n} exchange",
                best_lower,
                best_upper,
            )
        chain = _trim_to(chain, n + 2)
        nodes = [x for x, _ in chain]

    raise RemezError(
        f"no convergence within {MAX_ITERATIONS} iterations", best_lower, best_upper
    )


def en_value(f: TargetSpec, n: int, tol_rel="1e-10", grid_factor: int = 32):
    """The certified bracket (lower, upper) around the degree-n minimax error."""
    r = best_approx(f, n, tol_rel, grid_factor)
    return r.error_lower, r.error_upper
