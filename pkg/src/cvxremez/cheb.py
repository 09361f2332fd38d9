"""Chebyshev-basis polynomials on [-1, 1].

A polynomial is stored as coefficients a_0..a_n of the first-kind basis
T_k, so p(x) = sum a_k T_k(x).  Everything that follows (best uniform
approximation, the convexity constraint on second derivatives) lives on
[-1, 1]; general intervals are mapped here affinely by the caller.

Provided operations: Clenshaw evaluation, differentiation, real-root
location by sign-change subdivision, and global minimisation.  Root finding
deliberately reports one root per sign change; tangential (even-multiplicity)
roots can be missed, which is acceptable for the consumers here (they only
need sign-relevant stationary points).
"""

from __future__ import annotations

import gmpy2

from .precision import Scalar, get_precision, to_scalar


class DomainError(ValueError):
    """An evaluation point fell outside [-1, 1]."""


class ZeroPolynomialError(ValueError):
    """Root finding was asked about the identically-zero polynomial."""


def clamp_to_domain(x: Scalar) -> Scalar:
    if x > 1:
        return to_scalar(1)
    if x < -1:
        return to_scalar(-1)
    return x


class ChebPoly:
    """Polynomial in the Chebyshev basis, degree = index of last coefficient.

    Trailing exact zeros are permitted and count toward degree(); use
    trimmed() to drop them when a minimal representation matters.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [to_scalar(c) for c in coeffs]
        if not cs:
            cs = [to_scalar(0)]
        self.coeffs = tuple(cs)

    @classmethod
    def basis(cls, k: int) -> "ChebPoly":
        """The basis polynomial T_k."""
        return cls([0] * k + [1])

    @classmethod
    def zero(cls) -> "ChebPoly":
        return cls([0])

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def coeff_inf_norm(self) -> Scalar:
        return max(abs(c) for c in self.coeffs)

    def trimmed(self) -> "ChebPoly":
        cs = list(self.coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        return ChebPoly(cs)

    def eval(self, x) -> Scalar:
        """Evaluate by backward (Clenshaw) recurrence; requires |x| <= 1."""
        x = to_scalar(x)
        if abs(x) > 1:
            raise DomainError(f"evaluation point {x} outside [-1, 1]")
        cs = self.coeffs
        if len(cs) == 1:
            return cs[0]
        two_x = x + x
        b1 = cs[-1]
        b2 = to_scalar(0)
        for k in range(len(cs) - 2, 0, -1):
            b1, b2 = cs[k] + two_x * b1 - b2, b1
        return cs[0] + x * b1 - b2

    __call__ = eval

    def derivative(self) -> "ChebPoly":
        """Derivative in the Chebyshev basis; degree drops by exactly 1."""
        n = len(self.coeffs) - 1
        if n == 0:
            return ChebPoly.zero()
        c = list(self.coeffs)
        der = [to_scalar(0)] * n
        for j in range(n, 2, -1):
            der[j - 1] = (2 * j) * c[j]
            c[j - 2] += (j * c[j]) / (j - 2)
        if n > 1:
            der[1] = 4 * c[2]
        der[0] = c[1]
        return ChebPoly(der)

    def plus_scaled_basis(self, k: int, coeff) -> "ChebPoly":
        """Return self + coeff * T_k (coefficient surgery, no arithmetic loss)."""
        cs = list(self.coeffs)
        if k >= len(cs):
            cs.extend(to_scalar(0) for _ in range(k + 1 - len(cs)))
        cs[k] = cs[k] + to_scalar(coeff)
        return ChebPoly(cs)

    def __repr__(self):
        return f"ChebPoly(degree={self.degree()})"


def cheb_basis_values(n: int, x: Scalar):
    """T_k(x), T_k'(x), T_k''(x) for k = 0..n by the differentiated recurrence."""
    one = to_scalar(1)
    zero = to_scalar(0)
    t = [one, x][: n + 1]
    d1 = [zero, one][: n + 1]
    d2 = [zero, zero][: n + 1]
    two_x = x + x
    for k in range(1, n):
        t.append(two_x * t[k] - t[k - 1])
        d1.append(2 * t[k] + two_x * d1[k] - d1[k - 1])
        d2.append(4 * d1[k] + two_x * d2[k] - d2[k - 1])
    return t, d1, d2


def _polish_root(p: ChebPoly, a, fa, b, fb, res_stop) -> Scalar:
    """Shrink a sign-change bracket to a root (Illinois regula falsi).

    Stops once |p| falls below res_stop or the bracket reaches ulp scale.
    """
    eps_x = gmpy2.exp2(-(get_precision() - 4))
    half = to_scalar("0.5")
    side = 0
    for _ in range(4 * get_precision()):
        width = b - a
        if width <= eps_x * max(to_scalar(1), abs(a), abs(b)):
            break
        denom = fb - fa
        if denom != 0:
            m = b - fb * width / denom
        else:
            m = a + half * width
        # keep strictly interior; fall back to bisection when secant stalls
        if not (a < m < b):
            m = a + half * width
        fm = p.eval(m)
        if fm == 0 or abs(fm) <= res_stop:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
            if side < 0:
                fb = fb * half  # Illinois: same side retained twice
            side = -1
        else:
            b, fb = m, fm
            if side > 0:
                fa = fa * half
            side = 1
    return a + (b - a) * half


def roots_in_domain(p: ChebPoly, tol) -> list:
    """All sign-change roots of p in [-1, 1], strictly increasing.

    Each returned r satisfies |p(r)| <= tol * (1 + max|coeff|).  Found by a
    sign-change scan on a grid of max(64, 8 * degree) panels followed by
    bracket polishing; tangential roots may be missed.
    """
    if p.is_zero():
        raise ZeroPolynomialError("roots_in_domain: polynomial is identically zero")
    tol = to_scalar(tol)
    panels = max(64, 8 * p.degree())
    xs = [to_scalar(2 * i) / panels - 1 for i in range(panels + 1)]
    vs = [p.eval(x) for x in xs]
    bound = tol * (1 + p.coeff_inf_norm())
    res_stop = bound / 4
    roots = []
    for i in range(panels):
        if vs[i] == 0:
            roots.append(xs[i])
        elif (vs[i] < 0) != (vs[i + 1] < 0) and vs[i + 1] != 0:
            roots.append(
                _polish_root(p, xs[i], vs[i], xs[i + 1], vs[i + 1], res_stop)
            )
    if vs[-1] == 0:
        roots.append(xs[-1])
    kept = []
    for r in roots:
        if abs(p.eval(r)) <= bound and (not kept or r > kept[-1]):
            kept.append(r)
    return kept


def min_on_domain(p: ChebPoly):
    """Global minimum of p over [-1, 1] as (argmin, min); leftmost on ties.

    Candidates are both endpoints plus every sign-change root of p'.
    """
    candidates = [to_scalar(-1)]
    d = p.derivative()
    if not d.is_zero():
        root_tol = gmpy2.exp2(-(get_precision() // 2))
        candidates.extend(roots_in_domain(d, root_tol))
    candidates.append(to_scalar(1))
    best_x = candidates[0]
    best_v = p.eval(best_x)
    for x in candidates[1:]:
        v = p.eval(x)
        if v < best_v:
            best_x, best_v = x, v
    return best_x, best_v
