import random

import gmpy2
import pytest

from cvxremez.cheb import (
    ChebPoly,
    DomainError,
    ZeroPolynomialError,
    min_on_domain,
    roots_in_domain,
)
from cvxremez.precision import to_scalar

from oracles import central_difference


def rand_scalar(rng, lo=-1, hi=1):
    return to_scalar(rng.randint(-2**20, 2**20)) / 2**20 * (hi - lo) / 2 + (hi + lo) / 2


class TestEval:
    def test_t2_at_half(self):
        p = ChebPoly.basis(2)
        assert p.eval("0.5") == to_scalar("-0.5")

    def test_constant(self):
        p = ChebPoly([3])
        for x in ("-1", "-0.25", "0", "0.99", "1"):
            assert p.eval(x) == 3

    def test_t3_at_chebyshev_root(self):
        x = gmpy2.cos(gmpy2.const_pi() / 6)
        assert abs(ChebPoly.basis(3).eval(x)) < to_scalar("1e-70")

    def test_domain_rejected(self):
        with pytest.raises(DomainError):
            ChebPoly.basis(2).eval("1.0000001")

    def test_linearity(self):
        rng = random.Random(7)
        for _ in range(20):
            deg = rng.randint(0, 20)
            p = ChebPoly([rand_scalar(rng, -3, 3) for _ in range(deg + 1)])
            q = ChebPoly([rand_scalar(rng, -3, 3) for _ in range(deg + 1)])
            alpha = rand_scalar(rng, -2, 2)
            beta = rand_scalar(rng, -2, 2)
            comb = ChebPoly(
                [alpha * a + beta * b for a, b in zip(p.coeffs, q.coeffs)]
            )
            x = rand_scalar(rng)
            lhs = comb.eval(x)
            rhs = alpha * p.eval(x) + beta * q.eval(x)
            assert abs(lhs - rhs) <= to_scalar("1e-70") * (1 + abs(rhs))


class TestDerivative:
    def test_t2(self):
        d = ChebPoly.basis(2).derivative()
        assert [str(c) for c in d.coeffs] == ["0.0", "4.0"]

    def test_constant_gives_zero(self):
        d = ChebPoly([5]).derivative()
        assert d.is_zero() and d.degree() == 0

    def test_degree_drops_by_one(self):
        for deg in (1, 2, 5, 17):
            p = ChebPoly([1] * (deg + 1))
            assert p.derivative().degree() == deg - 1

    def test_t3_prime_at_one_is_nine(self):
        # T_n'(1) = n^2; cross-check by central differences
        p = ChebPoly.basis(3)
        d = p.derivative()
        assert abs(d.eval(1) - 9) < to_scalar("1e-70")
        fd = central_difference(p.eval, to_scalar("0.5"), to_scalar("1e-30"))
        assert abs(d.eval("0.5") - fd) < to_scalar("1e-55")

    def test_matches_central_differences(self):
        # random degree <= 20 polynomials, 10 interior points, 1e-8 relative
        rng = random.Random(42)
        h = to_scalar("1e-12")
        for _ in range(6):
            deg = rng.randint(2, 20)
            p = ChebPoly([rand_scalar(rng, -2, 2) for _ in range(deg + 1)])
            d = p.derivative()
            for _ in range(10):
                x = rand_scalar(rng, -0.9, 0.9)
                fd = central_difference(p.eval, x, h)
                exact = d.eval(x)
                assert abs(fd - exact) <= to_scalar("1e-8") * (1 + abs(exact))


class TestRoots:
    def test_t2(self):
        roots = roots_in_domain(ChebPoly.basis(2), "1e-60")
        expected = 1 / gmpy2.sqrt(to_scalar(2))
        assert len(roots) == 2
        assert abs(roots[0] + expected) < to_scalar("1e-70")
        assert abs(roots[1] - expected) < to_scalar("1e-70")

    def test_t1(self):
        roots = roots_in_domain(ChebPoly.basis(1), "1e-60")
        assert len(roots) == 1 and roots[0] == 0

    def test_t3(self):
        roots = roots_in_domain(ChebPoly.basis(3), "1e-60")
        s = gmpy2.sqrt(to_scalar(3)) / 2
        assert len(roots) == 3
        for got, want in zip(roots, (-s, to_scalar(0), s)):
            assert abs(got - want) < to_scalar("1e-70")

    def test_zero_poly_rejected(self):
        with pytest.raises(ZeroPolynomialError):
            roots_in_domain(ChebPoly.zero(), "1e-30")

    def test_residual_bound_and_sorted(self):
        rng = random.Random(3)
        tol = to_scalar("1e-40")
        for _ in range(10):
            deg = rng.randint(1, 15)
            p = ChebPoly([rand_scalar(rng, -2, 2) for _ in range(deg + 1)])
            if p.is_zero():
                continue
            roots = roots_in_domain(p, tol)
            bound = tol * (1 + p.coeff_inf_norm())
            for r in roots:
                assert abs(p.eval(r)) <= bound
            assert all(a < b for a, b in zip(roots, roots[1:]))


class TestMinOnDomain:
    def test_t2(self):
        argmin, val = min_on_domain(ChebPoly.basis(2))
        assert abs(argmin) < to_scalar("1e-70")
        assert abs(val + 1) < to_scalar("1e-70")

    def test_constant_ties_break_left(self):
        argmin, val = min_on_domain(ChebPoly([5]))
        assert argmin == -1 and val == 5

    def test_linear(self):
        argmin, val = min_on_domain(ChebPoly.basis(1))
        assert argmin == -1 and val == -1

    def test_lower_bounds_samples(self):
        rng = random.Random(11)
        for _ in range(5):
            deg = rng.randint(0, 12)
            p = ChebPoly([rand_scalar(rng, -2, 2) for _ in range(deg + 1)])
            _, val = min_on_domain(p)
            for _ in range(1000):
                x = rand_scalar(rng)
                assert val <= p.eval(x) + to_scalar("1e-20")
