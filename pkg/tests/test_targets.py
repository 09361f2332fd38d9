import random

import pytest

import gmpy2
from cvxremez.cheb import DomainError
from cvxremez.precision import to_scalar
from cvxremez.targets import (
    TargetSpec,
    abs_pow,
    eval_target,
    exp_fn,
    is_convex,
    second_derivative_target,
)


class TestEvalTarget:
    def test_abs_lambda1(self):
        assert eval_target(abs_pow(1), "-0.3") == to_scalar("0.3")

    def test_abs_lambda2(self):
        assert eval_target(abs_pow(2), "0.5") == to_scalar("0.25")

    def test_half_width_ten(self):
        assert eval_target(abs_pow(1, 10), "0.5") == 5

    def test_exp(self):
        v = eval_target(exp_fn(), "1")
        assert abs(v - gmpy2.exp(1)) < to_scalar("1e-75")

    def test_zero_is_exact(self):
        assert eval_target(abs_pow("1.7"), 0) == 0

    def test_domain_rejected(self):
        with pytest.raises(DomainError):
            eval_target(abs_pow(1), "1.5")

    def test_evenness_exact(self):
        rng = random.Random(5)
        t = abs_pow("1.5")
        for _ in range(200):
            u = to_scalar(rng.randint(-2**30, 2**30)) / 2**30
            assert eval_target(t, u) == eval_target(t, -u)

    def test_convexity_chords(self):
        rng = random.Random(9)
        for lam in ("1", "1.5", "2", "3.5"):
            t = abs_pow(lam)
            for _ in range(1000):
                us = sorted(
                    to_scalar(rng.randint(-2**30, 2**30)) / 2**30 for _ in range(3)
                )
                u1, u2, u3 = us
                if not (u1 < u2 < u3):
                    continue
                f1, f2, f3 = (eval_target(t, u) for u in us)
                chord = f1 + (f3 - f1) * (u2 - u1) / (u3 - u1)
                assert f2 <= chord + to_scalar("1e-70")

    def test_homogeneity(self):
        rng = random.Random(13)
        lam = to_scalar("1.5")
        a = to_scalar(3)
        t_a = abs_pow(lam, a)
        t_1 = abs_pow(lam, 1)
        factor = a ** lam
        for _ in range(100):
            u = to_scalar(rng.randint(-2**30, 2**30)) / 2**30
            lhs = eval_target(t_a, u)
            rhs = factor * eval_target(t_1, u)
            assert abs(lhs - rhs) <= to_scalar("1e-74") * (1 + abs(rhs))


class TestSecondDerivativeTarget:
    def test_cubic(self):
        d = second_derivative_target(abs_pow(3))
        assert d.kind == "abs_pow" and d.exponent == 1 and d.scale == 6

    def test_square_becomes_constant(self):
        d = second_derivative_target(abs_pow(2))
        assert d.exponent == 0 and d.scale == 2
        assert eval_target(d, "0.37") == 2
        assert eval_target(d, 0) == 2

    def test_quartic(self):
        d = second_derivative_target(abs_pow(4))
        assert d.exponent == 2 and d.scale == 12

    def test_chain_rule_factor(self):
        # g(u) = f(a*u) must satisfy g''(u) = a^2 f''(a u)
        a = to_scalar(2)
        d = second_derivative_target(abs_pow(3, a))
        # f'' = 6|x|, so a^2 f''(a u) = 4 * 6 * |2u| = 48 |u|
        assert abs(eval_target(d, "0.5") - 24) < to_scalar("1e-70")

    def test_exp(self):
        d = second_derivative_target(exp_fn(half_width=3))
        assert d.kind == "exp_fn" and d.scale == 9

    def test_low_exponent_rejected(self):
        with pytest.raises(ValueError):
            second_derivative_target(abs_pow("1.5"))


class TestValidationAndConvexity:
    def test_kind_checked(self):
        with pytest.raises(ValueError):
            TargetSpec("cosine")

    def test_half_width_positive(self):
        with pytest.raises(ValueError):
            abs_pow(1, 0)

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            abs_pow(-1)

    def test_convexity(self):
        assert is_convex(abs_pow(1))
        assert is_convex(abs_pow("2.5"))
        assert not is_convex(abs_pow("0.5"))
        assert is_convex(exp_fn())
        assert not is_convex(abs_pow(2, scale=-1))
