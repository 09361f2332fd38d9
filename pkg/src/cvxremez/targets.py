"""Target functions to approximate, pre-mapped onto [-1, 1].

Two families: abs_pow, f(x) = scale * |x|**exponent, and exp_fn,
f(x) = scale * exp(x), both originally on [-half_width, half_width].
All solvers see the rescaled function g(u) = f(half_width * u) on [-1, 1];
this module owns the affine substitution and its chain-rule bookkeeping, so
the solver code stays interval-free.

Exponent 0 is admitted as the constant |x|**0 == 1 (with the convention
that this also holds at x = 0); it arises as the second derivative of the
exponent-2 target and nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2

from .cheb import DomainError
from .precision import Scalar, to_scalar

KINDS = ("abs_pow", "exp_fn")


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    exponent: Scalar = field(default_factory=lambda: to_scalar(1))
    half_width: Scalar = field(default_factory=lambda: to_scalar(1))
    scale: Scalar = field(default_factory=lambda: to_scalar(1))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown target kind {self.kind!r}")
        object.__setattr__(self, "exponent", to_scalar(self.exponent))
        object.__setattr__(self, "half_width", to_scalar(self.half_width))
        object.__setattr__(self, "scale", to_scalar(self.scale))
        if self.kind == "abs_pow" and self.exponent < 0:
            raise ValueError("abs_pow exponent must be >= 0")
        if not self.half_width > 0:
            raise ValueError("half_width must be > 0")

    def describe(self) -> str:
        from .precision import format_scalar

        return (
            f"{self.kind}(lambda={format_scalar(self.exponent, 20)}, "
            f"a={format_scalar(self.half_width, 20)}, "
            f"scale={format_scalar(self.scale, 20)})"
        )


def abs_pow(exponent, half_width=1, scale=1) -> TargetSpec:
    return TargetSpec("abs_pow", to_scalar(exponent), to_scalar(half_width), to_scalar(scale))


def exp_fn(half_width=1, scale=1) -> TargetSpec:
    return TargetSpec("exp_fn", to_scalar(1), to_scalar(half_width), to_scalar(scale))


def eval_target(t: TargetSpec, u) -> Scalar:
    """g(u) = f(half_width * u) for u in [-1, 1]."""
    u = to_scalar(u)
    if abs(u) > 1:
        raise DomainError(f"target argument {u} outside [-1, 1]")
    x = t.half_width * u
    if t.kind == "abs_pow":
        if t.exponent == 0:
            return t.scale
        ax = abs(x)
        if ax == 0:
            return to_scalar(0)
        return t.scale * ax ** t.exponent
    return t.scale * gmpy2.exp(x)


def second_derivative_target(t: TargetSpec) -> TargetSpec:
    """The target whose values are a**2 * f''(a*u), a = half_width.

    That is exactly g'' for g(u) = f(a*u), so approximating the returned
    target at degree n-2 is the right-hand side of the second-derivative
    comparison bound for g.  abs_pow needs exponent >= 2, otherwise f'' is
    unbounded near 0 and its sup-norm approximation error is infinite.
    """
    a = t.half_width
    if t.kind == "exp_fn":
        return TargetSpec("exp_fn", t.exponent, a, t.scale * a * a)
    lam = t.exponent
    if lam < 2:
        raise ValueError(
            "second_derivative_target requires abs_pow exponent >= 2 "
            f"(got {lam}); f'' is unbounded on [-1, 1] below that"
        )
    new_scale = t.scale * lam * (lam - 1) * a * a
    return TargetSpec("abs_pow", lam - 2, a, new_scale)


def is_convex(t: TargetSpec) -> bool:
    """Whether g(u) = f(half_width * u) is convex on [-1, 1]."""
    if t.scale < 0:
        return False
    if t.kind == "exp_fn":
        return True
    return t.exponent >= 1 or t.exponent == 0
