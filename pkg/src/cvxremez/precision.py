"""Working-precision control for all real arithmetic in this package.

Every real quantity is a gmpy2.mpfr ("Scalar") computed at a single global
binary precision, set once per run.  Arithmetic at a fixed precision is
deterministic: identical inputs give identical bit patterns.

The precision is thread-local in gmpy2; worker threads must call
set_precision themselves before doing any arithmetic.
"""

from __future__ import annotations

import gmpy2

Scalar = gmpy2.mpfr

MIN_PRECISION_BITS = 64
DEFAULT_PRECISION_BITS = 256


def set_precision(bits: int) -> int:
    """Set the global working precision in bits; returns the previous value."""
    if bits < MIN_PRECISION_BITS:
        raise ValueError(
            f"precision_bits must be >= {MIN_PRECISION_BITS}, got {bits}"
        )
    ctx = gmpy2.get_context()
    old = ctx.precision
    ctx.precision = bits
    return old


def get_precision() -> int:
    return gmpy2.get_context().precision


class working_precision:
    """Context manager that temporarily switches the working precision."""

    def __init__(self, bits: int):
        self.bits = bits
        self._old = None

    def __enter__(self):
        self._old = set_precision(self.bits)
        return self

    def __exit__(self, *exc):
        set_precision(self._old)
        return False


def to_scalar(value) -> Scalar:
    """Coerce to Scalar at the current precision.

    Strings are the preferred carrier for decimal constants ("0.1" is
    correctly rounded; the float literal 0.1 is not the decimal 0.1).
    """
    if isinstance(value, Scalar):
        return value
    return gmpy2.mpfr(value)


def pi() -> Scalar:
    return gmpy2.const_pi()


def machine_eps() -> Scalar:
    """One ulp at unit scale for the current precision: 2**(1 - bits)."""
    return gmpy2.exp2(1 - get_precision())


def tiny(margin_bits: int = 48) -> Scalar:
    """A scale-1 threshold `margin_bits` above the noise floor."""
    return gmpy2.exp2(-(get_precision() - margin_bits))


def format_scalar(x, digits: int = 30) -> str:
    """Deterministic scientific-notation rendering of a Scalar.

    gmpy2's own __format__ speaks MPFR format specs, so we build the string
    from .digits() ourselves: same input bits, same output characters.
    """
    x = to_scalar(x)
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "-inf" if x < 0 else "inf"
    if x == 0:
        return "0"
    mant, exp10, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    mant = mant.rstrip("0") or "0"
    head, tail = mant[0], mant[1:] or "0"
    return f"{sign}{head}.{tail}e{exp10 - 1:+03d}"
