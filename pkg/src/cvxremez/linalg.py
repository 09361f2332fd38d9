"""Dense linear solves at working precision (partial-pivot elimination)."""

from __future__ import annotations

import gmpy2

from .precision import Scalar, get_precision, to_scalar


class SingularMatrixError(ArithmeticError):
    pass


def solve(matrix, rhs) -> list:
    """Solve A x = b by Gaussian elimination with partial pivoting.

    `matrix` is a list of row lists, `rhs` a vector; both are copied.
    Raises SingularMatrixError when a pivot falls below the noise floor
    relative to the matrix magnitude.
    """
    n = len(matrix)
    if n == 0 or any(len(row) != n for row in matrix):
        raise ValueError("solve expects a nonempty square matrix")
    if len(rhs) != n:
        raise ValueError("rhs length does not match matrix")
    a = [[to_scalar(v) for v in row] for row in matrix]
    b = [to_scalar(v) for v in rhs]
    scale = max((abs(v) for row in a for v in row), default=to_scalar(0))
    floor = scale * gmpy2.exp2(-(get_precision() - 8))
    for col in range(n):
        piv_row = max(range(col, n), key=lambda r: abs(a[r][col]))
        piv = a[piv_row][col]
        if abs(piv) <= floor:
            raise SingularMatrixError(f"pivot {piv} at column {col} below noise floor")
        if piv_row != col:
            a[col], a[piv_row] = a[piv_row], a[col]
            b[col], b[piv_row] = b[piv_row], b[col]
        row_c = a[col]
        inv = 1 / piv
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f == 0:
                continue
            row_r = a[r]
            for c in range(col + 1, n):
                row_r[c] -= f * row_c[c]
            row_r[col] = to_scalar(0)
            b[r] -= f * b[col]
    x = [to_scalar(0)] * n
    for r in range(n - 1, -1, -1):
        s = b[r]
        row_r = a[r]
        for c in range(r + 1, n):
            s -= row_r[c] * x[c]
        x[r] = s / row_r[r]
    return x


def invert(matrix) -> list:
    """A^{-1} as a list of rows, by Gauss-Jordan with partial pivoting."""
    n = len(matrix)
    if n == 0 or any(len(row) != n for row in matrix):
        raise ValueError("invert expects a nonempty square matrix")
    a = [[to_scalar(v) for v in row] for row in matrix]
    inv = [[to_scalar(1) if i == j else to_scalar(0) for j in range(n)] for i in range(n)]
    scale = max((abs(v) for row in a for v in row), default=to_scalar(0))
    floor = scale * gmpy2.exp2(-(get_precision() - 8))
    for col in range(n):
        piv_row = max(range(col, n), key=lambda r: abs(a[r][col]))
        piv = a[piv_row][col]
        if abs(piv) <= floor:
            raise SingularMatrixError(f"pivot {piv} at column {col} below noise floor")
        if piv_row != col:
            a[col], a[piv_row] = a[piv_row], a[col]
            inv[col], inv[piv_row] = inv[piv_row], inv[col]
        p_inv = 1 / piv
        arow, irow = a[col], inv[col]
        for c in range(n):
            arow[c] *= p_inv
            irow[c] *= p_inv
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if f == 0:
                continue
            ar, ir = a[r], inv[r]
            for c in range(n):
                ar[c] -= f * arow[c]
                ir[c] -= f * irow[c]
    return inv
