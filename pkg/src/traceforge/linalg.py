"""Small exact matrix helpers.

Matrices are tuples of row tuples whose entries support ``+ - * /`` with each
other and with ``int`` (Fraction, QuadElement, ExtElement all qualify).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

Matrix = tuple


def as_matrix(rows: Sequence[Sequence], convert: Callable = lambda v: v) -> Matrix:
    out = tuple(tuple(convert(v) for v in row) for row in rows)
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def shape(a: Matrix) -> tuple[int, int]:
    return len(a), (len(a[0]) if a else 0)


def is_square_matrix(a: Matrix) -> bool:
    r, c = shape(a)
    return r == c


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if shape(a)[1] != shape(b)[0]:
        raise ValueError(f"shape mismatch {shape(a)} x {shape(b)}")
    cols = transpose(b)
    return tuple(tuple(_dot(row, col) for col in cols) for row in a)


def _dot(u, v):
    acc = None
    for x, y in zip(u, v):
        if not x or not y:  # the matrices here are mostly zeros
            continue
        acc = x * y if acc is None else acc + x * y
    return u[0] * v[0] if acc is None else acc


def scale(c, a: Matrix) -> Matrix:
    return tuple(tuple(c * v for v in row) for row in a)


def map_entries(f: Callable, a: Matrix) -> Matrix:
    return tuple(tuple(f(v) for v in row) for row in a)


def identity(n: int, one=1, zero=0) -> Matrix:
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def diagonal(entries: Sequence, zero=0) -> Matrix:
    n = len(entries)
    return tuple(tuple(entries[i] if i == j else zero for j in range(n)) for i in range(n))


def block_diagonal(blocks: Sequence[Matrix], zero=0) -> Matrix:
    n = sum(len(b) for b in blocks)
    rows = []
    offset = 0
    for b in blocks:
        k = len(b)
        for row in b:
            rows.append((zero,) * offset + tuple(row) + (zero,) * (n - offset - k))
        offset += k
    return tuple(rows)


def is_diagonal(a: Matrix) -> bool:
    return all(a[i][j] == 0 for i in range(len(a)) for j in range(len(a)) if i != j)


def scalar_value(a: Matrix):
    """The scalar c when ``a == c*I``, else None."""
    if not is_diagonal(a):
        return None
    c = a[0][0]
    return c if all(a[i][i] == c for i in range(len(a))) else None


def congruence(a: Matrix, g: Matrix) -> Matrix:
    """``a^T g a``: the Gram matrix of the form ``g`` composed with ``x -> a x``."""
    if is_diagonal(g):
        # sum_k g_kk a_ki a_kj, skipping zero entries
        n = len(a[0])
        weighted = [[g[k][k] * v if v else v for v in a[k]] for k in range(len(a))]
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = None
                for k in range(len(a)):
                    x, y = weighted[k][i], a[k][j]
                    if x and y:
                        acc = x * y if acc is None else acc + x * y
                row.append(a[0][i] * 0 * a[0][j] if acc is None else acc)
            out.append(tuple(row))
        return tuple(out)
    return matmul(matmul(transpose(a), g), a)


def inverse(a: Matrix) -> Matrix:
    """Gauss-Jordan inverse; raises ZeroDivisionError when singular."""
    n = len(a)
    if not is_square_matrix(a):
        raise ValueError("inverse of a non-square matrix")
    one = _one_like(a)
    zero = one - one
    work = [[one * v for v in row] + [one if i == j else zero for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        work[col], work[pivot] = work[pivot], work[col]
        inv = one / work[col][col]
        work[col] = [v * inv for v in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                factor = work[r][col]
                work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
    return tuple(tuple(row[n:]) for row in work)


def determinant(a: Matrix):
    n = len(a)
    one = _one_like(a)
    work = [[one * v for v in row] for row in a]
    det = one
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
        if pivot is None:
            return one - one
        if pivot != col:
            work[col], work[pivot] = work[pivot], work[col]
            det = -det
        det = det * work[col][col]
        for r in range(col + 1, n):
            if work[r][col] != 0:
                factor = work[r][col] / work[col][col]
                work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
    return det


def _one_like(a: Matrix):
    one = a[0][0] * 0 + 1
    return Fraction(1) if isinstance(one, int) else one
