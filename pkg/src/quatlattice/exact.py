"""Exact linear algebra over Q and over number fields.

The routines are duck-typed: entries only need ``+ - * /`` and a zero test,
so the same code runs on ``Fraction`` matrices and on matrices of
:class:`~quatlattice.field_core.FieldElement`.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence


def _is_zero(v) -> bool:
    return v == 0


def _lift(v):
    # plain ints would turn into floats under true division
    return Fraction(v) if isinstance(v, int) else v


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free determinant of an integer matrix."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def rational_det(rows: Sequence[Sequence]) -> Fraction:
    """Determinant of a rational matrix: clear denominators, then Bareiss."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    scale = 1
    ints = []
    for r in rows:
        fr = [Fraction(v) for v in r]
        den = lcm(*(v.denominator for v in fr))
        scale *= den
        ints.append([int(v * den) for v in fr])
    return Fraction(bareiss_det(ints), scale)


def field_det(rows: Sequence[Sequence]):
    """Determinant by Gaussian elimination over an arbitrary exact field."""
    a = [[_lift(v) for v in r] for r in rows]
    n = len(a)
    det = None
    sign = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if not _is_zero(a[i][k])), None)
        if piv is None:
            return a[0][0] * 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        det = a[k][k] if det is None else det * a[k][k]
        inv = 1 / a[k][k]
        for i in range(k + 1, n):
            if _is_zero(a[i][k]):
                continue
            f = a[i][k] * inv
            for j in range(k + 1, n):
                a[i][j] = a[i][j] - f * a[k][j]
    return det if sign == 1 else -det


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list:
    """Solve ``A x = b`` exactly for square nonsingular ``A``.

    Raises ``ZeroDivisionError`` when ``A`` is singular.
    """
    n = len(rows)
    a = [[_lift(v) for v in r] + [_lift(b)] for r, b in zip(rows, rhs)]
    for k in range(n):
        piv = next((i for i in range(k, n) if not _is_zero(a[i][k])), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        a[k], a[piv] = a[piv], a[k]
        inv = 1 / a[k][k]
        a[k] = [v * inv for v in a[k]]
        for i in range(n):
            if i != k and not _is_zero(a[i][k]):
                f = a[i][k]
                a[i] = [vi - f * vk for vi, vk in zip(a[i], a[k])]
    return [a[i][n] for i in range(n)]


def rank(rows: Sequence[Sequence]) -> int:
    """Rank of a rational matrix."""
    a = [[Fraction(v) for v in r] for r in rows]
    if not a:
        return 0
    m = len(a[0])
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, len(a)):
            if a[i][c] != 0:
                f = a[i][c] / a[r][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        r += 1
        if r == len(a):
            break
    return r
