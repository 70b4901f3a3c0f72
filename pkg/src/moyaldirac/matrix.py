"""Determinants and adjugates of small matrices over the commuting subring."""

from __future__ import annotations

from typing import Sequence

from .algebra import AlgebraError, GradedPolynomial, RationalFunction

Matrix = Sequence[Sequence[GradedPolynomial]]


def det(m: Matrix) -> GradedPolynomial:
    """Laplace expansion along rows, memoised over the set of used columns."""
    size = len(m)
    if size == 0:
        raise AlgebraError("empty matrix")
    ctx = m[0][0].ctx
    if any(len(row) != size for row in m):
        raise AlgebraError("matrix must be square")
    memo: dict[int, GradedPolynomial] = {}

    def expand(row: int, used: int) -> GradedPolynomial:
        if row == size:
            return ctx.one()
        hit = memo.get(used)
        if hit is not None:
            return hit
        out = ctx.zero()
        sign = 1
        for col in range(size):
            if used >> col & 1:
                continue
            entry = m[row][col]
            if entry:
                rest = expand(row + 1, used | 1 << col)
                if rest:
                    out = out + entry * rest if sign > 0 else out - entry * rest
            sign = -sign
        memo[used] = out
        return out

    return expand(0, 0)


def minor(m: Matrix, i: int, j: int) -> list[list[GradedPolynomial]]:
    return [[x for c, x in enumerate(row) if c != j] for r, row in enumerate(m) if r != i]


def adjugate(m: Matrix) -> list[list[GradedPolynomial]]:
    size = len(m)
    ctx = m[0][0].ctx
    if size == 1:
        return [[ctx.one()]]
    adj = [[ctx.zero()] * size for _ in range(size)]
    for i in range(size):
        for j in range(size):
            cof = det(minor(m, i, j))
            adj[j][i] = cof if (i + j) % 2 == 0 else -cof
    return adj


def inverse(m: Matrix) -> tuple[list[list[RationalFunction]], GradedPolynomial, list[list[GradedPolynomial]]]:
    """``(inverse, det, adjugate)``; raises ``ZeroDivisionError`` for singular input."""
    d = det(m)
    if d.is_zero:
        raise ZeroDivisionError("matrix is singular")
    adj = adjugate(m)
    return [[RationalFunction(x, d) for x in row] for row in adj], d, adj


def matmul_rational(a: Sequence[Sequence[object]], b: Sequence[Sequence[object]]) -> list[list[RationalFunction]]:
    ctx = (a[0][0] if not isinstance(a[0][0], RationalFunction) else a[0][0].num).ctx
    n, k, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = RationalFunction(ctx.zero())
            for t in range(k):
                acc = acc + RationalFunction.lift(a[i][t], ctx) * RationalFunction.lift(b[t][j], ctx)
            row.append(acc)
        out.append(row)
    return out
