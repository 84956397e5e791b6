"""Small dense affine solves in either scalar backend.

Exact systems are cleared to integer rows and eliminated fraction-free
(Bareiss), so intermediate entries stay integral and exact.  Float systems
use partial pivoting and refuse pivots below ``2^(-precision/2)`` relative
to the largest entry.  Both accept overdetermined systems of full column
rank and insist that the surplus equations are consistent.
"""

from __future__ import annotations

from typing import Any, Sequence

import gmpy2

from .errors import DegeneracyError, PrecisionError
from .scalar import Backend


def solve(
    A: Sequence[Sequence[Any]],
    b: Sequence[Any],
    backend: Backend,
    label: str = "system",
) -> list[Any]:
    rows, cols = len(A), len(A[0]) if A else 0
    if rows < cols:
        raise DegeneracyError(f"{label}: underdetermined ({rows} equations, {cols} unknowns)")
    if backend.exact:
        return _solve_exact(A, b, label)
    return _solve_float(A, b, backend, label)


def _solve_exact(A, b, label):
    rows, cols = len(A), len(A[0])
    M = []
    for row, rhs in zip(A, b):
        entries = [gmpy2.mpq(v) for v in row] + [gmpy2.mpq(rhs)]
        scale = 1
        for v in entries:
            scale = gmpy2.lcm(scale, v.denominator)
        M.append([int(v * scale) for v in entries])

    prev = 1
    for k in range(cols):
        pivot = next((i for i in range(k, rows) if M[i][k] != 0), None)
        if pivot is None:
            raise DegeneracyError(f"{label}: singular in exact arithmetic (column {k})")
        M[k], M[pivot] = M[pivot], M[k]
        pk = M[k][k]
        for i in range(k + 1, rows):
            mik = M[i][k]
            Mi = M[i]
            Mk = M[k]
            for c in range(k + 1, cols + 1):
                Mi[c] = (pk * Mi[c] - mik * Mk[c]) // prev
            Mi[k] = 0
        prev = pk

    for i in range(cols, rows):
        if M[i][cols] != 0:
            raise DegeneracyError(f"{label}: inconsistent surplus equation (residual {M[i][cols]})")

    x = [gmpy2.mpq(0)] * cols
    for k in range(cols - 1, -1, -1):
        acc = gmpy2.mpq(M[k][cols])
        for c in range(k + 1, cols):
            acc -= M[k][c] * x[c]
        x[k] = acc / M[k][k]
    return x


def _solve_float(A, b, backend, label):
    rows, cols = len(A), len(A[0])
    M = [[backend(v) for v in row] + [backend(rhs)] for row, rhs in zip(A, b)]
    scale = max((abs(v) for row in M for v in row[:cols]), default=0)
    if scale == 0:
        raise DegeneracyError(f"{label}: zero matrix")
    threshold = scale * backend(2) ** (-(backend.precision // 2))

    for k in range(cols):
        pivot = max(range(k, rows), key=lambda i: abs(M[i][k]))
        if abs(M[pivot][k]) <= threshold:
            raise PrecisionError(
                f"{label}: pivot {float(abs(M[pivot][k])):.3e} below threshold at "
                f"{backend}; rerun with the exact backend"
            )
        M[k], M[pivot] = M[pivot], M[k]
        pk = M[k][k]
        for i in range(k + 1, rows):
            f = M[i][k] / pk
            if f == 0:
                continue
            Mi, Mk = M[i], M[k]
            for c in range(k + 1, cols + 1):
                Mi[c] = Mi[c] - f * Mk[c]
            Mi[k] = backend.zero

    x = [backend.zero] * cols
    for k in range(cols - 1, -1, -1):
        acc = M[k][cols]
        for c in range(k + 1, cols):
            acc = acc - M[k][c] * x[c]
        x[k] = acc / M[k][k]

    if rows > cols:
        rhs_scale = max((abs(row[cols]) for row in M), default=0) + scale
        for i in range(cols, rows):
            if abs(M[i][cols]) > rhs_scale * backend(2) ** (-(backend.precision // 2)):
                raise DegeneracyError(f"{label}: inconsistent surplus equation")
    return x


def nullspace_exact(A: Sequence[Sequence[Any]]) -> list[list[Any]]:
    """Basis of the right nullspace of a rational matrix, from its reduced row echelon form."""
    M = [[gmpy2.mpq(v) for v in row] for row in A]
    rows, cols = len(M), len(M[0]) if M else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if pivot is None:
            continue
        M[r], M[pivot] = M[pivot], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [gmpy2.mpq(0)] * cols
        v[fcol] = gmpy2.mpq(1)
        for i, pc in enumerate(pivots):
            v[pc] = -M[i][fcol]
        basis.append(v)
    return basis
