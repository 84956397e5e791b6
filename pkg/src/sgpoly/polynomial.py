"""Polynomials as jets at a base vertex, their symmetry transfers and mesh evaluation.

A polynomial of degree ``n`` is stored as the coefficients ``c[i][k-1]`` of
``P = sum c_{i,k} P_{i,k}``, which are also its jet at ``q0``:
``Delta^i P``, its normal derivative and its tangential derivative there.
A cell polynomial ``P o F_w`` uses ``F_w q0`` as base vertex.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Any, Sequence

from .errors import DepthError, DomainError
from .geometry import LETTERS, Address, compose, embed, level_index
from .laplacian import LaplacianParams, VertexMesh
from .monomials import KINDS, MonomialTable

RHO = 1
RHO_INV = -1


@dataclass(frozen=True)
class CoeffVector:
    params: LaplacianParams
    coeffs: tuple[tuple[Any, Any, Any], ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def c(self, i: int, k: int) -> Any:
        if i > self.degree:
            return self.params.backend.zero
        return self.coeffs[i][k - 1]

    @classmethod
    def monomial(cls, params: LaplacianParams, j: int, k: int) -> "CoeffVector":
        if k not in KINDS or j < 0:
            raise DomainError(f"no monomial P_{{{j},{k}}}")
        b = params.backend
        rows = [[b.zero] * 3 for _ in range(j + 1)]
        rows[j][k - 1] = b.one
        return cls(params, tuple(tuple(row) for row in rows))

    @classmethod
    def from_rows(cls, params: LaplacianParams, rows: Sequence[Sequence[Any]]) -> "CoeffVector":
        b = params.backend
        if not rows:
            raise DomainError("a coefficient vector needs at least degree 0")
        return cls(params, tuple(tuple(b(v) for v in row) for row in rows))

    def laplacian(self, times: int = 1) -> "CoeffVector":
        """Coefficients of ``Delta^times P``: an index shift."""
        rows = self.coeffs[times:]
        if not rows:
            rows = ((self.params.backend.zero,) * 3,)
        return CoeffVector(self.params, rows)

    def __add__(self, other: "CoeffVector") -> "CoeffVector":
        n = max(self.degree, other.degree) + 1
        rows = tuple(tuple(self.c(i, k) + other.c(i, k) for k in KINDS) for i in range(n))
        return CoeffVector(self.params, rows)

    def scaled(self, s: Any) -> "CoeffVector":
        return CoeffVector(self.params, tuple(tuple(v * s for v in row) for row in self.coeffs))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoeffVector):
            return NotImplemented
        n = max(self.degree, other.degree) + 1
        return all(self.c(i, k) == other.c(i, k) for i in range(n) for k in KINDS)

    __hash__ = None  # type: ignore[assignment]


def _check_depth(p: CoeffVector, table: MonomialTable) -> None:
    if p.degree > table.jmax or any((p.degree, k) not in table.n for k in KINDS):
        raise DepthError(f"table depth {table.jmax} is below polynomial degree {p.degree}")


def laplacian_values_on_V1(p: CoeffVector, table: MonomialTable) -> list[dict[Address, Any]]:
    """``V_1`` values of ``Delta^i P`` for ``i = 0 .. degree``."""
    _check_depth(p, table)
    b = p.params.backend
    vertices = level_index(1).vertices
    out = []
    for i in range(p.degree + 1):
        acc = {v: b.zero for v in vertices}
        for j in range(i, p.degree + 1):
            for k in KINDS:
                c = p.c(j, k)
                if c == 0:
                    continue
                mono = table.v1(j - i, k)
                for v in vertices:
                    acc[v] = acc[v] + c * mono[v]
        out.append(acc)
    return out


def values_on_V1(p: CoeffVector, table: MonomialTable) -> dict[Address, Any]:
    """The fifteen ``V_1`` values of ``P`` from the monomial tables."""
    _check_depth(p, table)
    b = p.params.backend
    vertices = level_index(1).vertices
    acc = {v: b.zero for v in vertices}
    for j in range(p.degree + 1):
        for k in KINDS:
            c = p.c(j, k)
            if c == 0:
                continue
            mono = table.v1(j, k)
            for v in vertices:
                acc[v] = acc[v] + c * mono[v]
    return acc


def scale_coeffs(p: CoeffVector) -> CoeffVector:
    """Coefficients of ``P o F_00``."""
    prm = p.params
    rows = []
    Li = prm.backend.one
    for i in range(p.degree + 1):
        rows.append((p.c(i, 1) * Li, p.c(i, 2) * Li * prm.lam_sym, p.c(i, 3) * Li * prm.lam_skew))
        Li = Li * prm.L
    return CoeffVector(prm, tuple(rows))


# Jets of P_{m,k} at q2 from those at q1: reflection R_0 swaps q1 and q2,
# fixes the symmetric monomials, negates the skew one and reverses tangents.
_Q2_SIGNS = {
    "value": (1, 1, -1),
    "normal": (1, 1, -1),
    "tangent": (-1, -1, 1),
}


def _boundary_jets(table: MonomialTable, m: int, k: int, corner: int) -> tuple[Any, Any, Any]:
    value, n, t = table.value(m, k), table.normal(m, k), table.tangential(m, k)
    if corner == 1:
        return value, n, t
    s = k - 1
    return _Q2_SIGNS["value"][s] * value, _Q2_SIGNS["normal"][s] * n, _Q2_SIGNS["tangent"][s] * t


def rotate_coeffs(p: CoeffVector, table: MonomialTable, direction: int = RHO) -> CoeffVector:
    """Coefficients of ``P o rho`` (``direction = 1``) or ``P o rho^-1`` (``-1``).

    The jet of ``P o rho`` at ``q0`` is the jet of ``P`` at ``q1``, read off
    the boundary value and derivative tables since ``Delta^i P_{j,k} = P_{j-i,k}``.
    """
    if direction not in (RHO, RHO_INV):
        raise DomainError("direction must be 1 (rho) or -1 (rho inverse)")
    _check_depth(p, table)
    corner = 1 if direction == RHO else 2
    b = p.params.backend
    rows = []
    for i in range(p.degree + 1):
        acc = [b.zero, b.zero, b.zero]
        for j in range(i, p.degree + 1):
            for k in KINDS:
                c = p.c(j, k)
                if c == 0:
                    continue
                jets = _boundary_jets(table, j - i, k, corner)
                for slot in range(3):
                    acc[slot] = acc[slot] + c * jets[slot]
        rows.append(tuple(acc))
    return CoeffVector(p.params, tuple(rows))


def rotate_by(p: CoeffVector, table: MonomialTable, power: int) -> CoeffVector:
    """``P o rho^power``."""
    power %= 3
    if power == 1:
        return rotate_coeffs(p, table, RHO)
    if power == 2:
        return rotate_coeffs(p, table, RHO_INV)
    return p


def harmonic_coeffs(params: LaplacianParams, h0: Any, h1: Any, h2: Any) -> tuple[Any, Any, Any]:
    """Degree-0 coefficients of the harmonic function with boundary values ``h``.

    Follows from the boundary values (1,1,1), (0,-1/2,-1/2), (0,1/2,-1/2) of
    ``P_{0,1}``, ``P_{0,2}``, ``P_{0,3}``.
    """
    return h0, 2 * h0 - h1 - h2, h1 - h2


def _child_from_laplacian_values(
    p: CoeffVector,
    table: MonomialTable,
    letter: str,
    lap_values: Sequence[dict[Address, Any]],
) -> CoeffVector:
    prm = p.params
    index = level_index(1)
    n = p.degree
    rows: list[tuple[Any, Any, Any]] = []
    # rows holds the coefficients of (Delta^i P) o F_letter, built from i = n down to 0
    for i in range(n, -1, -1):
        higher = [tuple(v * prm.L for v in row) for row in rows]
        corners = [lap_values[i][index.canonical((letter, l))] for l in range(3)]
        for s, row in enumerate(higher, start=1):
            for k in KINDS:
                c = row[k - 1]
                if c == 0:
                    continue
                q0, q1, q2 = table.boundary(s, k)
                corners[0] = corners[0] - c * q0
                corners[1] = corners[1] - c * q1
                corners[2] = corners[2] - c * q2
        rows = [harmonic_coeffs(prm, *corners)] + higher
    return CoeffVector(prm, tuple(rows))


def child_coeffs(p: CoeffVector, table: MonomialTable, letter: str) -> CoeffVector:
    """Coefficients of ``P o F_letter`` with base vertex ``F_letter q0``.

    By degree recursion: ``Delta (P o F) = L (Delta P) o F`` fixes all
    coefficients of degree >= 1 from the next Laplacian, and the remaining
    harmonic part is recovered from the three corner values.
    """
    if letter not in LETTERS:
        raise DomainError(f"unknown cell letter {letter!r}")
    return _child_from_laplacian_values(p, table, letter, laplacian_values_on_V1(p, table))


@dataclass(frozen=True)
class CellPolynomial:
    """``P o F_word o rho^orientation`` as a jet at ``F_word q_orientation``."""

    word: str
    orientation: int
    coeffs: CoeffVector

    def __post_init__(self) -> None:
        if self.orientation not in (0, 1, 2):
            raise DomainError("orientation must be 0, 1 or 2")

    def reoriented(self, table: MonomialTable, orientation: int) -> "CellPolynomial":
        step = (orientation - self.orientation) % 3
        return CellPolynomial(self.word, orientation % 3, rotate_by(self.coeffs, table, step))


def refine_cells(p: CoeffVector, table: MonomialTable, level: int) -> dict[str, CoeffVector]:
    """Coefficients of ``P o F_w`` for every cell word of the given level."""
    if level < 0:
        raise DomainError("level must be non-negative")
    _check_depth(p, table)
    cells = {"": p}
    for _ in range(level):
        nxt = {}
        for word, q in cells.items():
            lap = laplacian_values_on_V1(q, table)
            for letter in LETTERS:
                nxt[word + letter] = _child_from_laplacian_values(q, table, letter, lap)
        cells = nxt
    return cells


def _agree(a: Any, b: Any, backend) -> bool:
    if backend.exact:
        return a == b
    tol = 2.0 ** -(backend.precision - 10)
    scale = max(abs(a), abs(b))
    return abs(a - b) <= tol * scale if scale else True


class JunctionMismatch(ArithmeticError):
    pass


def refine(p: CoeffVector, table: MonomialTable, level: int) -> VertexMesh:
    """Values of ``P`` on ``V_level``.

    Cells one level up contribute their fifteen ``V_1`` values; a junction
    shared by two of them must receive the same value from both.
    """
    if level < 0:
        raise DomainError("level must be non-negative")
    _check_depth(p, table)
    b = p.params.backend
    if level == 0:
        vals = values_on_V1(p, table)
        return VertexMesh(0, {a: vals[a] for a in level_index(0).vertices}, p.params)
    index = level_index(level)
    v1 = level_index(1).vertices
    values: dict[Address, Any] = {}
    for word, q in refine_cells(p, table, level - 1).items():
        local = values_on_V1(q, table)
        for a in v1:
            canon = index.canonical(compose(word, a))
            v = local[a]
            prev = values.get(canon)
            if prev is None:
                values[canon] = v
            elif not _agree(prev, v, b):
                raise JunctionMismatch(
                    f"junction {canon}: {b.format(prev)} vs {b.format(v)} from adjacent cells"
                )
    return VertexMesh(level, values, p.params)


MESH_COLUMNS = ("word", "vertex_index", "x", "y", "value")


def write_mesh_csv(mesh: VertexMesh, stream) -> None:
    fmt = mesh.params.backend.format
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(MESH_COLUMNS)
    for word, idx in level_index(mesh.level).vertices:
        x, y = embed(word, idx)
        writer.writerow([word, idx, repr(x), repr(y), fmt(mesh[(word, idx)])])


def mesh_csv(mesh: VertexMesh) -> str:
    buf = io.StringIO()
    write_mesh_csv(mesh, buf)
    return buf.getvalue()
