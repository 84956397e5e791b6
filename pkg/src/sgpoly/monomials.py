"""Boundary and ``V_1`` values of the monomials ``P_{j,k}`` and their derivatives at ``q1``.

For each degree ``j`` the unknown ``V_1`` values of ``P_{j,k}`` solve a small
affine system obtained by applying the local Laplacian identity

    tilde_Delta^(1) P(x) = w(x) * sum_{i>=1} L^i alpha_i (Delta^i P)(x)

at one junction of every symmetry class, where ``w(x)`` is the total
stencil weight (4, or 2 + 2r at junctions of an outer and an inner cell)
and ``Delta^i P_{j,k} = P_{j-i,k}``.  The values are parametrized by the
reflection symmetry about ``q0`` and by the eigenfunction property under
``F_00``, so each system has seven unknowns (five for ``k = 3``).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import DegeneracyError, DepthError, PrecisionError
from .geometry import BOUNDARY, Address, level_index, neighbours
from .laplacian import LaplacianParams, derive_params, harmonic_extension
from .linalg import solve
from .scalar import FLOAT, Backend

LABELS = ("corner", "a", "b", "c", "d", "e", "f")
AUX = ("a", "b", "c", "d", "e", "f")

# First entry of each group is on the q1 side; the second is its R_0 mirror.
LAYOUT: dict[str, tuple[Address, ...]] = {
    "corner": (("00", 1), ("00", 2)),
    "a": (("01", 1), ("02", 2)),
    "b": (("01", 2),),
    "c": (("10", 1), ("20", 2)),
    "d": (("10", 2), ("20", 1)),
    "e": (("11", 2), ("21", 2)),
    "f": (("12", 2),),
}
KINDS = (1, 2, 3)


@dataclass(frozen=True)
class MonomialRow:
    """Values of ``P_{j,k}`` on ``V_1``: ``value`` at ``q1`` and the six auxiliaries."""

    j: int
    k: int
    value: Any
    a: Any
    b: Any
    c: Any
    d: Any
    e: Any
    f: Any

    def label(self, name: str) -> Any:
        return getattr(self, name)


def corner_scale(params: LaplacianParams, j: int, k: int) -> Any:
    """Eigenvalue of ``P_{j,k} -> P_{j,k} o F_00``."""
    base = {1: params.backend.one, 2: params.lam_sym, 3: params.lam_skew}[k]
    return base * params.L ** j


def v1_values(params: LaplacianParams, row: MonomialRow) -> dict[Address, Any]:
    """Expand a row into all fifteen ``V_1`` values (mirror sign is -1 for k = 3)."""
    b = params.backend
    sign = -1 if row.k == 3 else 1
    out = {
        BOUNDARY[0]: b.one if (row.j == 0 and row.k == 1) else b.zero,
        BOUNDARY[1]: row.value,
        BOUNDARY[2]: sign * row.value,
    }
    corner = corner_scale(params, row.j, row.k) * row.value
    for name in LABELS:
        v = corner if name == "corner" else row.label(name)
        places = LAYOUT[name]
        out[places[0]] = v
        if len(places) == 2:
            out[places[1]] = sign * v
    return out


def initial_row(params: LaplacianParams, k: int) -> MonomialRow:
    """Degree-0 rows: the harmonic monomials 1, (0,-1/2,-1/2) and (0,1/2,-1/2)."""
    b = params.backend
    boundary = {1: (1, 0, 0), 2: (0, b("-1/2"), b("-1/2")), 3: (0, b("1/2"), b("-1/2"))}[k]
    if k == 1:
        vals = {p: b.one for p in level_index(1).vertices}
    else:
        vals = harmonic_extension(params, boundary)
    return MonomialRow(0, k, vals[BOUNDARY[1]], *(vals[LAYOUT[name][0]] for name in AUX))


class _Affine:
    """Affine expression: constant plus linear combination of named unknowns."""

    __slots__ = ("const", "coef")

    def __init__(self, const: Any, coef: dict[str, Any] | None = None):
        self.const = const
        self.coef = coef or {}

    def scaled(self, s: Any) -> "_Affine":
        return _Affine(self.const * s, {k: v * s for k, v in self.coef.items()})

    def add(self, other: "_Affine") -> "_Affine":
        coef = dict(self.coef)
        for k, v in other.coef.items():
            coef[k] = coef.get(k, 0) + v
        return _Affine(self.const + other.const, coef)


def _unknown_layout(params: LaplacianParams, j: int, k: int) -> dict[Address, _Affine]:
    b = params.backend
    sign = -1 if k == 3 else 1
    zero = b.zero
    layout = {
        BOUNDARY[0]: _Affine(b.one if (j == 0 and k == 1) else zero),
        BOUNDARY[1]: _Affine(zero, {"value": b.one}),
        BOUNDARY[2]: _Affine(zero, {"value": b(sign)}),
    }
    scale = corner_scale(params, j, k)
    for name in LABELS:
        places = LAYOUT[name]
        if k == 3 and name in ("b", "f"):
            expr = _Affine(zero)
        elif name == "corner":
            expr = _Affine(zero, {"value": scale})
        else:
            expr = _Affine(zero, {name: b.one})
        layout[places[0]] = expr
        if len(places) == 2:
            layout[places[1]] = expr.scaled(sign)
    return layout


def unknowns_for(k: int) -> tuple[str, ...]:
    return ("value", "a", "c", "d", "e") if k == 3 else ("value",) + AUX


def assemble_system(
    params: LaplacianParams,
    j: int,
    k: int,
    lower: dict[int, dict[Address, Any]],
    alphas: list[Any],
) -> tuple[list[list[Any]], list[Any], tuple[str, ...]]:
    """Rows ``A u = rhs`` for the unknowns of ``P_{j,k}``.

    ``lower[i]`` holds the ``V_1`` values of ``P_{i,k}`` for ``i < j`` and
    ``alphas`` holds ``alpha_0 .. alpha_{j-1}`` (``alpha_j`` too when k > 1).
    """
    b = params.backend
    r, L = params.r, params.L
    names = unknowns_for(k)
    layout = _unknown_layout(params, j, k)
    index = level_index(1)
    A, rhs = [], []
    for name in LABELS:
        if k == 3 and name in ("b", "f"):
            continue
        x = LAYOUT[name][0]
        junction = index.junctions[x]
        w_first = r if junction.mixed else b.one
        weight = 2 * w_first + 2
        expr = layout[x].scaled(-weight)
        for y in neighbours(junction.cells[0]):
            expr = expr.add(layout[index.canonical(y)].scaled(w_first))
        for y in neighbours(junction.cells[1]):
            expr = expr.add(layout[index.canonical(y)])
        # minus weight * sum_{i=1}^{j} L^i alpha_i P_{j-i,k}(x)
        const = expr.const
        Li = b.one
        for i in range(1, j + 1):
            Li = Li * L
            if i == j and k == 1:
                expr.coef["value"] = expr.coef.get("value", 0) - weight * Li
                continue
            const = const - weight * Li * alphas[i] * lower[j - i][x]
        A.append([expr.coef.get(n, b.zero) for n in names])
        rhs.append(-const)
    return A, rhs, names


ALPHA_1 = "1/6"


def _row_from_solution(j: int, k: int, names, sol, backend) -> MonomialRow:
    values = dict(zip(names, sol))
    return MonomialRow(j, k, values["value"], *(values.get(n, backend.zero) for n in AUX))


def compute_row(
    params: LaplacianParams,
    j: int,
    k: int,
    lower: dict[int, dict[Address, Any]],
    alphas: list[Any],
) -> MonomialRow:
    """Solve the degree-``j`` system for ``P_{j,k}`` (``j >= 1``).

    For ``k = 1, j = 1`` the system is homogeneous and singular (any multiple
    of ``P_{1,1}`` solves it); ``alpha_1 = 1/6`` is substituted and the
    remaining overdetermined system must be consistent.
    """
    if j < 1:
        raise ValueError("degree-0 rows are initial data")
    b = params.backend
    A, rhs, names = assemble_system(params, j, k, lower, alphas)
    label = f"P_{{{j},{k}}} system at r={b.format(params.r)}"
    try:
        if k == 1 and j == 1:
            alpha1 = b(ALPHA_1)
            rhs = [rv - row[0] * alpha1 for row, rv in zip(A, rhs)]
            sol = [alpha1] + solve([row[1:] for row in A], rhs, b, label)
        else:
            sol = solve(A, rhs, b, label)
    except PrecisionError as exc:
        raise PrecisionError(str(exc), j=j, r=params.r) from None
    except DegeneracyError as exc:
        raise DegeneracyError(str(exc), j=j, r=params.r) from None
    return _row_from_solution(j, k, names, sol, b)


def compute_alpha_row(table: "MonomialTable", j: int) -> MonomialRow:
    alphas = [table.value(i, 1) for i in range(j)]
    lower = {i: table.v1(i, 1) for i in range(j)}
    return compute_row(table.params, j, 1, lower, alphas)


def compute_beta_row(table: "MonomialTable", j: int) -> MonomialRow:
    if j == 0:
        return initial_row(table.params, 2)
    alphas = [table.value(i, 1) for i in range(j + 1)]
    return compute_row(table.params, j, 2, {i: table.v1(i, 2) for i in range(j)}, alphas)


def compute_gamma_row(table: "MonomialTable", j: int) -> MonomialRow:
    if j == 0:
        return initial_row(table.params, 3)
    alphas = [table.value(i, 1) for i in range(j + 1)]
    return compute_row(table.params, j, 3, {i: table.v1(i, 3) for i in range(j)}, alphas)


def derivative_tables(alpha, beta, gamma, backend) -> tuple[dict, dict]:
    """Normal and tangential derivatives ``n_{j,k}``, ``t_{j,k}`` at ``q1``."""
    jmax = len(alpha) - 1
    n: dict[tuple[int, int], Any] = {}
    t: dict[tuple[int, int], Any] = {}
    for j in range(jmax + 1):
        delta = backend.one if j == 0 else backend.zero
        conv = backend.zero
        for i in range(j + 1):
            conv = conv + alpha[i] * alpha[j - i]
        acc = 2 * conv - alpha[j] - delta
        for i in range(j):
            acc = acc + 2 * n[(i, 1)] * beta[j - i]
        n[(j, 1)] = acc

        conv = backend.zero
        for i in range(j + 1):
            conv = conv + alpha[i] * beta[j - i]
        acc = 2 * conv - beta[j]
        for i in range(j):
            acc = acc + 2 * n[(i, 2)] * beta[j - i]
        n[(j, 2)] = acc

        # the skew monomials take opposite values at q1 and q2, so their
        # boundary values enter through 2 * sum alpha_{j-i} gamma_i
        acc = gamma[j]
        for i in range(j + 1):
            acc = acc + 2 * alpha[j - i] * gamma[i]
        for i in range(j):
            acc = acc + 2 * n[(i, 3)] * beta[j - i]
        n[(j, 3)] = acc

        for k, first in ((1, alpha[j] - delta), (2, beta[j]), (3, -gamma[j])):
            acc = first
            for i in range(j):
                acc = acc - 2 * t[(i, k)] * gamma[j - i]
            t[(j, k)] = acc
    return n, t


@dataclass
class MonomialTable:
    """Rows ``j = 0 .. jmax`` for ``k = 1, 2, 3`` plus derivative entries."""

    params: LaplacianParams
    rows: dict[tuple[int, int], MonomialRow] = field(default_factory=dict)
    n: dict[tuple[int, int], Any] = field(default_factory=dict)
    t: dict[tuple[int, int], Any] = field(default_factory=dict)
    _v1: dict[tuple[int, int], dict[Address, Any]] = field(default_factory=dict, repr=False)

    @property
    def backend(self):
        return self.params.backend

    @property
    def jmax(self) -> int:
        j = -1
        while all((j + 1, k) in self.rows for k in KINDS):
            j += 1
        return j

    def row(self, j: int, k: int) -> MonomialRow:
        try:
            return self.rows[(j, k)]
        except KeyError:
            raise DepthError(f"table has no row for P_{{{j},{k}}} (depth {self.jmax})") from None

    def value(self, j: int, k: int) -> Any:
        return self.row(j, k).value

    def alpha(self, j: int) -> Any:
        return self.value(j, 1)

    def beta(self, j: int) -> Any:
        return self.value(j, 2)

    def gamma(self, j: int) -> Any:
        return self.value(j, 3)

    def sequence(self, k: int) -> list[Any]:
        out = []
        while (len(out), k) in self.rows:
            out.append(self.rows[(len(out), k)].value)
        return out

    def v1(self, j: int, k: int) -> dict[Address, Any]:
        key = (j, k)
        if key not in self._v1:
            self._v1[key] = v1_values(self.params, self.row(j, k))
        return self._v1[key]

    def boundary(self, j: int, k: int) -> tuple[Any, Any, Any]:
        vals = self.v1(j, k)
        return vals[BOUNDARY[0]], vals[BOUNDARY[1]], vals[BOUNDARY[2]]

    def normal(self, j: int, k: int) -> Any:
        try:
            return self.n[(j, k)]
        except KeyError:
            raise DepthError(f"no derivative entry for P_{{{j},{k}}}") from None

    def tangential(self, j: int, k: int) -> Any:
        try:
            return self.t[(j, k)]
        except KeyError:
            raise DepthError(f"no derivative entry for P_{{{j},{k}}}") from None

    def require(self, degree: int) -> None:
        if degree > self.jmax or any((degree, k) not in self.n for k in KINDS):
            raise DepthError(f"table depth {self.jmax} is below polynomial degree {degree}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_table_csv(self, buf)
        return buf.getvalue()


def compute_derivatives(table: MonomialTable, jmax: int | None = None) -> MonomialTable:
    jmax = table.jmax if jmax is None else jmax
    seqs = [[table.value(j, k) for j in range(jmax + 1)] for k in KINDS]
    n, t = derivative_tables(*seqs, table.backend)
    table.n.update(n)
    table.t.update(t)
    return table


GUARD_BITS_PER_DEGREE = 8


def guard_bits(jmax: int) -> int:
    """Extra working bits for float tables.

    The degree recursion amplifies relative rounding errors geometrically
    (up to about 6 bits per degree where a sequence is anomalously small,
    e.g. alpha_j near r = 1), so tables are computed with headroom and then
    rounded to the requested precision.
    """
    return GUARD_BITS_PER_DEGREE * jmax


def build_table(
    params: LaplacianParams,
    jmax: int,
    kinds: Iterable[int] = KINDS,
    guard: bool = True,
) -> MonomialTable:
    """Run the full pipeline: alpha rows first, then beta and gamma, then derivatives."""
    if jmax < 0:
        raise ValueError("jmax must be non-negative")
    backend = params.backend
    if guard and not backend.exact and jmax > 0:
        work = Backend(FLOAT, backend.precision + guard_bits(jmax))
        source = params.r_input if params.r_input is not None else params.r
        inner = build_table(derive_params(source, work), jmax, kinds, guard=False)
        return _round_table(inner, params)

    kinds = tuple(sorted(set(kinds) | {1}))
    table = MonomialTable(params)
    table.rows[(0, 1)] = initial_row(params, 1)
    for j in range(1, jmax + 1):
        table.rows[(j, 1)] = compute_alpha_row(table, j)
    if 2 in kinds:
        for j in range(jmax + 1):
            table.rows[(j, 2)] = compute_beta_row(table, j)
    if 3 in kinds:
        for j in range(jmax + 1):
            table.rows[(j, 3)] = compute_gamma_row(table, j)
    if kinds == KINDS:
        compute_derivatives(table, jmax)
    return table


def _round_table(inner: MonomialTable, params: LaplacianParams) -> MonomialTable:
    b = params.backend
    out = MonomialTable(params)
    for key, row in inner.rows.items():
        out.rows[key] = MonomialRow(row.j, row.k, *(b(row.label(n)) for n in ("value",) + AUX))
    out.n.update({key: b(v) for key, v in inner.n.items()})
    out.t.update({key: b(v) for key, v in inner.t.items()})
    return out


CSV_COLUMNS = ("j", "k", "value", "a", "b", "c", "d", "e", "f", "n", "t")


def write_table_csv(table: MonomialTable, stream) -> None:
    fmt = table.backend.format
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for j in range(table.jmax + 1):
        for k in KINDS:
            row = table.row(j, k)
            cells = [row.value] + [row.label(n) for n in AUX]
            writer.writerow(
                [j, k, *(fmt(v) for v in cells),
                 fmt(table.n[(j, k)]) if (j, k) in table.n else "",
                 fmt(table.t[(j, k)]) if (j, k) in table.t else ""]
            )
