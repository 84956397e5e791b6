"""Closed recurrences for the boundary sequences, used as an independent oracle.

Each relation is a sum of terms ``p(r) * (s_1 * s_2 * ... )_j`` where ``*``
is the Cauchy product of sequences and every ``s`` is one of ``alpha``,
``beta``, ``gamma`` or its L-weighted version ``x_i / L^i``.  The
reference coefficient polynomials are stored verbatim and never patched;
:func:`fit_coefficients` recovers the true polynomials from solver output
so that disagreements can be reported term by term.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import gmpy2

from .errors import DegeneracyError
from .laplacian import LaplacianParams, derive_params
from .linalg import nullspace_exact


@dataclass(frozen=True)
class Term:
    """``poly(r)`` times the Cauchy product of ``factors``.

    ``poly`` lists coefficients from the constant term upward.  Factor
    names are ``a``, ``b``, ``g`` or ``La``, ``Lb``, ``Lg`` for the
    L-weighted sequences.
    """

    poly: tuple[int, ...]
    factors: tuple[str, ...]

    @property
    def name(self) -> str:
        return "*".join(self.factors)

    def coefficient(self, r: Any) -> Any:
        acc = 0
        for c in reversed(self.poly):
            acc = acc * r + c
        return acc


def _t(poly, *factors) -> Term:
    return Term(tuple(poly), tuple(factors))


# Coefficient lists are constant term first.  The quartic alpha coefficient
# carries two linear monomials (-88r and +8r); they are summed, nothing else changes.
REFERENCE: dict[int, tuple[Term, ...]] = {
    1: (
        _t((128, 384, 384, 128), "a", "a", "a", "a", "a", "a"),
        _t((-192, -512, -448, -128), "a", "a", "a", "a", "a"),
        _t((24, -80, 0, -72), "a", "a", "a", "a"),
        _t((60, 144, 164, 64), "a", "a", "a"),
        _t((-18, -10, 2, 14), "a", "a"),
        _t((-3, 0, -9, -6), "a"),
        _t((0, -8, -8), "a", "a", "La"),
        _t((0, -4), "a", "La"),
        _t((0, 0, 2), "La"),
    ),
    2: (
        _t((768, 2688, 3456, 1920, 384), "a", "a", "a", "a", "a", "b"),
        _t((-1152, -3648, -4224, -2112, -384), "a", "a", "a", "a", "b"),
        _t((528, 1080, 264, -504, -216), "a", "a", "a", "b"),
        _t((-24, 84, 648, 684, 192), "a", "a", "b"),
        _t((-36, 18, -42, 54, 42), "a", "b"),
        _t((6, -21, 30, -15, -18), "b"),
        _t((-60, -164, -140, -36), "a", "a", "Lb"),
        _t((-30, -52, -18), "a", "Lb"),
        _t((0, 15, 26, 9), "Lb"),
    ),
    3: (
        _t((15, 26, 9), "Lg"),
        _t((-32, -64, -32), "a", "a", "a", "g"),
        _t((16, 32, 16), "a", "a", "g"),
        _t((2, 4, 10), "a", "g"),
        _t((-1, 2, -3), "g"),
    ),
}

SEEDS = {1: ("1", "1/6"), 2: ("-1/2",), 3: ("1/2",)}
_OWN = {1: "a", 2: "b", 3: "g"}


def _cauchy(x: Sequence[Any], y: Sequence[Any], n: int, zero: Any) -> list[Any]:
    out = []
    for j in range(n):
        acc = zero
        for i in range(j + 1):
            acc = acc + x[i] * y[j - i]
        out.append(acc)
    return out


def term_values(
    term: Term,
    seqs: dict[str, Sequence[Any]],
    L: Any,
    n: int,
    zero: Any,
) -> list[Any]:
    """Entries ``0 .. n-1`` of the Cauchy product of the term's factors."""
    prod = None
    for name in term.factors:
        if name.startswith("L"):
            base = seqs[name[1]]
            s = [base[i] / L ** i for i in range(n)]
        else:
            s = list(seqs[name][:n])
        prod = s if prod is None else _cauchy(prod, s, n, zero)
    return prod


def relation_residual(
    params: LaplacianParams,
    k: int,
    seqs: dict[str, Sequence[Any]],
    j: int,
    terms: Sequence[Term] | None = None,
) -> Any:
    terms = REFERENCE[k] if terms is None else terms
    zero = params.backend.zero
    total = zero
    for term in terms:
        total = total + term.coefficient(params.r) * term_values(term, seqs, params.L, j + 1, zero)[j]
    return total


def recurrence_oracle(
    params: LaplacianParams,
    jmax: int,
    terms: dict[int, Sequence[Term]] | None = None,
) -> dict[int, list[Any]]:
    """Boundary sequences computed only from the reference recurrences.

    The degree-``j`` relation is affine in the newest entry, so it is
    evaluated with that entry set to 0 and to 1 and solved.  ``alpha`` is
    seeded with ``alpha_0 = 1``, ``alpha_1 = 1/6``; ``beta`` and ``gamma``
    with their degree-0 values.
    """
    if jmax < 0:
        raise ValueError("jmax must be non-negative")
    terms = REFERENCE if terms is None else terms
    b = params.backend
    out: dict[int, list[Any]] = {}
    for k in (1, 2, 3):
        own = _OWN[k]
        seq = [b(s) for s in SEEDS[k]][: jmax + 1]
        while len(seq) <= jmax:
            j = len(seq)
            seqs = {"a": out.get(1, seq), own: seq + [b.zero]}
            s0 = relation_residual(params, k, seqs, j, terms[k])
            seqs[own] = seq + [b.one]
            if k == 1:
                seqs["a"] = seqs[own]
            s1 = relation_residual(params, k, seqs, j, terms[k])
            lead = s1 - s0
            if lead == 0:
                raise DegeneracyError(
                    f"recurrence for sequence {k} has vanishing leading coefficient",
                    j=j, r=params.r,
                )
            seq.append(-s0 / lead)
        out[k] = seq
    return out


@dataclass(frozen=True)
class CoefficientMismatch:
    sequence: int
    term: str
    power: int
    reference: Fraction
    fitted: Fraction

    def describe(self) -> str:
        name = {1: "alpha", 2: "beta", 3: "gamma"}[self.sequence]
        return (
            f"{name} relation, term {self.term}: coefficient of r^{self.power} "
            f"reference {self.reference}, fitted {self.fitted}"
        )


FIT_RS = ("1/2", "1/3", "2", "3", "5", "1/5", "7", "2/7")


# Term whose reference coefficient fixes the scale of the fitted relation.  The
# alpha relation cannot be anchored on its L-weighted term: away from r = 1
# the relation satisfied by the true sequence gives that term weight zero.
ANCHOR = {1: 0, 2: 8, 3: 0}


def _fit_values(k: int, table_for, r: str, terms: Sequence[Term]) -> list[Any] | None:
    """Coefficient values at one ``r`` from the nullspace, scaled on the anchor term."""
    table = table_for(r)
    params = table.params
    depth = table.jmax + 1
    seqs = {"a": table.sequence(1), "b": table.sequence(2), "g": table.sequence(3)}
    cols = [term_values(t, seqs, params.L, depth, params.backend.zero) for t in terms]
    matrix = [[col[j] for col in cols] for j in range(depth)]
    basis = nullspace_exact(matrix)
    if len(basis) != 1:
        return None
    v = basis[0]
    anchor = ANCHOR[k]
    if v[anchor] == 0:
        return None
    norm = terms[anchor].coefficient(params.r) / v[anchor]
    return [x * norm for x in v]


def _interpolate(xs: Sequence[Any], ys: Sequence[Any], degree: int) -> list[Fraction] | None:
    """Exact coefficients of the degree-``degree`` polynomial through all points, or None."""
    n = degree + 1
    A = [[x ** p for p in range(n)] + [y] for x, y in zip(xs, ys)]
    basis = nullspace_exact([row[:-1] + [-row[-1]] for row in A])
    sol = [v for v in basis if v[-1] != 0]
    if len(basis) != 1 or not sol:
        return None
    v = sol[0]
    return [Fraction(int((c / v[-1]).numerator), int((c / v[-1]).denominator)) for c in v[:-1]]


@dataclass
class FitReport:
    sequence: int
    fitted: dict[str, list[Fraction]]
    mismatches: list[CoefficientMismatch]
    determined: bool


def fit_coefficients(k: int, jdepth: int = 14, rs: Sequence[str] = FIT_RS, table_for=None) -> FitReport:
    """Recover the true coefficient polynomials of relation ``k`` and diff them against print.

    Uses exact solver tables at several ``r``; the relation is normalized so
    that the anchor term keeps its reference coefficient.  Polynomials up to
    degree ``len(rs) - 3`` are fitted, so two samples are spare checks.
    """
    from .monomials import build_table

    if table_for is None:
        def table_for(r):
            return build_table(derive_params(r), jdepth)

    terms = REFERENCE[k]
    samples = {}
    for r in rs:
        vals = _fit_values(k, table_for, r, terms)
        if vals is None:
            return FitReport(k, {}, [], False)
        samples[r] = vals
    xs = [gmpy2.mpq(Fraction(r)) for r in rs]
    fitted: dict[str, list[Fraction]] = {}
    mismatches = []
    degree = len(rs) - 3
    for idx, term in enumerate(terms):
        coeffs = _interpolate(xs, [samples[r][idx] for r in rs], degree)
        if coeffs is None:
            return FitReport(k, fitted, mismatches, False)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        fitted[term.name] = coeffs
        reference = list(term.poly)
        for p in range(max(len(reference), len(coeffs))):
            pc = Fraction(reference[p]) if p < len(reference) else Fraction(0)
            fc = coeffs[p] if p < len(coeffs) else Fraction(0)
            if pc != fc:
                mismatches.append(CoefficientMismatch(k, term.name, p, pc, fc))
    return FitReport(k, fitted, mismatches, True)
