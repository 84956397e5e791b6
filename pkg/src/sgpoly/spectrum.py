"""Neumann spectrum of the Laplacian family by spectral decimation.

Level-1 eigenvalues come from the even extension of a function across the
boundary: at a boundary vertex the reflected copy of the corner cell
supplies the missing neighbours.  Writing ``-L Delta^(1) = D K`` with ``K``
the symmetric conductance Laplacian of ``V_1`` and ``D`` diagonal, the
eigenvalues are those of the symmetric matrix ``D^1/2 K D^1/2``.

Continuum eigenvalues are limits ``L^-m lambda_m`` where consecutive levels
are linked by the decimation map; the inverse step selects the smallest
nonnegative root of a quintic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import mpmath
import numpy as np

from .errors import ConvergenceError, RootNotFoundError
from .geometry import BOUNDARY, level_index, neighbours, outer_count
from .laplacian import LaplacianParams, derive_params
from .scalar import FLOAT, Backend

SPECTRUM_BACKEND = Backend(FLOAT, 256)


def _mp(value: Any, ctx) -> Any:
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    if hasattr(value, "numerator") and not isinstance(value, (float, int)):
        return ctx.mpf(int(value.numerator)) / int(value.denominator)
    return ctx.mpf(value)


def _r_of(params: LaplacianParams) -> Any:
    return params.r_input if params.r_input is not None else params.r


def _vertex_labels() -> dict[tuple[str, int], str]:
    index = level_index(1)
    labels = {}
    for i in range(3):
        labels[index.canonical(BOUNDARY[i])] = f"x{i}"
        for j in range(3):
            if j != i:
                labels[index.canonical((f"{i}{i}", j))] = f"y{i}{j}"
        # midpoint of the side opposite q_i, and the midpoint inside cell i
        labels[index.canonical((f"{(i + 1) % 3}{(i + 2) % 3}", (i + 2) % 3))] = f"w{i}"
        labels[index.canonical((f"{i}{(i + 1) % 3}", (i + 2) % 3))] = f"z{i}"
    return labels


LABEL_ORDER = (
    "x0", "x1", "x2", "y01", "y02", "y10", "y12", "y20", "y21",
    "w0", "w1", "w2", "z0", "z1", "z2",
)


@dataclass(frozen=True)
class Level1Spectrum:
    """Closed-form eigenvalues of the reflected level-1 problem with multiplicities."""

    r: float
    branches: tuple[tuple[str, float, int], ...]

    @property
    def values(self) -> list[float]:
        out = []
        for _, value, mult in self.branches:
            out.extend([value] * mult)
        return sorted(out)

    def seed(self, name: str) -> float:
        for label, value, _ in self.branches:
            if label == name:
                return value
        raise KeyError(name)

    @property
    def nonzero(self) -> tuple[tuple[str, float, int], ...]:
        return tuple(b for b in self.branches if b[0] != "zero")


BRANCH_NAMES = ("zero", "sym", "skew3", "low", "high", "nine_halves", "nine")


# Radicand of the paired level-1 eigenvalues.  The reflected V_1 matrix and
# the decimation map (which sends both values to the level-0 eigenvalue 9)
# both require the constant 25.
PAIR_RADICAND = (9, 18, 25)


def level1_spectrum(r: Any, ctx=None, radicand: tuple[int, int, int] = PAIR_RADICAND) -> Level1Spectrum:
    """Branches named by formula: ``sym = 3(2r+1)/(r+1)``, ``skew3 = 3(2r+3)/(r+1)``,
    ``low``/``high`` the pair with the square root, then 9/2 and 9."""
    ctx = ctx or SPECTRUM_BACKEND.context
    r = _mp(r, ctx)
    a, b, c = radicand
    root = ctx.sqrt(a * r * r + b * r + c)
    return Level1Spectrum(
        float(r),
        (
            ("zero", ctx.mpf(0), 1),
            ("sym", 3 * (2 * r + 1) / (r + 1), 1),
            ("skew3", 3 * (2 * r + 3) / (r + 1), 1),
            ("low", (15 * r + 15 - 3 * root) / (4 * (r + 1)), 2),
            ("high", (15 * r + 15 + 3 * root) / (4 * (r + 1)), 2),
            ("nine_halves", ctx.mpf(9) / 2, 2),
            ("nine", ctx.mpf(9), 6),
        ),
    )


def level1_matrix(params: LaplacianParams) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Return labels, the conductance Laplacian ``K`` and the diagonal of ``D``.

    ``D K`` is the matrix of ``-L(r) Delta^(1)`` on the even extension.
    """
    r = float(params.r)
    index = level_index(1)
    names = _vertex_labels()
    order = {v: LABEL_ORDER.index(names[v]) for v in index.vertices}
    K = np.zeros((15, 15))
    diag = np.zeros(15)

    def conductance(word: str) -> float:
        return 1.0 if outer_count(word) else r

    for v in index.vertices:
        i = order[v]
        junction = index.junctions.get(v)
        cells = junction.cells if junction else [c for c in index.incidence[v]]
        for cell in cells:
            g = conductance(cell[0])
            for y in neighbours(cell):
                K[i, order[index.canonical(y)]] -= g
                K[i, i] += g
        if junction is None:
            diag[i] = 3.0
        elif junction.mixed:
            diag[i] = 3.0 / (r + 1.0)
        else:
            diag[i] = 1.5 / r if outer_count(junction.cells[0][0]) == 0 else 1.5
    labels = list(LABEL_ORDER)
    return labels, K, diag


def level1_eigenvalues(params: LaplacianParams) -> np.ndarray:
    _, K, diag = level1_matrix(params)
    s = np.sqrt(diag)
    sym = (s[:, None] * K) * s[None, :]
    return np.linalg.eigvalsh(sym)


def _cubic(x, r):
    r1 = r + 1
    return (
        r1 * r1 * x ** 3
        - 15 * r1 * r1 * x ** 2
        + (243 * r * r / 4 + 279 * r / 2 + mpmath.mpf(279) / 4) * x
        - 243 * r * r / 4
        - 351 * r / 2
        - mpmath.mpf(405) / 4
    )


def decimation_map(x: Any, r: Any, ctx=None) -> Any:
    """``lambda_m`` as a function of ``lambda_{m+1} = x``."""
    ctx = ctx or SPECTRUM_BACKEND.context
    x, r = _mp(x, ctx), _mp(r, ctx)
    num = 2 * x * ((r + 1) * x - 6 * r - 3) * _cubic(x, r)
    den = 27 * r * ((r + 1) * x - 3 * r - 6)
    if den == 0:
        if num != 0:
            raise ZeroDivisionError(f"decimation map has a pole at {x}")
        # removable: divide out the common linear factor exactly
        return -ctx.diff(lambda t: 2 * t * ((r + 1) * t - 6 * r - 3) * _cubic(t, r), x) / (27 * r * (r + 1))
    return -num / den


def decimation_numerator(x: Any, r: Any, ctx=None) -> Any:
    """The quintic whose zeros are where the decimation map vanishes."""
    ctx = ctx or SPECTRUM_BACKEND.context
    x, r = _mp(x, ctx), _mp(r, ctx)
    return 2 * x * ((r + 1) * x - 6 * r - 3) * _cubic(x, r)


def pole(r: Any) -> Any:
    return 3 * (r + 2) / (r + 1)


def _cleared(x, lam, r):
    return lam * 27 * r * ((r + 1) * x - 3 * r - 6) + 2 * x * ((r + 1) * x - 6 * r - 3) * _cubic(x, r)


SCAN_POINTS = 512


def decimate_down(lam: Any, params_or_r: Any, ctx=None) -> Any:
    """Smallest nonnegative ``lambda_{m+1}`` mapped to ``lambda_m = lam``.

    Scans ``[0, min(lam, pole - eps)]`` for the first sign change of the
    cleared quintic, bisects to relative width ``2^-60`` and polishes with
    Newton steps.
    """
    ctx = ctx or SPECTRUM_BACKEND.context
    r = _mp(_r_of(params_or_r) if isinstance(params_or_r, LaplacianParams) else params_or_r, ctx)
    lam = ctx.mpf(lam)
    if lam < 0:
        raise RootNotFoundError(f"lambda_m must be nonnegative, got {lam}")
    if lam == 0:
        return ctx.mpf(0)
    p = pole(r)
    upper = min(lam, p - ctx.mpf(2) ** (-40) * p)
    f = lambda x: _cleared(x, lam, r)  # noqa: E731
    lo, flo = ctx.mpf(0), f(ctx.mpf(0))
    bracket = None
    for n in range(1, SCAN_POINTS + 1):
        x = upper * n / SCAN_POINTS
        fx = f(x)
        if fx == 0:
            return x
        if (fx > 0) != (flo > 0):
            bracket = (lo, x, flo)
            break
        lo, flo = x, fx
    if bracket is None:
        raise RootNotFoundError(
            f"no sign change of the decimation quintic on [0, {float(upper):.6g}] "
            f"for lambda_m={float(lam):.6g}, r={float(r):.6g}"
        )
    a, b, fa = bracket
    tol = ctx.mpf(2) ** -60
    while b - a > tol * b:
        mid = (a + b) / 2
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    x = (a + b) / 2
    for _ in range(4):
        d = ctx.diff(f, x)
        if d == 0:
            break
        step = f(x) / d
        nx = x - step
        if not (a <= nx <= b):
            break
        x = nx
    return x


@dataclass
class DecimationTrajectory:
    branch: str
    seed: float
    lambdas: list[Any] = field(default_factory=list)
    renormalized: list[Any] = field(default_factory=list)
    limit: Any = None
    iterations: int = 0
    converged: bool = False


def neumann_eigenvalue(
    seed: Any,
    params: LaplacianParams,
    tol: float = 1e-12,
    max_iter: int = 200,
    branch: str = "",
    ctx=None,
) -> DecimationTrajectory:
    """Iterate the inverse decimation from a level-1 eigenvalue to its continuum limit."""
    ctx = ctx or SPECTRUM_BACKEND.context
    r = _mp(_r_of(params), ctx)
    L = 2 * r * (r + 2) / ((2 * r + 1) * (9 * r * r + 26 * r + 15))
    lam = ctx.mpf(seed)
    traj = DecimationTrajectory(branch, float(seed), [lam], [lam / L])
    if lam == 0:
        traj.limit, traj.converged = ctx.mpf(0), True
        return traj
    scale = 1 / L
    for m in range(1, max_iter + 1):
        lam = decimate_down(lam, r, ctx)
        scale = scale / L
        value = lam * scale
        prev = traj.renormalized[-1]
        traj.lambdas.append(lam)
        traj.renormalized.append(value)
        traj.iterations = m
        if abs(value - prev) < tol * abs(prev):
            traj.limit, traj.converged = value, True
            return traj
    traj.limit = traj.renormalized[-1]
    raise ConvergenceError(
        f"decimation for seed {float(seed):.6g} at r={float(r):.6g} did not converge "
        f"in {max_iter} steps",
        trajectory=traj,
    )


def branch_limits(params: LaplacianParams, tol: float = 1e-12, ctx=None) -> list[DecimationTrajectory]:
    ctx = ctx or SPECTRUM_BACKEND.context
    spec = level1_spectrum(_r_of(params), ctx)
    return [neumann_eigenvalue(value, params, tol, branch=name, ctx=ctx) for name, value, _ in spec.nonzero]


def target_ratio(r: Any, tol: float = 1e-12, ctx=None) -> tuple[Any, Any, Any]:
    """``(lambda2, lambda3, -1/(2 lambda3 - lambda2))``.

    ``lambda2`` continues the branch seeded at 3(2r+1)/(r+1) and ``lambda3``
    the branch seeded at 9/2, labelled by formula through their crossing at r = 1.
    """
    ctx = ctx or SPECTRUM_BACKEND.context
    params = derive_params(r, SPECTRUM_BACKEND) if not isinstance(r, LaplacianParams) else r
    spec = level1_spectrum(_r_of(params), ctx)
    lam2 = neumann_eigenvalue(spec.seed("sym"), params, tol, branch="sym", ctx=ctx).limit
    lam3 = neumann_eigenvalue(spec.seed("nine_halves"), params, tol, branch="nine_halves", ctx=ctx).limit
    return lam2, lam3, -1 / (2 * lam3 - lam2)


SPECTRUM_COLUMNS = ("r", "branch_seed", "multiplicity", "lambda_limit", "iterations")
TARGET_COLUMNS = ("r", "lambda2", "lambda3", "target_ratio")


def write_spectrum_csv(rows: Sequence[tuple], stream, fmt) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SPECTRUM_COLUMNS)
    for r, seed, mult, limit, iters in rows:
        writer.writerow([fmt(r), fmt(seed), mult, fmt(limit), iters])


def write_target_csv(rows: Sequence[tuple], stream, fmt) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TARGET_COLUMNS)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def closed_form_check(params: LaplacianParams) -> float:
    """Largest relative gap between matrix eigenvalues and the closed forms."""
    got = sorted(level1_eigenvalues(params))
    want = [float(v) for v in level1_spectrum(_r_of(params)).values]
    worst = 0.0
    for g, w in zip(got, want):
        gap = abs(g - w) if w == 0 else abs(g - w) / abs(w)
        worst = max(worst, gap)
    return worst if not math.isnan(worst) else math.inf
