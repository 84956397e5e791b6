"""Sweeps over r: ratio sequences, root localization and the identity verification suite."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .errors import DomainError, SGError
from .geometry import compose, level_index, reflect, rotate
from .laplacian import derive_params, harmonic_extension, mesh_from_v1, tilde_laplacian
from .monomials import KINDS, build_table
from .polynomial import CoeffVector, refine, refine_cells, rotate_by, rotate_coeffs
from .recurrence import fit_coefficients, recurrence_oracle
from .scalar import EXACT, FLOAT, Backend, pack, parse_rational, unpack
from .spectrum import SPECTRUM_BACKEND, decimation_map, target_ratio

NA = "NA"
SQRT17_ROOT = (math.sqrt(17.0) - 3.0) / 4.0


@dataclass(frozen=True)
class SweepConfig:
    r_min: Fraction = Fraction(1, 20)
    r_max: Fraction = Fraction(20)
    grid_points: int = 400
    spacing: str = "log"
    jmax: int = 50
    backend: str = FLOAT
    precision: int = 256
    out: str = "."
    jobs: int = 1

    def __post_init__(self) -> None:
        if not 0 < self.r_min < self.r_max:
            raise DomainError("need 0 < r_min < r_max")
        if self.grid_points < 2:
            raise DomainError("grid needs at least 2 points")
        if self.jmax < 1:
            raise DomainError("jmax must be at least 1")
        if self.spacing not in ("linear", "log"):
            raise DomainError("spacing must be linear or log")

    @property
    def scalar_backend(self) -> Backend:
        return Backend(self.backend, self.precision)

    def grid(self) -> list[float]:
        lo, hi, n = float(self.r_min), float(self.r_max), self.grid_points
        if self.spacing == "log":
            a, b = math.log(lo), math.log(hi)
            pts = [math.exp(a + (b - a) * i / (n - 1)) for i in range(n)]
        else:
            pts = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
        pts[0], pts[-1] = lo, hi
        return pts


def ratio(num: Any, den: Any) -> Any:
    """``num / den``, or None when the denominator is exactly zero."""
    if den == 0:
        return None
    return num / den


def _to_mp(value: Any, ctx) -> Any:
    if hasattr(value, "denominator") and not isinstance(value, float):
        return ctx.mpf(int(value.numerator)) / int(value.denominator)
    return ctx.mpf(value)


def ratio_sequence(seq: Sequence[Any]) -> list[Any]:
    return [ratio(seq[j + 1], seq[j]) for j in range(len(seq) - 1)]


@dataclass
class RatioReport:
    r: Any
    alpha: list[Any]
    beta: list[Any]
    gamma: list[Any]
    gamma_over_alpha: list[Any]
    lambda2: Any
    lambda3: Any
    target: Any
    alpha_top: Any = None
    gamma_top: Any = None

    def deviation(self, values: Sequence[Any], j: int) -> Any:
        v = values[j]
        if v is None or self.target is None or self.target == 0:
            return None
        ctx = SPECTRUM_BACKEND.context
        t = ctx.mpf(self.target)
        return abs(_to_mp(v, ctx) - t) / abs(t)


def ratio_report(r: Any, jmax: int, backend: Backend, with_target: bool = True) -> RatioReport:
    table = build_table(derive_params(r, backend), jmax)
    a, b, g = table.sequence(1), table.sequence(2), table.sequence(3)
    goa = [ratio(g[j], a[j + 1]) for j in range(jmax)]
    lam2 = lam3 = target = None
    if with_target:
        lam2, lam3, target = target_ratio(r)
    return RatioReport(
        r, ratio_sequence(a), ratio_sequence(b), ratio_sequence(g), goa, lam2, lam3, target, a[jmax], g[jmax]
    )


def _fmt(value: Any, backend: Backend) -> str:
    if value is None:
        return NA
    if isinstance(value, float):
        return repr(value)
    try:
        return backend.format(value)
    except (TypeError, ValueError):
        return SPECTRUM_BACKEND.format(value)


def _fmt_float(value: Any) -> str:
    return NA if value is None else SPECTRUM_BACKEND.format(value)


def bisect_root(f: Callable[[float], Any], lo: float, hi: float, width: float = 1e-6) -> tuple[float, float]:
    """Shrink a sign-change bracket of ``f`` to the given width."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo, lo
    if fhi == 0:
        return hi, hi
    if (flo > 0) == (fhi > 0):
        raise DomainError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > width:
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def sign_changes(xs: Sequence[float], values: Sequence[Any]) -> list[tuple[float, float]]:
    out = []
    for a, b, va, vb in zip(xs, xs[1:], values, values[1:]):
        if va == 0:
            out.append((a, a))
        elif (va > 0) != (vb > 0) and vb != 0:
            out.append((a, b))
    return out


def sequence_value(r: float, j: int, k: int, backend: Backend) -> Any:
    kinds = (1,) if k == 1 else (1, k)
    return build_table(derive_params(r, backend), j, kinds=kinds).value(j, k)


def localize_roots(
    j: int,
    k: int,
    xs: Sequence[float],
    backend: Backend,
    width: float = 1e-6,
    values: Sequence[Any] | None = None,
) -> list[tuple[float, float]]:
    """Brackets of width ``width`` around each sign change of ``P_{j,k}(q1)`` in ``r``."""
    if values is None:
        values = [sequence_value(x, j, k, backend) for x in xs]
    brackets = []
    for lo, hi in sign_changes(xs, values):
        if lo == hi:
            brackets.append((lo, hi))
            continue
        brackets.append(bisect_root(lambda r: sequence_value(r, j, k, backend), lo, hi, width))
    return brackets


_REPORT_FIELDS = ("alpha", "beta", "gamma", "gamma_over_alpha", "lambda2", "lambda3", "target", "alpha_top", "gamma_top")


def beta_ratio_at_root(
    bracket: tuple[float, float], jmax: int, backend: Backend, width: float = 1e-13
) -> tuple[float, Any]:
    """``beta_jmax / beta_(jmax-1)`` at an alpha root refined far below grid resolution.

    Near such a root the beta ratio has a local maximum whose width shrinks
    with the degree, so it is probed at the root rather than on the grid.
    """
    lo, hi = bisect_root(lambda r: sequence_value(r, jmax, 1, backend), *bracket, width=width)
    r = (lo + hi) / 2
    beta = build_table(derive_params(r, backend), jmax, kinds=(1, 2)).sequence(2)
    return r, ratio(beta[jmax], beta[jmax - 1])


def _sweep_point(args) -> tuple[float, tuple]:
    r, jmax, kind, precision = args
    rep = ratio_report(r, jmax, Backend(kind, precision))
    return r, pack(tuple(getattr(rep, name) for name in _REPORT_FIELDS))


def _report_from(r: float, packed: tuple) -> RatioReport:
    return RatioReport(r, **dict(zip(_REPORT_FIELDS, unpack(packed))))


def sweep(config: SweepConfig) -> list[RatioReport]:
    """Ratio reports over the grid; independent points may run in worker processes."""
    tasks = [(r, config.jmax, config.backend, config.precision) for r in config.grid()]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    results.sort(key=lambda item: item[0])
    return [_report_from(r, packed) for r, packed in results]


CONJECTURE_COLUMNS = (
    "r", "j", "alpha_ratio", "beta_ratio", "gamma_ratio", "gamma_over_alpha",
    "lambda2", "lambda3", "target_ratio", "alpha_deviation", "beta_deviation",
)
ROOT_COLUMNS = ("sequence", "j", "lower", "upper", "midpoint")


def write_conjecture_csv(reports: Iterable[RatioReport], j: int, stream, backend: Backend) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CONJECTURE_COLUMNS)
    for rep in reports:
        writer.writerow([
            repr(float(rep.r)), j,
            _fmt(rep.alpha[j], backend), _fmt(rep.beta[j], backend), _fmt(rep.gamma[j], backend),
            _fmt(rep.gamma_over_alpha[j], backend),
            _fmt_float(rep.lambda2), _fmt_float(rep.lambda3), _fmt(rep.target, backend),
            _fmt(rep.deviation(rep.alpha, j), backend), _fmt(rep.deviation(rep.beta, j), backend),
        ])


def write_roots_csv(rows: Iterable[tuple[str, int, float, float]], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(ROOT_COLUMNS)
    for name, j, lo, hi in rows:
        writer.writerow([name, j, repr(lo), repr(hi), repr((lo + hi) / 2)])


# ---------------------------------------------------------------- verification


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    warning: bool = False

    def line(self) -> str:
        tag = "WARN" if self.warning else ("PASS" if self.passed else "FAIL")
        return f"[{tag}] {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class VerifyReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed or c.warning for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "", warning: bool = False) -> None:
        self.checks.append(CheckResult(name, bool(passed), detail, warning))


DEFAULT_VERIFY_RS = ("1/10", "1/3", "1", "2", "10")


def _first_failure(pairs: Iterable[tuple[int, bool]]) -> str:
    bad = [j for j, ok in pairs if not ok]
    return "" if not bad else f"fails at j={bad[:5]}"


def closed_forms(r: Any) -> tuple[Any, Any, Any]:
    """``alpha_2``, ``beta_1``, ``gamma_1`` as rational functions of ``r``."""
    a2 = r * (45 * r**4 + 233 * r**3 + 420 * r**2 + 305 * r + 77) / (
        9 * (324 * r**6 + 2160 * r**5 + 5543 * r**4 + 7016 * r**3 + 4712 * r**2 + 1620 * r + 225)
    )
    den = 162 * r**5 + 999 * r**4 + 2272 * r**3 + 2372 * r**2 + 1170 * r + 225
    b1 = -r * (81 * r**4 + 495 * r**3 + 1066 * r**2 + 947 * r + 291) / (9 * den)
    g1 = r * (27 * r**3 + 116 * r**2 + 155 * r + 62) / (3 * den)
    return a2, b1, g1


def stencil_residuals(table, jmax: int) -> list[tuple[int, int, bool]]:
    """Stencil identity on ``V_1`` for every stored monomial up to ``jmax``."""
    params = table.params
    index = level_index(1)
    out = []
    for j in range(jmax + 1):
        for k in KINDS:
            mesh = mesh_from_v1(params, table.v1(j, k))
            ok = True
            for x, junction in index.junctions.items():
                weight = 2 * params.r + 2 if junction.mixed else 4
                rhs = 0
                for i in range(1, j + 1):
                    rhs = rhs + params.L ** i * table.alpha(i) * table.v1(j - i, k)[x]
                if tilde_laplacian(mesh, x) != weight * rhs:
                    ok = False
            out.append((j, k, ok))
    return out


def structural_checks(table, degree: int, level: int = 2) -> dict[str, bool]:
    """Junction agreement, matching condition, three-point identity and
    vanishing tangential sums on a refinement of each monomial."""
    params = table.params
    index = level_index(level)
    result = {"junctions": True, "matching": True, "three_point": True, "tangential_sum": True, "rotation": True}
    for j in range(degree + 1):
        for k in KINDS:
            p = CoeffVector.monomial(params, j, k)
            if rotate_by(rotate_by(rotate_by(p, table, 1), table, 1), table, 1) != p:
                result["rotation"] = False
            try:
                mesh = refine(p, table, level)
            except ArithmeticError:
                result["junctions"] = False
                continue
            for w, l in index.vertices:
                for cut in range(0, len(w) + 1, 2):
                    pre, x = w[:cut], (w[cut:], l)

                    def val(a):
                        return mesh[compose(pre, a)]

                    lhs = val(x) + val(rotate(x, 1)) + val(rotate(x, -1))
                    if lhs != sum(val(reflect(x, i)) for i in range(3)):
                        result["three_point"] = False
            cells = refine_cells(p, table, level)
            for q in cells.values():
                r1, r2 = rotate_coeffs(q, table, 1), rotate_coeffs(q, table, -1)
                if any(q.c(i, 3) + r1.c(i, 3) + r2.c(i, 3) != 0 for i in range(q.degree + 1)):
                    result["tangential_sum"] = False
            for junction in index.junctions.values():
                (w1, l1), (w2, l2) = junction.cells
                n1 = rotate_by(cells[w1], table, l1).c(0, 2)
                n2 = rotate_by(cells[w2], table, l2).c(0, 2)
                total = params.r * n1 + n2 if junction.mixed else n1 + n2
                if total != 0:
                    result["matching"] = False
    return result


def derivative_at_zero(r: Any, h: Any = None) -> tuple[Any, Any]:
    """Finite-difference slope of the decimation map at 0, and the exact ``1/L``."""
    ctx = SPECTRUM_BACKEND.context
    rr = ctx.mpf(parse_rational(r).numerator) / parse_rational(r).denominator
    h = ctx.mpf(10) ** -20 if h is None else h
    slope = decimation_map(h, rr) / h
    L = 2 * rr * (rr + 2) / ((2 * rr + 1) * (9 * rr * rr + 26 * rr + 15))
    return slope, 1 / L


def verify(
    jmax: int = 20,
    rs: Sequence[str] = DEFAULT_VERIFY_RS,
    structure_degree: int = 3,
    oracle_depth: int = 15,
) -> VerifyReport:
    """Exact identity suite over the given ``r`` values."""
    report = VerifyReport()
    for r in rs:
        params = derive_params(r)
        tag = f"r={r}"
        prm_ok = (
            3 * params.mu0 + 6 * params.mu1 == 1
            and params.r0 == params.r * params.r1
            and params.r0 * params.mu0 == params.r1 * params.mu1
            and params.L == params.r0 * params.mu0
            and params.lam_sym == params.r0
            and 0 < params.lam_skew < params.lam_sym < 1
            and 0 < params.L < 1
        )
        report.add(f"{tag} parameter identities", prm_ok)
        h = harmonic_extension(params, (1, 0, 0))
        mesh = mesh_from_v1(params, h)
        report.add(
            f"{tag} harmonic extension has zero graph Laplacian",
            all(tilde_laplacian(mesh, x) == 0 for x in level_index(1).junctions),
        )
        try:
            table = build_table(params, jmax)
        except SGError as exc:
            report.add(f"{tag} monomial table to j={jmax}", False, str(exc))
            continue
        b = params.backend
        report.add(
            f"{tag} initial data alpha0=1 alpha1=1/6 beta0=-1/2 gamma0=1/2",
            table.alpha(0) == 1 and table.alpha(1) == b("1/6")
            and table.beta(0) == b("-1/2") and table.gamma(0) == b("1/2"),
        )
        a2, b1, g1 = closed_forms(params.r)
        report.add(
            f"{tag} alpha2, beta1, gamma1 closed forms",
            table.alpha(2) == a2 and table.beta(1) == b1 and table.gamma(1) == g1,
        )
        pairs = [(j, table.normal(j, 2) == -table.alpha(j)) for j in range(1, jmax + 1)]
        report.add(f"{tag} n_j2 = -alpha_j", all(ok for _, ok in pairs), _first_failure(pairs))
        pairs = [(j, table.tangential(j, 3) == 0) for j in range(1, jmax + 1)]
        report.add(f"{tag} t_j3 = 0", all(ok for _, ok in pairs), _first_failure(pairs))
        pairs = [
            (j, table.alpha(j + 1) == 2 * sum(table.tangential(j + 1 - i, 1) * table.gamma(i) for i in range(j + 1)))
            for j in range(jmax)
        ]
        report.add(f"{tag} alpha_(j+1) = 2 sum t_(j+1-i),1 gamma_i", all(ok for _, ok in pairs), _first_failure(pairs))
        pairs = [
            (j, -table.gamma(j) == 2 * sum(table.tangential(i, 3) * table.gamma(j - i) for i in range(j + 1)))
            for j in range(jmax + 1)
        ]
        report.add(f"{tag} -gamma_j = 2 sum t_i3 gamma_(j-i)", all(ok for _, ok in pairs), _first_failure(pairs))
        if params.r == 1:
            pairs = [(j, table.gamma(j) == 3 * table.alpha(j + 1)) for j in range(jmax)]
            report.add(f"{tag} gamma_j = 3 alpha_(j+1)", all(ok for _, ok in pairs), _first_failure(pairs))
        res = stencil_residuals(table, min(10, jmax))
        bad = [(j, k) for j, k, ok in res if not ok]
        report.add(f"{tag} stencil identity on V1 for j<={min(10, jmax)}", not bad, f"fails at {bad[:5]}" if bad else "")
        struct = structural_checks(table, min(structure_degree, jmax))
        for name, ok in struct.items():
            report.add(f"{tag} level-2 {name.replace('_', ' ')} (degree<={min(structure_degree, jmax)})", ok)
        slope, inv_l = derivative_at_zero(r)
        rel = abs(slope - inv_l) / inv_l
        report.add(f"{tag} decimation slope at 0 equals 1/L", rel < 1e-10, f"relative gap {float(rel):.2e}")

        depth = min(oracle_depth, jmax)
        try:
            oracle = recurrence_oracle(params, depth)
            mism = [(k, j) for k in KINDS for j in range(depth + 1) if oracle[k][j] != table.value(j, k)]
            detail = "agrees with the solver" if not mism else f"{len(mism)} entries differ, first {mism[:4]}"
        except SGError as exc:
            mism, detail = ["degenerate"], str(exc)
        report.add(f"{tag} reference recurrences reproduce the solver (j<={depth})", not mism, detail, warning=bool(mism))

    for k in KINDS:
        fit = fit_coefficients(k)
        name = {1: "alpha", 2: "beta", 3: "gamma"}[k]
        if not fit.determined:
            report.add(f"{name} recurrence coefficient fit", False, "fit not determined", warning=True)
            continue
        if fit.mismatches:
            detail = "; ".join(m.describe() for m in fit.mismatches)
            report.add(f"{name} recurrence reference coefficients", False, detail, warning=True)
        else:
            report.add(f"{name} recurrence reference coefficients", True, "all coefficients confirmed")
    return report


def float_or_exact_backend(name: str, precision: int) -> Backend:
    if name not in (EXACT, FLOAT):
        raise DomainError(f"unknown backend {name!r}")
    return Backend(name, precision)
