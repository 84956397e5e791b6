"""Command-line front end.

Exit codes: 0 success, 1 failed verification, 2 usage or domain error,
3 numerical degeneracy, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import analysis
from .errors import ConvergenceError, DegeneracyError, DepthError, DomainError, RootNotFoundError, SGError
from .laplacian import derive_params
from .monomials import build_table, write_table_csv
from .polynomial import CoeffVector, refine, write_mesh_csv
from .scalar import DEFAULT_PRECISION, EXACT, FLOAT, Backend, pack, parse_rational, unpack
from .spectrum import (
    SPECTRUM_BACKEND,
    branch_limits,
    level1_spectrum,
    target_ratio,
    write_spectrum_csv,
    write_target_csv,
)
from .svg import line_chart, mesh_heightmap

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_DEGENERATE, EXIT_DIVERGED = 0, 1, 2, 3, 4
MAX_LEVEL = 7

BOOL_KEYS = {"log"}


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _add_backend(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--backend", choices=(EXACT, FLOAT), default=default)
    p.add_argument("--precision", type=_positive_int, default=DEFAULT_PRECISION, help="float significand bits")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r-min", type=_rational, default=Fraction(1, 20))
    p.add_argument("--r-max", type=_rational, default=Fraction(20))
    p.add_argument("--grid", type=int, default=400, help="number of grid points")
    p.add_argument("--log", action="store_true", default=None, help="logarithmic spacing (default)")
    p.add_argument("--linear", dest="log", action="store_false", help="linear spacing")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes for sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgpoly", description="Polynomials and spectra of self-similar Laplacians on the Sierpinski gasket.")
    parser.add_argument("--config", help="key=value file supplying defaults; command-line flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print the derived constants for one r")
    p.add_argument("--r", type=_rational, required=True)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("table", help="monomial boundary and derivative table as CSV")
    p.add_argument("--r", type=_rational, required=True)
    p.add_argument("--jmax", type=int, default=10)
    _add_backend(p, EXACT)
    p.add_argument("--out", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("refine", help="values of a monomial on V_level as CSV and SVG")
    p.add_argument("--r", type=_rational, required=True)
    p.add_argument("--j", type=int, required=True, help="degree")
    p.add_argument("--k", type=int, choices=(1, 2, 3), required=True, help="monomial family")
    p.add_argument("--level", type=int, default=3)
    _add_backend(p, EXACT)
    p.add_argument("--out", default="refine", help="output prefix; writes PREFIX.csv and PREFIX.svg")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("spectrum", help="first six nonzero Neumann eigenvalues, at one r or over a grid")
    p.add_argument("--r", type=_rational, help="single r; omit for a sweep")
    _add_grid(p)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("conjectures", help="ratio sequences against the spectral target, and sign-change roots")
    _add_grid(p)
    p.add_argument("--jmax", type=int, default=50)
    _add_backend(p, FLOAT)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_conjectures)

    p = sub.add_parser("verify", help="exact identity suite")
    p.add_argument("--jmax", type=int, default=20)
    p.add_argument("--r", type=_rational, action="append", help="repeatable; default 1/10 1/3 1 2 10")
    p.set_defaults(func=cmd_verify)
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, config: dict[str, str]) -> None:
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sub in subparsers.choices.values():
        known = {a.dest: a for a in sub._actions}
        values: dict[str, Any] = {}
        for key, raw in config.items():
            action = known.get(key)
            if action is None:
                continue
            if key in BOOL_KEYS:
                values[key] = raw.lower() in ("1", "true", "yes", "on")
            elif isinstance(action, argparse._AppendAction):
                # kept apart so that repeated flags replace rather than extend it
                values["config_" + key] = [action.type(s) for s in raw.split(",")]
            else:
                # argparse converts string defaults through the action's type
                values[key] = raw
        sub.set_defaults(**values)


def _backend(args) -> Backend:
    return Backend(args.backend, args.precision)


def _open_out(path: str | None):
    if path is None:
        return sys.stdout
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_params(args) -> int:
    exact = derive_params(args.r)
    dec = derive_params(args.r, SPECTRUM_BACKEND)
    fmt_e, fmt_f = exact.backend.format, dec.backend.format
    for name in ("r", "r0", "r1", "mu0", "mu1", "L", "lam_sym", "lam_skew"):
        e, f = getattr(exact, name), getattr(dec, name)
        print(f"{name:9s} {fmt_e(e):>24s}  {float(f)!r}")
    return EXIT_OK


def cmd_table(args) -> int:
    if args.jmax < 0:
        raise DomainError("jmax must be non-negative")
    table = build_table(derive_params(args.r, _backend(args)), args.jmax)
    stream = _open_out(args.out)
    try:
        write_table_csv(table, stream)
    finally:
        if stream is not sys.stdout:
            stream.close()
    return EXIT_OK


def cmd_refine(args) -> int:
    if not 0 <= args.level <= MAX_LEVEL:
        raise DomainError(f"level must lie in 0..{MAX_LEVEL}")
    if args.j < 0:
        raise DomainError("degree must be non-negative")
    params = derive_params(args.r, _backend(args))
    table = build_table(params, args.j)
    mesh = refine(CoeffVector.monomial(params, args.j, args.k), table, args.level)
    buf = io.StringIO()
    write_mesh_csv(mesh, buf)
    prefix = Path(args.out)
    _write(prefix.with_name(prefix.name + ".csv"), buf.getvalue())
    title = f"P_{{{args.j},{args.k}}} at r = {params.backend.format(params.r) if params.backend.exact else args.r}, level {args.level}"
    _write(prefix.with_name(prefix.name + ".svg"), mesh_heightmap(mesh, title))
    print(f"wrote {prefix}.csv and {prefix}.svg ({len(mesh.values)} vertices)")
    return EXIT_OK


def _config(args, jmax: int = 1, backend: str = FLOAT, precision: int = DEFAULT_PRECISION) -> analysis.SweepConfig:
    return analysis.SweepConfig(
        r_min=args.r_min,
        r_max=args.r_max,
        grid_points=args.grid,
        spacing="linear" if args.log is False else "log",
        jmax=jmax,
        backend=backend,
        precision=precision,
        out=args.out,
        jobs=args.jobs,
    )


def _spectrum_point(r: Any) -> tuple[Any, list]:
    params = derive_params(r, SPECTRUM_BACKEND)
    mults = {name: m for name, _, m in level1_spectrum(r).nonzero}
    return r, pack([(t.seed, mults[t.branch], t.limit, t.iterations, t.branch) for t in branch_limits(params)])


def _target_point(r: Any) -> tuple:
    return r, pack(tuple(target_ratio(r)))


def _pool_map(func, items: Sequence[Any], jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def _fmt_spectrum(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Fraction):
        return str(value)
    return SPECTRUM_BACKEND.format(value)


def cmd_spectrum(args) -> int:
    fmt = _fmt_spectrum
    if args.r is not None:
        rs: list[Any] = [args.r]
    else:
        rs = _config(args).grid()
    points = sorted(_pool_map(_spectrum_point, rs, args.jobs), key=lambda item: item[0])
    points = [(r, unpack(branches)) for r, branches in points]
    rows = [(r, seed, mult, limit, iters) for r, branches in points for seed, mult, limit, iters, _ in branches]
    targets = sorted(_pool_map(_target_point, rs, args.jobs), key=lambda item: item[0])
    targets = [(r, *unpack(t)) for r, t in targets]
    out = Path(args.out)
    buf = io.StringIO()
    write_spectrum_csv(rows, buf, fmt)
    _write(out / "spectrum.csv", buf.getvalue())
    buf = io.StringIO()
    write_target_csv(targets, buf, fmt)
    _write(out / "target.csv", buf.getvalue())
    if args.r is not None:
        for r, branches in points:
            for seed, mult, limit, iters, name in branches:
                print(f"{name:12s} seed {float(seed):.12g}  mult {mult}  limit {fmt(limit)}  ({iters} steps)")
        print(f"target ratio {fmt(targets[0][3])}")
    else:
        names = [b[4] for b in points[0][1]]
        series = [
            (name, [float(r) for r, _ in points], [float(branches[i][2]) for _, branches in points])
            for i, name in enumerate(names)
        ]
        _write(
            out / "spectrum.svg",
            line_chart(series, "first six nonzero Neumann eigenvalues", "r", "eigenvalue", logx=args.log is not False),
        )
        print(f"wrote {len(rows)} eigenvalue rows to {out / 'spectrum.csv'}")
    return EXIT_OK


def cmd_conjectures(args) -> int:
    if args.jmax < 2:
        raise DomainError("jmax must be at least 2")
    config = _config(args, args.jmax, args.backend, args.precision)
    backend = config.scalar_backend
    xs = config.grid()
    reports = analysis.sweep(config)
    j = config.jmax - 1
    out = Path(args.out)
    buf = io.StringIO()
    analysis.write_conjecture_csv(reports, j, buf, backend)
    _write(out / "conjectures.csv", buf.getvalue())

    roots = []
    for k, name, values in (
        (1, "alpha", [rep.alpha_top for rep in reports]),
        (3, "gamma", [rep.gamma_top for rep in reports]),
    ):
        for lo, hi in analysis.localize_roots(config.jmax, k, xs, backend, values=values):
            roots.append((name, config.jmax, lo, hi))
    buf = io.StringIO()
    analysis.write_roots_csv(roots, buf)
    _write(out / "roots.csv", buf.getvalue())

    rf = [float(rep.r) for rep in reports]

    def col(values):
        return [None if v is None else float(v) for v in values]

    series = [
        ("alpha ratio", rf, col(rep.alpha[j] for rep in reports)),
        ("beta ratio", rf, col(rep.beta[j] for rep in reports)),
        ("target", rf, col(rep.target for rep in reports)),
    ]
    _write(out / "ratios.svg", line_chart(series, f"ratios at j = {j}", "r", "ratio", logx=config.spacing == "log"))
    _write(
        out / "gamma_ratio.svg",
        line_chart([("gamma ratio", rf, col(rep.gamma[j] for rep in reports))], f"gamma ratio at j = {j}", "r", "ratio",
                   logx=config.spacing == "log"),
    )

    print(f"grid: {len(xs)} points on [{float(config.r_min)}, {float(config.r_max)}] ({config.spacing}), jmax {config.jmax}, {backend}")
    for dev_name, seq in (("alpha", "alpha"), ("beta", "beta")):
        devs = [rep.deviation(getattr(rep, seq), j) for rep in reports]
        finite = [(float(d), float(rep.r)) for d, rep in zip(devs, reports) if d is not None]
        if finite:
            worst, at = max(finite)
            print(f"{dev_name} ratio vs target at j={j}: max relative deviation {worst:.4g} at r={at:.6g}")
    alpha_roots = [(abs((lo + hi) / 2 - analysis.SQRT17_ROOT), (lo, hi)) for name, _, lo, hi in roots if name == "alpha"]
    if alpha_roots:
        _, bracket = min(alpha_roots)
        at, value = analysis.beta_ratio_at_root(bracket, config.jmax, backend)
        shown = "NA" if value is None else f"{float(value):.8g}"
        print(f"beta ratio beta_{config.jmax}/beta_{j} at the alpha root r={at!r}: {shown}")
    for name, jj, lo, hi in roots:
        print(f"root of {name}_{jj}(r) in [{lo!r}, {hi!r}]")
    print("gamma ratio limit candidate g(r) = last computed gamma ratio; see conjectures.csv column gamma_ratio")
    return EXIT_OK


def cmd_verify(args) -> int:
    chosen = args.r or getattr(args, "config_r", None)
    rs = [str(r) for r in chosen] if chosen else list(analysis.DEFAULT_VERIFY_RS)
    report = analysis.verify(jmax=args.jmax, rs=rs)
    for check in report.checks:
        print(check.line())
    passed = sum(c.passed for c in report.checks)
    warned = sum(c.warning for c in report.checks)
    print(f"{passed}/{len(report.checks)} checks passed, {warned} warnings")
    return EXIT_OK if report.ok else EXIT_FAILED


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    try:
        if known.config:
            _apply_config(parser, read_config(known.config))
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (DomainError, DepthError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegeneracyError as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConvergenceError, RootNotFoundError) as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except SGError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
