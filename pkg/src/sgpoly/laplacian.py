"""Constants of the Laplacian family, harmonic extension and graph Laplacians."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from .errors import DomainError, MissingValueError
from .geometry import (
    BOUNDARY,
    Address,
    level_index,
    neighbours,
    rotate,
)
from .scalar import EXACT_BACKEND, Backend, parse_rational


@dataclass(frozen=True)
class LaplacianParams:
    """All derived constants of the Laplacian for a fixed ``r``.

    ``r0``/``r1`` scale resistances of outer/inner cells, ``mu0``/``mu1``
    their measures, ``L`` is the common Laplacian renormalization and
    ``lam_sym``/``lam_skew`` are the eigenvalues of ``h -> h o F_00`` on
    symmetric/skew harmonic functions.
    """

    r: Any
    r0: Any
    r1: Any
    mu0: Any
    mu1: Any
    L: Any
    lam_sym: Any
    lam_skew: Any
    backend: Backend = field(default=EXACT_BACKEND, compare=False)
    # the value of r as given, before any rounding into the backend
    r_input: Any = field(default=None, compare=False, repr=False)

    @property
    def denom(self) -> Any:
        r = self.r
        return 9 * r * r + 26 * r + 15


def derive_params(r: Any, backend: Backend = EXACT_BACKEND) -> LaplacianParams:
    if isinstance(r, (str, int, Fraction)):
        source = parse_rational(r)
    elif hasattr(r, "numerator") and not isinstance(r, float):
        source = Fraction(int(r.numerator), int(r.denominator))
    else:
        source = r
    r = backend(source)
    if not r > 0:
        raise DomainError(f"r must be positive, got {backend.format(r)}")
    d = 9 * r * r + 26 * r + 15
    r0 = 6 * r * (r + 2) / d
    r1 = 6 * (r + 2) / d
    mu0 = 1 / (3 * (2 * r + 1))
    mu1 = r / (3 * (2 * r + 1))
    L = 2 * r * (r + 2) / ((2 * r + 1) * d)
    return LaplacianParams(
        r=r, r0=r0, r1=r1, mu0=mu0, mu1=mu1, L=L,
        lam_sym=r0, lam_skew=2 * r / d, backend=backend, r_input=source,
    )


def harmonic_basis_values(params: LaplacianParams) -> tuple[Any, ...]:
    """The seven interior values u1..u7 of the harmonic function with boundary (1, 0, 0)."""
    r, d = params.r, params.denom
    return (
        (3 * r * r + 14 * r + 15) / d,
        (3 * r * r + 10 * r + 7) / d,
        (3 * r * r + 12 * r + 11) / d,
        (3 * r * r + 7 * r) / d,
        (3 * r * r + 7 * r + 2) / d,
        (3 * r * r + 5 * r) / d,
        (3 * r * r + 6 * r + 1) / d,
    )


# Positions of u1..u7 on V_1 for boundary data (1, 0, 0); pairs are mirror images under R_0.
_HARMONIC_LAYOUT: tuple[tuple[Address, ...], ...] = (
    (("00", 1), ("00", 2)),
    (("01", 1), ("02", 2)),
    (("01", 2),),
    (("10", 1), ("20", 2)),
    (("10", 2), ("20", 1)),
    (("11", 2), ("21", 2)),
    (("12", 2),),
)


class V1Values(dict):
    """The fifteen values of a function on ``V_1``, keyed by canonical address."""

    def __init__(self, values: Mapping[Address, Any]):
        super().__init__(values)
        index = level_index(1)
        missing = set(index.vertices) - set(self)
        if missing or len(self) != 15:
            raise MissingValueError(f"V1 values incomplete: missing {sorted(missing)}")

    def at(self, address: Address) -> Any:
        return self[level_index(1).canonical(address)]


def _unit_extension(params: LaplacianParams) -> dict[Address, Any]:
    b = params.backend
    values: dict[Address, Any] = {BOUNDARY[0]: b.one, BOUNDARY[1]: b.zero, BOUNDARY[2]: b.zero}
    for value, places in zip(harmonic_basis_values(params), _HARMONIC_LAYOUT):
        for p in places:
            values[p] = value
    return values


def harmonic_extension(params: LaplacianParams, boundary: tuple[Any, Any, Any]) -> V1Values:
    """Energy-minimizing extension of boundary data to ``V_1``.

    Built from the unit solution ``u`` and its rotations: the function with
    boundary values ``(b0, b1, b2)`` is ``b0 u + b1 u o rho^-1 + b2 u o rho``.
    """
    b = params.backend
    b0, b1, b2 = (b(v) for v in boundary)
    u = _unit_extension(params)
    index = level_index(1)
    out = {}
    for v in index.vertices:
        out[v] = (
            b0 * u[v]
            + b1 * u[index.canonical(rotate(v, -1))]
            + b2 * u[index.canonical(rotate(v, 1))]
        )
    return V1Values(out)


def energy(params: LaplacianParams, level: int, values: Mapping[Address, Any]) -> Any:
    """Graph energy ``E_{r,m}``: sum over edges of ``(u(x) - u(y))^2 / resistance``."""
    index = level_index(level)
    total = params.backend.zero
    for word in index.cells():
        res = params.backend.one
        for i in range(0, len(word), 2):
            res = res * (params.r0 if word[i] == word[i + 1] else params.r1)
        corners = [values[index.canonical((word, k))] for k in range(3)]
        for a, c in ((0, 1), (1, 2), (0, 2)):
            diff = corners[a] - corners[c]
            total = total + diff * diff / res
    return total


@dataclass
class VertexMesh:
    """Values of a function on every vertex of ``V_m``."""

    level: int
    values: dict[Address, Any]
    params: LaplacianParams

    def __post_init__(self) -> None:
        if self.level < 0:
            raise DomainError("mesh level must be non-negative")

    def __getitem__(self, address: Address) -> Any:
        canon = level_index(self.level).canonical(address)
        try:
            return self.values[canon]
        except KeyError:
            raise MissingValueError(f"mesh has no value at {canon}") from None

    def is_complete(self) -> bool:
        return set(level_index(self.level).vertices) <= set(self.values)


def _stencil(mesh: VertexMesh, x: Address):
    index = level_index(mesh.level)
    canon = index.canonical(x)
    junction = index.junctions.get(canon)
    if junction is None:
        raise DomainError(f"{canon} is a boundary vertex; the graph Laplacian is defined on junctions only")
    centre = mesh[canon]
    first = [mesh[y] for y in neighbours(junction.cells[0])]
    second = [mesh[y] for y in neighbours(junction.cells[1])]
    return junction, centre, first, second


def tilde_laplacian(mesh: VertexMesh, x: Address) -> Any:
    """Unnormalized stencil: four-point difference, or the r-weighted variant at mixed junctions."""
    junction, centre, first, second = _stencil(mesh, x)
    if junction.mixed:
        r = mesh.params.r
        return r * (first[0] + first[1]) + second[0] + second[1] - (2 + 2 * r) * centre
    return first[0] + first[1] + second[0] + second[1] - 4 * centre


def laplacian_factor(params: LaplacianParams, level: int, mixed: bool) -> Any:
    """Conversion constant from the tilde stencil to the level-``m`` graph Laplacian."""
    base = 3 / (params.r + 1) if mixed else params.backend(3) / 2
    return base / params.L ** level


def graph_laplacian(mesh: VertexMesh, x: Address) -> Any:
    junction, *_ = _stencil(mesh, x)
    return laplacian_factor(mesh.params, mesh.level, junction.mixed) * tilde_laplacian(mesh, x)


def mesh_from_v1(params: LaplacianParams, values: Mapping[Address, Any]) -> VertexMesh:
    return VertexMesh(1, dict(values), params)
