from __future__ import annotations

import io

import gmpy2
import pytest
from hypothesis import given, settings, strategies as st

from sgpoly.analysis import structural_checks
from sgpoly.errors import DepthError, DomainError
from sgpoly.geometry import BOUNDARY, level_index
from sgpoly.laplacian import derive_params
from sgpoly.monomials import build_table
from sgpoly.polynomial import (
    MESH_COLUMNS,
    CellPolynomial,
    CoeffVector,
    child_coeffs,
    refine,
    refine_cells,
    rotate_by,
    rotate_coeffs,
    scale_coeffs,
    values_on_V1,
    write_mesh_csv,
)
from sgpoly.scalar import FLOAT, Backend

from conftest import exact_table

Q = gmpy2.mpq


def _general(params, degree, seed=1):
    rows = [[Q(seed * (3 * i + k) % 7 - 3, 1 + i + k) for k in range(3)] for i in range(degree + 1)]
    return CoeffVector.from_rows(params, rows)


@pytest.mark.parametrize("r", ["2/7", "3"])
def test_rotation_has_order_three(r):
    t = exact_table(r, 5)
    p = _general(t.params, 5)
    assert rotate_by(p, t, 3) == p
    assert rotate_coeffs(rotate_coeffs(p, t, 1), t, -1) == p
    for j in range(6):
        for k in (1, 2, 3):
            m = CoeffVector.monomial(t.params, j, k)
            assert rotate_by(rotate_by(m, t, 1), t, 2) == m


def test_children_match_scaling_and_conjugated_scaling():
    t = exact_table("5/3", 6)
    p = _general(t.params, 6, seed=2)
    assert child_coeffs(p, t, "00") == scale_coeffs(p)
    expected = rotate_coeffs(scale_coeffs(rotate_coeffs(p, t, 1)), t, -1)
    assert child_coeffs(p, t, "11") == expected


def test_constant_refines_to_ones():
    t = exact_table("1/10", 0)
    mesh = refine(CoeffVector.monomial(t.params, 0, 1), t, 3)
    assert set(mesh.values.values()) == {1}
    assert len(mesh.values) == len(level_index(3).vertices)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_boundary_values_of_refined_monomials(k):
    t = exact_table("1/10", 6)
    j = 6
    mesh = refine(CoeffVector.monomial(t.params, j, k), t, 2)
    sign = -1 if k == 3 else 1
    assert [mesh[a] for a in BOUNDARY] == [0, t.value(j, k), sign * t.value(j, k)]


def test_refine_is_linear():
    t = exact_table("4", 4)
    p, q = _general(t.params, 4, 1), _general(t.params, 3, 3)
    mp, mq, mpq = (refine(x, t, 2) for x in (p, q, p + q))
    assert all(mpq.values[v] == mp.values[v] + mq.values[v] for v in mpq.values)


def test_levels_are_nested():
    t = exact_table("2/3", 3)
    p = _general(t.params, 3)
    coarse, fine = refine(p, t, 1), refine(p, t, 2)
    assert dict(coarse.values) == values_on_V1(p, t)
    for v, value in coarse.values.items():
        assert fine[v] == value


@pytest.mark.parametrize("r", ["1/4", "1", "6"])
def test_level_two_structure(r):
    t = exact_table(r, 3)
    assert all(structural_checks(t, 3).values())


def test_refine_cells_count_and_root():
    t = exact_table("1", 2)
    p = _general(t.params, 2)
    cells = refine_cells(p, t, 2)
    assert len(cells) == 81
    assert refine_cells(p, t, 0) == {"": p}


def test_float_refine_tracks_exact():
    exact = exact_table("1/3", 5)
    params = derive_params("1/3", Backend(FLOAT, 128))
    approx = build_table(params, 5)
    m_exact = refine(CoeffVector.monomial(exact.params, 5, 2), exact, 3)
    m_float = refine(CoeffVector.monomial(params, 5, 2), approx, 3)
    scale = max(abs(v) for v in m_exact.values.values())
    for v, e in m_exact.values.items():
        assert abs(m_float.values[v] - params.backend(e)) <= params.backend(scale) * 2.0**-100


def test_depth_and_domain_errors():
    t = exact_table("1", 2)
    with pytest.raises(DepthError):
        refine(CoeffVector.monomial(t.params, 3, 1), t, 1)
    with pytest.raises(DomainError):
        refine(CoeffVector.monomial(t.params, 1, 1), t, -1)
    with pytest.raises(DomainError):
        CoeffVector.monomial(t.params, 1, 4)
    with pytest.raises(DomainError):
        child_coeffs(CoeffVector.monomial(t.params, 1, 1), t, "33")


def test_cell_polynomial_reorientation():
    t = exact_table("2", 3)
    p = _general(t.params, 3)
    cell = CellPolynomial("01", 0, p)
    assert cell.reoriented(t, 1).reoriented(t, 2).reoriented(t, 0).coeffs == p
    with pytest.raises(DomainError):
        CellPolynomial("", 3, p)


def test_laplacian_shift():
    t = exact_table("1", 3)
    m = CoeffVector.monomial(t.params, 3, 2)
    assert m.laplacian(2) == CoeffVector.monomial(t.params, 1, 2)
    assert m.laplacian(4).degree == 0 and m.laplacian(4).c(0, 1) == 0


def test_mesh_csv():
    t = exact_table("1", 1)
    mesh = refine(CoeffVector.monomial(t.params, 1, 1), t, 1)
    buf = io.StringIO()
    write_mesh_csv(mesh, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(MESH_COLUMNS)
    assert len(lines) == 16
    assert lines[2].endswith(",1/6")


coeff = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@settings(max_examples=20, deadline=None)
@given(
    st.sampled_from(["1/5", "2", "9/4"]),
    st.lists(st.tuples(coeff, coeff, coeff), min_size=1, max_size=4),
    st.sampled_from(["00", "01", "12", "22"]),
)
def test_random_polynomials_rotate_and_restrict_consistently(r, rows, letter):
    t = exact_table(r, 4)
    p = CoeffVector.from_rows(t.params, rows)
    assert rotate_by(p, t, 3) == p
    child = child_coeffs(p, t, letter)
    parent = values_on_V1(p, t)
    index = level_index(1)
    corners = [parent[index.canonical((letter, i))] for i in range(3)]
    local = values_on_V1(child, t)
    assert [local[a] for a in BOUNDARY] == corners
