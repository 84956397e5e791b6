from __future__ import annotations

import pytest

from sgpoly.geometry import (
    BOUNDARY,
    LETTERS,
    compose,
    embed,
    level_index,
    outer_count,
    point,
    reflect,
    rotate,
)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_vertex_and_junction_counts(m):
    index = level_index(m)
    assert len(index.vertices) == (3 * 9**m + 3) // 2
    assert len(index.junctions) == len(index.vertices) - 3
    assert len(index.cells()) == 9**m


def test_canonical_is_lexicographic_minimum():
    index = level_index(2)
    for v, members in index.incidence.items():
        for w, i in members:
            assert index.canonical((w, i)) == v
            assert v <= (w, i)


def test_coarse_addresses_are_refined():
    index = level_index(2)
    assert index.canonical(("01", 1)) == index.canonical(("0111", 1))
    assert index.canonical(("", 0)) == ("", 0)


def test_boundary_points():
    assert [point(w, i)[:2] for w, i in BOUNDARY] == [(0, 0), (1, 0), (0, 1)]
    x, y = embed("", 0)
    assert x == 0.0 and y > 0.8


def test_rotation_has_order_three_and_reflections_are_involutions():
    for w in ("", "01", "1220"):
        for i in range(3):
            a = (w, i)
            assert rotate(rotate(rotate(a))) == a
            assert rotate(rotate(a, 1), -1) == a
            for fixed in range(3):
                assert reflect(reflect(a, fixed), fixed) == a


def test_compose_prefixes_word():
    assert compose("01", ("12", 2)) == ("0112", 2)


def test_junction_classification_level_one():
    index = level_index(1)
    # F_00 q1 is shared by the outer cell 00 and the inner cell 01
    mixed = index.junctions[index.canonical(("00", 1))]
    assert mixed.mixed
    assert outer_count(mixed.cells[0][0]) < outer_count(mixed.cells[1][0])
    # F_01 q2 = F_02 q1 joins two inner cells
    assert not index.junctions[index.canonical(("01", 2))].mixed
    assert sum(j.mixed for j in index.junctions.values()) == 6


def test_mixed_rule_counts_outer_letters_not_last_letter():
    index = level_index(2)
    for junction in index.junctions.values():
        (w1, _), (w2, _) = junction.cells
        assert junction.mixed == (outer_count(w1) != outer_count(w2))
    # 0011 and 0100 both end in an outer letter, yet their resistances differ
    j = index.junctions[index.canonical(("0011", 1))]
    assert {w for w, _ in j.cells} == {"0011", "0100"}
    assert j.mixed
    assert j.cells[0][0] == "0100"


def test_letters():
    assert len(LETTERS) == 9 and LETTERS[0] == "00" and LETTERS[-1] == "22"
