from __future__ import annotations

from fractions import Fraction

import pytest

from sgpoly.errors import DegeneracyError
from sgpoly.laplacian import derive_params
from sgpoly.recurrence import REFERENCE, Term, fit_coefficients, recurrence_oracle, relation_residual

from conftest import exact_table


def _seqs(t):
    return {"a": t.sequence(1), "b": t.sequence(2), "g": t.sequence(3)}


def test_reference_relations_reproduce_solver_at_one():
    t = exact_table("1", 15)
    oracle = recurrence_oracle(t.params, 15)
    for k in (1, 2, 3):
        assert oracle[k] == t.sequence(k)


@pytest.mark.parametrize("r", ["2", "1/3", "9/4"])
def test_reference_beta_and_gamma_relations_hold_for_all_r(r):
    t = exact_table(r, 12)
    for k in (2, 3):
        for j in range(13):
            assert relation_residual(t.params, k, _seqs(t), j) == 0


def test_reference_alpha_relation_fails_away_from_one():
    t = exact_table("2", 6)
    residuals = [relation_residual(t.params, 1, _seqs(t), j) for j in range(7)]
    assert any(v != 0 for v in residuals)


def test_oracle_diverges_from_solver_away_from_one():
    t = exact_table("2", 6)
    oracle = recurrence_oracle(t.params, 6)
    assert oracle[1][:2] == t.sequence(1)[:2]
    assert oracle[1][2:] != t.sequence(1)[2:]


def test_beta_and_gamma_fits_confirm_reference_coefficients():
    for k in (2, 3):
        report = fit_coefficients(k)
        assert report.determined
        assert report.mismatches == []


def test_alpha_fit_reports_mismatches_and_validates_out_of_sample():
    report = fit_coefficients(1)
    assert report.determined
    terms = {m.term for m in report.mismatches}
    assert "a*a*a*a" in terms and "La" in terms
    fitted = tuple(
        Term(tuple(int(c) for c in report.fitted[term.name]), term.factors) for term in REFERENCE[1]
    )
    assert all(c.denominator == 1 for cs in report.fitted.values() for c in cs)
    for r in ("10", "1/10", "17/3"):
        t = exact_table(r, 14)
        for j in range(15):
            assert relation_residual(t.params, 1, _seqs(t), j, fitted) == 0
    # at r = 1 the relations are not unique, so both hold there
    t = exact_table("1", 14)
    assert all(relation_residual(t.params, 1, _seqs(t), j, fitted) == 0 for j in range(15))


def test_mismatch_description_mentions_both_values():
    report = fit_coefficients(1)
    text = report.mismatches[0].describe()
    assert "reference" in text and "fitted" in text


def test_vanishing_leading_coefficient_is_degenerate():
    zero = {k: tuple(Term((0,), t.factors) for t in REFERENCE[k]) for k in (1, 2, 3)}
    with pytest.raises(DegeneracyError):
        recurrence_oracle(derive_params(1), 3, zero)
