from __future__ import annotations

import math

import numpy as np
import pytest

from sgpoly.errors import ConvergenceError
from sgpoly.laplacian import derive_params
from sgpoly.spectrum import (
    SPECTRUM_BACKEND,
    closed_form_check,
    decimate_down,
    decimation_map,
    decimation_numerator,
    level1_eigenvalues,
    level1_matrix,
    level1_spectrum,
    neumann_eigenvalue,
    pole,
    target_ratio,
)

CTX = SPECTRUM_BACKEND.context
# lowest nonzero Neumann eigenvalue at r = 1, pinned from this implementation
LOW_AT_ONE = 27.114425399157517577840204868855621


def _multiset(values, tol=1e-9):
    groups = []
    for v in sorted(values):
        if groups and abs(v - groups[-1][0]) <= tol * max(1.0, abs(v)):
            groups[-1][1] += 1
        else:
            groups.append([v, 1])
    return [(round(v, 9), m) for v, m in groups]


def test_level_one_eigenvalues_at_one():
    got = _multiset(level1_eigenvalues(derive_params(1)))
    root = 3 * math.sqrt(13)
    want = _multiset([0, 7.5] + [4.5] * 3 + [(15 - root) / 4] * 2 + [(15 + root) / 4] * 2 + [9] * 6)
    assert got == want


@pytest.mark.parametrize("r", ["1/20", "1/3", "2", "7", "20"])
def test_matrix_matches_closed_forms(r):
    assert closed_form_check(derive_params(r)) < 1e-12


def test_multiplicities_sum_to_fifteen():
    spec = level1_spectrum(3)
    assert sum(m for _, _, m in spec.branches) == 15
    assert len(spec.values) == 15


def test_constants_span_the_kernel():
    _, K, _ = level1_matrix(derive_params("2/5"))
    assert np.allclose(K @ np.ones(15), 0)
    assert np.allclose(K, K.T)


def test_sym_seed_meets_nine_halves_only_at_one():
    for r in (0.5, 0.9, 1.1, 3.0):
        spec = level1_spectrum(r)
        assert abs(spec.seed("sym") - 4.5) > 1e-3
    assert level1_spectrum(1).seed("sym") == 4.5


@pytest.mark.parametrize("r", ["1/10", "1", "7"])
def test_decimation_slope_at_zero(r):
    p = derive_params(r, SPECTRUM_BACKEND)
    h = CTX.mpf(10) ** -20
    slope = decimation_map(h, p.r) / h
    assert abs(slope * p.L - 1) < 1e-10


def test_zero_is_fixed():
    assert decimate_down(0, 2) == 0


@pytest.mark.parametrize("r", [0.3, 1.0, 4.0])
def test_decimation_round_trip(r):
    for lam in (0.5, 2.0, 4.5, 8.9):
        down = decimate_down(CTX.mpf(lam), r)
        assert 0 < down < lam
        assert abs(decimation_map(down, r) - lam) < 1e-12 * lam


def test_corrected_pair_maps_to_level_zero_eigenvalue():
    # the level-1 pair with the square root sits over the level-0 value 9
    for r in (0.25, 1.0, 6.0):
        spec = level1_spectrum(r)
        for name in ("low", "high"):
            assert abs(decimation_map(spec.seed(name), r) - 9) < 1e-20


@pytest.mark.parametrize("r", [1.0, (math.sqrt(17) - 3) / 4])
def test_removable_pole(r):
    rr = CTX.mpf(r)
    assert abs(decimation_numerator(pole(rr), rr)) < 1e-10


def test_lowest_branch_at_one_is_pinned_and_tolerance_stable():
    p = derive_params(1, SPECTRUM_BACKEND)
    seed = level1_spectrum(1).seed("low")
    loose = neumann_eigenvalue(seed, p, tol=1e-10)
    tight = neumann_eigenvalue(seed, p, tol=1e-14)
    assert abs(tight.limit - LOW_AT_ONE) < 1e-12 * LOW_AT_ONE
    assert abs(loose.limit - tight.limit) < 1e-9 * tight.limit
    assert tight.converged and tight.iterations <= 60


def test_trajectory_ratios_approach_L():
    p = derive_params(2, SPECTRUM_BACKEND)
    traj = neumann_eigenvalue(level1_spectrum(2).seed("nine"), p)
    ratios = [b / a for a, b in zip(traj.lambdas, traj.lambdas[1:])]
    gaps = [abs(q - p.L) for q in ratios]
    assert gaps[-1] < gaps[0] and gaps[-1] < 1e-9


def test_branch_limits_keep_seed_order():
    for r in (0.1, 0.5, 2.0, 10.0):
        p = derive_params(r, SPECTRUM_BACKEND)
        spec = level1_spectrum(r)
        pairs = [(spec.seed(n), neumann_eigenvalue(spec.seed(n), p).limit) for n, _, _ in spec.nonzero]
        pairs.sort()
        limits = [lim for _, lim in pairs]
        assert limits == sorted(limits)


def test_target_ratio_at_one_matches_beta_decay():
    lam2, lam3, target = target_ratio(1)
    assert abs(lam2 - lam3) < 1e-20
    assert abs(target + 1 / lam2) < 1e-20


def test_target_negative_and_finite():
    for r in (0.05, 0.7, 3.0, 20.0):
        target = target_ratio(r)[2]
        assert target < 0 and CTX.isfinite(target)


def test_non_convergence_reports_trajectory():
    p = derive_params(1, SPECTRUM_BACKEND)
    with pytest.raises(ConvergenceError) as info:
        neumann_eigenvalue(4.5, p, tol=1e-300, max_iter=3)
    assert info.value.trajectory.iterations == 3
