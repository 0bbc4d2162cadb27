import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leakage_lab.analysis import (
    FitModel, NoCrossingError, compute_p_star, estimate_threshold, expected_scaling, fit_empirical_distance,
    leakage_robust, points_from_rows, power_law_chi2, sigma_from_interval,
)
from leakage_lab.montecarlo import SimRow

P = np.array([1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3])


def test_power_law_exact_recovery():
    fit = fit_empirical_distance([(p, 7 * p**3) for p in P])
    assert fit.d_emp == pytest.approx(3.0, abs=1e-6)
    assert fit.amplitudes[0] == pytest.approx(7.0, rel=1e-6)
    assert fit.chi2 == pytest.approx(0.0, abs=1e-12)
    assert fit.predict(1e-3) == pytest.approx(7e-9)


def test_two_term_exact_recovery():
    pts = [(p, 2 * p**2 + 50 * p**3) for p in P]
    fit = fit_empirical_distance(pts, FitModel.BACON_SHOR_TWO_TERM, d_e=2)
    assert fit.amplitudes == (pytest.approx(2.0, abs=1e-6), pytest.approx(50.0, abs=1e-6))
    assert fit.d_emp == 2.0 and fit.chi2 >= 0
    with pytest.raises(ValueError):
        fit_empirical_distance(pts, "BaconShorTwoTerm")


@settings(max_examples=60, deadline=None)
@given(st.floats(1.0, 4.0), st.floats(0.5, 50.0), st.integers(0, 2**31))
def test_fit_is_a_local_chi2_minimum(k, amp, seed):
    rng = np.random.default_rng(seed)
    y = amp * P**k * np.exp(rng.normal(0, 0.2, P.size))
    pts = [(p, v, 0.1 * v * (1 + rng.random())) for p, v in zip(P, y)]
    fit = fit_empirical_distance(pts)
    assert fit.chi2 == pytest.approx(power_law_chi2(pts, fit.d_emp), rel=1e-9, abs=1e-12)
    for delta in (-0.1, -0.01, 0.01, 0.1):
        assert fit.chi2 <= power_law_chi2(pts, fit.d_emp + delta) + 1e-12


def test_weights_follow_sigma():
    # a far-off point with a huge sigma barely moves the fit
    pts = [(p, 3 * p**2, 1e-3 * 3 * p**2) for p in P[:4]] + [(P[4], 1e-2, 1e3)]
    assert fit_empirical_distance(pts).d_emp == pytest.approx(2.0, abs=1e-3)


@pytest.mark.parametrize("pts", [[(1e-3, 1e-5), (2e-3, 1e-4)], [(1e-3, 1e-5)] * 3,
                                 [(1e-3, 0.0), (2e-3, 1e-4), (3e-3, 1e-3)]])
def test_fit_rejects_bad_input(pts):
    with pytest.raises(ValueError):
        fit_empirical_distance(pts)


def _curves(q, scale=1.0, ds=(3, 5, 7)):
    ps = np.geomspace(q / 4, q * 4, 9) * scale
    return {d: [(p, (p / (q * scale)) ** ((d + 1) / 2)) for p in ps] for d in ds}


def test_threshold_of_analytic_curves():
    est = estimate_threshold(_curves(3e-3))
    assert est.p_thr == pytest.approx(3e-3, rel=1e-9)
    assert est.uncertainty == pytest.approx(0.0, abs=1e-12)
    assert len(est.crossings) == 3
    assert est.p_range[0] <= est.p_thr <= est.p_range[1]


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 2e-2), st.floats(0.2, 5.0), st.integers(0, 2**31))
def test_threshold_scales_and_ignores_ordering(q, c, seed):
    rng = np.random.default_rng(seed)
    base = _curves(q)
    noisy = {d: [(p, y * math.exp(rng.normal(0, 0.1))) for p, y in pts] for d, pts in base.items()}
    scaled = {d: [(p * c, y) for p, y in pts] for d, pts in noisy.items()}
    shuffled = {d: [noisy[d][i] for i in rng.permutation(len(noisy[d]))] for d in rng.permutation(list(noisy))}
    a = estimate_threshold(noisy)
    assert estimate_threshold(scaled).p_thr == pytest.approx(c * a.p_thr, rel=1e-9)
    assert estimate_threshold(shuffled).p_thr == pytest.approx(a.p_thr, rel=1e-12)


def test_threshold_errors():
    flat = {3: [(1e-3, 1e-4), (2e-3, 2e-4)], 5: [(1e-3, 1e-5), (2e-3, 2e-5)]}
    with pytest.raises(NoCrossingError, match="wider"):
        estimate_threshold(flat)
    with pytest.raises(ValueError):
        estimate_threshold({3: flat[3]})


def test_p_star_values():
    assert compute_p_star(1e-2, 1e-3, 2, 1) == pytest.approx(1e-1, rel=1e-6)
    for g in [(1, 2), (3, 0.5), (0.7, 1.9)]:
        assert compute_p_star(4e-3, 4e-3, *g) == pytest.approx(4e-3, rel=1e-9)
    with pytest.raises(ValueError):
        compute_p_star(1e-2, 1e-3, 1, 1)
    with pytest.raises(ValueError):
        compute_p_star(0.0, 1e-3, 2, 1)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-5, 0.5), st.floats(1e-5, 0.5), st.floats(0.1, 4), st.floats(0.1, 4))
def test_p_star_swap_symmetry(pg, ps, gg, gs):
    if abs(gg - gs) < 1e-3:
        return
    assert compute_p_star(pg, ps, gg, gs) == pytest.approx(compute_p_star(ps, pg, gs, gg), rel=1e-9)


def test_expected_scaling_table():
    # robust codes need ceil(d/2) faults; susceptible ones half that
    assert expected_scaling("SubsystemSurface", "Standard", 5, "DP") == 3
    assert expected_scaling("SubsystemSurface", "Rotated", 5, "MS") == 3
    assert expected_scaling("SubsystemSurface", "Rotated", 5, "DP") == 2
    assert expected_scaling("SubspaceSurface", "Standard", 5, "MS") == 3
    assert expected_scaling("SubspaceSurface", "Standard", 5, "DP") == 2
    assert [expected_scaling("SubspaceSurface", "Rotated", d, "MS") for d in (3, 5, 7, 9)] == [1, 2, 2, 3]
    assert expected_scaling("SubspaceSurface", "Rotated", 5, "MS", lru="GateLR") == 3
    assert not leakage_robust("SubspaceSurface", "Periodic", "DP")
    assert leakage_robust("SubspaceSurface", "Periodic", "MS")


def test_points_from_rows_drop_zero_failures():
    rows = [SimRow(1e-3, 0, 1e-3, 100, 0, 0, 0, 0.0, 0.0, 0.03, 0.0),
            SimRow(2e-3, 0, 2e-3, 100, 4, 1, 5, 0.05, 0.02, 0.11, 0.0)]
    assert points_from_rows(rows) == [(2e-3, 0.05, pytest.approx(0.045))]
    assert sigma_from_interval(0.1, 0.3) == pytest.approx(0.1)
