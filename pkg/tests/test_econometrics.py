"""Regression, stationarity, stability, causality, and weight-derivation tests.

External cross-checks use statsmodels as an independent oracle; exact cases
use orthogonal harmonic designs where every diagnostic is known in closed form.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from statsmodels.tsa.stattools import adfuller
from statsmodels.tsa.stattools import kpss as sm_kpss

from asri.econometrics import (
    CUSUM_BOUNDARY_5PCT,
    KPSS_CRIT_1,
    KPSS_CRIT_5,
    adf_test,
    chow_test,
    collinearity_diagnostics,
    cusum_test,
    derive_weights_critic,
    derive_weights_elastic_net,
    derive_weights_entropy,
    derive_weights_pca,
    elastic_net_cd,
    granger_test,
    kpss_test,
    ols,
    spearman,
)
from asri.errors import DataError, NumericalError

from synth import ols_normal_equations


def ar1(n: int, phi: float, seed: int, scale: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    y = np.empty(n)
    y[0] = rng.standard_normal() * scale
    for t in range(1, n):
        y[t] = phi * y[t - 1] + rng.standard_normal() * scale
    return y


def random_walk(n: int, seed: int) -> np.ndarray:
    return np.cumsum(np.random.default_rng(seed).standard_normal(n))


def harmonic_design(n: int = 48) -> np.ndarray:
    """Four exactly orthogonal, equal-variance columns over full periods."""
    t = np.arange(n)
    return np.column_stack(
        [
            np.cos(2 * np.pi * t / n),
            np.sin(2 * np.pi * t / n),
            np.cos(4 * np.pi * t / n),
            np.sin(4 * np.pi * t / n),
        ]
    )


# ---------------------------------------------------------------------------
# OLS
# ---------------------------------------------------------------------------


def test_ols_recovers_exact_coefficients() -> None:
    rng = np.random.default_rng(0)
    z = rng.standard_normal((40, 2))
    design = np.column_stack([np.ones(40), z])
    truth = np.array([3.0, -1.5, 0.25])
    fit = ols(design, design @ truth)
    assert np.allclose(fit.coefficients, truth, atol=1e-9)
    assert fit.ssr == pytest.approx(0.0, abs=1e-16)
    assert (fit.n, fit.k) == (40, 3)


def test_ols_matches_normal_equations_with_noise() -> None:
    rng = np.random.default_rng(1)
    z = rng.standard_normal((60, 3))
    y = z @ np.array([2.0, 0.0, -4.0]) + rng.standard_normal(60)
    fit = ols(np.column_stack([np.ones(60), z]), y)
    assert np.allclose(fit.coefficients, ols_normal_equations(z, y), atol=1e-8)
    assert np.allclose(fit.residuals, y - np.column_stack([np.ones(60), z]) @ fit.coefficients)


def test_ols_singular_design_raises() -> None:
    z = np.random.default_rng(2).standard_normal(30)
    design = np.column_stack([np.ones(30), z, z])
    with pytest.raises(NumericalError):
        ols(design, z + 1.0)


def test_ols_bic_penalizes_an_irrelevant_regressor() -> None:
    rng = np.random.default_rng(3)
    z = rng.standard_normal((80, 1))
    y = 2.0 * z[:, 0] + rng.standard_normal(80)
    small = ols(np.column_stack([np.ones(80), z]), y)
    junk = rng.standard_normal((80, 1))
    big = ols(np.column_stack([np.ones(80), z, junk]), y)
    assert big.bic > small.bic


# ---------------------------------------------------------------------------
# ADF
# ---------------------------------------------------------------------------


def test_adf_rejects_stationary_ar() -> None:
    series = ar1(500, 0.5, seed=7)
    result = adf_test(series)
    assert result.p_value < 0.05
    assert result.statistic < -2.86


def test_adf_statistic_tracks_statsmodels() -> None:
    series = ar1(500, 0.5, seed=7)
    ours = adf_test(series)
    sm_stat, sm_p = adfuller(series, regression="c", autolag="AIC")[:2]
    assert abs(ours.statistic - sm_stat) < 0.2
    assert sm_p < 0.05 and ours.p_value < 0.05


def test_adf_does_not_reject_random_walks() -> None:
    rejected = sum(adf_test(random_walk(500, s)).p_value < 0.05 for s in range(5))
    assert rejected <= 1


def test_adf_constant_series_raises() -> None:
    with pytest.raises(NumericalError):
        adf_test([5.0] * 100)


def test_adf_short_series_raises() -> None:
    with pytest.raises(DataError):
        adf_test(list(range(12)), max_lag=2)


def test_adf_reports_lag_and_sample() -> None:
    result = adf_test(ar1(200, 0.3, seed=9))
    assert 0 <= result.chosen_lag
    assert result.n_used <= 199
    assert set(result.critical_values) == {"1%", "5%", "10%"}


# ---------------------------------------------------------------------------
# KPSS
# ---------------------------------------------------------------------------


def test_kpss_calls_white_noise_stationary() -> None:
    series = np.random.default_rng(3).standard_normal(400)
    result = kpss_test(series)
    assert result.statistic < KPSS_CRIT_5
    assert result.verdict == "stationary"


def test_kpss_rejects_a_random_walk() -> None:
    result = kpss_test(random_walk(400, seed=0))
    assert result.statistic > KPSS_CRIT_1
    assert result.verdict == "non-stationary (1%)"


def test_kpss_statistic_close_to_statsmodels() -> None:
    series = ar1(400, 0.4, seed=13)
    ours = kpss_test(series)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sm_stat = sm_kpss(series, regression="c", nlags="auto")[0]
    assert abs(ours.statistic - sm_stat) < 0.15
    assert (ours.statistic < KPSS_CRIT_5) == (sm_stat < KPSS_CRIT_5)


def test_kpss_short_series_raises() -> None:
    with pytest.raises(DataError):
        kpss_test(list(range(20)))


# ---------------------------------------------------------------------------
# Chow
# ---------------------------------------------------------------------------


def test_chow_sees_no_break_in_repeated_halves() -> None:
    half = ar1(60, 0.3, seed=21)
    series = np.concatenate([half, half])
    result = chow_test(series, 60)
    assert result.p_value > 0.2
    assert result.f_stat < result.critical_5pct


def test_chow_detects_a_large_mean_shift() -> None:
    rng = np.random.default_rng(22)
    series = np.concatenate([rng.standard_normal(60), rng.standard_normal(60) + 10.0])
    result = chow_test(series, 60)
    assert result.p_value < 1e-6
    assert result.f_stat > result.critical_5pct
    assert result.break_index == 60


def test_chow_degenerate_break_raises() -> None:
    series = ar1(40, 0.2, seed=23)
    for bad in (0, 3, 37, 39):
        with pytest.raises(DataError):
            chow_test(series, bad)


def test_chow_constant_series_raises() -> None:
    with pytest.raises(NumericalError):
        chow_test([1.0] * 40, 20)


# ---------------------------------------------------------------------------
# CUSUM
# ---------------------------------------------------------------------------


def test_cusum_white_noise_rarely_crosses() -> None:
    crossings = sum(
        bool(cusum_test(np.random.default_rng(s).standard_normal(120)).crossing_indices)
        for s in range(20)
    )
    # 5% boundary: around one crossing series in twenty
    assert crossings <= 3


def test_cusum_level_shift_crosses_after_the_break() -> None:
    rng = np.random.default_rng(31)
    series = np.concatenate([rng.standard_normal(50), rng.standard_normal(50) + 5.0])
    result = cusum_test(series)
    assert result.max_excursion > result.boundary
    assert result.crossing_indices
    assert min(result.crossing_indices) >= 50
    assert result.boundary == CUSUM_BOUNDARY_5PCT
    assert len(result.path) == 99


def test_cusum_guards() -> None:
    with pytest.raises(NumericalError):
        cusum_test([2.0] * 50)
    with pytest.raises(DataError):
        cusum_test(list(range(20)))


# ---------------------------------------------------------------------------
# Granger
# ---------------------------------------------------------------------------


def test_granger_lagged_copy_is_causal() -> None:
    rng = np.random.default_rng(41)
    x = rng.standard_normal(300)
    y = np.empty(300)
    y[0] = 0.0
    y[1:] = x[:-1] + 0.01 * rng.standard_normal(299)
    result = granger_test(x, y)
    assert result.p_value < 1e-10
    assert result.chosen_lag == 1


def test_granger_independent_series_hold_size() -> None:
    p_values = []
    for s in range(40):
        rng = np.random.default_rng(100 + s)
        p_values.append(granger_test(rng.standard_normal(200), rng.standard_normal(200)).p_value)
    assert sum(p < 0.05 for p in p_values) <= 6
    assert 0.3 < float(np.mean(p_values)) < 0.7


def test_granger_guards() -> None:
    with pytest.raises(DataError):
        granger_test([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(DataError):
        granger_test(list(range(15)), list(range(15)))


# ---------------------------------------------------------------------------
# Collinearity diagnostics
# ---------------------------------------------------------------------------


def test_collinearity_orthogonal_design_is_clean() -> None:
    report = collinearity_diagnostics(harmonic_design())
    assert np.allclose(report.vif, 1.0, atol=1e-8)
    assert np.allclose(report.correlation, np.eye(4), atol=1e-12)
    assert report.condition_number == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(report.eigenvalues, 1.0, atol=1e-10)
    assert np.allclose(report.pca_variance_shares, 0.25, atol=1e-10)
    assert not report.rank_deficient


def test_collinearity_duplicate_column_is_rank_deficient() -> None:
    x = harmonic_design().copy()
    x[:, 3] = x[:, 0]
    report = collinearity_diagnostics(x)
    # every VIF regression's design contains the duplicated pair, so all blow up
    assert all(math.isinf(v) for v in report.vif)
    assert report.rank_deficient
    assert math.isinf(report.condition_number)
    assert report.to_json()["vif"] == [None] * 4


def test_collinearity_near_duplicates_inflate_vif() -> None:
    rng = np.random.default_rng(51)
    z = rng.standard_normal(100)
    x = np.column_stack([z, z + 0.05 * rng.standard_normal(100), rng.standard_normal(100)])
    report = collinearity_diagnostics(x)
    assert report.vif[0] > 10 and report.vif[1] > 10
    assert report.vif[2] < 2
    assert report.condition_number > 10


def test_collinearity_needs_five_rows() -> None:
    with pytest.raises(DataError):
        collinearity_diagnostics(np.eye(4))


# ---------------------------------------------------------------------------
# PCA weights
# ---------------------------------------------------------------------------


def test_pca_identical_columns_split_evenly() -> None:
    column = np.random.default_rng(61).uniform(0.0, 100.0, 40)
    matrix = np.column_stack([column] * 4)
    for scaling in ("minmax", "correlation"):
        derived = derive_weights_pca(matrix, scaling=scaling)
        assert np.allclose(derived.weights, 0.25, atol=1e-9)
        assert derived.diagnostics["pc1_variance_share"] == pytest.approx(1.0, abs=1e-9)


def test_pca_single_varying_column_takes_all_weight() -> None:
    rng = np.random.default_rng(62)
    matrix = np.column_stack(
        [rng.uniform(0.0, 100.0, 40), np.full(40, 7.0), np.full(40, 9.0), np.full(40, 11.0)]
    )
    derived = derive_weights_pca(matrix)
    assert "degenerate_columns" in derived.flags
    assert derived.weights[0] == pytest.approx(1.0, abs=1e-9)
    assert derived.weights[1] == pytest.approx(0.0, abs=1e-9)


def test_pca_guards() -> None:
    matrix = harmonic_design()
    with pytest.raises(DataError):
        derive_weights_pca(matrix, scaling="zscore")
    with pytest.raises(DataError):
        derive_weights_pca(matrix[:2])


# ---------------------------------------------------------------------------
# Elastic net
# ---------------------------------------------------------------------------


def test_elastic_net_zero_penalty_matches_least_squares() -> None:
    rng = np.random.default_rng(71)
    x = rng.standard_normal((60, 4))
    y = x @ np.array([1.5, -2.0, 0.5, 3.0]) + rng.standard_normal(60)
    beta, intercept, trace = elastic_net_cd(x, y, alpha=0.0, l1_ratio=0.5)
    exact = ols_normal_equations(x, y)
    assert abs(intercept - exact[0]) < 1e-6
    assert np.allclose(beta, exact[1:], atol=1e-6)
    assert all(b - a <= 1e-12 for a, b in zip(trace, trace[1:]))


def test_elastic_net_objective_trace_is_monotone() -> None:
    rng = np.random.default_rng(72)
    x = rng.standard_normal((80, 4))
    y = x @ np.array([2.0, 0.0, -1.0, 0.5]) + rng.standard_normal(80)
    _, _, trace = elastic_net_cd(x, y, alpha=0.5, l1_ratio=0.9)
    assert len(trace) >= 2
    assert all(b - a <= 1e-12 for a, b in zip(trace, trace[1:]))


def test_elastic_net_heavier_penalty_shrinks_coefficients() -> None:
    rng = np.random.default_rng(73)
    x = rng.standard_normal((80, 4))
    y = x @ np.array([2.0, -1.0, 0.5, 1.5]) + rng.standard_normal(80)
    light, _, _ = elastic_net_cd(x, y, alpha=0.1, l1_ratio=0.5)
    heavy, _, _ = elastic_net_cd(x, y, alpha=2.0, l1_ratio=0.5)
    assert np.abs(heavy).sum() < np.abs(light).sum()


def test_elastic_net_weights_find_the_driving_column() -> None:
    rng = np.random.default_rng(74)
    matrix = rng.uniform(0.0, 100.0, (60, 4))
    target = 0.8 * matrix[:, 2] + rng.standard_normal(60)
    derived = derive_weights_elastic_net(matrix, target)
    assert derived.method == "elastic_net"
    assert derived.weights[2] > 0.9
    assert len(derived.diagnostics["cv_mse"]) == 9
    assert "spearman_vs_theoretical" in derived.diagnostics


def test_elastic_net_weight_guards() -> None:
    rng = np.random.default_rng(75)
    matrix = rng.uniform(0.0, 1.0, (20, 4))
    with pytest.raises(DataError):
        derive_weights_elastic_net(matrix, np.zeros(19))
    with pytest.raises(DataError):
        derive_weights_elastic_net(matrix[:8], np.zeros(8))


# ---------------------------------------------------------------------------
# CRITIC and entropy weights
# ---------------------------------------------------------------------------


def test_critic_equal_dispersion_orthogonal_columns_weigh_evenly() -> None:
    derived = derive_weights_critic(harmonic_design())
    assert derived.method == "critic"
    assert np.allclose(derived.weights, 0.25, atol=1e-9)
    assert not derived.flags


def test_critic_prefers_the_independent_column() -> None:
    rng = np.random.default_rng(81)
    base = rng.standard_normal(60)
    matrix = np.column_stack(
        [
            base + 0.05 * rng.standard_normal(60),
            base + 0.05 * rng.standard_normal(60),
            base + 0.05 * rng.standard_normal(60),
            rng.standard_normal(60),
        ]
    )
    derived = derive_weights_critic(matrix)
    assert derived.weights[3] == max(derived.weights)


def test_critic_flags_constant_columns() -> None:
    rng = np.random.default_rng(82)
    matrix = np.column_stack(
        [rng.uniform(0, 1, 30), rng.uniform(0, 1, 30), rng.uniform(0, 1, 30), np.full(30, 4.0)]
    )
    derived = derive_weights_critic(matrix)
    assert "degenerate_columns" in derived.flags
    assert derived.weights[3] == 0.0


def test_entropy_identical_columns_weigh_evenly() -> None:
    column = np.random.default_rng(83).uniform(1.0, 100.0, 50)
    derived = derive_weights_entropy(np.column_stack([column] * 4))
    assert derived.weights == (0.25, 0.25, 0.25, 0.25)


def test_entropy_concentrated_column_dominates() -> None:
    spike = np.full(40, 0.01)
    spike[7] = 100.0
    matrix = np.column_stack([spike, np.full(40, 5.0), np.full(40, 9.0), np.full(40, 2.0)])
    derived = derive_weights_entropy(matrix)
    assert derived.weights[0] > 0.95
    assert derived.diagnostics["entropy"][1] == pytest.approx(1.0)


def test_entropy_guards_and_flags() -> None:
    with pytest.raises(DataError):
        derive_weights_entropy(np.array([[1.0, -2.0], [3.0, 4.0]]))
    rng = np.random.default_rng(84)
    matrix = np.column_stack([rng.uniform(0, 1, 30)] * 3 + [np.zeros(30)])
    derived = derive_weights_entropy(matrix)
    assert "degenerate_columns" in derived.flags


# ---------------------------------------------------------------------------
# Rank alignment diagnostics
# ---------------------------------------------------------------------------


def test_spearman_exact_orderings() -> None:
    assert spearman([1.0, 2.0, 3.0, 4.0], [10.0, 20.0, 30.0, 40.0]) == pytest.approx(1.0)
    assert spearman([1.0, 2.0, 3.0, 4.0], [4.0, 3.0, 2.0, 1.0]) == pytest.approx(-1.0)
    assert spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]) == 0.0


def test_every_derivation_reports_rank_alignment() -> None:
    rng = np.random.default_rng(85)
    matrix = rng.uniform(0.0, 100.0, (60, 4))
    target = matrix @ np.array([0.3, 0.25, 0.25, 0.2]) + rng.standard_normal(60)
    for derived in (
        derive_weights_pca(matrix),
        derive_weights_critic(matrix),
        derive_weights_entropy(matrix),
        derive_weights_elastic_net(matrix, target),
    ):
        rho = derived.diagnostics["spearman_vs_theoretical"]
        assert -1.0 <= rho <= 1.0
