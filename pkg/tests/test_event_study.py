from __future__ import annotations

import math
from datetime import date, timedelta

import numpy as np
import pytest
from scipy import stats

from asri.errors import DataError, NumericalError
from asri.event_study import (
    CrisisEvent,
    EventStudyConfig,
    EventType,
    block_bootstrap_detection,
    bonferroni,
    crisis_day_labels,
    cumulative_abnormal_signal,
    detection_metrics,
    estimate_baseline,
    lead_time_sigma,
    lead_time_threshold,
    load_event_catalog,
    placebo_study,
    roc_pr_curves,
    write_event_catalog,
)
from asri.market_data import series_from_values

from synth import days, event

ONSET = date(2023, 6, 1)


def study_series(est, evt, name: str = "asri"):
    """Contiguous series spanning [-90, +10] around ONSET."""
    assert len(est) == 60 and len(evt) == 41
    start = ONSET - timedelta(days=90)
    span = [start + timedelta(days=i) for i in range(101)]
    return series_from_values(name, span, list(est) + list(evt))


def alternating(n: int, lo: float = 39.0, hi: float = 41.0) -> list[float]:
    return [lo if i % 2 == 0 else hi for i in range(n)]


EV = event("test", ONSET)


# ---------------------------------------------------------------------------
# baseline estimation
# ---------------------------------------------------------------------------


def test_baseline_constant_forty() -> None:
    asri = study_series([40.0] * 60, [40.0] * 41)
    assert estimate_baseline(asri, EV) == (40.0, 0.0)


def test_baseline_alternating_matches_direct_formula() -> None:
    asri = study_series(alternating(60), [40.0] * 41)
    mu, sigma = estimate_baseline(asri, EV)
    assert mu == 40.0
    assert sigma == pytest.approx(math.sqrt(60.0 / 59.0), abs=1e-12)


def test_baseline_insufficient_observations() -> None:
    # keep only 40 of the 60 estimation days
    start = ONSET - timedelta(days=90)
    span = [start + timedelta(days=i) for i in range(40)]
    asri = series_from_values("asri", span, [40.0] * 40)
    with pytest.raises(DataError, match="40 observations"):
        estimate_baseline(asri, EV)


def test_windows_must_be_ordered() -> None:
    with pytest.raises(DataError):
        EventStudyConfig(estimation_start=-10, estimation_end=-31)


# ---------------------------------------------------------------------------
# cumulative abnormal signal
# ---------------------------------------------------------------------------


def test_cas_forced_arithmetic() -> None:
    asri = study_series(alternating(60), [45.0] * 41)
    result = cumulative_abnormal_signal(asri, EV)
    assert result.mu_hat == 40.0
    assert result.cas == pytest.approx(205.0, abs=1e-9)
    assert result.se_cas == pytest.approx(result.sigma_hat * math.sqrt(41.0))
    assert result.t_stat == pytest.approx(result.cas / result.se_cas)
    assert result.df == 59
    assert result.n_event == 41
    assert result.p_value == pytest.approx(
        2.0 * stats.t.sf(abs(result.t_stat), 59), abs=1e-12
    )
    assert result.peak == 45.0


def test_cas_constant_series_is_zero_with_degenerate_t() -> None:
    asri = study_series([40.0] * 60, [40.0] * 41)
    with pytest.raises(NumericalError) as err:
        cumulative_abnormal_signal(asri, EV)
    assert "CAS=0.0" in str(err.value)


# ---------------------------------------------------------------------------
# lead times
# ---------------------------------------------------------------------------


def test_lead_time_sigma_never_exceeded() -> None:
    asri = study_series(alternating(60), [40.0] * 41)
    assert lead_time_sigma(asri, EV) is None


def test_lead_time_sigma_at_the_cap_boundary() -> None:
    evt = [40.0] * 41
    evt[0] = 45.0  # onset - 30, the earliest day inside the capped lookback
    asri = study_series(alternating(60), evt)
    assert lead_time_sigma(asri, EV) == 30


def test_lead_time_threshold_never_crossed() -> None:
    asri = study_series(alternating(60), [40.0] * 41)
    assert lead_time_threshold(asri, EV, 50.0) is None


def test_lead_time_threshold_crossing_on_onset_day() -> None:
    evt = [40.0] * 41
    evt[30] = 55.0  # index 30 is the onset day itself
    asri = study_series(alternating(60), evt)
    assert lead_time_threshold(asri, EV, 50.0) == 0


def test_lead_time_threshold_earlier_crossing_wins() -> None:
    evt = [40.0] * 41
    evt[18] = 55.0  # onset - 12
    asri = study_series(alternating(60), evt)
    assert lead_time_threshold(asri, EV, 50.0) == 12
    # a tight horizon that stops short of the crossing
    assert lead_time_threshold(asri, EV, 50.0, search_horizon=5) is None


# ---------------------------------------------------------------------------
# multiple-comparison correction
# ---------------------------------------------------------------------------


def test_bonferroni_boundary_and_rejection() -> None:
    assert bonferroni([0.013, 0.001, 0.04, 0.2]) == [False, True, False, False]


def test_bonferroni_single_test_reduces_to_plain_alpha() -> None:
    assert bonferroni([0.04]) == [True]
    assert bonferroni([0.06]) == [False]


def test_bonferroni_empty_rejected() -> None:
    with pytest.raises(DataError):
        bonferroni([])


# ---------------------------------------------------------------------------
# placebo studies
# ---------------------------------------------------------------------------


def test_placebo_white_noise_matches_the_statistic_size() -> None:
    # with SE = sigma*sqrt(41) the null t is inflated by sqrt(1 + 41/60)
    # relative to t(59), so the false-positive rate sits above the nominal 5%;
    # fresh series per seed keep the placebo draws independent
    span = days(240, date(2022, 1, 1))
    p_flags = []
    for seed in range(150):
        rng = np.random.default_rng(seed)
        asri = series_from_values(
            "asri", span, list(50.0 + rng.standard_normal(240))
        )
        report = placebo_study(asri, n_dates=2, exclusions=[], seed=seed)
        p_flags.extend(p < 0.05 for p in report.p_values)
    rate = float(np.mean(p_flags))
    inflation = math.sqrt(1.0 + 41.0 / 60.0)
    crit = stats.t.ppf(0.975, 59)
    expected = 2.0 * stats.t.sf(crit / inflation, 59)
    assert rate == pytest.approx(expected, abs=0.05)


def test_placebo_no_eligible_dates() -> None:
    span = days(600, date(2022, 1, 1))
    asri = series_from_values("asri", span, [50.0] * 600)
    blanket = [(span[0], span[-1])]
    with pytest.raises(DataError, match="eligible"):
        placebo_study(asri, n_dates=5, exclusions=blanket, seed=1)


def test_placebo_deterministic_under_fixed_seed() -> None:
    rng = np.random.default_rng(5)
    span = days(400, date(2022, 1, 1))
    asri = series_from_values("asri", span, list(50.0 + rng.standard_normal(400)))
    one = placebo_study(asri, n_dates=8, exclusions=[], seed=42)
    two = placebo_study(asri, n_dates=8, exclusions=[], seed=42)
    assert one == two


def test_placebo_t_far_below_crisis_t_on_bundled_data(
    bundled_result, bundled_events
) -> None:
    asri = bundled_result.series()
    crisis_ts = [
        abs(cumulative_abnormal_signal(asri, e).t_stat) for e in bundled_events
    ]
    exclusions = [
        (e.onset_date - timedelta(days=90), e.onset_date + timedelta(days=90))
        for e in bundled_events
    ]
    report = placebo_study(asri, n_dates=10, exclusions=exclusions, seed=42)
    assert report.max_abs_t < min(crisis_ts) / 2.0


# ---------------------------------------------------------------------------
# block bootstrap
# ---------------------------------------------------------------------------


def test_bootstrap_constant_series_zero_width_intervals() -> None:
    asri = study_series([40.0] * 60, [40.0] * 41)
    report = block_bootstrap_detection(asri, EV, n_resamples=50, seed=1)
    assert report.cas_ci == (0.0, 0.0)
    assert set(report.cas_values) == {0.0}
    assert report.detection_rate == 0.0
    assert report.lead_ci is None


def test_bootstrap_block_equal_to_window_reproduces_point_statistic() -> None:
    rng = np.random.default_rng(77)
    asri = study_series(list(40.0 + rng.standard_normal(60)), [45.0] * 41)
    point = cumulative_abnormal_signal(asri, EV).cas
    report = block_bootstrap_detection(asri, EV, n_resamples=50, block_size=60, seed=3)
    assert all(v == pytest.approx(point, abs=1e-9) for v in report.cas_values)


def test_bootstrap_deterministic_under_fixed_seed() -> None:
    rng = np.random.default_rng(8)
    asri = study_series(list(40.0 + rng.standard_normal(60)), [52.0] * 41)
    one = block_bootstrap_detection(asri, EV, n_resamples=40, seed=9)
    two = block_bootstrap_detection(asri, EV, n_resamples=40, seed=9)
    assert one == two


def test_bootstrap_block_longer_than_window_rejected() -> None:
    asri = study_series([40.0] * 60, [40.0] * 41)
    with pytest.raises(DataError, match="block size"):
        block_bootstrap_detection(asri, EV, block_size=61)


# ---------------------------------------------------------------------------
# detection metrics and labels
# ---------------------------------------------------------------------------


def detection_fixture():
    span = days(100, date(2023, 1, 1))
    values = [30.0] * 100
    for i in range(55, 60):
        values[i] = 80.0  # alerts shortly before the day-61 onset
    asri = series_from_values("asri", span, values)
    return asri, [event("crisis", span[61])]


def test_crisis_day_labels_window_boundaries() -> None:
    asri, events = detection_fixture()
    labels = crisis_day_labels(asri, events)
    onset_idx = 61
    assert labels[onset_idx - 30] == 1
    assert labels[onset_idx - 1] == 1
    assert labels[onset_idx] == 0  # onset day itself is not a pre-crisis day
    assert labels[onset_idx - 31] == 0


def test_detection_threshold_above_max() -> None:
    asri, events = detection_fixture()
    m = detection_metrics(asri, events, threshold=1000.0)
    assert m.alert_days == 0
    assert m.recall == 0.0
    assert m.specificity == 1.0
    assert m.crises_detected == 0


def test_detection_threshold_zero_alerts_everywhere() -> None:
    asri, events = detection_fixture()
    m = detection_metrics(asri, events, threshold=0.0)
    labels = crisis_day_labels(asri, events)
    assert m.recall == 1.0
    assert m.precision == pytest.approx(sum(labels) / len(labels))
    assert m.crisis_recall == 1.0


def test_detection_confusion_counts() -> None:
    asri, events = detection_fixture()
    m = detection_metrics(asri, events, threshold=50.0)
    assert (m.tp, m.fp) == (5, 0)
    assert m.fn == 25
    assert m.tn == 70
    assert m.crises_detected == 1


def test_detection_strict_mode_excludes_equality() -> None:
    asri, events = detection_fixture()
    loose = detection_metrics(asri, events, threshold=80.0)
    strict = detection_metrics(asri, events, threshold=80.0, strict=True)
    assert loose.alert_days == 5
    assert strict.alert_days == 0


# ---------------------------------------------------------------------------
# classification curves
# ---------------------------------------------------------------------------


def test_roc_perfectly_separated() -> None:
    scores = [10.0] * 50 + [90.0] * 50
    labels = [0] * 50 + [1] * 50
    curves = roc_pr_curves(scores, labels)
    assert curves.auroc == pytest.approx(1.0)
    assert curves.auprc == pytest.approx(1.0, abs=1e-9)
    assert curves.youden_j == pytest.approx(1.0)


def test_roc_independent_labels_near_half() -> None:
    rng = np.random.default_rng(11)
    scores = list(rng.uniform(0, 100, size=4000))
    labels = list((rng.uniform(size=4000) < 0.5).astype(int))
    curves = roc_pr_curves(scores, labels)
    assert curves.auroc == pytest.approx(0.5, abs=0.05)


def test_roc_single_class_rejected() -> None:
    with pytest.raises(DataError):
        roc_pr_curves([1.0, 2.0, 3.0], [1, 1, 1])


# ---------------------------------------------------------------------------
# event catalog round trip
# ---------------------------------------------------------------------------


def test_event_catalog_round_trip(tmp_path) -> None:
    events = [
        event("alpha", date(2022, 5, 12)),
        CrisisEvent("beta", date(2023, 3, 11), type=EventType.EXOGENOUS),
    ]
    path = tmp_path / "events.csv"
    write_event_catalog(events, path)
    assert load_event_catalog(path) == events


def test_event_catalog_malformed_header(tmp_path) -> None:
    path = tmp_path / "events.csv"
    path.write_text("nome,data\n", encoding="utf-8")
    with pytest.raises(DataError):
        load_event_catalog(path)
