"""Constant-mean event studies around crisis onsets: abnormal-signal
inference, sigma and threshold lead times, block-bootstrap uncertainty,
placebo controls, and day-level detection metrics."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, timedelta
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import DataError, NumericalError
from .market_data import TimeSeries

ONE_DAY = timedelta(days=1)


class EventType(str, Enum):
    ENDOGENOUS = "endogenous"
    EXOGENOUS = "exogenous"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class CrisisEvent:
    name: str
    onset_date: date
    type: EventType = EventType.ENDOGENOUS


@dataclass(frozen=True)
class EventStudyConfig:
    estimation_start: int = -90   # days relative to onset, inclusive
    estimation_end: int = -31
    event_start: int = -30
    event_end: int = 10
    sigma_multiplier: float = 1.5
    lead_lookback_cap: int = 30
    alpha: float = 0.05
    min_estimation_obs: int = 45  # below this the study aborts

    def __post_init__(self) -> None:
        if not self.estimation_start <= self.estimation_end < self.event_start <= self.event_end:
            raise DataError("estimation window must precede the event window")


DEFAULT_CONFIG = EventStudyConfig()


@dataclass(frozen=True)
class EventStudyResult:
    event: CrisisEvent
    mu_hat: float
    sigma_hat: float
    cas: float
    se_cas: float
    t_stat: float
    p_value: float
    df: int
    n_estimation: int
    n_event: int
    lead_time_sigma: int | None
    lead_time_threshold: int | None
    peak: float
    ljung_box_stat: float | None
    ljung_box_p: float | None
    ar1_coefficient: float | None
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "event": self.event.name,
            "onset_date": self.event.onset_date.isoformat(),
            "type": self.event.type.value,
            "mu_hat": self.mu_hat,
            "sigma_hat": self.sigma_hat,
            "cas": self.cas,
            "se_cas": self.se_cas,
            "t_stat": self.t_stat,
            "p_value": self.p_value,
            "df": self.df,
            "n_estimation": self.n_estimation,
            "n_event": self.n_event,
            "lead_time_sigma": self.lead_time_sigma,
            "lead_time_threshold": self.lead_time_threshold,
            "peak": self.peak,
            "ljung_box_stat": self.ljung_box_stat,
            "ljung_box_p": self.ljung_box_p,
            "ar1_coefficient": self.ar1_coefficient,
            "flags": sorted(self.flags),
        }


def _window_values(
    asri: TimeSeries, onset: date, start_offset: int, end_offset: int
) -> tuple[list[date], list[float]]:
    days, values = [], []
    day = onset + start_offset * ONE_DAY
    end = onset + end_offset * ONE_DAY
    while day <= end:
        obs = asri.at(day)
        if obs is not None:
            days.append(day)
            values.append(obs.value)
        day += ONE_DAY
    return days, values


def estimate_baseline(
    asri: TimeSeries, event: CrisisEvent, cfg: EventStudyConfig = DEFAULT_CONFIG
) -> tuple[float, float]:
    """Sample mean and (n-1)-denominator std over the estimation window."""
    _, values = _window_values(asri, event.onset_date, cfg.estimation_start, cfg.estimation_end)
    expected = cfg.estimation_end - cfg.estimation_start + 1
    if len(values) < cfg.min_estimation_obs:
        raise DataError(
            f"event {event.name}: estimation window has {len(values)} observations, "
            f"need at least {cfg.min_estimation_obs} (full window is {expected})"
        )
    arr = np.asarray(values)
    mu = float(arr.mean())
    sigma = float(arr.std(ddof=1))
    return mu, sigma


def _ljung_box(residuals: np.ndarray, lags: int = 10) -> tuple[float, float]:
    n = len(residuals)
    centered = residuals - residuals.mean()
    denom = float(centered @ centered)
    if denom == 0:
        return 0.0, 1.0
    q = 0.0
    for k in range(1, lags + 1):
        rho = float(centered[k:] @ centered[:-k]) / denom
        q += rho * rho / (n - k)
    q *= n * (n + 2)
    return q, float(stats.chi2.sf(q, lags))


def _ar1_coefficient(residuals: np.ndarray) -> float | None:
    centered = residuals - residuals.mean()
    denom = float(centered[:-1] @ centered[:-1])
    if denom == 0:
        return None
    return float(centered[1:] @ centered[:-1]) / denom


def cumulative_abnormal_signal(
    asri: TimeSeries, event: CrisisEvent, cfg: EventStudyConfig = DEFAULT_CONFIG
) -> EventStudyResult:
    """Abnormal signal summed over the event window with a t test on 59 df
    (complete windows); degenerate estimation variance is an error."""
    mu, sigma = estimate_baseline(asri, event, cfg)
    est_days, est_values = _window_values(
        asri, event.onset_date, cfg.estimation_start, cfg.estimation_end
    )
    event_days, event_values = _window_values(
        asri, event.onset_date, cfg.event_start, cfg.event_end
    )
    if not event_values:
        raise DataError(f"event {event.name}: event window has no observations")
    cas = float(sum(v - mu for v in event_values))
    if sigma == 0.0:
        raise NumericalError(
            f"event {event.name}: degenerate variance in estimation window "
            f"(sigma=0, CAS={cas}); t statistic undefined"
        )
    n_event = len(event_values)
    se = sigma * n_event**0.5
    t_stat = cas / se
    df = len(est_values) - 1
    p = 2.0 * float(stats.t.sf(abs(t_stat), df))

    residuals = np.asarray(est_values) - mu
    lb_stat, lb_p = _ljung_box(residuals)
    phi = _ar1_coefficient(residuals)
    flags = []
    if phi is not None and abs(phi) > 0.5:
        flags.append("ar1_autocorrelation_high")

    return EventStudyResult(
        event=event,
        mu_hat=mu,
        sigma_hat=sigma,
        cas=cas,
        se_cas=se,
        t_stat=t_stat,
        p_value=p,
        df=df,
        n_estimation=len(est_values),
        n_event=n_event,
        lead_time_sigma=lead_time_sigma(asri, event, cfg),
        lead_time_threshold=lead_time_threshold(asri, event, 50.0, cfg.lead_lookback_cap),
        peak=max(event_values),
        ljung_box_stat=lb_stat,
        ljung_box_p=lb_p,
        ar1_coefficient=phi,
        flags=tuple(flags),
    )


def lead_time_sigma(
    asri: TimeSeries, event: CrisisEvent, cfg: EventStudyConfig = DEFAULT_CONFIG
) -> int | None:
    """Days before onset of the first exceedance of mu + 1.5 sigma within the
    capped pre-event lookback; None if never exceeded."""
    mu, sigma = estimate_baseline(asri, event, cfg)
    bar = mu + cfg.sigma_multiplier * sigma
    days, values = _window_values(asri, event.onset_date, -cfg.lead_lookback_cap, -1)
    for day, value in zip(days, values):
        if value > bar:
            return (event.onset_date - day).days
    return None


def lead_time_threshold(
    asri: TimeSeries,
    event: CrisisEvent,
    threshold: float = 50.0,
    search_horizon: int | None = None,
) -> int | None:
    """Days before onset of the first crossing of an absolute threshold.

    ``search_horizon`` limits how far back to look; None searches the whole
    sample before onset. A crossing on the onset day itself counts as lead 0.
    """
    if search_horizon is None:
        first = asri.points[0].date if asri.points else event.onset_date
        start = -(event.onset_date - first).days
        if start > 0:
            start = 0
    else:
        start = -search_horizon
    days, values = _window_values(asri, event.onset_date, start, 0)
    for day, value in zip(days, values):
        if value >= threshold:
            return (event.onset_date - day).days
    return None


def bonferroni(p_values: list[float], alpha: float = 0.05) -> list[bool]:
    """Reject each hypothesis iff p < alpha / K."""
    if not p_values:
        raise DataError("bonferroni requires at least one p-value")
    cutoff = alpha / len(p_values)
    return [p < cutoff for p in p_values]


@dataclass(frozen=True)
class PlaceboReport:
    placebo_dates: tuple[date, ...]
    t_stats: tuple[float, ...]
    p_values: tuple[float, ...]
    fp_rate_05: float
    fp_rate_01: float
    mean_abs_t: float
    max_abs_t: float
    seed: int

    def to_json(self) -> dict:
        return {
            "placebo_dates": [d.isoformat() for d in self.placebo_dates],
            "t_stats": list(self.t_stats),
            "p_values": list(self.p_values),
            "fp_rate_05": self.fp_rate_05,
            "fp_rate_01": self.fp_rate_01,
            "mean_abs_t": self.mean_abs_t,
            "max_abs_t": self.max_abs_t,
            "seed": self.seed,
        }


def placebo_study(
    asri: TimeSeries,
    n_dates: int,
    exclusions: list[tuple[date, date]],
    seed: int,
    cfg: EventStudyConfig = DEFAULT_CONFIG,
    edge_days: int = 90,
) -> PlaceboReport:
    """Event studies at random non-crisis dates; sampling is uniform without
    replacement over dates clear of crisis neighborhoods and sample edges."""
    if not asri.points:
        raise DataError("placebo study requires a nonempty index series")
    first = asri.points[0].date
    last = asri.points[-1].date
    eligible = []
    day = first + edge_days * ONE_DAY
    stop = last - edge_days * ONE_DAY
    while day <= stop:
        if not any(lo <= day <= hi for lo, hi in exclusions):
            eligible.append(day)
        day += ONE_DAY
    if len(eligible) < n_dates:
        raise DataError(
            f"only {len(eligible)} eligible placebo dates after exclusions, need {n_dates}"
        )
    rng = np.random.default_rng(seed)
    picked = sorted(eligible[i] for i in rng.choice(len(eligible), size=n_dates, replace=False))

    t_stats, p_values = [], []
    for onset in picked:
        result = cumulative_abnormal_signal(
            asri, CrisisEvent(f"placebo_{onset.isoformat()}", onset), cfg
        )
        t_stats.append(result.t_stat)
        p_values.append(result.p_value)
    t_arr = np.asarray(t_stats)
    return PlaceboReport(
        placebo_dates=tuple(picked),
        t_stats=tuple(t_stats),
        p_values=tuple(p_values),
        fp_rate_05=float(np.mean([p < 0.05 for p in p_values])),
        fp_rate_01=float(np.mean([p < 0.01 for p in p_values])),
        mean_abs_t=float(np.abs(t_arr).mean()),
        max_abs_t=float(np.abs(t_arr).max()),
        seed=seed,
    )


@dataclass(frozen=True)
class BootstrapReport:
    event: CrisisEvent
    n_resamples: int
    block_size: int
    threshold: float
    detection_rate: float
    lead_times: tuple[int, ...]
    lead_ci: tuple[float, float] | None
    cas_values: tuple[float, ...]
    cas_ci: tuple[float, float]
    seed: int

    def to_json(self) -> dict:
        return {
            "event": self.event.name,
            "n_resamples": self.n_resamples,
            "block_size": self.block_size,
            "threshold": self.threshold,
            "detection_rate": self.detection_rate,
            "lead_ci": list(self.lead_ci) if self.lead_ci else None,
            "cas_ci": list(self.cas_ci),
            "seed": self.seed,
        }


def block_bootstrap_detection(
    asri: TimeSeries,
    event: CrisisEvent,
    n_resamples: int = 500,
    block_size: int = 20,
    threshold: float = 50.0,
    seed: int = 42,
    cfg: EventStudyConfig = DEFAULT_CONFIG,
) -> BootstrapReport:
    """Contiguous-block resampling of the estimation window.

    Each resample rebuilds the pre-event path from sampled blocks, keeps the
    event window fixed, and recomputes baseline, CAS, threshold detection over
    the full pre-onset stretch, and lead time. Percentile 95% intervals.
    """
    _, est_values = _window_values(
        asri, event.onset_date, cfg.estimation_start, cfg.estimation_end
    )
    _, event_values = _window_values(asri, event.onset_date, cfg.event_start, cfg.event_end)
    n_est = len(est_values)
    if n_est == 0 or not event_values:
        raise DataError(f"event {event.name}: empty study windows")
    if block_size > n_est:
        raise DataError(
            f"block size {block_size} exceeds estimation window length {n_est}"
        )
    est_arr = np.asarray(est_values)
    event_arr = np.asarray(event_values)
    n_event = len(event_arr)
    # pre-onset part of the event window, used for threshold detection
    pre_onset_event = event_arr[: max(0, min(n_event, -cfg.event_start + 1))]

    rng = np.random.default_rng(seed)
    n_starts = n_est - block_size + 1
    n_blocks = -(-n_est // block_size)  # ceil

    detections = 0
    lead_times: list[int] = []
    cas_values: list[float] = []
    for _ in range(n_resamples):
        starts = rng.integers(0, n_starts, size=n_blocks)
        resampled = np.concatenate([est_arr[s : s + block_size] for s in starts])[:n_est]
        mu_star = float(resampled.mean())
        cas_values.append(float((event_arr - mu_star).sum()))
        # synthetic pre-onset path: resampled estimation days, then the fixed
        # event-window days up to onset
        path = np.concatenate([resampled, pre_onset_event])
        crossings = np.nonzero(path >= threshold)[0]
        if crossings.size:
            detections += 1
            # index 0 sits cfg.estimation_start days before onset
            offset = cfg.estimation_start + int(crossings[0])
            if offset > 0:
                offset = 0
            lead_times.append(-offset)
    lead_ci = None
    if lead_times:
        lead_ci = (
            float(np.percentile(lead_times, 2.5)),
            float(np.percentile(lead_times, 97.5)),
        )
    cas_ci = (
        float(np.percentile(cas_values, 2.5)),
        float(np.percentile(cas_values, 97.5)),
    )
    return BootstrapReport(
        event=event,
        n_resamples=n_resamples,
        block_size=block_size,
        threshold=threshold,
        detection_rate=detections / n_resamples,
        lead_times=tuple(lead_times),
        lead_ci=lead_ci,
        cas_values=tuple(cas_values),
        cas_ci=cas_ci,
        seed=seed,
    )


@dataclass(frozen=True)
class DetectionMetrics:
    threshold: float
    pre_window: int
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    specificity: float
    accuracy: float
    crisis_recall: float
    crises_detected: int
    n_crises: int
    alert_days: int

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "pre_window": self.pre_window,
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "specificity": self.specificity,
            "accuracy": self.accuracy,
            "crisis_recall": self.crisis_recall,
            "crises_detected": self.crises_detected,
            "n_crises": self.n_crises,
            "alert_days": self.alert_days,
        }


def crisis_day_labels(
    asri: TimeSeries, events: list[CrisisEvent], pre_window: int = 30
) -> list[int]:
    """1 for days inside any event's pre-onset window [onset-30, onset-1]."""
    windows = [
        (e.onset_date - pre_window * ONE_DAY, e.onset_date - ONE_DAY) for e in events
    ]
    return [
        1 if any(lo <= p.date <= hi for lo, hi in windows) else 0 for p in asri.points
    ]


def detection_metrics(
    asri: TimeSeries,
    events: list[CrisisEvent],
    threshold: float = 50.0,
    pre_window: int = 30,
    strict: bool = False,
) -> DetectionMetrics:
    """Day-level confusion counts against pre-crisis windows, plus the share
    of crises with at least one in-window alert.

    ``strict`` alerts only above the threshold; the default counts equality,
    which is what a level-50 alert rule wants.
    """
    labels = crisis_day_labels(asri, events, pre_window)
    over = (
        (lambda v: v > threshold) if strict else (lambda v: v >= threshold)
    )
    tp = fp = fn = tn = 0
    for point, label in zip(asri.points, labels):
        alert = over(point.value)
        if alert and label:
            tp += 1
        elif alert:
            fp += 1
        elif label:
            fn += 1
        else:
            tn += 1
    detected = 0
    for event in events:
        lo = event.onset_date - pre_window * ONE_DAY
        hi = event.onset_date - ONE_DAY
        if any(over(p.value) for p in asri.points if lo <= p.date <= hi):
            detected += 1
    total = tp + fp + fn + tn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return DetectionMetrics(
        threshold=threshold,
        pre_window=pre_window,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        precision=precision,
        recall=recall,
        f1=(2 * precision * recall / (precision + recall)) if precision + recall else 0.0,
        specificity=tn / (tn + fp) if tn + fp else 0.0,
        accuracy=(tp + tn) / total if total else 0.0,
        crisis_recall=detected / len(events) if events else 0.0,
        crises_detected=detected,
        n_crises=len(events),
        alert_days=tp + fp,
    )


@dataclass(frozen=True)
class RocPrCurves:
    roc_points: tuple[tuple[float, float], ...]  # (fpr, tpr)
    pr_points: tuple[tuple[float, float], ...]   # (recall, precision)
    auroc: float
    auprc: float
    youden_threshold: float
    youden_j: float

    def to_json(self) -> dict:
        return {
            "auroc": self.auroc,
            "auprc": self.auprc,
            "youden_threshold": self.youden_threshold,
            "youden_j": self.youden_j,
            "roc_points": [list(p) for p in self.roc_points],
            "pr_points": [list(p) for p in self.pr_points],
        }


def roc_pr_curves(scores: list[float], labels: list[int]) -> RocPrCurves:
    """Threshold sweep over observed scores with trapezoidal areas and the
    Youden-optimal operating point."""
    if len(scores) != len(labels):
        raise DataError("scores and labels must align")
    pos = sum(labels)
    neg = len(labels) - pos
    if pos == 0 or neg == 0:
        raise DataError("ROC/PR require both classes present")
    order = np.argsort(np.asarray(scores))[::-1]
    sorted_scores = np.asarray(scores)[order]
    sorted_labels = np.asarray(labels)[order]

    roc = [(0.0, 0.0)]
    pr: list[tuple[float, float]] = []
    best_j, best_threshold = -1.0, float(sorted_scores[0])
    tp = fp = 0
    i = 0
    n = len(sorted_scores)
    while i < n:
        threshold = sorted_scores[i]
        while i < n and sorted_scores[i] == threshold:
            if sorted_labels[i]:
                tp += 1
            else:
                fp += 1
            i += 1
        tpr = tp / pos
        fpr = fp / neg
        roc.append((fpr, tpr))
        pr.append((tpr, tp / (tp + fp)))
        j = tpr - fpr
        if j > best_j:
            best_j, best_threshold = j, float(threshold)

    auroc = 0.0
    for (x0, y0), (x1, y1) in zip(roc, roc[1:]):
        auroc += (x1 - x0) * (y0 + y1) / 2.0
    pr_full = [(0.0, pr[0][1])] + pr
    auprc = 0.0
    for (x0, y0), (x1, y1) in zip(pr_full, pr_full[1:]):
        auprc += (x1 - x0) * (y0 + y1) / 2.0
    return RocPrCurves(
        roc_points=tuple(roc),
        pr_points=tuple(pr_full),
        auroc=float(auroc),
        auprc=float(auprc),
        youden_threshold=best_threshold,
        youden_j=float(best_j),
    )


# ---------------------------------------------------------------------------
# Event catalog persistence: `name,onset_date,type` CSV
# ---------------------------------------------------------------------------


def load_event_catalog(path: Path) -> list[CrisisEvent]:
    if not path.exists():
        raise DataError(f"event catalog not found: {path}")
    rows = list(csv.reader(path.read_text(encoding="utf-8").splitlines()))
    if not rows or rows[0] != ["name", "onset_date", "type"]:
        raise DataError(f"{path}: expected header 'name,onset_date,type'")
    events = []
    for row in rows[1:]:
        if len(row) != 3:
            raise DataError(f"{path}: malformed row {row!r}")
        try:
            events.append(CrisisEvent(row[0], date.fromisoformat(row[1]), EventType(row[2])))
        except ValueError as exc:
            raise DataError(f"{path}: malformed row {row!r}: {exc}") from exc
    return events


def write_event_catalog(events: list[CrisisEvent], path: Path) -> None:
    lines = ["name,onset_date,type"]
    for e in events:
        lines.append(f"{e.name},{e.onset_date.isoformat()},{e.type.value}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
