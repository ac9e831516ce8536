"""Historical reconstruction of the index from a snapshot store, plus the
validation harness built on top of it: walk-forward out-of-sample checks,
hold-one-out weight derivation, publication-lag simulation, ablations, and
the weight/threshold/forward-window sensitivity sweeps."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import numpy as np

from .aggregation import (
    SUB_INDEX_IDS,
    THEORETICAL_WEIGHTS,
    AsriPoint,
    WeightVector,
    ablation_weights,
    aggregate_ces,
    aggregate_ciss,
    aggregate_linear,
    aggregate_max,
    classify_alert,
)
from .errors import DataError, UsageError
from .event_study import (
    CrisisEvent,
    block_bootstrap_detection,
    detection_metrics,
    roc_pr_curves,
)
from .market_data import ONE_DAY, SnapshotStore, TimeSeries, series_from_values
from .subindices import (
    BackingTokenMetrics,
    MarketSnapshot,
    Mechanism,
    Protocol,
    Stablecoin,
    compute_subindices,
)

ONE_YEAR_DAYS = 365


# ---------------------------------------------------------------------------
# Universe metadata: which entities exist and how series ids map to them
# ---------------------------------------------------------------------------

UNIVERSE_FILE = "universe.json"


@dataclass(frozen=True)
class StablecoinMeta:
    id: str
    mechanism: Mechanism
    backing_token: str | None = None


@dataclass(frozen=True)
class ProtocolMeta:
    id: str
    category: str = ""
    audit_count: int = 0


@dataclass(frozen=True)
class Universe:
    stablecoins: tuple[StablecoinMeta, ...]
    protocols: tuple[ProtocolMeta, ...]

    def to_json(self) -> dict:
        return {
            "stablecoins": [
                {
                    "id": s.id,
                    "mechanism": s.mechanism.value,
                    "backing_token": s.backing_token,
                }
                for s in self.stablecoins
            ],
            "protocols": [
                {"id": p.id, "category": p.category, "audit_count": p.audit_count}
                for p in self.protocols
            ],
        }


def write_universe(universe: Universe, root: Path) -> None:
    (root / UNIVERSE_FILE).write_text(
        json.dumps(universe.to_json(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def load_universe(root: Path) -> Universe:
    path = Path(root) / UNIVERSE_FILE
    if not path.exists():
        raise DataError(f"universe file not found: {path}")
    obj = json.loads(path.read_text(encoding="utf-8"))
    return Universe(
        stablecoins=tuple(
            StablecoinMeta(s["id"], Mechanism(s["mechanism"]), s.get("backing_token"))
            for s in obj.get("stablecoins", [])
        ),
        protocols=tuple(
            ProtocolMeta(p["id"], p.get("category", ""), int(p.get("audit_count", 0)))
            for p in obj.get("protocols", [])
        ),
    )


# ---------------------------------------------------------------------------
# Fast cursor over one stored series
# ---------------------------------------------------------------------------


class _SeriesView:
    """Array-backed view with ordinal binary search and lag-aware visibility.

    The lag path applies the same publication cutoff as
    ``market_data.available_as_of``; tests hold the two routes equal.
    """

    def __init__(self, series: TimeSeries):
        self.series = series
        self.lag = series.descriptor.publication_lag
        self.ordinals = np.array([p.date.toordinal() for p in series.points], dtype=np.int64)
        self.values = np.array([p.value for p in series.points], dtype=float)
        self.running_max = np.maximum.accumulate(self.values) if len(self.values) else self.values

    def _visible_count(self, day: date, lagged: bool) -> int:
        horizon = self.lag.cutoff(day) if lagged else day
        return int(np.searchsorted(self.ordinals, horizon.toordinal(), side="right"))

    def latest(self, day: date, lagged: bool) -> float | None:
        n = self._visible_count(day, lagged)
        return float(self.values[n - 1]) if n else None

    def has_exact(self, day: date) -> bool:
        idx = np.searchsorted(self.ordinals, day.toordinal())
        return bool(idx < len(self.ordinals) and self.ordinals[idx] == day.toordinal())

    def max_so_far(self, day: date, lagged: bool) -> float | None:
        n = self._visible_count(day, lagged)
        return float(self.running_max[n - 1]) if n else None

    def trailing(self, day: date, count: int, lagged: bool) -> tuple[float, ...]:
        n = self._visible_count(day, lagged)
        return tuple(self.values[max(0, n - count) : n])

    def previous_pair(self, day: date, lagged: bool) -> tuple[float, float] | None:
        n = self._visible_count(day, lagged)
        if n < 2:
            return None
        return float(self.values[n - 2]), float(self.values[n - 1])


# ---------------------------------------------------------------------------
# Backtest configuration and execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BacktestConfig:
    start: date | None = None
    end: date | None = None
    weights: WeightVector = THEORETICAL_WEIGHTS
    aggregator: str = "linear"      # linear | ces | max | ciss
    ces_rho: float = 0.5
    lag_simulation: bool = False
    algo_adjustment: bool = False
    threshold: float = 50.0
    seed: int = 42

    def __post_init__(self) -> None:
        if self.aggregator not in ("linear", "ces", "max", "ciss"):
            raise UsageError(f"unknown aggregator {self.aggregator!r}")
        if self.start and self.end and self.end < self.start:
            raise UsageError("backtest end date before start date")


@dataclass(frozen=True)
class BacktestResult:
    config: BacktestConfig
    points: tuple[AsriPoint, ...]
    skipped_dates: tuple[date, ...]

    def dates(self) -> list[date]:
        return [p.date for p in self.points]

    def values(self) -> list[float]:
        return [p.asri for p in self.points]

    def series(self) -> TimeSeries:
        return series_from_values("asri", self.dates(), self.values())

    def score_matrix(self) -> np.ndarray:
        """n x 4 sub-index scores in canonical order."""
        return np.array([p.subindices.scores() for p in self.points], dtype=float)


class _StoreCursor:
    def __init__(self, store: SnapshotStore, universe: Universe, lagged: bool):
        self.universe = universe
        self.lagged = lagged
        self.views: dict[str, _SeriesView] = {}
        for series_id in store.list_series():
            self.views[series_id] = _SeriesView(store.read(series_id))

    def view(self, series_id: str) -> _SeriesView | None:
        return self.views.get(series_id)

    def latest(self, series_id: str, day: date) -> float | None:
        view = self.views.get(series_id)
        return view.latest(day, self.lagged) if view else None


def _snapshot_for_day(cursor: _StoreCursor, day: date) -> MarketSnapshot | None:
    """Assemble one day's raw inputs; None when the day falls in a data gap."""
    total_view = cursor.view("stablecoin_total_tvl")
    defi_view = cursor.view("defi_total_tvl")
    if total_view is None or defi_view is None:
        raise DataError("store is missing stablecoin_total_tvl or defi_total_tvl")
    # excluded-gap days: the crypto aggregates have no observation dated `day`
    if not total_view.has_exact(day) or not defi_view.has_exact(day):
        return None

    lagged = cursor.lagged
    coins = []
    for meta in cursor.universe.stablecoins:
        supply = cursor.latest(f"stable_supply_{meta.id}", day)
        if supply is None or supply <= 0:
            continue
        price = cursor.latest(f"stable_price_{meta.id}", day)
        coins.append(
            Stablecoin(
                id=meta.id,
                circulating_supply=supply,
                price=price,
                mechanism=meta.mechanism,
                backing_token=meta.backing_token,
            )
        )
    protocols = []
    for meta in cursor.universe.protocols:
        view = cursor.view(f"protocol_tvl_{meta.id}")
        if view is None:
            continue
        pair = view.previous_pair(day, lagged)
        tvl = view.latest(day, lagged)
        if tvl is None:
            continue
        change = 0.0
        if pair is not None and pair[0] > 0:
            change = (pair[1] / pair[0] - 1.0) * 100.0
        protocols.append(
            Protocol(
                id=meta.id,
                tvl=tvl,
                category=meta.category,
                audit_count=meta.audit_count,
                change_1d=change,
            )
        )

    treasury = cursor.latest("treasury_10y", day)
    vix = cursor.latest("vix", day)
    spread = cursor.latest("spread_10y_2y", day)
    if treasury is None or vix is None or spread is None:
        return None
    corr = cursor.latest("btc_spy_corr_30d", day)
    bridge = cursor.latest("bridge_count", day)
    sentiment = cursor.latest("sentiment", day)

    backing: dict[str, BackingTokenMetrics] = {}
    tokens = {m.backing_token for m in cursor.universe.stablecoins if m.backing_token}
    for token in sorted(tokens):
        vol = cursor.latest(f"backing_vol_{token}", day)
        growth = cursor.latest(f"backing_growth_{token}", day)
        ratio = cursor.latest(f"backing_ratio_{token}", day)
        if vol is None and growth is None and ratio is None:
            continue
        backing[token] = BackingTokenMetrics(vol, growth, ratio)

    return MarketSnapshot(
        date=day,
        stablecoins=tuple(coins),
        stablecoin_tvl_current=total_view.latest(day, lagged),
        stablecoin_tvl_historical_max=total_view.max_so_far(day, lagged),
        protocols=tuple(protocols),
        bridge_count=int(bridge) if bridge is not None else 0,
        treasury_10y=treasury,
        vix=vix,
        spread_10y_2y=spread,
        btc_spy_corr_30d=corr,
        backing_token_metrics=backing,
        sent_input=sentiment if sentiment is not None else 50.0,
        defi_tvl_history=defi_view.trailing(day, 30, lagged),
    )


def run_backtest(store: SnapshotStore, cfg: BacktestConfig) -> BacktestResult:
    """Deterministic daily index series over the configured range."""
    universe = load_universe(store.root)
    cursor = _StoreCursor(store, universe, cfg.lag_simulation)
    anchor = cursor.view("stablecoin_total_tvl")
    if anchor is None or not len(anchor.ordinals):
        raise DataError("store has no stablecoin_total_tvl observations")
    first = date.fromordinal(int(anchor.ordinals[0]))
    last = date.fromordinal(int(anchor.ordinals[-1]))
    start = cfg.start or first
    end = cfg.end or last
    if start > last or end < first:
        raise DataError(
            f"requested range [{start}, {end}] outside the stored data [{first}, {last}]"
        )

    days, vectors, skipped = [], [], []
    day = start
    while day <= end:
        snap = _snapshot_for_day(cursor, day)
        if snap is None:
            skipped.append(day)
        else:
            alpha = None
            if cfg.algo_adjustment:
                total = sum(c.circulating_supply for c in snap.stablecoins)
                algo = sum(
                    c.circulating_supply
                    for c in snap.stablecoins
                    if c.mechanism in (Mechanism.ALGORITHMIC, Mechanism.CRYPTO_BACKED)
                )
                alpha = min(1.0, algo / total) if total > 0 else 0.0
            days.append(day)
            vectors.append(compute_subindices(snap, alpha))
        day += ONE_DAY

    points: list[AsriPoint] = []
    if cfg.aggregator == "linear":
        for d, vec in zip(days, vectors):
            points.append(aggregate_linear(vec, cfg.weights, d))
    elif cfg.aggregator == "ciss":
        for (d, value), vec in zip(aggregate_ciss(vectors, dates=days), vectors):
            clipped = min(100.0, max(0.0, value))
            points.append(AsriPoint(d, value, vec, {}, classify_alert(clipped)))
    else:
        for d, vec in zip(days, vectors):
            value = (
                aggregate_ces(vec, cfg.weights, cfg.ces_rho)
                if cfg.aggregator == "ces"
                else aggregate_max(vec)
            )
            clipped = min(100.0, max(0.0, value))
            points.append(AsriPoint(d, value, vec, {}, classify_alert(clipped)))
    return BacktestResult(cfg, tuple(points), tuple(skipped))


def reweighted_values(scores: np.ndarray, weights: WeightVector) -> np.ndarray:
    return scores @ np.asarray(weights.as_tuple())


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

ASRI_CSV_HEADER = ["date", "asri", "scr", "dlr", "cr", "or", "alert"]


def write_asri_csv(result: BacktestResult, path: Path) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(ASRI_CSV_HEADER)
        for p in result.points:
            s = p.subindices.scores()
            writer.writerow(
                [p.date.isoformat(), repr(float(p.asri))]
                + [repr(float(x)) for x in s]
                + [p.alert.value]
            )


def write_components_json(result: BacktestResult, path: Path) -> None:
    payload = [
        {
            "date": p.date.isoformat(),
            "asri": p.asri,
            "alert": p.alert.value,
            "contributions": {k: p.contributions[k] for k in sorted(p.contributions)},
            "subindices": p.subindices.to_json(),
        }
        for p in result.points
    ]
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )


def write_alert_log(result: BacktestResult, path: Path) -> None:
    """One line per day on which the alert band changes."""
    lines = ["date,previous,current,asri"]
    prev = None
    for p in result.points:
        if prev is not None and p.alert != prev:
            lines.append(
                f"{p.date.isoformat()},{prev.value},{p.alert.value},{repr(float(p.asri))}"
            )
        prev = p.alert
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# Walk-forward validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WalkForwardRow:
    event: CrisisEvent
    train_start: date | None
    train_end: date | None
    n_train: int
    oos_peak: float | None
    detected: bool
    lead_time: int | None
    skipped_reason: str | None = None

    def to_json(self) -> dict:
        return {
            "event": self.event.name,
            "train_start": self.train_start.isoformat() if self.train_start else None,
            "train_end": self.train_end.isoformat() if self.train_end else None,
            "n_train": self.n_train,
            "oos_peak": self.oos_peak,
            "detected": self.detected,
            "lead_time": self.lead_time,
            "skipped_reason": self.skipped_reason,
        }


def walk_forward(
    result: BacktestResult,
    events: list[CrisisEvent],
    threshold: float = 50.0,
    pre_window: int = 30,
    post_window: int = 10,
) -> list[WalkForwardRow]:
    """Expanding-window out-of-sample test per event.

    Per-sub-index z-score parameters are frozen at the end of each training
    window (which stops the day before the 30-day pre-onset window begins) and
    mapped to the index scale as 50 + 10z, clipped to [0,100].
    """
    scores = result.score_matrix()
    dates = np.array([p.date.toordinal() for p in result.points], dtype=np.int64)
    weights = np.asarray(result.config.weights.as_tuple())
    rows = []
    for event in sorted(events, key=lambda e: e.onset_date):
        onset = event.onset_date
        train_end = onset - (pre_window + 1) * ONE_DAY
        mask_train = dates <= train_end.toordinal()
        n_train = int(mask_train.sum())
        if n_train == 0 or (
            train_end.toordinal() - int(dates[mask_train][0]) < ONE_YEAR_DAYS
        ):
            rows.append(
                WalkForwardRow(
                    event, None, None, n_train, None, False, None,
                    "insufficient training data (need one year before the pre-onset window)",
                )
            )
            continue
        train = scores[mask_train]
        mu = train.mean(axis=0)
        sd = train.std(axis=0, ddof=1)
        sd = np.where(sd > 0, sd, 1.0)

        lo = (onset - pre_window * ONE_DAY).toordinal()
        hi = (onset + post_window * ONE_DAY).toordinal()
        mask_test = (dates >= lo) & (dates <= hi)
        if not mask_test.any():
            rows.append(
                WalkForwardRow(
                    event, result.points[0].date, train_end, n_train, None, False,
                    None, "no observations in the test window",
                )
            )
            continue
        z = (scores[mask_test] - mu) / sd
        mapped = np.clip(50.0 + 10.0 * z, 0.0, 100.0)
        values = mapped @ weights
        test_dates = dates[mask_test]
        peak = float(values.max())

        pre_mask = test_dates < onset.toordinal()
        detected = bool((values[pre_mask] >= threshold).any())
        lead = None
        if detected:
            first = int(test_dates[pre_mask][values[pre_mask] >= threshold][0])
            lead = onset.toordinal() - first
        rows.append(
            WalkForwardRow(
                event,
                date.fromordinal(int(dates[mask_train][0])),
                train_end,
                n_train,
                peak,
                detected,
                lead,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Hold-one-out weight cross-validation
# ---------------------------------------------------------------------------


def simplex_grid(step: float = 0.05, floor: float = 0.05) -> list[WeightVector]:
    """All weight vectors on the 4-simplex at the given resolution, each
    coordinate at least ``floor``."""
    if step <= 0 or step > 1:
        raise UsageError(f"grid step must be in (0,1], got {step}")
    units = round(1.0 / step)
    if abs(units * step - 1.0) > 1e-9:
        raise UsageError(f"grid step {step} must divide 1 evenly")
    min_units = max(1, math.ceil(floor / step - 1e-9))
    grid = []
    for a in range(min_units, units + 1):
        for b in range(min_units, units - a + 1):
            for c in range(min_units, units - a - b + 1):
                d = units - a - b - c
                if d < min_units:
                    continue
                weights = (a * step, b * step, c * step, d * step)
                total = sum(weights)
                weights = tuple(w / total for w in weights)
                grid.append(WeightVector(*weights))
    if not grid:
        raise UsageError(
            f"grid step {step} with floor {floor} admits no weight vectors"
        )
    return grid


def _event_window_stats(
    values: np.ndarray,
    ordinals: np.ndarray,
    event: CrisisEvent,
    threshold: float,
    pre_window: int,
) -> tuple[bool, int | None, float | None]:
    lo = (event.onset_date - pre_window * ONE_DAY).toordinal()
    hi = (event.onset_date - ONE_DAY).toordinal()
    mask = (ordinals >= lo) & (ordinals <= hi)
    if not mask.any():
        return False, None, None
    window = values[mask]
    window_days = ordinals[mask]
    peak = float(window.max())
    over = window >= threshold
    if not over.any():
        return False, None, peak
    first = int(window_days[over][0])
    return True, event.onset_date.toordinal() - first, peak


@dataclass(frozen=True)
class HoldOneOutRow:
    held_out: CrisisEvent
    derived_weights: WeightVector
    training_detected: int
    training_mean_lead: float
    derived_detected: bool
    derived_lead: int | None
    derived_peak: float | None
    theoretical_detected: bool
    theoretical_lead: int | None
    theoretical_peak: float | None

    def to_json(self) -> dict:
        return {
            "held_out": self.held_out.name,
            "derived_weights": list(self.derived_weights.as_tuple()),
            "training_detected": self.training_detected,
            "training_mean_lead": self.training_mean_lead,
            "derived": {
                "detected": self.derived_detected,
                "lead": self.derived_lead,
                "peak": self.derived_peak,
            },
            "theoretical": {
                "detected": self.theoretical_detected,
                "lead": self.theoretical_lead,
                "peak": self.theoretical_peak,
            },
        }


def hold_one_out(
    result: BacktestResult,
    events: list[CrisisEvent],
    weight_grid_step: float = 0.05,
    threshold: float = 50.0,
    pre_window: int = 60,
) -> list[HoldOneOutRow]:
    """Withhold each crisis, pick grid weights maximizing (detections, mean
    lead) on the remaining crises, then compare the held-out outcome under
    derived and theoretical weights."""
    if len(events) < 3:
        raise DataError("hold-one-out needs at least 3 events (2 for training)")
    grid = simplex_grid(weight_grid_step)
    scores = result.score_matrix()
    ordinals = np.array([p.date.toordinal() for p in result.points], dtype=np.int64)
    rows = []
    for held in sorted(events, key=lambda e: e.onset_date):
        training = [e for e in events if e is not held]
        best = None
        for candidate in grid:
            values = reweighted_values(scores, candidate)
            detected = 0
            leads = []
            for event in training:
                hit, lead, _ = _event_window_stats(
                    values, ordinals, event, threshold, pre_window
                )
                if hit:
                    detected += 1
                    leads.append(lead)
            mean_lead = sum(leads) / len(leads) if leads else 0.0
            key = (detected, mean_lead)
            if best is None or key > best[0]:
                best = (key, candidate)
        (train_detected, train_lead), derived = best
        derived_values = reweighted_values(scores, derived)
        theo_values = reweighted_values(scores, THEORETICAL_WEIGHTS)
        d_hit, d_lead, d_peak = _event_window_stats(
            derived_values, ordinals, held, threshold, pre_window
        )
        t_hit, t_lead, t_peak = _event_window_stats(
            theo_values, ordinals, held, threshold, pre_window
        )
        rows.append(
            HoldOneOutRow(
                held_out=held,
                derived_weights=derived,
                training_detected=train_detected,
                training_mean_lead=train_lead,
                derived_detected=d_hit,
                derived_lead=d_lead,
                derived_peak=d_peak,
                theoretical_detected=t_hit,
                theoretical_lead=t_lead,
                theoretical_peak=t_peak,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Weight perturbation sensitivity
# ---------------------------------------------------------------------------


def perturb_weights(base: WeightVector, component: str, delta: float) -> WeightVector:
    """Scale one weight by (1 + delta) and renormalize the others
    proportionally; perturbations that zero out or saturate a weight are
    rejected."""
    if component not in SUB_INDEX_IDS:
        raise UsageError(f"unknown sub-index id {component!r}")
    perturbed = base[component] * (1.0 + delta)
    if perturbed <= 0.0 or perturbed >= 1.0:
        raise UsageError(
            f"perturbation {delta:+.0%} drives weight {component} to {perturbed}"
        )
    rest = 1.0 - base[component]
    scale = (1.0 - perturbed) / rest
    weights = [
        perturbed if name == component else base[name] * scale for name in SUB_INDEX_IDS
    ]
    drift = 1.0 - sum(weights)
    biggest = max(range(4), key=lambda i: weights[i])
    weights[biggest] += drift
    return WeightVector(*weights)


def _spearman(a: np.ndarray, b: np.ndarray) -> float:
    ra = np.argsort(np.argsort(a)).astype(float)
    rb = np.argsort(np.argsort(b)).astype(float)
    ra -= ra.mean()
    rb -= rb.mean()
    denom = math.sqrt(float(ra @ ra) * float(rb @ rb))
    return float(ra @ rb) / denom if denom > 0 else 1.0


@dataclass(frozen=True)
class PerturbationRow:
    component: str
    delta: float
    detection_rate: float      # mean bootstrap detection rate across events
    mean_lead: float | None
    rank_correlation: float

    def to_json(self) -> dict:
        return {
            "component": self.component,
            "delta": self.delta,
            "detection_rate": self.detection_rate,
            "mean_lead": self.mean_lead,
            "rank_correlation": self.rank_correlation,
        }


def weight_perturbation(
    result: BacktestResult,
    events: list[CrisisEvent],
    deltas: tuple[float, ...] = (-0.15, -0.10, -0.05, 0.05, 0.10, 0.15),
    threshold: float = 50.0,
    n_resamples: int = 500,
    block_size: int = 20,
    seed: int = 42,
) -> list[PerturbationRow]:
    scores = result.score_matrix()
    days = result.dates()
    baseline = reweighted_values(scores, result.config.weights)
    rows = []
    for component in SUB_INDEX_IDS:
        for delta in deltas:
            weights = perturb_weights(result.config.weights, component, delta)
            values = reweighted_values(scores, weights)
            series = series_from_values("asri_perturbed", days, list(values))
            rates, leads = [], []
            for event in events:
                report = block_bootstrap_detection(
                    series,
                    event,
                    n_resamples=n_resamples,
                    block_size=block_size,
                    threshold=threshold,
                    seed=seed,
                )
                rates.append(report.detection_rate)
                if report.lead_times:
                    leads.append(float(np.mean(report.lead_times)))
            rows.append(
                PerturbationRow(
                    component=component,
                    delta=delta,
                    detection_rate=float(np.mean(rates)) if rates else 0.0,
                    mean_lead=float(np.mean(leads)) if leads else None,
                    rank_correlation=_spearman(values, baseline),
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Threshold and forward-window sensitivity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdRow:
    threshold: float
    precision: float
    recall: float
    f1: float
    specificity: float

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "specificity": self.specificity,
        }


def threshold_sensitivity(
    result: BacktestResult,
    events: list[CrisisEvent],
    thresholds: tuple[float, ...] = (60.0, 65.0, 70.0, 75.0, 80.0),
    pre_window: int = 30,
) -> tuple[list[ThresholdRow], float]:
    """Day-level detection metrics per threshold; returns rows and the
    F1-maximizing threshold."""
    series = result.series()
    rows = []
    for threshold in thresholds:
        m = detection_metrics(series, events, threshold, pre_window)
        rows.append(
            ThresholdRow(threshold, m.precision, m.recall, m.f1, m.specificity)
        )
    best = max(rows, key=lambda r: (r.f1, -r.threshold)).threshold
    return rows, best


@dataclass(frozen=True)
class ForwardWindowRow:
    window: int
    auroc: float
    mean_lead: float | None
    precision: float
    recall: float
    f1: float

    def to_json(self) -> dict:
        return {
            "window": self.window,
            "auroc": self.auroc,
            "mean_lead": self.mean_lead,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def forward_window_sensitivity(
    result: BacktestResult,
    events: list[CrisisEvent],
    windows: tuple[int, ...] = (14, 30, 60, 90),
    threshold: float = 50.0,
) -> list[ForwardWindowRow]:
    """Binary label: a crisis onset occurs within the next w days."""
    series = result.series()
    values = result.values()
    dates = result.dates()
    onsets = [e.onset_date for e in events]
    rows = []
    for window in windows:
        labels = [
            1 if any(d < onset <= d + window * ONE_DAY for onset in onsets) else 0
            for d in dates
        ]
        curves = roc_pr_curves(values, labels)
        m = detection_metrics(series, events, threshold, window)
        leads = []
        for event in events:
            hit, lead, _ = _event_window_stats(
                np.asarray(values),
                np.array([d.toordinal() for d in dates], dtype=np.int64),
                event,
                threshold,
                window,
            )
            if hit:
                leads.append(lead)
        rows.append(
            ForwardWindowRow(
                window=window,
                auroc=curves.auroc,
                mean_lead=float(np.mean(leads)) if leads else None,
                precision=m.precision,
                recall=m.recall,
                f1=m.f1,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Publication-lag comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LagComparisonRow:
    event: CrisisEvent
    peak_ideal: float | None
    peak_lagged: float | None
    lead_ideal: int | None
    lead_lagged: int | None
    degradation_pct: float | None

    def to_json(self) -> dict:
        return {
            "event": self.event.name,
            "peak_ideal": self.peak_ideal,
            "peak_lagged": self.peak_lagged,
            "lead_ideal": self.lead_ideal,
            "lead_lagged": self.lead_lagged,
            "degradation_pct": self.degradation_pct,
        }


def lag_comparison(
    store: SnapshotStore,
    cfg: BacktestConfig,
    events: list[CrisisEvent],
    pre_window: int = 30,
    post_window: int = 10,
) -> tuple[list[LagComparisonRow], BacktestResult, BacktestResult]:
    """Paired perfect-foresight vs. publication-lag backtests."""
    ideal = run_backtest(store, replace(cfg, lag_simulation=False))
    lagged = run_backtest(store, replace(cfg, lag_simulation=True))
    rows = []
    for event in sorted(events, key=lambda e: e.onset_date):
        stats = []
        for result in (ideal, lagged):
            ordinals = np.array(
                [p.date.toordinal() for p in result.points], dtype=np.int64
            )
            values = np.asarray(result.values())
            lo = (event.onset_date - pre_window * ONE_DAY).toordinal()
            hi = (event.onset_date + post_window * ONE_DAY).toordinal()
            mask = (ordinals >= lo) & (ordinals <= hi)
            peak = float(values[mask].max()) if mask.any() else None
            hit, lead, _ = _event_window_stats(
                values, ordinals, event, cfg.threshold, pre_window
            )
            stats.append((peak, lead if hit else None))
        (peak_i, lead_i), (peak_l, lead_l) = stats
        degradation = None
        if peak_i is not None and peak_l is not None and peak_i > 0:
            degradation = (peak_i - peak_l) / peak_i * 100.0
        rows.append(
            LagComparisonRow(event, peak_i, peak_l, lead_i, lead_l, degradation)
        )
    return rows, ideal, lagged


# ---------------------------------------------------------------------------
# Component ablation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AblationRow:
    excluded: str
    weights: WeightVector
    crises_detected: int
    n_crises: int
    mean_lead: float | None
    correlation_with_baseline: float

    def to_json(self) -> dict:
        return {
            "excluded": self.excluded,
            "weights": list(self.weights.as_tuple()),
            "crises_detected": self.crises_detected,
            "n_crises": self.n_crises,
            "mean_lead": self.mean_lead,
            "correlation_with_baseline": self.correlation_with_baseline,
        }


def ablation_analysis(
    result: BacktestResult,
    events: list[CrisisEvent],
    threshold: float = 50.0,
    pre_window: int = 30,
) -> list[AblationRow]:
    """Detection impact of removing each sub-index, weights renormalized."""
    scores = result.score_matrix()
    ordinals = np.array([p.date.toordinal() for p in result.points], dtype=np.int64)
    baseline = reweighted_values(scores, result.config.weights)
    rows = []
    for excluded in SUB_INDEX_IDS:
        weights = ablation_weights(result.config.weights, excluded)
        values = reweighted_values(scores, weights)
        detected = 0
        leads = []
        for event in events:
            hit, lead, _ = _event_window_stats(values, ordinals, event, threshold, pre_window)
            if hit:
                detected += 1
                leads.append(lead)
        corr = float(np.corrcoef(values, baseline)[0, 1])
        rows.append(
            AblationRow(
                excluded=excluded,
                weights=weights,
                crises_detected=detected,
                n_crises=len(events),
                mean_lead=float(np.mean(leads)) if leads else None,
                correlation_with_baseline=corr,
            )
        )
    return rows
