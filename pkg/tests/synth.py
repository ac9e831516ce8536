"""Synthetic stores, score fixtures, and independent oracles shared by tests."""
from __future__ import annotations

from datetime import date, timedelta
from pathlib import Path

import numpy as np

from asri.aggregation import THEORETICAL_WEIGHTS, WeightVector, aggregate_linear
from asri.backtest import (
    BacktestConfig,
    BacktestResult,
    ProtocolMeta,
    StablecoinMeta,
    Universe,
    write_universe,
)
from asri.event_study import CrisisEvent, EventType
from asri.market_data import (
    LAG_NONE,
    Observation,
    PublicationLag,
    SeriesDescriptor,
    SnapshotStore,
    Source,
    TimeSeries,
)
from asri.subindices import Mechanism, SubIndexValue, SubIndexVector

D0 = date(2023, 1, 1)


def days(n: int, start: date = D0) -> list[date]:
    return [start + timedelta(days=i) for i in range(n)]


def sv(score: float) -> SubIndexValue:
    return SubIndexValue(score=float(score), components={})


def subvec(scr: float, dlr: float, cr: float, op: float) -> SubIndexVector:
    return SubIndexVector(sv(scr), sv(dlr), sv(cr), sv(op))


def result_from_scores(
    dates: list[date],
    scores: np.ndarray,
    weights: WeightVector = THEORETICAL_WEIGHTS,
) -> BacktestResult:
    """Wrap an n x 4 sub-index score matrix as a finished backtest run."""
    points = tuple(
        aggregate_linear(subvec(*row), weights, day) for day, row in zip(dates, scores)
    )
    return BacktestResult(
        config=BacktestConfig(weights=weights), points=points, skipped_dates=()
    )


SYNTH_UNIVERSE = Universe(
    stablecoins=(
        StablecoinMeta("usdx", Mechanism.FIAT),
        StablecoinMeta("usdy", Mechanism.FIAT),
    ),
    protocols=(
        ProtocolMeta("lend_a", "lending", 2),
        ProtocolMeta("dex_b", "dex", 0),
    ),
)

# Flat defaults keep every sub-index well inside (0, 100).
STORE_DEFAULTS = {
    "stablecoin_total_tvl": 130e9,
    "defi_total_tvl": 45e9,
    "stable_supply_usdx": 80e9,
    "stable_supply_usdy": 50e9,
    "stable_price_usdx": 1.0,
    "stable_price_usdy": 1.0,
    "protocol_tvl_lend_a": 20e9,
    "protocol_tvl_dex_b": 25e9,
    "treasury_10y": 4.0,
    "vix": 20.0,
    "spread_10y_2y": 0.5,
    "btc_spy_corr_30d": 0.4,
    "bridge_count": 60.0,
    "sentiment": 50.0,
}


def make_store(
    root: Path,
    n_days: int = 120,
    start: date = D0,
    values: dict[str, object] | None = None,
    lags: dict[str, PublicationLag] | None = None,
) -> SnapshotStore:
    """Materialize a small deterministic snapshot store.

    ``values`` overrides a default (scalar or per-day sequence); mapping a
    series to None drops it.  ``lags`` attaches publication lags per series.
    """
    base: dict[str, object] = dict(STORE_DEFAULTS)
    if values:
        base.update(values)
    lags = lags or {}
    root.mkdir(parents=True, exist_ok=True)
    store = SnapshotStore(root)
    span = days(n_days, start)
    for series_id, value in sorted(base.items()):
        if value is None:
            continue
        if isinstance(value, (list, tuple, np.ndarray)):
            vals = [float(v) for v in value]
            if len(vals) != n_days:
                raise ValueError(f"{series_id}: expected {n_days} values")
        else:
            vals = [float(value)] * n_days
        desc = SeriesDescriptor(
            series_id=series_id,
            source=Source.MANUAL,
            publication_lag=lags.get(series_id, LAG_NONE),
        )
        store.write(
            TimeSeries(desc, tuple(Observation(d, v) for d, v in zip(span, vals)))
        )
    write_universe(SYNTH_UNIVERSE, store.root)
    return store


def event(name: str, onset: date, kind: EventType = EventType.ENDOGENOUS) -> CrisisEvent:
    return CrisisEvent(name=name, onset_date=onset, type=kind)


def ols_normal_equations(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least squares with intercept, solved directly from the normal equations."""
    design = np.column_stack([np.ones(len(x)), np.asarray(x, dtype=float)])
    gram = design.T @ design
    return np.linalg.solve(gram, design.T @ np.asarray(y, dtype=float))


def mc_gfevd(
    a1: np.ndarray,
    sigma: np.ndarray,
    horizon: int,
    n_paths: int,
    seed: int,
) -> np.ndarray:
    """Monte-Carlo forecast-error variance decomposition of a VAR(1).

    Simulates H-step forecast errors from draws of the innovation process and
    estimates both the per-shock generalized contributions and the total error
    variance from the same draws; row-normalized like the analytic version.
    """
    a1 = np.asarray(a1, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    n = a1.shape[0]
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(sigma)
    phis = [np.eye(n)]
    for _ in range(1, horizon):
        phis.append(a1 @ phis[-1])
    eps = rng.standard_normal((n_paths, horizon, n)) @ chol.T
    fe = np.zeros((n_paths, n))
    for h in range(horizon):
        fe += eps[:, horizon - 1 - h, :] @ phis[h].T
    denominator = fe.var(axis=0)
    flat = eps.reshape(-1, n)
    sigma_jj = flat.var(axis=0)
    numerator = np.zeros((n, n))
    for h in range(horizon):
        responses = flat @ phis[h].T
        cross = responses.T @ flat / len(flat)  # ~ Phi_h @ Sigma
        numerator += cross**2 / sigma_jj[None, :]
    theta = numerator / denominator[:, None]
    return theta / theta.sum(axis=1, keepdims=True)
