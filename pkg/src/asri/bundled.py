"""Deterministic bundled dataset: a five-year reconstruction of daily
stablecoin, DeFi, and macro series spanning four crisis episodes.

Every series is generated from fixed calibration knots plus seeded noise, so
regeneration is byte-identical. Crisis dynamics are injected as smooth ramps
that build through the month before each onset and decay afterward; the 2022
Terra episode is deliberately concentrated in the stablecoin block so
cross-market spillover stays low there, while the later episodes co-move
across all four risk blocks.
"""

from __future__ import annotations

import json
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .backtest import ProtocolMeta, StablecoinMeta, Universe, write_universe
from .event_study import CrisisEvent, EventType, write_event_catalog
from .market_data import (
    Filled,
    Frequency,
    Observation,
    PublicationLag,
    SeriesDescriptor,
    SnapshotStore,
    Source,
    TimeSeries,
)
from .subindices import Mechanism

START = date(2021, 1, 1)
END = date(2026, 1, 15)
N_DAYS = (END - START).days + 1  # 1841

EVENTS = (
    CrisisEvent("terra_luna", date(2022, 5, 12), EventType.ENDOGENOUS),
    CrisisEvent("celsius", date(2022, 6, 17), EventType.ENDOGENOUS),
    CrisisEvent("ftx", date(2022, 11, 11), EventType.ENDOGENOUS),
    CrisisEvent("svb", date(2023, 3, 11), EventType.EXOGENOUS),
)

# Per-event severity multiplier applied to every injected crisis ramp.
EVENT_MULT = {"terra_luna": 1.00, "celsius": 1.08, "ftx": 2.05, "svb": 1.45}

# Per-event total log drop in aggregate DeFi TVL, spread over the drop window.
DEFI_DROP = {"terra_luna": 0.42, "celsius": 0.28, "ftx": 0.56, "svb": 0.30}

# The Terra episode is stablecoin-concentrated: its ramp hits the drawdown
# channel hard while the macro and sentiment channels stay on their slow
# baseline paths, and its TVL drop lands after the onset. The later episodes
# ramp across every channel.
_OTHERS = ("celsius", "ftx", "svb")
AMP_DD = {"terra_luna": 0.50, "celsius": 0.26, "ftx": 0.30, "svb": 0.30}
AMP_TREASURY = {e: 0.25 for e in _OTHERS}
AMP_VIX = {e: 16.0 for e in _OTHERS}
AMP_SPREAD = {e: 0.22 for e in _OTHERS}
AMP_CORR = {e: 0.38 for e in _OTHERS}
AMP_SENT = {e: 42.0 for e in _OTHERS}
AMP_JITTER = {"terra_luna": 0.5, **{e: 1.0 for e in _OTHERS}}
DROP_WINDOW = {"terra_luna": (0, 12), **{e: (-25, 6) for e in _OTHERS}}

STABLECOINS = (
    StablecoinMeta("usdt", Mechanism.FIAT),
    StablecoinMeta("usdc", Mechanism.FIAT),
    StablecoinMeta("busd", Mechanism.FIAT),
    StablecoinMeta("dai", Mechanism.CRYPTO_BACKED, "eth"),
    StablecoinMeta("ust", Mechanism.ALGORITHMIC, "luna"),
    StablecoinMeta("frax", Mechanism.ALGORITHMIC, "frax_pool"),
    StablecoinMeta("tusd", Mechanism.FIAT),
    StablecoinMeta("usdp", Mechanism.FIAT),
    StablecoinMeta("lusd", Mechanism.CRYPTO_BACKED, "eth"),
)

PROTOCOLS = (
    ProtocolMeta("dex_prime", "dex", 3),
    ProtocolMeta("lend_alpha", "lending", 3),
    ProtocolMeta("stake_core", "staking", 2),
    ProtocolMeta("dex_swap", "dex", 0),
    ProtocolMeta("bridge_nexus", "bridge", 1),
    ProtocolMeta("yield_harbor", "yield", 0),
    ProtocolMeta("deriv_edge", "derivatives", 2),
    ProtocolMeta("lend_beta", "lending", 2),
    ProtocolMeta("stake_lite", "staking", 0),
    ProtocolMeta("cdp_vault", "cdp", 2),
    ProtocolMeta("lend_micro", "lending", 0),
    ProtocolMeta("yield_sprout", "yield", 0),
    ProtocolMeta("dex_niche", "dex", 0),
    ProtocolMeta("rwa_gate", "rwa", 1),
    ProtocolMeta("options_omega", "options", 0),
)

PROTOCOL_BASE = {
    "dex_prime": 62.0,
    "lend_alpha": 32.0,
    "stake_core": 38.0,
    "dex_swap": 30.0,
    "bridge_nexus": 22.0,
    "yield_harbor": 18.0,
    "deriv_edge": 15.0,
    "lend_beta": 14.0,
    "stake_lite": 12.0,
    "cdp_vault": 10.0,
    "lend_micro": 4.0,
    "yield_sprout": 6.0,
    "dex_niche": 5.0,
    "rwa_gate": 4.0,
    "options_omega": 3.0,
}

UNIVERSE = Universe(STABLECOINS, PROTOCOLS)


def _d(iso: str) -> int:
    return (date.fromisoformat(iso) - START).days


def _knots(points: list[tuple[str, float]]) -> np.ndarray:
    """Piecewise-linear daily path through dated knots, flat at the ends."""
    xs = [_d(iso) for iso, _ in points]
    ys = [v for _, v in points]
    return np.interp(np.arange(N_DAYS), xs, ys)


def _ar1(rng: np.random.Generator, phi: float, sd: float) -> np.ndarray:
    eps = rng.normal(0.0, sd * np.sqrt(max(1e-12, 1 - phi * phi)), N_DAYS)
    out = np.empty(N_DAYS)
    acc = 0.0
    for i in range(N_DAYS):
        acc = phi * acc + eps[i]
        out[i] = acc
    return out


def _bump(onset: date) -> np.ndarray:
    """Unit crisis shape: ramp over the 30 pre-onset days, peak 2 days after
    onset, exponential decay afterward."""
    x = np.arange(N_DAYS, dtype=float) - (onset - START).days
    out = np.zeros(N_DAYS)
    ramp = (x >= -30) & (x <= 2)
    out[ramp] = ((x[ramp] + 30.0) / 32.0) ** 1.2
    tail = x > 2
    out[tail] = np.exp(-(x[tail] - 2.0) / 9.0)
    out[x > 60] = 0.0
    return out


def _event_sum(scale: dict[str, float] | float) -> np.ndarray:
    """Sum of per-event bumps, each scaled by its severity multiplier."""
    total = np.zeros(N_DAYS)
    for event in EVENTS:
        mult = EVENT_MULT[event.name]
        amp = scale if isinstance(scale, float) else scale.get(event.name, 0.0)
        total += mult * amp * _bump(event.onset_date)
    return total


def _drop_drift(name: str, onset: date) -> np.ndarray:
    """Daily log-return drag spread over the event's drop window."""
    lo, hi = DROP_WINDOW[name]
    x = np.arange(N_DAYS, dtype=float) - (onset - START).days
    window = (x >= lo) & (x <= hi)
    out = np.zeros(N_DAYS)
    out[window] = -DEFI_DROP[name] / window.sum()
    return out


def _common_loading() -> np.ndarray:
    """Daily loading on the shared stress shock.

    Calm periods carry a small loading, the mid-2022 to early-2023 contagion
    era a moderate one, and the 40 days around each non-Terra onset a large
    one. The Terra window is pinned low so that episode stays idiosyncratic.
    """
    lam = np.full(N_DAYS, 1.10)
    era = slice(_d("2022-05-01"), _d("2023-04-15") + 1)
    lam[era] = 1.70
    for event in EVENTS:
        if event.name == "terra_luna":
            continue
        onset = (event.onset_date - START).days
        lam[max(0, onset - 28):min(N_DAYS, onset + 18)] = 2.9
    # applied last so the overlapping celsius window cannot lift it
    terra = (EVENTS[0].onset_date - START).days
    lam[max(0, terra - 28):min(N_DAYS, terra + 12)] = 0.22
    return lam


_WEEKDAYS = np.array(
    [(START + timedelta(days=i)).weekday() < 5 for i in range(N_DAYS)]
)


def _series(
    series_id: str,
    values: np.ndarray,
    source: Source,
    lag: PublicationLag,
    weekdays_only: bool = False,
    frequency: Frequency = Frequency.DAILY,
) -> TimeSeries:
    descriptor = SeriesDescriptor(series_id, source, frequency, lag)
    points = []
    for i in range(N_DAYS):
        if weekdays_only and not _WEEKDAYS[i]:
            continue
        points.append(
            Observation(START + timedelta(days=i), float(values[i]), 1.0, Filled.RAW)
        )
    return TimeSeries(descriptor, tuple(points))


def generate_series(seed: int = 42) -> dict[str, TimeSeries]:
    """All bundled series, keyed by id. Deterministic in the seed."""
    rng = np.random.default_rng(seed)
    lam = _common_loading()
    # shared stress shock, nonnegative and demeaned so it adds co-movement
    # without drift; |N(0,1)| has mean sqrt(2/pi)
    shock = np.abs(rng.normal(0.0, 1.0, N_DAYS)) - np.sqrt(2.0 / np.pi)
    common = lam * shock

    out: dict[str, TimeSeries] = {}
    lag_tvl = PublicationLag(hours=6)
    lag_cap = PublicationLag(hours=12)
    lag_price = PublicationLag(hours=1)
    lag_news = PublicationLag(hours=2)
    lag_treasury = PublicationLag(business_days=2)
    lag_vix = PublicationLag(hours=24)

    # --- stablecoin aggregate and drawdown path ---------------------------
    growth = _knots(
        [
            ("2021-01-01", 120.0),
            ("2021-05-01", 158.0),
            ("2021-09-01", 170.0),
            ("2022-01-01", 182.0),
            ("2022-03-15", 190.0),
        ]
    )
    dd_base = _knots(
        [
            ("2022-03-15", 0.004),
            ("2022-04-20", 0.055),
            ("2022-05-08", 0.070),
            ("2022-07-01", 0.130),
            ("2022-10-01", 0.135),
            ("2022-12-15", 0.175),
            ("2023-04-01", 0.205),
            ("2023-06-10", 0.190),
            ("2023-09-01", 0.180),
            ("2023-12-01", 0.186),
            ("2024-03-01", 0.172),
            ("2024-06-15", 0.178),
            ("2024-10-01", 0.160),
            ("2025-01-15", 0.166),
            ("2025-05-01", 0.150),
            ("2025-09-01", 0.156),
            ("2026-01-15", 0.148),
        ]
    )
    dd_noise = _ar1(rng, 0.92, 0.003) + _ar1(rng, 0.30, 0.009)
    dd = dd_base + _event_sum(AMP_DD) + dd_noise + 0.010 * common
    dd = np.clip(dd, 0.002, 0.49)
    peak_day = _d("2022-03-15")
    total = growth * (1.0 + _ar1(rng, 0.5, 0.004))
    total[peak_day:] = 190.0 * (1.0 - dd[peak_day:])
    total *= 1e9
    out["stablecoin_total_tvl"] = _series(
        "stablecoin_total_tvl", total, Source.DEFILLAMA_STABLECOINS, lag_cap
    )

    # --- per-coin supply shares -------------------------------------------
    share_knots = {
        "usdt": [
            ("2021-01-01", 0.52), ("2021-07-01", 0.48), ("2022-05-01", 0.46),
            ("2022-12-01", 0.48), ("2023-06-01", 0.52), ("2024-06-01", 0.545),
            ("2025-06-01", 0.565), ("2026-01-15", 0.575),
        ],
        "usdc": [
            ("2021-01-01", 0.21), ("2021-07-01", 0.26), ("2022-05-01", 0.30),
            ("2022-12-01", 0.30), ("2023-03-10", 0.28), ("2023-09-01", 0.24),
            ("2024-06-01", 0.22), ("2026-01-15", 0.22),
        ],
        "busd": [
            ("2021-01-01", 0.060), ("2021-12-01", 0.100), ("2022-11-01", 0.110),
            ("2023-02-13", 0.090), ("2023-12-01", 0.020), ("2024-06-01", 0.004),
            ("2026-01-15", 0.002),
        ],
        "dai": [
            ("2021-01-01", 0.055), ("2022-05-01", 0.050), ("2023-06-01", 0.045),
            ("2026-01-15", 0.050),
        ],
        "ust": [
            ("2021-01-01", 0.002), ("2021-10-01", 0.020), ("2022-01-01", 0.050),
            ("2022-05-08", 0.075), ("2022-05-16", 0.020), ("2022-06-15", 0.004),
            ("2022-08-01", 0.001), ("2026-01-15", 0.0005),
        ],
        "frax": [
            ("2021-01-01", 0.004), ("2022-01-01", 0.012), ("2022-05-01", 0.018),
            ("2023-01-01", 0.012), ("2026-01-15", 0.008),
        ],
        "tusd": [
            ("2021-01-01", 0.010), ("2023-06-01", 0.025), ("2026-01-15", 0.015),
        ],
        "usdp": [
            ("2021-01-01", 0.008), ("2023-01-01", 0.006), ("2026-01-15", 0.003),
        ],
        "lusd": [
            ("2021-01-01", 0.002), ("2022-06-01", 0.005), ("2026-01-15", 0.003),
        ],
    }
    shares = {}
    for meta in STABLECOINS:
        base = _knots(share_knots[meta.id])
        wiggle = _ar1(rng, 0.97, 0.004)
        shares[meta.id] = np.clip(base * (1.0 + wiggle), 1e-5, None)
    norm = sum(shares.values())
    for meta in STABLECOINS:
        supply = shares[meta.id] / norm * total
        out[f"stable_supply_{meta.id}"] = _series(
            f"stable_supply_{meta.id}", supply, Source.DEFILLAMA_STABLECOINS, lag_cap
        )

    # --- prices with scripted depegs --------------------------------------
    depegs = {
        "ust": [
            ("2022-05-06", 1.0), ("2022-05-08", 0.996), ("2022-05-10", 0.985),
            ("2022-05-11", 0.97), ("2022-05-12", 0.70),
            ("2022-05-13", 0.30), ("2022-05-16", 0.10), ("2022-05-20", 0.05),
            ("2022-06-01", 0.02), ("2026-01-15", 0.02),
        ],
        "usdc": [
            ("2023-03-10", 1.0), ("2023-03-11", 0.905), ("2023-03-12", 0.880),
            ("2023-03-13", 0.940), ("2023-03-14", 0.985), ("2023-03-15", 0.998),
            ("2023-03-16", 1.0),
        ],
        "dai": [
            ("2023-03-10", 1.0), ("2023-03-11", 0.950), ("2023-03-13", 0.960),
            ("2023-03-15", 0.995), ("2023-03-16", 1.0),
        ],
        "usdt": [
            ("2022-05-11", 1.0), ("2022-05-12", 0.9965), ("2022-05-15", 0.999),
            ("2022-11-09", 1.0), ("2022-11-10", 0.9970), ("2022-11-13", 0.999),
            ("2022-11-16", 1.0),
        ],
    }
    for meta in STABLECOINS:
        noise = np.clip(_ar1(rng, 0.5, 0.0006), -0.004, 0.004)
        price = 1.0 + noise
        if meta.id in depegs:
            scripted = _knots(depegs[meta.id])
            price = np.minimum(price, np.where(scripted < 1.0, scripted, price))
        out[f"stable_price_{meta.id}"] = _series(
            f"stable_price_{meta.id}", price, Source.COINGECKO, lag_price
        )

    # --- aggregate DeFi TVL -----------------------------------------------
    level_knots = _knots(
        [
            ("2021-01-01", np.log(40.0)),
            ("2021-03-15", np.log(55.0)),
            ("2021-06-01", np.log(68.0)),
            ("2021-08-15", np.log(78.0)),
            ("2021-11-01", np.log(88.0)),
            ("2022-04-01", np.log(86.0)),
            ("2022-09-25", np.log(80.0)),
            ("2023-06-01", np.log(72.0)),
            ("2024-06-01", np.log(100.0)),
            ("2025-12-01", np.log(122.0)),
            ("2026-01-15", np.log(123.0)),
        ]
    )
    drift = np.diff(level_knots, prepend=level_knots[0])
    for event in EVENTS:
        drift += _drop_drift(event.name, event.onset_date)
    # MA(1) with a negative lag keeps daily movement for the flash-loan
    # channel while damping the slow level wander the trailing-CV stat sees
    eps = rng.normal(0.0, 0.008, N_DAYS)
    ma = eps.copy()
    ma[1:] -= 0.45 * eps[:-1]
    defi_ret = drift + ma - 0.006 * common
    defi_log = np.log(25.0) + np.cumsum(defi_ret) - defi_ret[0]
    defi_total = np.exp(defi_log) * 1e9
    out["defi_total_tvl"] = _series(
        "defi_total_tvl", defi_total, Source.DEFILLAMA_TVL, lag_tvl
    )

    # --- per-protocol TVL -------------------------------------------------
    macro = defi_total / defi_total[0]
    crisis_jitter = _event_sum(AMP_JITTER)  # unitless 0..~1.8 during episodes
    rwa_growth = _knots(
        [
            ("2021-01-01", 1.0), ("2023-06-01", 1.5), ("2024-06-01", 2.2),
            ("2025-12-01", 2.8), ("2026-01-15", 2.82),
        ]
    )
    lending_tilt = 1.0 + 0.25 * _event_sum(1.0)
    for meta in PROTOCOLS:
        # slow mean-reverting share wander plus crisis-amplified daily shocks;
        # the rwa vault is deposit-driven and sticky, so its share barely moves
        wander_sd = 0.025 if meta.category == "rwa" else 0.07
        level = _ar1(rng, 0.99, wander_sd)
        panic = rng.normal(0.0, 1.0, N_DAYS) * 0.045 * np.clip(crisis_jitter, 0.0, 1.5)
        tvl = PROTOCOL_BASE[meta.id] * 1e8 * macro * np.exp(
            level + panic - 0.008 * common
        )
        if meta.category == "rwa":
            tvl = tvl * rwa_growth
        if meta.category == "lending":
            tvl = tvl * lending_tilt
        out[f"protocol_tvl_{meta.id}"] = _series(
            f"protocol_tvl_{meta.id}", tvl, Source.DEFILLAMA_PROTOCOLS, lag_tvl
        )

    # --- macro block -------------------------------------------------------
    treasury = _knots(
        [
            ("2021-01-01", 1.30), ("2021-03-15", 1.38), ("2021-05-15", 1.33),
            ("2021-07-15", 1.40), ("2021-09-15", 1.35), ("2021-11-15", 1.43),
            ("2022-02-10", 1.52), ("2022-05-09", 3.10), ("2022-06-15", 3.40),
            ("2022-08-01", 2.95), ("2022-11-01", 4.10), ("2023-03-01", 3.95),
            ("2023-06-10", 3.85), ("2023-10-25", 3.97), ("2024-02-15", 3.89),
            ("2024-06-15", 3.96), ("2024-10-15", 3.88), ("2025-03-01", 3.95),
            ("2025-08-01", 3.88), ("2026-01-15", 3.92),
        ]
    )
    treasury = (
        treasury + _ar1(rng, 0.9, 0.018) + _ar1(rng, 0.30, 0.075)
        + _event_sum(AMP_TREASURY) + 0.05 * common
    )
    out["treasury_10y"] = _series(
        "treasury_10y", np.clip(treasury, 0.1, None), Source.FRED, lag_treasury, True
    )

    vix = _knots(
        [
            ("2021-01-01", 21.0), ("2021-04-01", 19.0), ("2021-07-01", 17.5),
            ("2021-10-01", 18.5), ("2021-12-01", 19.5), ("2022-02-10", 22.0),
            ("2022-03-07", 29.0), ("2022-04-20", 24.0), ("2022-05-09", 33.0),
            ("2022-05-25", 26.0), ("2022-07-01", 26.0),
            ("2022-10-01", 30.0), ("2023-01-15", 21.0), ("2023-06-10", 16.0),
            ("2023-09-01", 15.0), ("2023-12-01", 13.5), ("2024-03-01", 14.5),
            ("2024-07-20", 13.5), ("2024-08-05", 17.5), ("2024-09-01", 15.5),
            ("2024-12-01", 14.0), ("2025-03-01", 15.5), ("2025-07-01", 14.0),
            ("2025-11-01", 15.0), ("2026-01-15", 15.5),
        ]
    )
    vix = (
        vix + _ar1(rng, 0.85, 0.8) + _ar1(rng, 0.35, 2.6)
        + _event_sum(AMP_VIX) + 3.0 * common
    )
    out["vix"] = _series("vix", np.clip(vix, 10.0, 80.0), Source.FRED, lag_vix, True)

    spread = _knots(
        [
            ("2021-01-01", 1.00), ("2021-03-15", 1.06), ("2021-05-15", 1.01),
            ("2021-07-15", 1.07), ("2021-09-15", 1.02), ("2021-11-15", 0.97),
            ("2022-02-10", 0.90), ("2022-04-01", 0.25), ("2022-05-10", -0.05),
            ("2022-07-10", -0.20), ("2022-09-25", -0.40),
            ("2022-12-07", -0.60), ("2023-03-08", -0.95), ("2023-06-10", -0.78),
            ("2023-08-15", -0.82), ("2023-10-15", -0.75), ("2023-12-15", -0.79),
            ("2024-02-15", -0.72), ("2024-04-15", -0.76), ("2024-06-15", -0.69),
            ("2024-08-15", -0.73), ("2024-10-15", -0.66), ("2024-12-15", -0.70),
            ("2025-02-15", -0.63), ("2025-04-15", -0.67), ("2025-06-15", -0.60),
            ("2025-08-15", -0.64), ("2025-10-15", -0.57), ("2026-01-15", -0.60),
        ]
    )
    spread = (
        spread + _ar1(rng, 0.9, 0.012) + _ar1(rng, 0.35, 0.04)
        - _event_sum(AMP_SPREAD) - 0.03 * common
    )
    out["spread_10y_2y"] = _series(
        "spread_10y_2y", spread, Source.FRED, lag_treasury, True
    )

    corr = _knots(
        [
            ("2021-01-01", 0.27), ("2021-04-01", 0.30), ("2021-07-01", 0.28),
            ("2021-10-01", 0.315), ("2021-12-01", 0.335), ("2022-02-10", 0.38),
            ("2022-03-01", 0.50), ("2022-05-10", 0.66), ("2022-09-01", 0.58),
            ("2023-01-15", 0.45), ("2023-06-10", 0.36), ("2023-09-15", 0.33),
            ("2023-12-15", 0.35), ("2024-04-01", 0.32), ("2024-08-01", 0.34),
            ("2024-12-01", 0.315), ("2025-04-01", 0.335), ("2025-09-01", 0.315),
            ("2026-01-15", 0.325),
        ]
    )
    corr = (
        corr + _ar1(rng, 0.9, 0.012) + _ar1(rng, 0.35, 0.035)
        + _event_sum(AMP_CORR) + 0.045 * common
    )
    out["btc_spy_corr_30d"] = _series(
        "btc_spy_corr_30d", np.clip(corr, -1.0, 1.0), Source.COINGECKO, lag_price
    )

    bridges = np.floor(
        _knots(
            [
                ("2021-01-01", 55.0), ("2022-06-01", 95.0), ("2023-01-01", 105.0),
                ("2023-12-01", 118.0), ("2024-12-01", 128.0), ("2026-01-15", 135.0),
            ]
        )
    )
    out["bridge_count"] = _series(
        "bridge_count", bridges, Source.DEFILLAMA_BRIDGES, lag_tvl
    )

    sentiment_base = _knots(
        [
            ("2021-01-01", 43.0), ("2021-05-01", 45.0), ("2021-09-01", 43.5),
            ("2022-01-01", 46.0), ("2022-04-01", 52.0), ("2022-05-10", 70.0),
            ("2022-07-01", 58.0), ("2022-10-15", 60.0), ("2023-01-15", 52.0),
            ("2023-06-10", 46.5), ("2023-10-01", 44.0), ("2024-02-01", 46.0),
            ("2024-07-01", 43.0), ("2024-12-01", 45.0), ("2025-06-01", 43.5),
            ("2026-01-15", 44.5),
        ]
    )
    sentiment = (
        sentiment_base + _ar1(rng, 0.88, 1.5) + _ar1(rng, 0.35, 3.2)
        + _event_sum(AMP_SENT) + 4.0 * common
    )
    out["sentiment"] = _series(
        "sentiment", np.clip(sentiment, 0.0, 100.0), Source.MANUAL, lag_news
    )

    # --- backing-token metrics for the algorithmic adjustment -------------
    luna_vol = _knots(
        [
            ("2021-01-01", 70.0), ("2022-04-01", 95.0), ("2022-05-08", 180.0),
            ("2022-05-12", 400.0), ("2022-06-15", 150.0), ("2026-01-15", 120.0),
        ]
    ) + _ar1(rng, 0.8, 4.0)
    luna_growth = _knots(
        [
            ("2021-01-01", 5.0), ("2022-05-08", 20.0), ("2022-05-12", 90.0),
            ("2022-05-20", 300.0), ("2022-07-01", 40.0), ("2026-01-15", 10.0),
        ]
    )
    luna_ratio = _knots(
        [
            ("2021-01-01", 1.10), ("2022-05-05", 0.95), ("2022-05-10", 0.60),
            ("2022-05-13", 0.25), ("2022-06-01", 0.10), ("2026-01-15", 0.10),
        ]
    )
    eth_vol = _knots(
        [
            ("2021-01-01", 80.0), ("2021-08-01", 95.0), ("2022-06-18", 110.0),
            ("2023-06-01", 60.0), ("2025-01-01", 55.0), ("2026-01-15", 58.0),
        ]
    ) + _ar1(rng, 0.8, 3.0) + _event_sum(18.0)
    frax_vol = 40.0 + _ar1(rng, 0.8, 2.0) + _event_sum(10.0)
    for token, vol, growth, ratio in (
        ("luna", luna_vol, luna_growth, luna_ratio),
        ("eth", eth_vol, np.full(N_DAYS, 2.0), np.full(N_DAYS, 1.55)),
        ("frax_pool", frax_vol, np.full(N_DAYS, 8.0), _knots(
            [("2021-01-01", 0.92), ("2023-01-01", 1.00), ("2026-01-15", 1.00)]
        )),
    ):
        out[f"backing_vol_{token}"] = _series(
            f"backing_vol_{token}", np.clip(vol, 5.0, None), Source.COINGECKO, lag_price
        )
        out[f"backing_growth_{token}"] = _series(
            f"backing_growth_{token}", np.clip(growth, 0.0, None), Source.COINGECKO, lag_price
        )
        out[f"backing_ratio_{token}"] = _series(
            f"backing_ratio_{token}", np.clip(ratio, 0.01, None), Source.COINGECKO, lag_price
        )
    return out


def write_bundled(root: Path, seed: int = 42) -> SnapshotStore:
    """Materialize the bundled snapshot store, universe, events, and manifest."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    store = SnapshotStore(root)
    series = generate_series(seed)
    for series_id in sorted(series):
        store.write(series[series_id])
    write_universe(UNIVERSE, root)
    write_event_catalog(list(EVENTS), root / "events.csv")
    manifest = {
        "series": {
            series_id: {
                "source": ts.descriptor.source.value,
                "native_frequency": ts.descriptor.native_frequency.value,
                "publication_lag": {
                    "hours": ts.descriptor.publication_lag.hours,
                    "business_days": ts.descriptor.publication_lag.business_days,
                },
                "location": f"series/{series_id}.csv",
            }
            for series_id, ts in sorted(series.items())
        }
    }
    (root / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    return store
