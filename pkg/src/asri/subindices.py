"""The four risk sub-indices on [0,100]: stablecoin (SCR), DeFi liquidity
(DLR), contagion (CR), and opacity (OR), each an additive weighted blend of
named components computed from one day's market snapshot.

Component maps are piecewise-linear with fixed calibration anchors; every
mapped score is clipped to [0,100] so the composite stays bounded regardless
of input extremes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from enum import Enum

from .errors import DataError, UsageError

SIGNIFICANT_SUPPLY_USD = 1_000_000_000.0  # "significant" stablecoin cutoff

SCR_WEIGHTS = {"tvl_drawdown": 0.40, "treasury": 0.30, "hhi": 0.20, "peg_vol": 0.10}
ALGO_WEIGHTS = {
    "backing_ratio": 0.35,
    "collateral_vol": 0.30,
    "dilution": 0.20,
    "algo_concentration": 0.15,
}
DLR_WEIGHTS = {
    "concentration": 0.35,
    "tvl_volatility": 0.25,
    "contract_risk": 0.20,
    "flash_loan": 0.10,
    "leverage": 0.10,
}
CR_WEIGHTS = {
    "rwa": 0.30,
    "banking_stress": 0.25,
    "linkage": 0.20,
    "correlation": 0.15,
    "bridges": 0.10,
}
OR_WEIGHTS = {
    "unregulated": 0.25,
    "multi_issuer": 0.25,
    "custodial": 0.20,
    "sentiment": 0.15,
    "opacity": 0.15,
}


class Mechanism(str, Enum):
    FIAT = "fiat"
    ALGORITHMIC = "algorithmic"
    CRYPTO_BACKED = "crypto_backed"


@dataclass(frozen=True)
class Stablecoin:
    id: str
    circulating_supply: float
    price: float | None = None
    mechanism: Mechanism = Mechanism.FIAT
    backing_token: str | None = None

    def __post_init__(self) -> None:
        if self.circulating_supply < 0:
            raise DataError(f"stablecoin {self.id}: negative supply")
        if self.price is not None and self.price <= 0:
            raise DataError(f"stablecoin {self.id}: non-positive price")


@dataclass(frozen=True)
class Protocol:
    id: str
    tvl: float
    category: str = ""
    audit_count: int = 0
    change_1d: float = 0.0  # percent

    def __post_init__(self) -> None:
        if self.tvl < 0:
            raise DataError(f"protocol {self.id}: negative TVL")


@dataclass(frozen=True)
class BackingTokenMetrics:
    volatility_30d_pct: float | None = None  # annualized, percent
    supply_growth_30d_pct: float | None = None
    backing_ratio: float | None = None


@dataclass(frozen=True)
class MarketSnapshot:
    """Raw inputs for scoring one date."""

    date: date
    stablecoins: tuple[Stablecoin, ...] = ()
    stablecoin_tvl_current: float | None = None
    stablecoin_tvl_historical_max: float | None = None
    protocols: tuple[Protocol, ...] = ()
    bridge_count: int = 0
    treasury_10y: float | None = None  # percent
    vix: float | None = None
    spread_10y_2y: float | None = None  # percent
    btc_spy_corr_30d: float | None = None  # None means unavailable; scored as 0.5
    backing_token_metrics: dict[str, BackingTokenMetrics] = field(default_factory=dict)
    sent_input: float = 50.0
    unreg_fixed: float = 35.0
    defi_tvl_history: tuple[float, ...] = ()  # trailing daily totals, oldest first

    def __post_init__(self) -> None:
        if self.stablecoin_tvl_current is not None and self.stablecoin_tvl_current < 0:
            raise DataError("negative stablecoin TVL")
        if (
            self.stablecoin_tvl_current is not None
            and self.stablecoin_tvl_historical_max is not None
            and self.stablecoin_tvl_current > self.stablecoin_tvl_historical_max * (1 + 1e-12)
        ):
            raise DataError("stablecoin TVL above its historical maximum")
        if self.btc_spy_corr_30d is not None and abs(self.btc_spy_corr_30d) > 1:
            raise DataError("correlation outside [-1, 1]")
        if self.bridge_count < 0:
            raise DataError("negative bridge count")


@dataclass(frozen=True)
class ComponentScore:
    raw_input: float | None
    mapped_score: float
    weight: float


@dataclass(frozen=True)
class SubIndexValue:
    score: float
    components: dict[str, ComponentScore]
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "score": self.score,
            "components": {
                name: {
                    "raw_input": c.raw_input,
                    "mapped_score": c.mapped_score,
                    "weight": c.weight,
                }
                for name, c in sorted(self.components.items())
            },
            "flags": sorted(self.flags),
        }


def normalize(x: float, lo: float, hi: float) -> float:
    """Min-max scale ``x`` into [0,1], clipping outside [lo, hi]."""
    if hi <= lo:
        raise UsageError(f"normalize bounds must satisfy hi > lo, got [{lo}, {hi}]")
    return min(1.0, max(0.0, (x - lo) / (hi - lo)))


def hhi_risk(hhi_raw: float) -> float:
    """Piecewise-linear concentration risk from a raw HHI on [0, 10000].

    Breakpoints follow the standard antitrust bands: 1500 -> 30, 2500 -> 60,
    5000 -> 90, 10000 -> 100.
    """
    if not 0.0 <= hhi_raw <= 10000.0:
        raise UsageError(f"HHI {hhi_raw} outside [0, 10000]")
    if hhi_raw < 1500.0:
        return hhi_raw / 1500.0 * 30.0
    if hhi_raw < 2500.0:
        return 30.0 + (hhi_raw - 1500.0) / 1000.0 * 30.0
    if hhi_raw < 5000.0:
        return 60.0 + (hhi_raw - 2500.0) / 2500.0 * 30.0
    return 90.0 + (hhi_raw - 5000.0) / 5000.0 * 10.0


def _clip_score(x: float) -> float:
    return min(100.0, max(0.0, x))


def _finish(components: dict[str, ComponentScore], flags: list[str]) -> SubIndexValue:
    score = sum(c.weight * c.mapped_score for c in components.values())
    return SubIndexValue(score, components, tuple(sorted(flags)))


def _supply_hhi_raw(stablecoins: tuple[Stablecoin, ...]) -> float:
    total = sum(s.circulating_supply for s in stablecoins)
    if total <= 0:
        raise DataError("stablecoin supplies missing or all zero")
    hhi = sum((s.circulating_supply / total) ** 2 for s in stablecoins) * 10000.0
    return min(hhi, 10000.0)  # guard float overshoot at single-issuer limit


def compute_scr(snap: MarketSnapshot) -> SubIndexValue:
    """Stablecoin risk: TVL drawdown, rate environment, issuer concentration,
    and supply-weighted peg deviation, blended 0.4/0.3/0.2/0.1."""
    if not snap.stablecoins:
        raise DataError("SCR requires stablecoin supplies")
    if snap.stablecoin_tvl_current is None or snap.stablecoin_tvl_historical_max is None:
        raise DataError("SCR requires current and historical-max stablecoin TVL")
    if snap.stablecoin_tvl_historical_max <= 0:
        raise DataError("historical-max stablecoin TVL must be positive")
    if snap.treasury_10y is None:
        raise DataError("SCR requires the 10-year treasury rate")
    flags: list[str] = []

    drawdown = 1.0 - snap.stablecoin_tvl_current / snap.stablecoin_tvl_historical_max
    tvl_score = _clip_score(normalize(drawdown, 0.0, 0.5) * 100.0)

    treasury_score = _clip_score(normalize(snap.treasury_10y, 2.0, 6.0) * 100.0)

    hhi_raw = _supply_hhi_raw(snap.stablecoins)
    hhi_score = _clip_score(hhi_risk(hhi_raw))

    priced = [s for s in snap.stablecoins if s.price is not None]
    if priced:
        weight_total = sum(s.circulating_supply for s in priced)
        if weight_total > 0:
            wad = sum(abs(s.price - 1.0) * s.circulating_supply for s in priced) / weight_total
        else:
            wad = sum(abs(s.price - 1.0) for s in priced) / len(priced)
        # calibration: a 5% supply-weighted deviation saturates the component
        peg_score = _clip_score(normalize(wad, 0.0, 0.05) * 100.0)
        peg_raw: float | None = wad
    else:
        peg_score = 50.0
        peg_raw = None
        flags.append("peg_vol_default")

    components = {
        "tvl_drawdown": ComponentScore(drawdown, tvl_score, SCR_WEIGHTS["tvl_drawdown"]),
        "treasury": ComponentScore(snap.treasury_10y, treasury_score, SCR_WEIGHTS["treasury"]),
        "hhi": ComponentScore(hhi_raw, hhi_score, SCR_WEIGHTS["hhi"]),
        "peg_vol": ComponentScore(peg_raw, peg_score, SCR_WEIGHTS["peg_vol"]),
    }
    return _finish(components, flags)


def _backing_ratio_score(ratio: float | None) -> float:
    if ratio is None:
        return 50.0  # no disclosure: moderate risk
    # anchors: ratio 1.5 -> 10 (well-collateralized), 0.8 -> 90 (critical)
    return _clip_score(10.0 + (1.5 - ratio) * (80.0 / 0.7))


def compute_algo_risk(snap: MarketSnapshot) -> SubIndexValue:
    """Algorithmic/crypto-backed stablecoin stress on [0,100].

    Supply-weighted across the qualifying universe; an empty universe scores 0
    and is flagged rather than raised, so the blend degrades gracefully.
    """
    universe = [
        s
        for s in snap.stablecoins
        if s.mechanism in (Mechanism.ALGORITHMIC, Mechanism.CRYPTO_BACKED)
    ]
    if not universe:
        zero = {name: ComponentScore(None, 0.0, w) for name, w in ALGO_WEIGHTS.items()}
        return SubIndexValue(0.0, zero, ("empty_universe",))

    total_supply = sum(s.circulating_supply for s in snap.stablecoins)
    algo_supply = sum(s.circulating_supply for s in universe)
    if algo_supply > 0:
        weights = [s.circulating_supply / algo_supply for s in universe]
    else:
        weights = [1.0 / len(universe)] * len(universe)

    ratio_scores, vol_scores, growth_scores = [], [], []
    for coin in universe:
        metrics = snap.backing_token_metrics.get(coin.backing_token or coin.id)
        ratio = metrics.backing_ratio if metrics else None
        vol = metrics.volatility_30d_pct if metrics else None
        growth = metrics.supply_growth_30d_pct if metrics else None
        ratio_scores.append(_backing_ratio_score(ratio))
        vol_scores.append(_clip_score(normalize(vol if vol is not None else 0.0, 40.0, 120.0) * 100.0))
        growth_scores.append(
            _clip_score(normalize(growth if growth is not None else 0.0, 0.0, 50.0) * 100.0)
        )

    backing = sum(w * s for w, s in zip(weights, ratio_scores))
    collateral = sum(w * s for w, s in zip(weights, vol_scores))
    dilution = sum(w * s for w, s in zip(weights, growth_scores))
    share_pct = (algo_supply / total_supply * 100.0) if total_supply > 0 else 0.0
    conc = _clip_score(normalize(share_pct, 0.0, 10.0) * 100.0)

    components = {
        "backing_ratio": ComponentScore(None, backing, ALGO_WEIGHTS["backing_ratio"]),
        "collateral_vol": ComponentScore(None, collateral, ALGO_WEIGHTS["collateral_vol"]),
        "dilution": ComponentScore(None, dilution, ALGO_WEIGHTS["dilution"]),
        "algo_concentration": ComponentScore(share_pct, conc, ALGO_WEIGHTS["algo_concentration"]),
    }
    return _finish(components, [])


def blend_scr_adjusted(scr_base: float, algo_risk: float, alpha: float) -> float:
    """Tilt SCR toward algorithmic stress in proportion to the algo supply share."""
    if not 0.0 <= alpha <= 1.0:
        raise UsageError(f"algo share alpha must be in [0,1], got {alpha}")
    return (1.0 - alpha) * scr_base + alpha * (0.6 * scr_base + 0.4 * algo_risk)


def _top10_by_tvl(protocols: tuple[Protocol, ...]) -> list[Protocol]:
    # ties broken lexicographically by id for determinism
    return sorted(protocols, key=lambda p: (-p.tvl, p.id))[:10]


def _audited_share(protocols: tuple[Protocol, ...]) -> float:
    live = [p for p in protocols if p.tvl > 0] or list(protocols)
    return sum(1 for p in live if p.audit_count > 0) / len(live)


def compute_dlr(snap: MarketSnapshot) -> SubIndexValue:
    """DeFi liquidity risk: protocol concentration, TVL volatility, audit
    coverage, 1-day TVL movement, and lending leverage, 0.35/0.25/0.20/0.10/0.10."""
    if not snap.protocols:
        raise DataError("DLR requires a nonempty protocol list")
    flags: list[str] = []

    top10 = _top10_by_tvl(snap.protocols)
    top_total = sum(p.tvl for p in top10)
    if top_total > 0:
        hhi_raw = min(sum((p.tvl / top_total) ** 2 for p in top10) * 10000.0, 10000.0)
    else:
        hhi_raw = 10000.0
    conc_score = _clip_score(hhi_risk(hhi_raw))

    history = snap.defi_tvl_history
    if len(history) >= 30:
        window = history[-30:]
        mu = sum(window) / len(window)
        var = sum((x - mu) ** 2 for x in window) / (len(window) - 1)
        if mu > 0:
            cv = var**0.5 / mu
            vol_score = _clip_score(normalize(cv, 0.0, 0.20) * 100.0)
            vol_raw: float | None = cv
        else:
            vol_score, vol_raw = 30.0, None
            flags.append("tvl_vol_default")
    else:
        vol_score, vol_raw = 30.0, None
        flags.append("tvl_vol_default")

    audited = _audited_share(snap.protocols)
    sc_score = _clip_score((1.0 - audited) * 100.0)

    mean_change = sum(abs(p.change_1d) for p in snap.protocols) / len(snap.protocols)
    flash_score = _clip_score(normalize(mean_change, 0.0, 20.0) * 100.0)

    total_tvl = sum(p.tvl for p in snap.protocols)
    lending = sum(p.tvl for p in snap.protocols if p.category.lower() == "lending")
    lending_pct = (lending / total_tvl * 100.0) if total_tvl > 0 else 0.0
    lev_score = _clip_score(normalize(lending_pct, 0.0, 30.0) * 100.0)

    components = {
        "concentration": ComponentScore(hhi_raw, conc_score, DLR_WEIGHTS["concentration"]),
        "tvl_volatility": ComponentScore(vol_raw, vol_score, DLR_WEIGHTS["tvl_volatility"]),
        "contract_risk": ComponentScore(audited, sc_score, DLR_WEIGHTS["contract_risk"]),
        "flash_loan": ComponentScore(mean_change, flash_score, DLR_WEIGHTS["flash_loan"]),
        "leverage": ComponentScore(lending_pct, lev_score, DLR_WEIGHTS["leverage"]),
    }
    return _finish(components, flags)


def _linkage_score(spread: float) -> float:
    if spread < 0:
        return _clip_score(normalize(abs(spread), 0.0, 2.0) * 100.0 + 50.0)
    return max(0.0, 50.0 - normalize(spread, 0.0, 2.0) * 50.0)


def compute_cr(snap: MarketSnapshot) -> SubIndexValue:
    """Contagion risk: RWA exposure, banking stress, curve-inversion linkage,
    BTC-equity correlation, and bridge surface, 0.30/0.25/0.20/0.15/0.10."""
    if snap.treasury_10y is None or snap.vix is None or snap.spread_10y_2y is None:
        raise DataError("CR requires treasury rate, VIX, and 10y-2y spread")
    flags: list[str] = []

    total_tvl = sum(p.tvl for p in snap.protocols)
    rwa = sum(p.tvl for p in snap.protocols if p.category.lower() == "rwa")
    rwa_pct = (rwa / total_tvl * 100.0) if total_tvl > 0 else 0.0
    rwa_score = _clip_score(normalize(rwa_pct, 0.0, 10.0) * 100.0)

    bank_score = _clip_score(
        (0.6 * normalize(snap.treasury_10y, 2.0, 6.0) + 0.4 * normalize(snap.vix, 12.0, 40.0))
        * 100.0
    )

    link_score = _clip_score(_linkage_score(snap.spread_10y_2y))

    if snap.btc_spy_corr_30d is None:
        corr = 0.5
        flags.append("corr_default")
    else:
        corr = snap.btc_spy_corr_30d
    corr_score = _clip_score(abs(corr) * 100.0)

    bridge_score = _clip_score(normalize(float(snap.bridge_count), 0.0, 150.0) * 100.0)

    components = {
        "rwa": ComponentScore(rwa_pct, rwa_score, CR_WEIGHTS["rwa"]),
        "banking_stress": ComponentScore(snap.vix, bank_score, CR_WEIGHTS["banking_stress"]),
        "linkage": ComponentScore(snap.spread_10y_2y, link_score, CR_WEIGHTS["linkage"]),
        "correlation": ComponentScore(corr, corr_score, CR_WEIGHTS["correlation"]),
        "bridges": ComponentScore(float(snap.bridge_count), bridge_score, CR_WEIGHTS["bridges"]),
    }
    return _finish(components, flags)


def _multi_issuer_score(n_significant: int) -> float:
    if n_significant < 3:
        return 70.0
    if n_significant < 10:
        return 30.0
    return _clip_score(50.0 + 2.0 * (n_significant - 10))


def compute_or(snap: MarketSnapshot) -> SubIndexValue:
    """Opacity risk: fixed unregulated share, issuer-count structure, custodial
    concentration, sentiment, and inverse audit transparency, .25/.25/.20/.15/.15."""
    if not snap.stablecoins:
        raise DataError("OR requires stablecoin supplies")
    if not snap.protocols:
        raise DataError("OR requires the protocol list for audit transparency")

    unreg_score = _clip_score(snap.unreg_fixed)

    n_sig = sum(1 for s in snap.stablecoins if s.circulating_supply > SIGNIFICANT_SUPPLY_USD)
    multi_score = _multi_issuer_score(n_sig)

    total = sum(s.circulating_supply for s in snap.stablecoins)
    if total <= 0:
        raise DataError("stablecoin supplies missing or all zero")
    top2 = sum(sorted((s.circulating_supply for s in snap.stablecoins), reverse=True)[:2])
    top2_pct = top2 / total * 100.0
    cust_score = _clip_score(normalize(top2_pct, 50.0, 100.0) * 100.0)

    sent_score = _clip_score(snap.sent_input)

    audited = _audited_share(snap.protocols)
    trans = audited * 100.0
    opacity_score = _clip_score(100.0 - trans)

    components = {
        "unregulated": ComponentScore(snap.unreg_fixed, unreg_score, OR_WEIGHTS["unregulated"]),
        "multi_issuer": ComponentScore(float(n_sig), multi_score, OR_WEIGHTS["multi_issuer"]),
        "custodial": ComponentScore(top2_pct, cust_score, OR_WEIGHTS["custodial"]),
        "sentiment": ComponentScore(snap.sent_input, sent_score, OR_WEIGHTS["sentiment"]),
        "opacity": ComponentScore(audited, opacity_score, OR_WEIGHTS["opacity"]),
    }
    return _finish(components, [])


@dataclass(frozen=True)
class SubIndexVector:
    scr: SubIndexValue
    dlr: SubIndexValue
    cr: SubIndexValue
    opacity: SubIndexValue

    def scores(self) -> tuple[float, float, float, float]:
        return (self.scr.score, self.dlr.score, self.cr.score, self.opacity.score)

    def to_json(self) -> dict:
        return {
            "scr": self.scr.to_json(),
            "dlr": self.dlr.to_json(),
            "cr": self.cr.to_json(),
            "or": self.opacity.to_json(),
        }


def compute_subindices(
    snap: MarketSnapshot, algo_alpha: float | None = None
) -> SubIndexVector:
    """Score all four sub-indices; ``algo_alpha`` engages the algorithmic
    stablecoin adjustment to SCR at the given supply share."""
    scr = compute_scr(snap)
    if algo_alpha is not None:
        algo = compute_algo_risk(snap)
        adjusted = blend_scr_adjusted(scr.score, algo.score, algo_alpha)
        # blend = (1 - 0.4*alpha)*base + (0.4*alpha)*algo, so the adjusted SCR
        # decomposes additively into down-weighted base components plus one
        # algo-risk component
        base_scale = 1.0 - 0.4 * algo_alpha
        components = {
            name: ComponentScore(c.raw_input, c.mapped_score, c.weight * base_scale)
            for name, c in scr.components.items()
        }
        components["algo_risk"] = ComponentScore(None, algo.score, 0.4 * algo_alpha)
        scr = SubIndexValue(adjusted, components, scr.flags + algo.flags)
    return SubIndexVector(scr, compute_dlr(snap), compute_cr(snap), compute_or(snap))
