from __future__ import annotations

import math
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asri.errors import DataError, UsageError
from asri.subindices import (
    ALGO_WEIGHTS,
    BackingTokenMetrics,
    MarketSnapshot,
    Mechanism,
    Protocol,
    Stablecoin,
    blend_scr_adjusted,
    compute_algo_risk,
    compute_cr,
    compute_dlr,
    compute_or,
    compute_scr,
    compute_subindices,
    hhi_risk,
    normalize,
)

DAY = date(2023, 6, 1)


def coin(cid: str, supply: float, price: float | None = 1.0, **kw) -> Stablecoin:
    return Stablecoin(id=cid, circulating_supply=supply, price=price, **kw)


def snapshot(**kw) -> MarketSnapshot:
    defaults = dict(
        date=DAY,
        stablecoins=(coin("a", 80e9), coin("b", 50e9)),
        stablecoin_tvl_current=130e9,
        stablecoin_tvl_historical_max=160e9,
        protocols=(
            Protocol("lend", 30e9, "lending", audit_count=2),
            Protocol("dex", 70e9, "dex", audit_count=0),
        ),
        bridge_count=60,
        treasury_10y=4.0,
        vix=20.0,
        spread_10y_2y=0.5,
        btc_spy_corr_30d=0.4,
    )
    defaults.update(kw)
    return MarketSnapshot(**defaults)


# ---------------------------------------------------------------------------
# normalization primitives
# ---------------------------------------------------------------------------


def test_normalize_midpoint_and_clips() -> None:
    assert normalize(4.0, 2.0, 6.0) == 0.5
    assert normalize(1.0, 2.0, 6.0) == 0.0
    assert normalize(7.0, 2.0, 6.0) == 1.0


def test_normalize_rejects_empty_interval() -> None:
    with pytest.raises(UsageError):
        normalize(1.0, 5.0, 5.0)
    with pytest.raises(UsageError):
        normalize(1.0, 6.0, 5.0)


def test_hhi_risk_branch_values_exact() -> None:
    assert hhi_risk(0.0) == 0.0
    assert hhi_risk(750.0) == 15.0
    assert hhi_risk(1500.0) == 30.0
    assert hhi_risk(2500.0) == 60.0
    assert hhi_risk(5000.0) == 90.0
    assert hhi_risk(10000.0) == 100.0


def test_hhi_risk_domain_checked() -> None:
    with pytest.raises(UsageError):
        hhi_risk(-1.0)
    with pytest.raises(UsageError):
        hhi_risk(10001.0)


def test_hhi_risk_continuous_at_breakpoints() -> None:
    eps = 1e-7
    for knot in (1500.0, 2500.0, 5000.0):
        assert abs(hhi_risk(knot - eps) - hhi_risk(knot)) < 1e-4
        assert abs(hhi_risk(knot + eps) - hhi_risk(knot)) < 1e-4


@settings(max_examples=200, deadline=None)
@given(
    a=st.floats(min_value=0.0, max_value=10000.0),
    b=st.floats(min_value=0.0, max_value=10000.0),
)
def test_hhi_risk_nondecreasing(a: float, b: float) -> None:
    lo, hi = sorted((a, b))
    assert hhi_risk(lo) <= hhi_risk(hi) + 1e-12


# ---------------------------------------------------------------------------
# SCR
# ---------------------------------------------------------------------------


def test_scr_forced_component_pattern() -> None:
    # drawdown 0, treasury at the low anchor, single issuer, perfect peg:
    # component scores (0, 0, 100, 0) and SCR = 0.20 * 100
    snap = snapshot(
        stablecoins=(coin("only", 100e9, 1.0),),
        stablecoin_tvl_current=160e9,
        stablecoin_tvl_historical_max=160e9,
        treasury_10y=2.0,
    )
    scr = compute_scr(snap)
    mapped = {k: c.mapped_score for k, c in scr.components.items()}
    assert mapped == {"tvl_drawdown": 0.0, "treasury": 0.0, "hhi": 100.0, "peg_vol": 0.0}
    assert scr.score == 20.0


def test_scr_all_components_at_fifty() -> None:
    # invert each component map at 50: drawdown 0.25, treasury 4%, five-coin
    # supply split solving 4a^2 + (1-4a)^2 = 0.2166667, peg deviation 2.5%
    h = (1500.0 + 2000.0 / 3.0) / 10000.0
    a = (8.0 - math.sqrt(64.0 - 80.0 * (1.0 - h))) / 40.0
    shares = [a, a, a, a, 1.0 - 4.0 * a]
    coins = tuple(
        coin(f"c{i}", share * 100e9, 1.025) for i, share in enumerate(shares)
    )
    snap = snapshot(
        stablecoins=coins,
        stablecoin_tvl_current=120e9,
        stablecoin_tvl_historical_max=160e9,
        treasury_10y=4.0,
    )
    scr = compute_scr(snap)
    for component in scr.components.values():
        assert component.mapped_score == pytest.approx(50.0, abs=1e-6)
    assert scr.score == pytest.approx(50.0, abs=1e-6)


def test_scr_halved_tvl_saturates_drawdown() -> None:
    snap = snapshot(stablecoin_tvl_current=80e9, stablecoin_tvl_historical_max=160e9)
    assert compute_scr(snap).components["tvl_drawdown"].mapped_score == 100.0


def test_scr_weighted_sum_identity() -> None:
    scr = compute_scr(snapshot())
    total = sum(c.weight * c.mapped_score for c in scr.components.values())
    assert scr.score == pytest.approx(total, abs=1e-9)


def test_scr_missing_prices_flags_default() -> None:
    snap = snapshot(stablecoins=(coin("a", 80e9, None), coin("b", 50e9, None)))
    scr = compute_scr(snap)
    assert scr.components["peg_vol"].mapped_score == 50.0
    assert "peg_vol_default" in scr.flags


def test_scr_requires_inputs() -> None:
    with pytest.raises(DataError):
        compute_scr(snapshot(stablecoins=()))
    with pytest.raises(DataError):
        compute_scr(snapshot(treasury_10y=None))


def test_snapshot_validation() -> None:
    with pytest.raises(DataError):
        snapshot(stablecoin_tvl_current=170e9, stablecoin_tvl_historical_max=160e9)
    with pytest.raises(DataError):
        snapshot(btc_spy_corr_30d=1.2)
    with pytest.raises(DataError):
        coin("bad", -1.0)


# ---------------------------------------------------------------------------
# algorithmic stress and the SCR blend
# ---------------------------------------------------------------------------


def test_algo_risk_defaults_score_seventeen_five() -> None:
    # an undisclosed zero-supply algorithmic coin: only the no-disclosure
    # backing prior (50) survives, at weight 0.35
    snap = snapshot(stablecoins=(coin("fiat", 100e9), coin("alg", 0.0, mechanism=Mechanism.ALGORITHMIC)))
    algo = compute_algo_risk(snap)
    assert algo.score == 17.5


def test_algo_risk_empty_universe_flagged_zero() -> None:
    algo = compute_algo_risk(snapshot())
    assert algo.score == 0.0
    assert algo.flags == ("empty_universe",)


def test_algo_risk_saturated_components() -> None:
    snap = snapshot(
        stablecoins=(
            coin("fiat", 90e9),
            coin("alg", 10e9, mechanism=Mechanism.ALGORITHMIC, backing_token="tok"),
        ),
        backing_token_metrics={"tok": BackingTokenMetrics(120.0, 50.0, 0.7)},
    )
    algo = compute_algo_risk(snap)
    for component in algo.components.values():
        assert component.mapped_score == 100.0
    assert algo.score == 100.0


def test_algo_risk_ten_percent_share_saturates_concentration() -> None:
    snap = snapshot(
        stablecoins=(
            coin("fiat", 90e9),
            coin("alg", 10e9, mechanism=Mechanism.ALGORITHMIC),
        )
    )
    conc = compute_algo_risk(snap).components["algo_concentration"]
    assert conc.raw_input == pytest.approx(10.0)
    assert conc.mapped_score == 100.0
    assert conc.weight == ALGO_WEIGHTS["algo_concentration"]


def test_blend_scr_adjusted() -> None:
    assert blend_scr_adjusted(50.0, 100.0, 0.0) == 50.0
    assert blend_scr_adjusted(50.0, 100.0, 1.0) == 70.0
    # alpha = 0.10 puts weight 0.04 on the algo score
    assert blend_scr_adjusted(50.0, 100.0, 0.10) == pytest.approx(52.0)
    with pytest.raises(UsageError):
        blend_scr_adjusted(50.0, 100.0, 1.5)


def test_compute_subindices_blend_decomposition() -> None:
    snap = snapshot(
        stablecoins=(
            coin("fiat", 90e9),
            coin("alg", 10e9, mechanism=Mechanism.ALGORITHMIC),
        )
    )
    base = compute_scr(snap)
    algo = compute_algo_risk(snap)
    vec = compute_subindices(snap, algo_alpha=0.5)
    assert vec.scr.score == pytest.approx(
        blend_scr_adjusted(base.score, algo.score, 0.5), abs=1e-12
    )
    assert vec.scr.components["algo_risk"].weight == pytest.approx(0.2)
    total = sum(c.weight * c.mapped_score for c in vec.scr.components.values())
    assert vec.scr.score == pytest.approx(total, abs=1e-9)


# ---------------------------------------------------------------------------
# DLR
# ---------------------------------------------------------------------------


def test_dlr_single_audited_protocol() -> None:
    # lone audited protocol, no history: HHI 10000 -> 100 at 0.35, volatility
    # default 30 at 0.25, everything else 0
    snap = snapshot(protocols=(Protocol("solo", 10e9, "dex", audit_count=1),))
    dlr = compute_dlr(snap)
    assert dlr.score == 42.5
    assert "tvl_vol_default" in dlr.flags


def test_dlr_all_unaudited_maxes_contract_risk() -> None:
    snap = snapshot(
        protocols=(Protocol("a", 10e9, "dex"), Protocol("b", 5e9, "yield"))
    )
    assert compute_dlr(snap).components["contract_risk"].mapped_score == 100.0


def test_dlr_lending_share_thirty_percent_saturates_leverage() -> None:
    dlr = compute_dlr(snapshot())  # 30e9 lending of 100e9 total
    assert dlr.components["leverage"].raw_input == pytest.approx(30.0)
    assert dlr.components["leverage"].mapped_score == 100.0


def test_dlr_trailing_volatility_matches_direct_formula() -> None:
    window = tuple(45e9 * (1.1 if i % 2 else 0.9) for i in range(30))
    snap = snapshot(defi_tvl_history=window)
    mu = sum(window) / 30
    sd = math.sqrt(sum((x - mu) ** 2 for x in window) / 29)
    expected = (sd / mu) / 0.20 * 100.0
    vol = compute_dlr(snap).components["tvl_volatility"]
    assert vol.mapped_score == pytest.approx(expected, abs=1e-9)


def test_dlr_flash_loan_mean_move() -> None:
    snap = snapshot(
        protocols=(
            Protocol("a", 10e9, "dex", change_1d=10.0),
            Protocol("b", 10e9, "dex", change_1d=-30.0),
        )
    )
    flash = compute_dlr(snap).components["flash_loan"]
    assert flash.raw_input == pytest.approx(20.0)
    assert flash.mapped_score == 100.0


def test_dlr_requires_protocols() -> None:
    with pytest.raises(DataError):
        compute_dlr(snapshot(protocols=()))


# ---------------------------------------------------------------------------
# CR
# ---------------------------------------------------------------------------


def test_cr_banking_stress_midpoint() -> None:
    snap = snapshot(treasury_10y=4.0, vix=26.0)
    assert compute_cr(snap).components["banking_stress"].mapped_score == pytest.approx(50.0)


def test_cr_linkage_and_clipping() -> None:
    assert compute_cr(snapshot(spread_10y_2y=0.0)).components["linkage"].mapped_score == 50.0
    assert compute_cr(snapshot(spread_10y_2y=2.0)).components["linkage"].mapped_score == 0.0
    # inversion at -2 maps to 150 before the clip
    assert compute_cr(snapshot(spread_10y_2y=-2.0)).components["linkage"].mapped_score == 100.0


def test_cr_rwa_share() -> None:
    snap = snapshot(
        protocols=(Protocol("rwa", 5e9, "rwa", 1), Protocol("dex", 95e9, "dex", 1))
    )
    assert compute_cr(snap).components["rwa"].mapped_score == pytest.approx(50.0)


def test_cr_correlation_default_flagged() -> None:
    cr = compute_cr(snapshot(btc_spy_corr_30d=None))
    assert cr.components["correlation"].mapped_score == 50.0
    assert "corr_default" in cr.flags


def test_cr_bridge_count() -> None:
    assert compute_cr(snapshot(bridge_count=75)).components["bridges"].mapped_score == 50.0
    assert compute_cr(snapshot(bridge_count=300)).components["bridges"].mapped_score == 100.0


# ---------------------------------------------------------------------------
# OR
# ---------------------------------------------------------------------------


def n_sig_snapshot(n_large: int, n_small: int = 0) -> MarketSnapshot:
    coins = tuple(coin(f"l{i}", 2e9) for i in range(n_large)) + tuple(
        coin(f"s{i}", 0.5e9) for i in range(n_small)
    )
    return snapshot(stablecoins=coins)


def test_or_multi_issuer_structure() -> None:
    assert compute_or(n_sig_snapshot(2)).components["multi_issuer"].mapped_score == 70.0
    assert compute_or(n_sig_snapshot(5)).components["multi_issuer"].mapped_score == 30.0
    assert compute_or(n_sig_snapshot(10)).components["multi_issuer"].mapped_score == 50.0
    assert compute_or(n_sig_snapshot(12)).components["multi_issuer"].mapped_score == 54.0
    assert compute_or(n_sig_snapshot(35)).components["multi_issuer"].mapped_score == 100.0


def test_or_custodial_top_two_share() -> None:
    snap = snapshot(stablecoins=(coin("a", 40e9), coin("b", 35e9), coin("c", 25e9)))
    cust = compute_or(snap).components["custodial"]
    assert cust.raw_input == pytest.approx(75.0)
    assert cust.mapped_score == pytest.approx(50.0)


def test_or_sentiment_clipped() -> None:
    assert compute_or(snapshot(sent_input=120.0)).components["sentiment"].mapped_score == 100.0
    assert compute_or(snapshot(sent_input=-10.0)).components["sentiment"].mapped_score == 0.0


def test_or_opacity_inverse_of_audit_share() -> None:
    assert compute_or(snapshot()).components["opacity"].mapped_score == 50.0


def test_or_unregulated_fixed() -> None:
    assert compute_or(snapshot()).components["unregulated"].mapped_score == 35.0


# ---------------------------------------------------------------------------
# bounds and end-to-end concentration sensitivity
# ---------------------------------------------------------------------------


@st.composite
def snapshots(draw) -> MarketSnapshot:
    pos = st.floats(min_value=1e6, max_value=2e11, allow_nan=False)
    n_coins = draw(st.integers(min_value=1, max_value=5))
    mechanisms = st.sampled_from(list(Mechanism))
    coins = tuple(
        Stablecoin(
            id=f"c{i}",
            circulating_supply=draw(pos),
            price=draw(st.floats(min_value=0.5, max_value=1.5)),
            mechanism=draw(mechanisms),
        )
        for i in range(n_coins)
    )
    n_protocols = draw(st.integers(min_value=1, max_value=5))
    categories = st.sampled_from(["lending", "dex", "rwa", "bridge", "yield"])
    protocols = tuple(
        Protocol(
            id=f"p{i}",
            tvl=draw(pos),
            category=draw(categories),
            audit_count=draw(st.integers(min_value=0, max_value=3)),
            change_1d=draw(st.floats(min_value=-100.0, max_value=100.0)),
        )
        for i in range(n_protocols)
    )
    hist_max = draw(st.floats(min_value=1e9, max_value=3e11))
    current = hist_max * draw(st.floats(min_value=0.05, max_value=1.0))
    history_len = draw(st.sampled_from([0, 30]))
    history = tuple(
        draw(st.floats(min_value=1e9, max_value=1e11)) for _ in range(history_len)
    )
    return MarketSnapshot(
        date=DAY,
        stablecoins=coins,
        stablecoin_tvl_current=current,
        stablecoin_tvl_historical_max=hist_max,
        protocols=protocols,
        bridge_count=draw(st.integers(min_value=0, max_value=400)),
        treasury_10y=draw(st.floats(min_value=0.0, max_value=12.0)),
        vix=draw(st.floats(min_value=5.0, max_value=90.0)),
        spread_10y_2y=draw(st.floats(min_value=-3.0, max_value=3.0)),
        btc_spy_corr_30d=draw(st.floats(min_value=-1.0, max_value=1.0)),
        sent_input=draw(st.floats(min_value=-50.0, max_value=150.0)),
        defi_tvl_history=history,
    )


@settings(max_examples=50, deadline=None)
@given(snap=snapshots())
def test_all_subindices_bounded_and_decomposable(snap: MarketSnapshot) -> None:
    vec = compute_subindices(snap, algo_alpha=0.3)
    for value in (vec.scr, vec.dlr, vec.cr, vec.opacity):
        assert 0.0 <= value.score <= 100.0
        total = sum(c.weight * c.mapped_score for c in value.components.values())
        assert value.score == pytest.approx(total, abs=1e-9)
        assert sum(c.weight for c in value.components.values()) == pytest.approx(1.0)


def test_concentration_raises_scr_end_to_end() -> None:
    balanced = snapshot(stablecoins=(coin("a", 65e9), coin("b", 65e9)))
    concentrated = snapshot(stablecoins=(coin("a", 123.5e9), coin("b", 6.5e9)))
    assert (
        compute_scr(concentrated).score > compute_scr(balanced).score
    )
