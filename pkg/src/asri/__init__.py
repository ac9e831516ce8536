"""Aggregated Systemic Risk Index: a daily composite of stablecoin, DeFi
liquidity, contagion, and regulatory-opacity risk on a 0-100 scale, with the
validation battery used to assess it."""

from .aggregation import (
    THEORETICAL_WEIGHTS,
    AlertLevel,
    AsriPoint,
    WeightVector,
    aggregate_ces,
    aggregate_ciss,
    aggregate_linear,
    aggregate_max,
    classify_alert,
)
from .backtest import BacktestConfig, BacktestResult, run_backtest
from .errors import AsriError, DataError, NumericalError, UsageError
from .event_study import CrisisEvent, EventType, cumulative_abnormal_signal
from .market_data import SnapshotStore, TimeSeries
from .subindices import (
    MarketSnapshot,
    SubIndexVector,
    compute_cr,
    compute_dlr,
    compute_or,
    compute_scr,
    compute_subindices,
)

__version__ = "0.1.0"

__all__ = [
    "THEORETICAL_WEIGHTS",
    "AlertLevel",
    "AsriError",
    "AsriPoint",
    "BacktestConfig",
    "BacktestResult",
    "CrisisEvent",
    "DataError",
    "EventType",
    "MarketSnapshot",
    "NumericalError",
    "SnapshotStore",
    "SubIndexVector",
    "TimeSeries",
    "UsageError",
    "WeightVector",
    "aggregate_ces",
    "aggregate_ciss",
    "aggregate_linear",
    "aggregate_max",
    "classify_alert",
    "compute_cr",
    "compute_dlr",
    "compute_or",
    "compute_scr",
    "compute_subindices",
    "cumulative_abnormal_signal",
    "run_backtest",
    "__version__",
]
