from __future__ import annotations

import time
from pathlib import Path

import pytest

from asri.backtest import BacktestConfig, run_backtest
from asri.cli import main as cli_main
from asri.event_study import load_event_catalog
from asri.market_data import SnapshotStore

REPO_ROOT = Path(__file__).resolve().parent.parent
BUNDLED_DIR = REPO_ROOT / "data" / "bundled"


@pytest.fixture(scope="session")
def bundled_store() -> SnapshotStore:
    assert BUNDLED_DIR.exists(), "bundled dataset missing; run `asri ingest --bundled`"
    return SnapshotStore(BUNDLED_DIR)


@pytest.fixture(scope="session")
def bundled_events(bundled_store):
    return load_event_catalog(BUNDLED_DIR / "events.csv")


@pytest.fixture(scope="session")
def bundled_result(bundled_store):
    return run_backtest(bundled_store, BacktestConfig())


@pytest.fixture(scope="session")
def bundle_run(tmp_path_factory):
    """One complete `validate all` run over the bundled store, plus wall time."""
    out = tmp_path_factory.mktemp("bundle")
    started = time.perf_counter()
    code = cli_main(
        [
            "validate",
            "all",
            "--snapshot-dir",
            str(BUNDLED_DIR),
            "--out",
            str(out),
            "--run-id",
            "run",
            "--seed",
            "42",
        ]
    )
    elapsed = time.perf_counter() - started
    assert code == 0
    return out / "run", elapsed
