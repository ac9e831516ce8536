"""Command-line entry points.

Four subcommands: ``ingest`` materializes a snapshot store from a manifest or
the bundled dataset, ``compute`` produces the daily index files, ``validate``
runs selected validation analyses into a run-stamped report directory, and
``schema-check`` verifies emitted artifacts against their documented layouts.

Exit codes: 0 success, 2 usage, 3 data, 4 numerical. Failures print a one-line
JSON object to stderr so wrappers can parse them.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .aggregation import SUB_INDEX_IDS, THEORETICAL_WEIGHTS, WeightVector
from .backtest import (
    ASRI_CSV_HEADER,
    BacktestConfig,
    ablation_analysis,
    forward_window_sensitivity,
    hold_one_out,
    lag_comparison,
    run_backtest,
    threshold_sensitivity,
    walk_forward,
    weight_perturbation,
    write_alert_log,
    write_asri_csv,
    write_components_json,
)
from .bundled import write_bundled
from .connectedness import (
    dy_detection,
    rolling_connectedness,
    select_lag,
    window_sensitivity,
    write_connectedness_csv,
)
from .econometrics import (
    adf_test,
    chow_test,
    collinearity_diagnostics,
    cusum_test,
    derive_weights_critic,
    derive_weights_elastic_net,
    derive_weights_entropy,
    derive_weights_pca,
    granger_test,
    kpss_test,
)
from .errors import AsriError, DataError, UsageError
from .event_study import (
    block_bootstrap_detection,
    bonferroni,
    crisis_day_labels,
    cumulative_abnormal_signal,
    detection_metrics,
    load_event_catalog,
    placebo_study,
    roc_pr_curves,
)
from .market_data import (
    CSV_HEADER,
    SnapshotStore,
    ingest_manifest_entry,
    load_manifest,
)
from .regime_hmm import (
    OPERATIONAL_K,
    fit_hmm,
    regime_report,
    select_k,
    write_model_json,
    write_state_paths,
)

SNAPSHOT_ENV = "ASRI_SNAPSHOT_DIR"

ANALYSES = (
    "eventstudy",
    "stationarity",
    "hmm",
    "connectedness",
    "weights",
    "ablation",
    "sensitivity",
    "walkforward",
    "holdout",
    "lag",
    "placebo",
)


class _Parser(argparse.ArgumentParser):
    """Argument errors surface as UsageError so every exit path emits the
    same machine-readable JSON."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _parse_weights(text: str) -> WeightVector:
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError(f"expected four comma-separated weights, got {text!r}")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"weights must be numeric: {text!r}") from exc
    return WeightVector(*values)


def _parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError as exc:
        raise UsageError(f"invalid date {text!r}, expected YYYY-MM-DD") from exc


def _snapshot_dir(args: argparse.Namespace) -> Path:
    if args.snapshot_dir is not None:
        return Path(args.snapshot_dir)
    env = os.environ.get(SNAPSHOT_ENV)
    if env:
        return Path(env)
    return Path("snapshots")


def _config_from_args(args: argparse.Namespace) -> BacktestConfig:
    return BacktestConfig(
        start=_parse_date(args.start) if args.start else None,
        end=_parse_date(args.end) if args.end else None,
        weights=_parse_weights(args.weights) if args.weights else THEORETICAL_WEIGHTS,
        aggregator=args.aggregator,
        ces_rho=args.ces_rho,
        lag_simulation=args.lag_simulation,
        algo_adjustment=args.algo_adjustment,
        threshold=args.threshold,
        seed=args.seed,
    )


def _add_compute_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--snapshot-dir", default=None, help=f"snapshot store root (default ${SNAPSHOT_ENV} or ./snapshots)")
    parser.add_argument("--start", default=None, help="first day (YYYY-MM-DD)")
    parser.add_argument("--end", default=None, help="last day (YYYY-MM-DD)")
    parser.add_argument("--weights", default=None, help="four comma-separated sub-index weights")
    parser.add_argument("--aggregator", default="linear", choices=["linear", "ces", "max", "ciss"], help="composite aggregation rule")
    parser.add_argument("--ces-rho", type=float, default=0.5, help="CES exponent")
    parser.add_argument("--algo-adjustment", action="store_true", help="enable the algorithmic-stablecoin blend")
    parser.add_argument("--lag-simulation", action="store_true", help="apply realistic publication lags")
    parser.add_argument("--threshold", type=float, default=50.0, help="alert threshold")
    parser.add_argument("--seed", type=int, default=42, help="random seed for stochastic analyses")


def build_parser() -> _Parser:
    parser = _Parser(prog="asri", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="materialize a snapshot store")
    p_ingest.add_argument("--snapshot-dir", default=None)
    group = p_ingest.add_mutually_exclusive_group(required=True)
    group.add_argument("--manifest", default=None, help="JSON manifest of series")
    group.add_argument("--bundled", action="store_true", help="write the bundled dataset")
    p_ingest.add_argument("--seed", type=int, default=42)

    p_compute = sub.add_parser("compute", help="compute the daily index")
    _add_compute_flags(p_compute)
    p_compute.add_argument("--out", default="out", help="output directory")

    p_validate = sub.add_parser("validate", help="run validation analyses")
    p_validate.add_argument("analyses", nargs="+", metavar="ANALYSIS", help="analysis names or 'all'")
    _add_compute_flags(p_validate)
    p_validate.add_argument("--out", default="out", help="report root directory")
    p_validate.add_argument("--run-id", default=None, help="fixed run directory name (default: UTC stamp)")
    p_validate.add_argument("--events", default=None, help="event catalog CSV (default: <snapshot-dir>/events.csv)")
    p_validate.add_argument("--hmm-restarts", type=int, default=3, help="EM restarts per candidate K")

    p_schema = sub.add_parser("schema-check", help="verify emitted artifact layouts")
    p_schema.add_argument("paths", nargs="+", metavar="PATH")
    return parser


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    root = _snapshot_dir(args)
    if args.bundled:
        store = write_bundled(root, seed=args.seed)
        ids = store.list_series()
        print(f"bundled dataset written to {root} ({len(ids)} series)")
        return 0
    entries = load_manifest(Path(args.manifest))
    root.mkdir(parents=True, exist_ok=True)
    store = SnapshotStore(root)
    base = Path(args.manifest).parent
    failures = []
    for entry in entries:
        try:
            series = ingest_manifest_entry(entry, base)
        except AsriError as exc:
            failures.append((entry.descriptor.series_id, str(exc)))
            continue
        store.write(series)
        n_gaps = len(series.gaps)
        confidences = [p.confidence for p in series.points]
        low = min(confidences) if confidences else 0.0
        print(
            f"{entry.descriptor.series_id}: {len(series.points)} points, "
            f"{n_gaps} gaps, min confidence {low:.2f}"
        )
    if failures:
        detail = "; ".join(f"{sid}: {msg}" for sid, msg in failures)
        raise DataError(f"{len(failures)} series failed to ingest: {detail}")
    print(f"{len(entries)} series persisted to {root}")
    return 0


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------


def _decomposition_rows(result) -> list[list]:
    rows = []
    for p in result.points:
        rows.append(
            [p.date.isoformat()]
            + [_fmt(p.contributions[name]) for name in SUB_INDEX_IDS]
        )
    return rows


def cmd_compute(args: argparse.Namespace) -> int:
    store = SnapshotStore(_snapshot_dir(args))
    cfg = _config_from_args(args)
    result = run_backtest(store, cfg)
    if not result.points:
        raise DataError("no index points in the requested date range")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_asri_csv(result, out / "asri.csv")
    write_components_json(result, out / "components.json")
    write_alert_log(result, out / "alerts.log")
    _write_csv(
        out / "decomposition.csv",
        ["date"] + [f"contrib_{name}" for name in SUB_INDEX_IDS],
        _decomposition_rows(result),
    )
    values = np.asarray(result.values())
    meta = {
        "seed": cfg.seed,
        "aggregator": cfg.aggregator,
        "weights": list(cfg.weights.as_tuple()),
        "lag_simulation": cfg.lag_simulation,
        "algo_adjustment": cfg.algo_adjustment,
        "threshold": cfg.threshold,
        "n_days": len(result.points),
        "start": result.points[0].date.isoformat(),
        "end": result.points[-1].date.isoformat(),
        "mean": float(values.mean()),
        "max": float(values.max()),
        "skipped_dates": [d.isoformat() for d in result.skipped_dates],
    }
    _write_json(out / "metadata.json", meta)
    last = result.points[-1]
    print(
        f"{len(result.points)} days computed {meta['start']}..{meta['end']}; "
        f"latest {last.asri:.1f} ({last.alert.value}); files in {out}"
    )
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _events_for(args: argparse.Namespace, snapshot_dir: Path):
    path = Path(args.events) if args.events else snapshot_dir / "events.csv"
    if not path.exists():
        raise DataError(f"event catalog not found: {path}")
    return load_event_catalog(path)


def _run_eventstudy(run_dir, result, events, args, seed):
    series = result.series()
    results = [cumulative_abnormal_signal(series, e) for e in events]
    rejects = bonferroni([r.p_value for r in results], alpha=0.05)
    payload = {
        "alpha": 0.05,
        "bonferroni_cutoff": 0.05 / len(results),
        "events": [
            dict(r.to_json(), bonferroni_reject=reject)
            for r, reject in zip(results, rejects)
        ],
    }
    _write_json(run_dir / "eventstudy.json", payload)
    _write_csv(
        run_dir / "eventstudy.csv",
        [
            "event", "onset", "type", "cas", "se_cas", "t_stat", "p_value",
            "bonferroni_reject", "lead_time_sigma", "lead_time_threshold", "peak",
        ],
        [
            [
                r.event.name, r.event.onset_date.isoformat(), r.event.type.value,
                _fmt(r.cas), _fmt(r.se_cas), _fmt(r.t_stat), _fmt(r.p_value),
                reject, _fmt(r.lead_time_sigma), _fmt(r.lead_time_threshold),
                _fmt(r.peak),
            ]
            for r, reject in zip(results, rejects)
        ],
    )
    boots = [
        block_bootstrap_detection(series, e, threshold=args.threshold, seed=seed)
        for e in events
    ]
    _write_json(run_dir / "bootstrap.json", {b.event.name: b.to_json() for b in boots})
    metrics = detection_metrics(series, events, args.threshold, 30)
    _write_json(run_dir / "detection.json", metrics.to_json())
    return ["eventstudy.json", "eventstudy.csv", "bootstrap.json", "detection.json"]


def _run_placebo(run_dir, result, events, args, seed):
    # 90-day neighborhood on each side of every onset is off-limits
    margin = timedelta(days=90)
    exclusions = [(e.onset_date - margin, e.onset_date + margin) for e in events]
    report = placebo_study(result.series(), 10, exclusions, seed)
    _write_json(run_dir / "placebo.json", report.to_json())
    return ["placebo.json"]


def _run_stationarity(run_dir, result, events, args, seed):
    series_values = {"asri": np.asarray(result.values())}
    matrix = result.score_matrix()
    for i, name in enumerate(SUB_INDEX_IDS):
        series_values[name] = matrix[:, i]
    tests = {}
    for name, values in series_values.items():
        tests[name] = {
            "adf": adf_test(values).to_json(),
            "kpss": kpss_test(values).to_json(),
        }
    dates = result.dates()
    chow = {}
    for event in events:
        if not (dates[0] < event.onset_date < dates[-1]):
            continue
        idx = sum(1 for d in dates if d < event.onset_date)
        r = chow_test(series_values["asri"], idx)
        chow[event.name] = {
            "break_index": r.break_index,
            "f_stat": r.f_stat,
            "p_value": r.p_value,
            "critical_5pct": r.critical_5pct,
        }
    cusum = cusum_test(series_values["asri"])
    payload = {
        "series": tests,
        "chow": chow,
        "cusum": {
            "max_excursion": cusum.max_excursion,
            "boundary": cusum.boundary,
            "n_crossings": len(cusum.crossing_indices),
        },
    }
    _write_json(run_dir / "stationarity.json", payload)
    m = len(cusum.path)
    rows = []
    for i, value in enumerate(cusum.path):
        bound = cusum.boundary * (1.0 + 2.0 * (i + 1) / m)
        rows.append([i, _fmt(value), _fmt(bound), _fmt(-bound)])
    _write_csv(run_dir / "cusum.csv", ["t", "statistic", "upper", "lower"], rows)
    return ["stationarity.json", "cusum.csv"]


def _run_hmm(run_dir, result, events, args, seed):
    obs = result.score_matrix()
    selection = select_k(obs, n_restarts=args.hmm_restarts, seed=seed)
    model = fit_hmm(obs, OPERATIONAL_K, n_restarts=args.hmm_restarts, seed=seed)
    report = regime_report(model, obs, selection)
    _write_json(run_dir / "hmm.json", report.to_json())
    write_model_json(model, run_dir / "hmm_model.json")
    write_state_paths(
        run_dir / "hmm_states.csv",
        result.dates(),
        report.filtered,
        report.smoothed,
        report.viterbi,
    )
    return ["hmm.json", "hmm_model.json", "hmm_states.csv"]


def _run_connectedness(run_dir, result, events, args, seed):
    obs = result.score_matrix()
    dates = result.dates()
    lag_sel = select_lag(obs, p_max=3)
    rolling = rolling_connectedness(obs, dates, window=60, p=1, horizon=10)
    report = dy_detection(rolling.series(), events)
    expanding = dy_detection(rolling.series(), events, expanding=True)
    sensitivity = window_sensitivity(obs, dates, events)
    payload = {
        "lag_selection": lag_sel.to_json(),
        "rolling": rolling.to_json(),
        "detection": report.to_json(),
        "detection_expanding": expanding.to_json(),
        "window_sensitivity": [row.to_json() for row in sensitivity],
    }
    _write_json(run_dir / "connectedness.json", payload)
    write_connectedness_csv(rolling, run_dir / "connectedness.csv")
    return ["connectedness.json", "connectedness.csv"]


def _run_weights(run_dir, result, events, args, seed):
    matrix = result.score_matrix()
    lead = 30
    if len(matrix) <= lead:
        raise DataError("need more than 30 days for the forward target")
    target = np.asarray(result.values())[lead:]
    derivations = [
        derive_weights_pca(matrix, scaling="minmax"),
        derive_weights_pca(matrix, scaling="correlation"),
        derive_weights_elastic_net(matrix[:-lead], target),
        derive_weights_critic(matrix),
        derive_weights_entropy(matrix),
    ]
    names = ["pca_minmax", "pca_correlation", "elastic_net", "critic", "entropy"]
    granger = {}
    asri_values = np.asarray(result.values())
    for i, name in enumerate(SUB_INDEX_IDS):
        granger[f"{name}_to_asri"] = granger_test(matrix[:, i], asri_values).to_json()
        granger[f"asri_to_{name}"] = granger_test(asri_values, matrix[:, i]).to_json()
    payload = {
        "derivations": {name: d.to_json() for name, d in zip(names, derivations)},
        "collinearity": collinearity_diagnostics(matrix).to_json(),
        "granger": granger,
    }
    _write_json(run_dir / "weights.json", payload)
    _write_csv(
        run_dir / "weights.csv",
        ["method"] + [f"w_{name}" for name in SUB_INDEX_IDS] + ["spearman_vs_theoretical"],
        [
            [name]
            + [_fmt(w) for w in d.weights]
            + [_fmt(d.diagnostics.get("spearman_vs_theoretical"))]
            for name, d in zip(names, derivations)
        ],
    )
    return ["weights.json", "weights.csv"]


def _run_ablation(run_dir, result, events, args, seed):
    rows = ablation_analysis(result, events, threshold=args.threshold)
    _write_json(run_dir / "ablation.json", {"rows": [r.to_json() for r in rows]})
    _write_csv(
        run_dir / "ablation.csv",
        ["excluded"]
        + [f"w_{n}" for n in SUB_INDEX_IDS]
        + ["crises_detected", "n_crises", "mean_lead", "correlation_with_baseline"],
        [
            [r.excluded]
            + [_fmt(w) for w in r.weights.as_tuple()]
            + [
                r.crises_detected, r.n_crises, _fmt(r.mean_lead),
                _fmt(r.correlation_with_baseline),
            ]
            for r in rows
        ],
    )
    return ["ablation.json", "ablation.csv"]


def _run_sensitivity(run_dir, result, events, args, seed):
    thresh_rows, best = threshold_sensitivity(result, events)
    window_rows = forward_window_sensitivity(result, events, threshold=args.threshold)
    perturb_rows = weight_perturbation(result, events, threshold=args.threshold, seed=seed)
    payload = {
        "thresholds": [r.to_json() for r in thresh_rows],
        "best_f1_threshold": best,
        "forward_windows": [r.to_json() for r in window_rows],
        "weight_perturbation": [r.to_json() for r in perturb_rows],
    }
    _write_json(run_dir / "sensitivity.json", payload)
    labels = crisis_day_labels(result.series(), events, 30)
    curves = roc_pr_curves(result.values(), labels)
    rows = [["roc", _fmt(x), _fmt(y)] for x, y in curves.roc_points] + [
        ["pr", _fmt(x), _fmt(y)] for x, y in curves.pr_points
    ]
    _write_csv(run_dir / "roc_pr.csv", ["curve", "x", "y"], rows)
    return ["sensitivity.json", "roc_pr.csv"]


def _run_walkforward(run_dir, result, events, args, seed):
    rows = walk_forward(result, events, threshold=args.threshold)
    _write_json(run_dir / "walkforward.json", {"rows": [r.to_json() for r in rows]})
    _write_csv(
        run_dir / "walkforward.csv",
        [
            "event", "train_start", "train_end", "n_train", "oos_peak",
            "detected", "lead_time", "skipped_reason",
        ],
        [
            [
                r.event.name,
                r.train_start.isoformat() if r.train_start else "",
                r.train_end.isoformat() if r.train_end else "",
                r.n_train, _fmt(r.oos_peak), r.detected, _fmt(r.lead_time),
                r.skipped_reason or "",
            ]
            for r in rows
        ],
    )
    return ["walkforward.json", "walkforward.csv"]


def _run_holdout(run_dir, result, events, args, seed):
    rows = hold_one_out(result, events, threshold=args.threshold)
    _write_json(run_dir / "holdout.json", {"rows": [r.to_json() for r in rows]})
    _write_csv(
        run_dir / "holdout.csv",
        ["held_out"]
        + [f"w_{n}" for n in SUB_INDEX_IDS]
        + [
            "training_detected", "training_mean_lead",
            "derived_detected", "derived_lead", "derived_peak",
            "theoretical_detected", "theoretical_lead", "theoretical_peak",
        ],
        [
            [r.held_out.name]
            + [_fmt(w) for w in r.derived_weights.as_tuple()]
            + [
                r.training_detected, _fmt(r.training_mean_lead),
                r.derived_detected, _fmt(r.derived_lead), _fmt(r.derived_peak),
                r.theoretical_detected, _fmt(r.theoretical_lead),
                _fmt(r.theoretical_peak),
            ]
            for r in rows
        ],
    )
    return ["holdout.json", "holdout.csv"]


def _run_lag(run_dir, result, events, args, seed, store, cfg):
    rows, ideal, lagged = lag_comparison(store, cfg, events)
    payload = {
        "rows": [r.to_json() for r in rows],
        "ideal_mean": float(np.mean(ideal.values())) if ideal.points else None,
        "lagged_mean": float(np.mean(lagged.values())) if lagged.points else None,
    }
    _write_json(run_dir / "lag.json", payload)
    _write_csv(
        run_dir / "lag.csv",
        [
            "event", "peak_ideal", "peak_lagged", "lead_ideal", "lead_lagged",
            "degradation_pct",
        ],
        [
            [
                r.event.name, _fmt(r.peak_ideal), _fmt(r.peak_lagged),
                _fmt(r.lead_ideal), _fmt(r.lead_lagged), _fmt(r.degradation_pct),
            ]
            for r in rows
        ],
    )
    return ["lag.json", "lag.csv"]


def cmd_validate(args: argparse.Namespace) -> int:
    selections = list(dict.fromkeys(args.analyses))
    if "all" in selections:
        selections = list(ANALYSES)
    unknown = [s for s in selections if s not in ANALYSES]
    if unknown:
        raise UsageError(
            f"unknown analyses: {', '.join(unknown)}; choose from {', '.join(ANALYSES)} or 'all'"
        )
    snapshot_dir = _snapshot_dir(args)
    store = SnapshotStore(snapshot_dir)
    cfg = _config_from_args(args)
    events = _events_for(args, snapshot_dir)
    result = run_backtest(store, cfg)
    if not result.points:
        raise DataError("no index points in the requested date range")

    run_id = args.run_id or datetime.now(timezone.utc).strftime("run-%Y%m%dT%H%M%SZ")
    run_dir = Path(args.out) / run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    write_asri_csv(result, run_dir / "asri.csv")

    runners = {
        "eventstudy": _run_eventstudy,
        "placebo": _run_placebo,
        "stationarity": _run_stationarity,
        "hmm": _run_hmm,
        "connectedness": _run_connectedness,
        "weights": _run_weights,
        "ablation": _run_ablation,
        "sensitivity": _run_sensitivity,
        "walkforward": _run_walkforward,
        "holdout": _run_holdout,
    }
    written = ["asri.csv"]
    for name in selections:
        if name == "lag":
            files = _run_lag(run_dir, result, events, args, cfg.seed, store, cfg)
        else:
            files = runners[name](run_dir, result, events, args, cfg.seed)
        written.extend(files)
        print(f"{name}: {', '.join(files)}")
    meta = {
        "seed": cfg.seed,
        "analyses": selections,
        "aggregator": cfg.aggregator,
        "weights": list(cfg.weights.as_tuple()),
        "threshold": cfg.threshold,
        "lag_simulation": cfg.lag_simulation,
        "algo_adjustment": cfg.algo_adjustment,
        "n_days": len(result.points),
        "start": result.points[0].date.isoformat(),
        "end": result.points[-1].date.isoformat(),
        "events": [e.name for e in events],
        "files": sorted(set(written)) + ["metadata.json"],
    }
    _write_json(run_dir / "metadata.json", meta)
    print(f"report bundle in {run_dir}")
    return 0


# ---------------------------------------------------------------------------
# schema-check
# ---------------------------------------------------------------------------

_FIXED_HEADERS = {
    "asri.csv": ASRI_CSV_HEADER,
    "connectedness.csv": ["date", "total_connectedness_pct"],
    "cusum.csv": ["t", "statistic", "upper", "lower"],
    "events.csv": ["name", "onset_date", "type"],
    "decomposition.csv": ["date"] + [f"contrib_{n}" for n in SUB_INDEX_IDS],
    "roc_pr.csv": ["curve", "x", "y"],
    "eventstudy.csv": [
        "event", "onset", "type", "cas", "se_cas", "t_stat", "p_value",
        "bonferroni_reject", "lead_time_sigma", "lead_time_threshold", "peak",
    ],
    "ablation.csv": ["excluded"]
    + [f"w_{n}" for n in SUB_INDEX_IDS]
    + ["crises_detected", "n_crises", "mean_lead", "correlation_with_baseline"],
    "walkforward.csv": [
        "event", "train_start", "train_end", "n_train", "oos_peak",
        "detected", "lead_time", "skipped_reason",
    ],
    "holdout.csv": ["held_out"]
    + [f"w_{n}" for n in SUB_INDEX_IDS]
    + [
        "training_detected", "training_mean_lead",
        "derived_detected", "derived_lead", "derived_peak",
        "theoretical_detected", "theoretical_lead", "theoretical_peak",
    ],
    "lag.csv": [
        "event", "peak_ideal", "peak_lagged", "lead_ideal", "lead_lagged",
        "degradation_pct",
    ],
    "weights.csv": ["method"] + [f"w_{n}" for n in SUB_INDEX_IDS] + ["spearman_vs_theoretical"],
    "alerts.log": ["date", "previous", "current", "asri"],
}


def _check_file(path: Path) -> list[str]:
    problems = []
    name = path.name
    if path.suffix == ".json":
        try:
            json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            problems.append(f"{path}: invalid JSON ({exc})")
        return problems
    if path.suffix not in (".csv", ".log"):
        return problems
    text = path.read_text(encoding="utf-8")
    lines = [line for line in text.splitlines() if line]
    if not lines:
        problems.append(f"{path}: empty file")
        return problems
    header = next(csv.reader([lines[0]]))
    if name in _FIXED_HEADERS:
        expected = _FIXED_HEADERS[name]
        if header != expected:
            problems.append(f"{path}: header {header} != expected {expected}")
    elif name == "hmm_states.csv":
        if (
            not header
            or header[0] != "date"
            or header[-1] != "viterbi_state"
            or not any(col.startswith("filtered_p") for col in header)
            or not any(col.startswith("smoothed_p") for col in header)
        ):
            problems.append(f"{path}: unexpected state-path header {header}")
    elif path.parent.name == "series":
        if header != CSV_HEADER.split(","):
            problems.append(f"{path}: header {header} != expected {CSV_HEADER}")
    width = len(header)
    for i, line in enumerate(lines[1:], start=2):
        row = next(csv.reader([line]))
        if len(row) != width:
            problems.append(f"{path}: line {i} has {len(row)} fields, expected {width}")
            break
    return problems


def cmd_schema_check(args: argparse.Namespace) -> int:
    problems = []
    n_checked = 0
    for raw in args.paths:
        path = Path(raw)
        if not path.exists():
            raise DataError(f"path not found: {path}")
        files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
        for file in files:
            if file.suffix in (".json", ".csv", ".log"):
                n_checked += 1
                problems.extend(_check_file(file))
    if problems:
        raise DataError(
            f"{len(problems)} schema problems: " + " | ".join(problems[:20])
        )
    print(f"{n_checked} files checked, all schemas valid")
    return 0


# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "ingest":
            return cmd_ingest(args)
        if args.command == "compute":
            return cmd_compute(args)
        if args.command == "validate":
            return cmd_validate(args)
        return cmd_schema_check(args)
    except AsriError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return exc.exit_code
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
