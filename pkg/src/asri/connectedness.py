"""VAR-based spillover benchmark: generalized forecast-error variance
decompositions, total connectedness, rolling windows, and the mean-plus-sigma
detection rule used to compare against the composite index."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np
from scipy import stats as scipy_stats

from .errors import DataError, NumericalError
from .event_study import CrisisEvent, DetectionMetrics, detection_metrics
from .market_data import ONE_DAY, TimeSeries, series_from_values

N_VARS = 4


@dataclass(frozen=True)
class VarModel:
    p: int
    intercept: np.ndarray          # (N,)
    coefficients: np.ndarray       # (p, N, N); lag-l matrix maps y_{t-l} -> y_t
    sigma: np.ndarray              # (N, N) residual covariance
    residuals: np.ndarray          # (n_eff, N)
    aic: float
    bic: float
    hq: float
    spectral_radius: float
    n_obs: int

    @property
    def stable(self) -> bool:
        return self.spectral_radius < 1.0

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "intercept": self.intercept.tolist(),
            "coefficients": self.coefficients.tolist(),
            "sigma": self.sigma.tolist(),
            "aic": self.aic,
            "bic": self.bic,
            "hq": self.hq,
            "spectral_radius": self.spectral_radius,
            "stable": self.stable,
            "n_obs": self.n_obs,
        }


def _companion(coefficients: np.ndarray) -> np.ndarray:
    p, n, _ = coefficients.shape
    top = np.hstack([coefficients[l] for l in range(p)])
    if p == 1:
        return top
    lower = np.hstack([np.eye(n * (p - 1)), np.zeros((n * (p - 1), n))])
    return np.vstack([top, lower])


def fit_var(observations: np.ndarray, p: int) -> VarModel:
    """Equation-by-equation least squares with intercept."""
    y = np.asarray(observations, dtype=float)
    if y.ndim != 2 or y.shape[1] != N_VARS:
        raise DataError(f"observations must be n x {N_VARS}")
    n = len(y)
    if p < 1:
        raise DataError("lag order must be at least 1")
    if n <= N_VARS * p + 10:
        raise DataError(f"need more than {N_VARS * p + 10} observations for p={p}, have {n}")
    rows = n - p
    design = np.ones((rows, 1 + N_VARS * p))
    for l in range(1, p + 1):
        design[:, 1 + (l - 1) * N_VARS : 1 + l * N_VARS] = y[p - l : n - l]
    target = y[p:]
    xtx = design.T @ design
    if np.linalg.matrix_rank(xtx) < design.shape[1]:
        raise NumericalError("singular regressor matrix in VAR fit")
    beta = np.linalg.solve(xtx, design.T @ target)  # (1+Np, N)
    residuals = target - design @ beta
    k_per_eq = 1 + N_VARS * p
    denom = rows - k_per_eq
    if denom <= 0:
        raise DataError("not enough residual degrees of freedom")
    sigma = residuals.T @ residuals / denom
    sigma_mle = residuals.T @ residuals / rows
    sign, logdet = np.linalg.slogdet(sigma_mle)
    if sign <= 0:
        raise NumericalError("degenerate residual covariance")
    k_total = N_VARS * k_per_eq
    aic = logdet + 2.0 * k_total / rows
    bic = logdet + math.log(rows) * k_total / rows
    hq = logdet + 2.0 * math.log(math.log(rows)) * k_total / rows
    intercept = beta[0].copy()
    coefficients = np.stack(
        [beta[1 + (l - 1) * N_VARS : 1 + l * N_VARS].T for l in range(1, p + 1)]
    )
    radius = float(np.abs(np.linalg.eigvals(_companion(coefficients))).max())
    return VarModel(
        p=p,
        intercept=intercept,
        coefficients=coefficients,
        sigma=sigma,
        residuals=residuals,
        aic=aic,
        bic=bic,
        hq=hq,
        spectral_radius=radius,
        n_obs=rows,
    )


@dataclass(frozen=True)
class LagSelectionRow:
    p: int
    aic: float
    bic: float
    hq: float
    lr_p_value: float | None  # vs p-1, None for the first row


@dataclass(frozen=True)
class LagSelection:
    rows: tuple[LagSelectionRow, ...]
    chosen_p: int

    def to_json(self) -> dict:
        return {
            "rows": [
                {
                    "p": r.p,
                    "aic": r.aic,
                    "bic": r.bic,
                    "hq": r.hq,
                    "lr_p_value": r.lr_p_value,
                }
                for r in self.rows
            ],
            "chosen_p": self.chosen_p,
        }


def select_lag(observations: np.ndarray, p_max: int = 3) -> LagSelection:
    """Information criteria on a common sample, AIC decides; likelihood-ratio
    tests compare each order against the next shorter one."""
    y = np.asarray(observations, dtype=float)
    n = len(y)
    if n <= N_VARS * p_max + 10 + p_max:
        raise DataError(f"series too short for p_max={p_max}")
    # common estimation sample: drop the first p_max rows for every candidate
    rows = []
    logdets = {}
    common_rows = n - p_max
    for p in range(1, p_max + 1):
        model = fit_var(y[p_max - p :], p)
        sigma_mle = model.residuals.T @ model.residuals / model.n_obs
        sign, logdet = np.linalg.slogdet(sigma_mle)
        if sign <= 0:
            raise NumericalError("degenerate residual covariance in lag selection")
        logdets[p] = logdet
        lr_p = None
        if p > 1:
            lr = common_rows * (logdets[p - 1] - logdets[p])
            lr_p = float(scipy_stats.chi2.sf(max(0.0, lr), N_VARS * N_VARS))
        rows.append(LagSelectionRow(p, model.aic, model.bic, model.hq, lr_p))
    chosen = min(rows, key=lambda r: r.aic).p
    return LagSelection(tuple(rows), chosen)


@dataclass(frozen=True)
class FevdMatrix:
    horizon: int
    theta: np.ndarray  # (N, N), rows sum to 1

    def __post_init__(self) -> None:
        if not np.allclose(self.theta.sum(axis=1), 1.0, atol=1e-9):
            raise NumericalError("FEVD rows must sum to 1")

    def to_json(self) -> dict:
        return {"horizon": self.horizon, "theta": self.theta.tolist()}


def ma_coefficients(model: VarModel, horizon: int) -> np.ndarray:
    """Phi_0..Phi_{H-1} by the companion recursion, truncated at H-1."""
    phis = np.zeros((horizon, N_VARS, N_VARS))
    phis[0] = np.eye(N_VARS)
    for h in range(1, horizon):
        acc = np.zeros((N_VARS, N_VARS))
        for l in range(1, min(h, model.p) + 1):
            acc += model.coefficients[l - 1] @ phis[h - l]
        phis[h] = acc
    return phis


def generalized_fevd(model: VarModel, horizon: int = 10) -> FevdMatrix:
    """Order-invariant variance shares: each row i allocates variable i's
    H-step forecast-error variance across shocks j."""
    sigma = model.sigma
    diag = np.diag(sigma)
    if np.any(diag <= 0):
        raise NumericalError("nonpositive innovation variance in FEVD")
    phis = ma_coefficients(model, horizon)
    numerator = np.zeros((N_VARS, N_VARS))
    denominator = np.zeros(N_VARS)
    for h in range(horizon):
        ps = phis[h] @ sigma
        numerator += ps * ps / diag[None, :]
        denominator += np.einsum("ij,ij->i", ps, phis[h])
    theta = numerator / denominator[:, None]
    theta = theta / theta.sum(axis=1, keepdims=True)
    return FevdMatrix(horizon, theta)


def total_connectedness(fevd: FevdMatrix) -> float:
    """Percent of forecast-error variance coming from other variables."""
    n = len(fevd.theta)
    return 100.0 * (n - float(np.trace(fevd.theta))) / n


@dataclass(frozen=True)
class RollingConnectedness:
    window: int
    p: int
    horizon: int
    dates: tuple[date, ...]
    values: tuple[float, ...]
    unstable_dates: tuple[date, ...]
    failed_dates: tuple[date, ...]

    def series(self) -> TimeSeries:
        return series_from_values("dy_connectedness", list(self.dates), list(self.values))

    def to_json(self) -> dict:
        return {
            "window": self.window,
            "p": self.p,
            "horizon": self.horizon,
            "n_points": len(self.values),
            "mean": float(np.mean(self.values)) if self.values else None,
            "std": float(np.std(self.values, ddof=1)) if len(self.values) > 1 else None,
            "min": min(self.values) if self.values else None,
            "max": max(self.values) if self.values else None,
            "unstable_windows": len(self.unstable_dates),
            "failed_windows": len(self.failed_dates),
        }


def rolling_connectedness(
    observations: np.ndarray,
    dates: list[date],
    window: int = 60,
    p: int = 1,
    horizon: int = 10,
) -> RollingConnectedness:
    """One total-connectedness value per window-end date; windows where the
    VAR cannot be estimated leave a gap rather than a fabricated value."""
    y = np.asarray(observations, dtype=float)
    if len(y) != len(dates):
        raise DataError("observations and dates must align")
    if len(y) < window:
        raise DataError(f"need at least {window} observations, have {len(y)}")
    out_dates, values, unstable, failed = [], [], [], []
    for end in range(window, len(y) + 1):
        day = dates[end - 1]
        chunk = y[end - window : end]
        try:
            model = fit_var(chunk, p)
            fevd = generalized_fevd(model, horizon)
        except (DataError, NumericalError):
            failed.append(day)
            continue
        if not model.stable:
            unstable.append(day)
        out_dates.append(day)
        values.append(total_connectedness(fevd))
    return RollingConnectedness(
        window=window,
        p=p,
        horizon=horizon,
        dates=tuple(out_dates),
        values=tuple(values),
        unstable_dates=tuple(unstable),
        failed_dates=tuple(failed),
    )


@dataclass(frozen=True)
class DyDetectionReport:
    threshold: float
    mean: float
    std: float
    expanding: bool
    metrics: DetectionMetrics
    per_event: tuple[tuple[str, bool], ...]

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "mean": self.mean,
            "std": self.std,
            "expanding": self.expanding,
            "metrics": self.metrics.to_json(),
            "per_event": {name: hit for name, hit in self.per_event},
        }


def dy_detection(
    connectedness: TimeSeries,
    events: list[CrisisEvent],
    pre_window: int = 30,
    expanding: bool = False,
) -> DyDetectionReport:
    """Alerts where connectedness exceeds its mean plus one standard deviation.

    Full-sample moments by default; ``expanding`` recomputes the bar from data
    up to each day instead.  Exceeds means strictly above: a flat series sits
    exactly at its own bar and never alerts.
    """
    values = np.asarray(connectedness.values(), dtype=float)
    if len(values) == 0:
        raise DataError("connectedness series is empty")
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    threshold = mean + std
    if expanding:
        margins = []
        for i in range(len(values)):
            upto = values[: i + 1]
            bar = float(upto.mean()) + (float(upto.std(ddof=1)) if i > 0 else 0.0)
            margins.append(values[i] - bar)
        margin_series = series_from_values(
            "dy_margin", connectedness.dates(), margins
        )
        metrics = detection_metrics(margin_series, events, 0.0, pre_window, strict=True)
        source = margin_series
        cutoff = 0.0
    else:
        metrics = detection_metrics(
            connectedness, events, threshold, pre_window, strict=True
        )
        source = connectedness
        cutoff = threshold
    per_event = []
    for event in events:
        lo = event.onset_date - pre_window * ONE_DAY
        hi = event.onset_date - ONE_DAY
        hit = any(
            p.value > cutoff for p in source.points if lo <= p.date <= hi
        )
        per_event.append((event.name, hit))
    return DyDetectionReport(
        threshold=threshold,
        mean=mean,
        std=std,
        expanding=expanding,
        metrics=metrics,
        per_event=tuple(per_event),
    )


@dataclass(frozen=True)
class WindowSensitivityRow:
    window: int
    n_points: int
    mean: float
    std: float
    threshold: float
    crises_detected: int
    precision: float

    def to_json(self) -> dict:
        return {
            "window": self.window,
            "n_points": self.n_points,
            "mean": self.mean,
            "std": self.std,
            "threshold": self.threshold,
            "crises_detected": self.crises_detected,
            "precision": self.precision,
        }


def window_sensitivity(
    observations: np.ndarray,
    dates: list[date],
    events: list[CrisisEvent],
    windows: tuple[int, ...] = (30, 60, 90, 120),
    p: int = 1,
    horizon: int = 10,
) -> list[WindowSensitivityRow]:
    rows = []
    for window in windows:
        rolling = rolling_connectedness(observations, dates, window, p, horizon)
        report = dy_detection(rolling.series(), events)
        values = np.asarray(rolling.values)
        rows.append(
            WindowSensitivityRow(
                window=window,
                n_points=len(values),
                mean=float(values.mean()),
                std=float(values.std(ddof=1)),
                threshold=report.threshold,
                crises_detected=report.metrics.crises_detected,
                precision=report.metrics.precision,
            )
        )
    return rows


def write_connectedness_csv(rolling: RollingConnectedness, path: Path) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "total_connectedness_pct"])
        for day, value in zip(rolling.dates, rolling.values):
            writer.writerow([day.isoformat(), repr(float(value))])
