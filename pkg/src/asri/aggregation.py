"""Composite index construction: linear weighting (the headline form),
ablation reweighting, CES and max alternatives, a CISS-style correlation-aware
aggregate, and alert classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from enum import Enum

import numpy as np

from .errors import DataError, NumericalError, UsageError
from .subindices import SubIndexVector

SUB_INDEX_IDS = ("scr", "dlr", "cr", "or")

ALERT_LOW_MAX = 30.0
ALERT_MODERATE_MAX = 50.0
ALERT_ELEVATED_MAX = 70.0


class AlertLevel(str, Enum):
    LOW = "Low"
    MODERATE = "Moderate"
    ELEVATED = "Elevated"
    HIGH = "High"


@dataclass(frozen=True)
class WeightVector:
    w_scr: float
    w_dlr: float
    w_cr: float
    w_or: float

    def __post_init__(self) -> None:
        weights = self.as_tuple()
        if any(w < 0 for w in weights):
            raise UsageError(f"weights must be nonnegative, got {weights}")
        zeros = sum(1 for w in weights if w == 0.0)
        if zeros > 1:
            raise UsageError(f"at most one weight may be zero (ablation), got {weights}")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise UsageError(f"weights must sum to 1 within 1e-12, got sum {sum(weights)!r}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w_scr, self.w_dlr, self.w_cr, self.w_or)

    def __getitem__(self, key: str) -> float:
        try:
            return self.as_tuple()[SUB_INDEX_IDS.index(key)]
        except ValueError:
            raise UsageError(f"unknown sub-index id {key!r}") from None


THEORETICAL_WEIGHTS = WeightVector(0.30, 0.25, 0.25, 0.20)


@dataclass(frozen=True)
class AsriPoint:
    date: date | None
    asri: float
    subindices: SubIndexVector
    contributions: dict[str, float]
    alert: AlertLevel


def classify_alert(asri: float) -> AlertLevel:
    """Band the index: Low < 30 <= Moderate < 50 <= Elevated < 70 <= High."""
    if not 0.0 <= asri <= 100.0:
        raise UsageError(f"ASRI value {asri} outside [0, 100]")
    if asri < ALERT_LOW_MAX:
        return AlertLevel.LOW
    if asri < ALERT_MODERATE_MAX:
        return AlertLevel.MODERATE
    if asri < ALERT_ELEVATED_MAX:
        return AlertLevel.ELEVATED
    return AlertLevel.HIGH


def aggregate_linear(
    s: SubIndexVector, w: WeightVector, day: date | None = None
) -> AsriPoint:
    """Weighted sum of the four sub-index scores with per-index contributions."""
    scores = s.scores()
    weights = w.as_tuple()
    contributions = {
        name: weight * score for name, weight, score in zip(SUB_INDEX_IDS, weights, scores)
    }
    asri = sum(contributions.values())
    return AsriPoint(day, asri, s, contributions, classify_alert(min(100.0, max(0.0, asri))))


def ablation_weights(base: WeightVector, excluded: str) -> WeightVector:
    """Zero one weight and renormalize the rest by 1/(1 - w_excluded)."""
    if excluded not in SUB_INDEX_IDS:
        raise UsageError(f"unknown sub-index id {excluded!r}")
    removed = base[excluded]
    if removed >= 1.0:
        raise UsageError("cannot ablate a weight of 1")
    scale = 1.0 / (1.0 - removed)
    weights = [
        0.0 if name == excluded else base[name] * scale for name in SUB_INDEX_IDS
    ]
    # renormalization leaves float dust; fold it into the largest weight
    drift = 1.0 - sum(weights)
    biggest = max(range(4), key=lambda i: weights[i])
    weights[biggest] += drift
    return WeightVector(*weights)


def aggregate_ces(s: SubIndexVector, w: WeightVector, rho: float) -> float:
    """Constant-elasticity aggregate (sum w_i s_i^rho)^(1/rho); rho = 0 takes
    the geometric-mean limit."""
    scores = s.scores()
    weights = w.as_tuple()
    if rho == 0.0:
        if any(x <= 0 for x in scores):
            raise NumericalError("geometric CES requires strictly positive sub-indices")
        return math.exp(sum(wi * math.log(x) for wi, x in zip(weights, scores)))
    if rho < 0.0 and any(x <= 0 for x in scores):
        raise NumericalError("CES with rho <= 0 requires strictly positive sub-indices")
    total = sum(wi * x**rho for wi, x in zip(weights, scores))
    return total ** (1.0 / rho)


def aggregate_max(s: SubIndexVector) -> float:
    """Worst sub-index; the limiting CES aggregate as rho grows without bound."""
    return max(s.scores())


def aggregate_ciss(
    history: list[SubIndexVector],
    lam: float = 0.94,
    dates: list[date] | None = None,
) -> list[tuple[date | None, float]]:
    """Correlation-aware composite 100*sqrt((w*u)' R (w*u)) per date.

    u is the sub-index vector on [0,1], weights are equal (0.25), and R is an
    EWMA correlation matrix with decay ``lam``. The second-moment matrix is
    seeded from the first 30 observations' sample moments; a zero-variance
    component is treated as comonotonic (correlation 1) so constant inputs
    reduce to the linear equal-weight value.
    """
    if not 0.0 < lam < 1.0:
        raise UsageError(f"EWMA decay must be in (0,1), got {lam}")
    n = len(history)
    if n < 2:
        raise DataError("CISS aggregation requires at least 2 observations")
    if dates is not None and len(dates) != n:
        raise UsageError("dates must align with history")

    u = np.array([[x / 100.0 for x in vec.scores()] for vec in history])
    w = np.full(4, 0.25)
    init_n = min(30, n)
    mean = u[:init_n].mean(axis=0)
    centered = u[:init_n] - mean
    cov = centered.T @ centered / init_n

    out: list[tuple[date | None, float]] = []
    for t in range(n):
        if t >= init_n:
            mean = lam * mean + (1.0 - lam) * u[t]
            dev = u[t] - mean
            cov = lam * cov + (1.0 - lam) * np.outer(dev, dev)
        std = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        denom = np.outer(std, std)
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = np.where(denom > 1e-12, cov / np.where(denom > 0, denom, 1.0), 1.0)
        corr = np.clip(corr, -1.0, 1.0)
        np.fill_diagonal(corr, 1.0)
        x = w * u[t]
        composite = 100.0 * math.sqrt(max(0.0, float(x @ corr @ x)))
        out.append((dates[t] if dates else None, composite))
    return out


def normalize_minmax(series: list[float]) -> list[float]:
    """Rescale so the sample minimum maps to 0 and the maximum to 100."""
    lo, hi = min(series), max(series)
    if hi <= lo:
        raise NumericalError("min-max normalization of a constant series is degenerate")
    return [100.0 * (x - lo) / (hi - lo) for x in series]
