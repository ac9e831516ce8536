"""Stationarity, stability, causality, and collinearity diagnostics, plus the
four data-driven weight derivations (PCA, elastic net, CRITIC, entropy).

All regression-based tests share one OLS backbone so information criteria are
computed consistently across ADF, Chow, Granger, and the VAR layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DataError, NumericalError

THEORETICAL = (0.30, 0.25, 0.25, 0.20)


# ---------------------------------------------------------------------------
# OLS backbone
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegressionFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    standard_errors: np.ndarray
    ssr: float
    n: int
    k: int
    aic: float
    bic: float
    hq: float


def ols(x: np.ndarray, y: np.ndarray) -> RegressionFit:
    """Least squares with Gaussian-likelihood information criteria."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = x.shape
    if n <= k:
        raise DataError(f"OLS needs more observations ({n}) than parameters ({k})")
    xtx = x.T @ x
    if np.linalg.matrix_rank(xtx) < k:
        raise NumericalError("design matrix is rank deficient")
    beta = np.linalg.solve(xtx, x.T @ y)
    residuals = y - x @ beta
    ssr = float(residuals @ residuals)
    sigma2 = ssr / (n - k) if n > k else np.inf
    try:
        se = np.sqrt(np.diag(np.linalg.inv(xtx)) * sigma2)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular design matrix") from exc
    # concentrated Gaussian log-likelihood
    if ssr <= 0:
        loglik = np.inf
        aic = bic = hq = -np.inf
    else:
        loglik = -0.5 * n * (math.log(2 * math.pi) + math.log(ssr / n) + 1.0)
        aic = -2 * loglik + 2 * k
        bic = -2 * loglik + k * math.log(n)
        hq = -2 * loglik + 2 * k * math.log(math.log(n))
    return RegressionFit(beta, residuals, se, ssr, n, k, aic, bic, hq)


def _lag_matrix(values: np.ndarray, lags: int) -> np.ndarray:
    """Columns [x_{t-1}, ..., x_{t-lags}] for t = lags..n-1."""
    n = len(values)
    return np.column_stack([values[lags - j - 1 : n - j - 1] for j in range(lags)])


# ---------------------------------------------------------------------------
# ADF with an embedded three-anchor p-value table
# ---------------------------------------------------------------------------

# Asymptotic Dickey-Fuller critical values, intercept-only regression.
_ADF_ANCHORS = ((-3.43, 0.01), (-2.86, 0.05), (-2.57, 0.10))


def _adf_p_value(statistic: float) -> float:
    """Log-linear interpolation through the embedded significance anchors."""
    pts = _ADF_ANCHORS
    if statistic <= pts[0][0]:
        lo, hi = pts[0], pts[1]
    elif statistic >= pts[-1][0]:
        lo, hi = pts[-2], pts[-1]
    else:
        lo, hi = (pts[0], pts[1]) if statistic <= pts[1][0] else (pts[1], pts[2])
    slope = (math.log(hi[1]) - math.log(lo[1])) / (hi[0] - lo[0])
    logp = math.log(lo[1]) + slope * (statistic - lo[0])
    return min(0.999, max(1e-9, math.exp(logp)))


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    chosen_lag: int
    n_used: int
    critical_values: dict[str, float] = field(
        default_factory=lambda: {"1%": -3.43, "5%": -2.86, "10%": -2.57}
    )

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "chosen_lag": self.chosen_lag,
            "n_used": self.n_used,
            "critical_values": self.critical_values,
        }


def adf_test(series: list[float] | np.ndarray, max_lag: int | None = None) -> AdfResult:
    """Unit-root test: regression of differences on the lagged level plus
    AIC-chosen difference lags, intercept included."""
    y = np.asarray(series, dtype=float)
    n = len(y)
    if np.ptp(y) == 0:
        raise NumericalError("ADF is undefined for a constant series")
    if max_lag is None:
        max_lag = min(int(12 * (n / 100.0) ** 0.25), n // 2 - 2)
    if n <= max_lag + 10:
        raise DataError(f"need more than max_lag + 10 = {max_lag + 10} observations, have {n}")

    dy = np.diff(y)

    def design(p: int, align: int) -> tuple[np.ndarray, np.ndarray]:
        # common alignment at `align` so information criteria are comparable
        rows = len(dy) - align
        lhs = dy[align:]
        cols = [np.ones(rows), y[align:-1]]
        for j in range(1, p + 1):
            cols.append(dy[align - j : align - j + rows])
        return np.column_stack(cols), lhs

    best_lag, best_aic = 0, np.inf
    for p in range(0, max_lag + 1):
        x, lhs = design(p, max_lag)
        fit = ols(x, lhs)
        if fit.aic < best_aic:
            best_aic, best_lag = fit.aic, p
    x, lhs = design(best_lag, best_lag)
    fit = ols(x, lhs)
    statistic = float(fit.coefficients[1] / fit.standard_errors[1])
    return AdfResult(statistic, _adf_p_value(statistic), best_lag, fit.n)


# ---------------------------------------------------------------------------
# KPSS with Bartlett kernel and data-dependent bandwidth
# ---------------------------------------------------------------------------

KPSS_CRIT_5 = 0.463
KPSS_CRIT_1 = 0.739


@dataclass(frozen=True)
class KpssResult:
    statistic: float
    bandwidth: int
    verdict: str  # stationary | non-stationary (5%) | non-stationary (1%)

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "bandwidth": self.bandwidth,
            "verdict": self.verdict,
            "critical_values": {"5%": KPSS_CRIT_5, "1%": KPSS_CRIT_1},
        }


def _kpss_auto_bandwidth(e: np.ndarray) -> int:
    n = len(e)
    covlags = int(n ** (2.0 / 9.0))
    s0 = float(e @ e) / n
    s1 = 0.0
    for i in range(1, covlags + 1):
        gamma = float(e[i:] @ e[:-i]) / (n / 2.0)
        s0 += gamma
        s1 += i * gamma
    if s0 == 0:
        return 0
    s_hat = s1 / s0
    gamma_hat = 1.1447 * (s_hat * s_hat) ** (1.0 / 3.0)
    return int(gamma_hat * n ** (1.0 / 3.0))


def kpss_test(series: list[float] | np.ndarray) -> KpssResult:
    """Level-stationarity test against fixed 5%/1% critical values."""
    y = np.asarray(series, dtype=float)
    n = len(y)
    if n < 30:
        raise DataError(f"KPSS needs at least 30 observations, have {n}")
    e = y - y.mean()
    bandwidth = min(_kpss_auto_bandwidth(e), n - 1)
    s2 = float(e @ e) / n
    for lag in range(1, bandwidth + 1):
        w = 1.0 - lag / (bandwidth + 1.0)
        s2 += 2.0 * w * float(e[lag:] @ e[:-lag]) / n
    partial = np.cumsum(e)
    eta = float(partial @ partial) / (n * n)
    statistic = eta / s2 if s2 > 0 else 0.0
    if statistic >= KPSS_CRIT_1:
        verdict = "non-stationary (1%)"
    elif statistic >= KPSS_CRIT_5:
        verdict = "non-stationary (5%)"
    else:
        verdict = "stationary"
    return KpssResult(statistic, bandwidth, verdict)


# ---------------------------------------------------------------------------
# Structural stability: Chow and recursive-residual CUSUM
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChowResult:
    f_stat: float
    p_value: float
    critical_5pct: float
    break_index: int

    def to_json(self) -> dict:
        return {
            "f_stat": self.f_stat,
            "p_value": self.p_value,
            "critical_5pct": self.critical_5pct,
            "break_index": self.break_index,
        }


def _ar1_ssr(y: np.ndarray) -> tuple[float, int]:
    x = np.column_stack([np.ones(len(y) - 1), y[:-1]])
    fit = ols(x, y[1:])
    return fit.ssr, fit.n


def chow_test(series: list[float] | np.ndarray, break_index: int) -> ChowResult:
    """Structural-break F test comparing a pooled AR(1) fit against separate
    fits on each side of the break."""
    y = np.asarray(series, dtype=float)
    n = len(y)
    k = 2  # intercept and AR coefficient
    if break_index <= k + 1 or break_index >= n - k - 1:
        raise DataError(f"break index {break_index} leaves a degenerate segment")
    if np.ptp(y) == 0:
        raise NumericalError("Chow test undefined for a constant series")
    ssr_pooled, _ = _ar1_ssr(y)
    ssr_1, n1 = _ar1_ssr(y[:break_index])
    ssr_2, n2 = _ar1_ssr(y[break_index:])
    df2 = n1 + n2 - 2 * k
    if df2 <= 0:
        raise DataError("segments too short for the Chow test")
    denominator = (ssr_1 + ssr_2) / df2
    if denominator <= 0:
        raise NumericalError("degenerate segment variance in Chow test")
    f_stat = max(0.0, (ssr_pooled - ssr_1 - ssr_2) / k) / denominator
    p = float(stats.f.sf(f_stat, k, df2))
    crit = float(stats.f.ppf(0.95, k, df2))
    return ChowResult(float(f_stat), p, crit, break_index)


@dataclass(frozen=True)
class CusumResult:
    max_excursion: float     # max of |path| / (1 + 2*tau), comparable to boundary
    boundary: float          # 0.948 at the 5% level
    crossing_indices: tuple[int, ...]
    path: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "max_excursion": self.max_excursion,
            "boundary": self.boundary,
            "crossings": list(self.crossing_indices),
        }


CUSUM_BOUNDARY_5PCT = 0.948


def cusum_test(series: list[float] | np.ndarray) -> CusumResult:
    """Recursive-residual CUSUM for the constant-mean model.

    The path of scaled recursive-residual partial sums is compared to the
    straight 5% significance lines; the excursion is reported after dividing
    out the line's slope term so one boundary number (0.948) applies.
    """
    y = np.asarray(series, dtype=float)
    n = len(y)
    if n < 30:
        raise DataError(f"CUSUM needs at least 30 observations, have {n}")
    k = 1  # mean-only model
    w = np.empty(n - k)
    for r in range(k, n):
        prior_mean = y[:r].mean()
        w[r - k] = (y[r] - prior_mean) * math.sqrt(r / (r + 1.0))
    sigma = w.std(ddof=1)
    if sigma == 0:
        raise NumericalError("CUSUM undefined: zero recursive-residual variance")
    m = len(w)
    path = np.cumsum(w) / (sigma * math.sqrt(m))
    tau = np.arange(1, m + 1) / m
    scaled = np.abs(path) / (1.0 + 2.0 * tau)
    crossings = tuple(int(i) + k for i in np.nonzero(scaled > CUSUM_BOUNDARY_5PCT)[0])
    return CusumResult(float(scaled.max()), CUSUM_BOUNDARY_5PCT, crossings, tuple(path))


# ---------------------------------------------------------------------------
# Granger causality toward a binary crisis indicator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrangerResult:
    f_stat: float
    p_value: float
    chosen_lag: int

    def to_json(self) -> dict:
        return {"f_stat": self.f_stat, "p_value": self.p_value, "chosen_lag": self.chosen_lag}


def granger_test(
    cause: list[float] | np.ndarray,
    effect: list[float] | np.ndarray,
    max_lag: int = 5,
) -> GrangerResult:
    """Restricted-vs-unrestricted F test; lag order picked by BIC on the
    unrestricted regression."""
    x = np.asarray(cause, dtype=float)
    y = np.asarray(effect, dtype=float)
    if len(x) != len(y):
        raise DataError("cause and effect series must align")
    n = len(y)
    if n <= 2 * max_lag + 10:
        raise DataError(f"series too short for max_lag={max_lag}")

    def fit_pair(p: int, align: int) -> tuple[RegressionFit, RegressionFit]:
        rows = n - align
        lhs = y[align:]
        ylags = _lag_matrix(y, align)[:, :p] if p else np.empty((rows, 0))
        xlags = _lag_matrix(x, align)[:, :p] if p else np.empty((rows, 0))
        ones = np.ones((rows, 1))
        unrestricted = ols(np.hstack([ones, ylags, xlags]), lhs)
        restricted = ols(np.hstack([ones, ylags]), lhs)
        return restricted, unrestricted

    best_lag, best_bic = 1, np.inf
    for p in range(1, max_lag + 1):
        _, unrestricted = fit_pair(p, max_lag)
        if unrestricted.bic < best_bic:
            best_bic, best_lag = unrestricted.bic, p
    restricted, unrestricted = fit_pair(best_lag, best_lag)
    df2 = unrestricted.n - unrestricted.k
    if df2 <= 0:
        raise DataError("insufficient degrees of freedom for Granger test")
    if unrestricted.ssr <= 0:
        raise NumericalError("degenerate unrestricted fit in Granger test")
    f_stat = ((restricted.ssr - unrestricted.ssr) / best_lag) / (unrestricted.ssr / df2)
    f_stat = max(0.0, float(f_stat))
    return GrangerResult(f_stat, float(stats.f.sf(f_stat, best_lag, df2)), best_lag)


# ---------------------------------------------------------------------------
# Collinearity diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CollinearityReport:
    vif: tuple[float, ...]
    correlation: np.ndarray
    condition_number: float
    eigenvalues: tuple[float, ...]
    pca_variance_shares: tuple[float, ...]
    pca_loadings: np.ndarray
    rank_deficient: bool

    def to_json(self) -> dict:
        return {
            "vif": [v if math.isfinite(v) else None for v in self.vif],
            "correlation": self.correlation.tolist(),
            "condition_number": self.condition_number,
            "eigenvalues": list(self.eigenvalues),
            "pca_variance_shares": list(self.pca_variance_shares),
            "pca_loadings": self.pca_loadings.tolist(),
            "rank_deficient": self.rank_deficient,
        }


def _correlation_matrix(x: np.ndarray) -> np.ndarray:
    centered = x - x.mean(axis=0)
    std = centered.std(axis=0, ddof=1)
    safe = np.where(std > 0, std, 1.0)
    z = centered / safe
    corr = z.T @ z / (len(x) - 1)
    np.fill_diagonal(corr, 1.0)
    return np.clip(corr, -1.0, 1.0)


def collinearity_diagnostics(matrix: np.ndarray) -> CollinearityReport:
    """VIFs, correlation structure, eigen spectrum, and PCA shares for the
    sub-index panel."""
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 5:
        raise DataError("collinearity diagnostics need at least 5 rows")
    n, k = x.shape
    vifs = []
    rank_deficient = False
    for j in range(k):
        others = np.delete(x, j, axis=1)
        design = np.hstack([np.ones((n, 1)), others])
        target = x[:, j]
        try:
            fit = ols(design, target)
            tss = float(((target - target.mean()) ** 2).sum())
            r2 = 1.0 - fit.ssr / tss if tss > 0 else 1.0
        except NumericalError:
            r2 = 1.0
        if r2 >= 1.0 - 1e-12:
            vifs.append(float("inf"))
            rank_deficient = True
        else:
            vifs.append(1.0 / (1.0 - r2))
    corr = _correlation_matrix(x)
    eigenvalues, eigenvectors = np.linalg.eigh(corr)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]
    min_eig = eigenvalues[-1]
    condition = float("inf") if min_eig <= 1e-12 else float(eigenvalues[0] / min_eig)
    if condition == float("inf"):
        rank_deficient = True
    shares = tuple(float(v) for v in eigenvalues / eigenvalues.sum())
    return CollinearityReport(
        vif=tuple(vifs),
        correlation=corr,
        condition_number=condition,
        eigenvalues=tuple(float(v) for v in eigenvalues),
        pca_variance_shares=shares,
        pca_loadings=eigenvectors,
        rank_deficient=rank_deficient,
    )


# ---------------------------------------------------------------------------
# Weight derivations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightDerivation:
    method: str
    weights: tuple[float, float, float, float]
    diagnostics: dict
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "weights": list(self.weights),
            "diagnostics": self.diagnostics,
            "flags": sorted(self.flags),
        }


def spearman(a: list[float] | np.ndarray, b: list[float] | np.ndarray) -> float:
    with warnings.catch_warnings():
        # constant input (e.g. equal weights) is a legitimate query; map nan to 0
        warnings.simplefilter("ignore", stats.ConstantInputWarning)
        rho = stats.spearmanr(a, b).statistic
    return float(rho) if rho == rho else 0.0


def _normalize_weights(raw: np.ndarray, method: str, diagnostics: dict, flags: list[str]) -> WeightDerivation:
    raw = np.clip(np.asarray(raw, dtype=float), 0.0, None)
    total = raw.sum()
    if total <= 0:
        flags.append("all_zero_fallback")
        weights = np.full(len(raw), 1.0 / len(raw))
    else:
        weights = raw / total
    diagnostics = dict(diagnostics)
    diagnostics["spearman_vs_theoretical"] = spearman(weights, THEORETICAL)
    return WeightDerivation(method, tuple(float(w) for w in weights), diagnostics, tuple(flags))


def _minmax_columns(x: np.ndarray) -> tuple[np.ndarray, list[int]]:
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    span = hi - lo
    degenerate = [j for j in range(x.shape[1]) if span[j] <= 0]
    safe = np.where(span > 0, span, 1.0)
    scaled = (x - lo) / safe
    for j in degenerate:
        scaled[:, j] = 0.0
    return scaled, degenerate


def derive_weights_pca(matrix: np.ndarray, scaling: str = "minmax") -> WeightDerivation:
    """Weights from the first principal component's absolute loadings.

    ``scaling`` picks the pre-processing: 'minmax' rescales each column to
    [0,1] and decomposes the covariance; 'correlation' decomposes the
    correlation matrix of raw columns.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 3:
        raise DataError("PCA weight derivation needs at least 3 rows")
    flags: list[str] = []
    if scaling == "minmax":
        scaled, degenerate = _minmax_columns(x)
        if degenerate:
            flags.append("degenerate_columns")
        centered = scaled - scaled.mean(axis=0)
        target = centered.T @ centered / (len(scaled) - 1)
    elif scaling == "correlation":
        target = _correlation_matrix(x)
    else:
        raise DataError(f"unknown PCA scaling {scaling!r}")
    eigenvalues, eigenvectors = np.linalg.eigh(target)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    loadings = eigenvectors[:, order]
    total_var = eigenvalues.sum()
    pc1_share = float(eigenvalues[0] / total_var) if total_var > 0 else 0.0
    raw = np.abs(loadings[:, 0])
    return _normalize_weights(
        raw,
        "pca",
        {
            "scaling": scaling,
            "pc1_variance_share": pc1_share,
            "eigenvalues": [float(v) for v in eigenvalues],
        },
        flags,
    )


def elastic_net_cd(
    x: np.ndarray,
    y: np.ndarray,
    alpha: float,
    l1_ratio: float,
    tol: float = 1e-10,
    max_sweeps: int = 10000,
) -> tuple[np.ndarray, float, list[float]]:
    """Coordinate-descent elastic net on centered data.

    Minimizes (1/2n)||y - c - X b||^2 + alpha*(l1*|b|_1 + (1-l1)/2*|b|^2).
    Returns (coefficients, intercept, per-sweep objective values); the
    objective trace is non-increasing by construction of each update.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = x.shape
    x_mean = x.mean(axis=0)
    y_mean = y.mean()
    xc = x - x_mean
    yc = y - y_mean
    col_ss = (xc * xc).sum(axis=0) / n

    beta = np.zeros(k)
    residual = yc.copy()

    def objective() -> float:
        penalty = alpha * (
            l1_ratio * np.abs(beta).sum() + 0.5 * (1 - l1_ratio) * float(beta @ beta)
        )
        return float(residual @ residual) / (2 * n) + penalty

    trace = [objective()]
    shrink = alpha * l1_ratio
    for _ in range(max_sweeps):
        max_delta = 0.0
        for j in range(k):
            if col_ss[j] <= 0:
                continue
            rho = float(xc[:, j] @ residual) / n + col_ss[j] * beta[j]
            new = math.copysign(max(abs(rho) - shrink, 0.0), rho) / (
                col_ss[j] + alpha * (1 - l1_ratio)
            )
            delta = new - beta[j]
            if delta != 0.0:
                residual -= delta * xc[:, j]
                beta[j] = new
                max_delta = max(max_delta, abs(delta))
        trace.append(objective())
        if trace[-1] > trace[-2] + 1e-12:
            raise NumericalError("elastic net objective increased within a sweep")
        if max_delta < tol:
            break
    intercept = y_mean - float(x_mean @ beta)
    return beta, intercept, trace


def derive_weights_elastic_net(
    matrix: np.ndarray,
    forward_target: np.ndarray,
    cv_folds: int = 5,
    alpha_grid: tuple[float, ...] = (0.1, 0.5, 1.0),
    l1_grid: tuple[float, ...] = (0.1, 0.5, 0.9),
) -> WeightDerivation:
    """Grid-searched elastic net against the 30-day-forward index, with
    contiguous blocked CV folds; coefficients clipped at zero and normalized."""
    x = np.asarray(matrix, dtype=float)
    y = np.asarray(forward_target, dtype=float)
    if len(x) != len(y):
        raise DataError("matrix and forward target must align")
    n = len(y)
    if n < cv_folds * 2:
        raise DataError(f"need at least {cv_folds * 2} rows for {cv_folds}-fold CV")

    bounds = [round(i * n / cv_folds) for i in range(cv_folds + 1)]
    folds = [(bounds[i], bounds[i + 1]) for i in range(cv_folds)]

    best = None
    cv_table = {}
    for alpha in alpha_grid:
        for l1 in l1_grid:
            errors = []
            for lo, hi in folds:
                train_idx = np.concatenate([np.arange(0, lo), np.arange(hi, n)])
                beta, intercept, _ = elastic_net_cd(x[train_idx], y[train_idx], alpha, l1)
                predicted = x[lo:hi] @ beta + intercept
                errors.append(float(((y[lo:hi] - predicted) ** 2).mean()))
            mean_mse = sum(errors) / len(errors)
            cv_table[f"alpha={alpha},l1={l1}"] = mean_mse
            if best is None or mean_mse < best[0]:
                best = (mean_mse, alpha, l1)
    _, alpha, l1 = best
    beta, intercept, trace = elastic_net_cd(x, y, alpha, l1)
    flags: list[str] = []
    return _normalize_weights(
        beta,
        "elastic_net",
        {
            "alpha": alpha,
            "l1_ratio": l1,
            "cv_mse": cv_table,
            "intercept": intercept,
            "n_sweeps": len(trace) - 1,
            "raw_coefficients": [float(b) for b in beta],
        },
        flags,
    )


def derive_weights_critic(matrix: np.ndarray) -> WeightDerivation:
    """Contrast (column dispersion) times conflict (one minus correlation)."""
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DataError("CRITIC needs at least 2 rows")
    scaled, degenerate = _minmax_columns(x)
    flags = ["degenerate_columns"] if degenerate else []
    sigma = scaled.std(axis=0, ddof=1)
    corr = _correlation_matrix(x)
    for j in degenerate:
        corr[j, :] = 0.0
        corr[:, j] = 0.0
        corr[j, j] = 1.0
    conflict = (1.0 - corr).sum(axis=1)
    raw = sigma * conflict
    return _normalize_weights(
        raw,
        "critic",
        {"sigma": [float(s) for s in sigma], "conflict": [float(c) for c in conflict]},
        flags,
    )


def derive_weights_entropy(matrix: np.ndarray) -> WeightDerivation:
    """Shannon-entropy weighting: low-entropy (informative) columns dominate."""
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DataError("entropy weighting needs at least 2 rows")
    if (x < 0).any():
        raise DataError("entropy weighting requires nonnegative columns")
    n, k = x.shape
    flags: list[str] = []
    divergences = np.empty(k)
    entropies = np.empty(k)
    for j in range(k):
        total = x[:, j].sum()
        if total <= 0:
            divergences[j] = 0.0
            entropies[j] = 1.0
            flags.append("degenerate_columns")
            continue
        p = x[:, j] / total
        nonzero = p[p > 0]
        e = -float(nonzero @ np.log(nonzero)) / math.log(n)
        entropies[j] = e
        divergences[j] = max(0.0, 1.0 - e)
    if "degenerate_columns" in flags:
        flags = ["degenerate_columns"]
    return _normalize_weights(
        divergences,
        "entropy",
        {"entropy": [float(e) for e in entropies]},
        flags,
    )
