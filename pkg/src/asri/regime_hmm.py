"""Gaussian hidden Markov regimes over the four sub-indices.

Full-covariance emissions, EM with scaled forward-backward passes, multiple
random restarts, and information-criterion comparison across state counts.
States are canonicalized by ascending mean risk so regime labels are stable.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .errors import DataError, NumericalError

N_FEATURES = 4
OPERATIONAL_K = 3
_COV_PARAMS = 10
_TRANSITION_FLOOR = 1e-10  # upper triangle of a symmetric 4x4


@dataclass(frozen=True)
class HmmModel:
    k: int
    initial: np.ndarray           # (K,)
    transition: np.ndarray        # (K, K) row-stochastic
    means: np.ndarray             # (K, 4)
    covariances: np.ndarray       # (K, 4, 4)
    log_likelihood: float
    seed: int
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        rows = self.transition.sum(axis=1)
        if not np.allclose(rows, 1.0, atol=1e-9):
            raise NumericalError("transition rows must sum to 1")

    def mean_risk(self) -> np.ndarray:
        """Per-state average of the four sub-index means."""
        return self.means.mean(axis=1)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "initial": self.initial.tolist(),
            "transition": self.transition.tolist(),
            "means": self.means.tolist(),
            "covariances": self.covariances.tolist(),
            "log_likelihood": self.log_likelihood,
            "seed": self.seed,
            "flags": sorted(self.flags),
        }


def n_parameters(k: int) -> int:
    return (k - 1) + k * (k - 1) + k * (N_FEATURES + _COV_PARAMS)


class _RestartFailed(Exception):
    pass


def _log_gaussian(obs: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise _RestartFailed("singular covariance") from exc
    diff = obs - mean
    solved = np.linalg.solve(chol, diff.T)
    maha = (solved * solved).sum(axis=0)
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    return -0.5 * (N_FEATURES * math.log(2 * math.pi) + logdet + maha)


def _regularize(cov: np.ndarray) -> tuple[np.ndarray, bool]:
    """PD repair: add a small multiple of the mean variance on the diagonal."""
    try:
        np.linalg.cholesky(cov)
        return cov, False
    except np.linalg.LinAlgError:
        pass
    mean_var = float(np.trace(cov)) / cov.shape[0]
    if mean_var <= 0:
        mean_var = 1.0
    return cov + 1e-6 * mean_var * np.eye(cov.shape[0]), True


def _emission_matrix(obs: np.ndarray, means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    k = len(means)
    logb = np.empty((len(obs), k))
    for j in range(k):
        logb[:, j] = _log_gaussian(obs, means[j], covs[j])
    return logb


def _forward_scaled(
    initial: np.ndarray, transition: np.ndarray, logb: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float]:
    """Scaled forward pass on shifted densities; returns (alpha, scales, logL)."""
    n, k = logb.shape
    shift = logb.max(axis=1)
    b = np.exp(logb - shift[:, None])
    alpha = np.empty((n, k))
    scales = np.empty(n)
    a = initial * b[0]
    scales[0] = a.sum()
    if scales[0] <= 0:
        raise _RestartFailed("zero forward mass")
    alpha[0] = a / scales[0]
    for t in range(1, n):
        a = (alpha[t - 1] @ transition) * b[t]
        scales[t] = a.sum()
        if scales[t] <= 0:
            raise _RestartFailed("zero forward mass")
        alpha[t] = a / scales[t]
    log_likelihood = float(np.log(scales).sum() + shift.sum())
    return alpha, scales, log_likelihood


def _backward_scaled(
    transition: np.ndarray, logb: np.ndarray, scales: np.ndarray
) -> np.ndarray:
    n, k = logb.shape
    shift = logb.max(axis=1)
    b = np.exp(logb - shift[:, None])
    beta = np.empty((n, k))
    beta[-1] = 1.0
    for t in range(n - 2, -1, -1):
        beta[t] = (transition @ (b[t + 1] * beta[t + 1])) / scales[t + 1]
    return beta


def _em_once(
    obs: np.ndarray,
    k: int,
    rng: np.random.Generator,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float, bool]:
    n = len(obs)
    idx = rng.choice(n, size=k, replace=False)
    means = obs[idx].astype(float).copy()
    global_cov, _ = _regularize(np.cov(obs.T, ddof=1))
    covs = np.stack([global_cov.copy() for _ in range(k)])
    if k == 1:
        transition = np.ones((1, 1))
    else:
        transition = np.full((k, k), 0.1 / (k - 1))
        np.fill_diagonal(transition, 0.9)
    initial = np.full(k, 1.0 / k)
    regularized = False

    prev_ll = -np.inf
    for _ in range(max_iter):
        logb = _emission_matrix(obs, means, covs)
        alpha, scales, ll = _forward_scaled(initial, transition, logb)
        if ll < prev_ll - 1e-8:
            raise NumericalError("EM log-likelihood decreased")
        beta = _backward_scaled(transition, logb, scales)
        gamma = alpha * beta
        gamma /= gamma.sum(axis=1, keepdims=True)

        shift = logb.max(axis=1)
        b = np.exp(logb - shift[:, None])
        # xi summed over time, built from scaled quantities in one product
        xi_sum = transition * (
            alpha[:-1].T @ (b[1:] * beta[1:] / scales[1:, None])
        )

        initial = gamma[0] / gamma[0].sum()
        denom = gamma[:-1].sum(axis=0)
        if np.any(denom <= 0):
            raise _RestartFailed("empty state")
        transition = xi_sum / denom[:, None]
        transition /= transition.sum(axis=1, keepdims=True)

        weights = gamma.sum(axis=0)
        means = (gamma.T @ obs) / weights[:, None]
        for j in range(k):
            diff = obs - means[j]
            cov = (gamma[:, j][:, None] * diff).T @ diff / weights[j]
            cov = 0.5 * (cov + cov.T)
            cov, fixed = _regularize(cov)
            if fixed:
                regularized = True
                try:
                    np.linalg.cholesky(cov)
                except np.linalg.LinAlgError as exc:
                    raise _RestartFailed("covariance collapse") from exc
            covs[j] = cov

        if abs(ll - prev_ll) < tol:
            prev_ll = ll
            break
        prev_ll = ll
    return initial, transition, means, covs, prev_ll, regularized


def _canonicalize(
    initial: np.ndarray,
    transition: np.ndarray,
    means: np.ndarray,
    covs: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    order = np.argsort(means.mean(axis=1), kind="stable")
    return (
        initial[order],
        transition[np.ix_(order, order)],
        means[order],
        covs[order],
    )


def fit_hmm(
    observations: np.ndarray,
    k: int,
    n_restarts: int = 10,
    tol: float = 1e-4,
    max_iter: int = 1000,
    seed: int = 42,
) -> HmmModel:
    """Best-of-restarts EM fit; deterministic for a fixed seed."""
    obs = np.asarray(observations, dtype=float)
    if obs.ndim != 2 or obs.shape[1] != N_FEATURES:
        raise DataError(f"observations must be n x {N_FEATURES}")
    n = len(obs)
    if n <= k * (N_FEATURES + _COV_PARAMS + k):
        raise DataError(
            f"need more than {k * (N_FEATURES + _COV_PARAMS + k)} observations "
            f"for K={k}, have {n}"
        )
    rng = np.random.default_rng(seed)
    best = None
    any_regularized = False
    for _ in range(n_restarts):
        try:
            result = _em_once(obs, k, rng, tol, max_iter)
        except _RestartFailed:
            continue
        if result[5]:
            any_regularized = True
        if best is None or result[4] > best[4]:
            best = result
    if best is None:
        raise NumericalError(f"all {n_restarts} restarts failed for K={k}")
    initial, transition, means, covs, ll, _ = best
    initial, transition, means, covs = _canonicalize(initial, transition, means, covs)
    # Rarely-visited states can leave transition entries that underflow to
    # exactly zero, making the chain artificially reducible. Floor them so
    # long-run statistics exist, and recompute the likelihood afterward so
    # the stored value matches the stored parameters.
    if np.any(transition < _TRANSITION_FLOOR):
        transition = np.maximum(transition, _TRANSITION_FLOOR)
        transition /= transition.sum(axis=1, keepdims=True)
        logb = _emission_matrix(obs, means, covs)
        _, _, ll = _forward_scaled(initial, transition, logb)
    flags = ("covariance_regularized",) if any_regularized else ()
    return HmmModel(k, initial, transition, means, covs, ll, seed, flags)


@dataclass(frozen=True)
class KSelectionRow:
    k: int
    log_likelihood: float
    n_params: int
    aic: float
    bic: float


@dataclass(frozen=True)
class KSelection:
    rows: tuple[KSelectionRow, ...]
    best_aic_k: int
    best_bic_k: int
    operational_k: int = OPERATIONAL_K

    def to_json(self) -> dict:
        return {
            "rows": [
                {
                    "k": r.k,
                    "log_likelihood": r.log_likelihood,
                    "n_params": r.n_params,
                    "aic": r.aic,
                    "bic": r.bic,
                }
                for r in self.rows
            ],
            "best_aic_k": self.best_aic_k,
            "best_bic_k": self.best_bic_k,
            "operational_k": self.operational_k,
        }


def select_k(
    observations: np.ndarray,
    k_candidates: tuple[int, ...] = (2, 3, 4),
    n_restarts: int = 10,
    seed: int = 42,
) -> KSelection:
    """Information-criterion table across state counts. The operational state
    count stays fixed at 3; the table is reported alongside."""
    obs = np.asarray(observations, dtype=float)
    n = len(obs)
    rows = []
    for k in sorted(k_candidates):
        model = fit_hmm(obs, k, n_restarts=n_restarts, seed=seed)
        p = n_parameters(k)
        aic = -2 * model.log_likelihood + 2 * p
        bic = -2 * model.log_likelihood + p * math.log(n)
        rows.append(KSelectionRow(k, model.log_likelihood, p, aic, bic))
    best_aic = min(rows, key=lambda r: r.aic).k
    best_bic = min(rows, key=lambda r: r.bic).k
    return KSelection(tuple(rows), best_aic, best_bic)


def ergodic_distribution(transition: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Stationary distribution by left power iteration."""
    a = np.asarray(transition, dtype=float)
    k = len(a)
    if not np.allclose(a.sum(axis=1), 1.0, atol=1e-9):
        raise DataError("transition matrix rows must sum to 1")
    _check_irreducible(a)
    pi = np.full(k, 1.0 / k)
    for _ in range(200000):
        nxt = pi @ a
        nxt /= nxt.sum()
        if np.abs(nxt - pi).max() < tol:
            pi = nxt
            break
        pi = nxt
    if np.abs(pi @ a - pi).max() > 1e-8:
        raise NumericalError("power iteration did not converge to a stationary vector")
    return pi


def _check_irreducible(a: np.ndarray) -> None:
    k = len(a)
    reach = a > 1e-12
    np.fill_diagonal(reach, True)
    # boolean transitive closure
    for _ in range(k):
        reach = reach | (reach @ reach)
    if reach.all():
        return
    classes = []
    seen = set()
    for i in range(k):
        if i in seen:
            continue
        members = tuple(
            j for j in range(k) if reach[i, j] and reach[j, i]
        )
        seen.update(members)
        leaves = any(
            reach[m, j] for m in members for j in range(k) if j not in members
        )
        if not leaves:
            classes.append(members)
    raise DataError(
        "transition matrix is reducible; absorbing classes: "
        + ", ".join(str(list(c)) for c in classes)
    )


def filter_probs(model: HmmModel, observations: np.ndarray) -> np.ndarray:
    """Forward-pass posteriors using only past and current observations."""
    obs = np.asarray(observations, dtype=float)
    logb = _emission_matrix(obs, model.means, model.covariances)
    alpha, _, _ = _forward_scaled(model.initial, model.transition, logb)
    return alpha


def smooth_probs(model: HmmModel, observations: np.ndarray) -> np.ndarray:
    """Forward-backward posteriors using the full sample."""
    obs = np.asarray(observations, dtype=float)
    logb = _emission_matrix(obs, model.means, model.covariances)
    alpha, scales, _ = _forward_scaled(model.initial, model.transition, logb)
    beta = _backward_scaled(model.transition, logb, scales)
    gamma = alpha * beta
    return gamma / gamma.sum(axis=1, keepdims=True)


def log_likelihood(model: HmmModel, observations: np.ndarray) -> float:
    obs = np.asarray(observations, dtype=float)
    logb = _emission_matrix(obs, model.means, model.covariances)
    _, _, ll = _forward_scaled(model.initial, model.transition, logb)
    return ll


def viterbi_path(model: HmmModel, observations: np.ndarray) -> np.ndarray:
    """Most likely state sequence, log-space dynamic program."""
    obs = np.asarray(observations, dtype=float)
    logb = _emission_matrix(obs, model.means, model.covariances)
    n, k = logb.shape
    with np.errstate(divide="ignore"):
        log_a = np.log(model.transition)
        log_pi = np.log(model.initial)
    delta = log_pi + logb[0]
    back = np.zeros((n, k), dtype=int)
    for t in range(1, n):
        scores = delta[:, None] + log_a
        back[t] = scores.argmax(axis=0)
        delta = scores.max(axis=0) + logb[t]
    path = np.empty(n, dtype=int)
    path[-1] = int(delta.argmax())
    for t in range(n - 2, -1, -1):
        path[t] = back[t + 1][path[t + 1]]
    return path


@dataclass(frozen=True)
class RegimeReport:
    model: HmmModel
    frequencies: np.ndarray        # share of days per state (smoothed argmax)
    mean_risk: np.ndarray
    persistence: np.ndarray        # diagonal of the transition matrix
    ergodic: np.ndarray
    filtered: np.ndarray
    smoothed: np.ndarray
    viterbi: np.ndarray
    selection: KSelection | None = None

    def to_json(self) -> dict:
        out = {
            "model": self.model.to_json(),
            "frequencies": self.frequencies.tolist(),
            "mean_risk": self.mean_risk.tolist(),
            "persistence": self.persistence.tolist(),
            "ergodic": self.ergodic.tolist(),
        }
        if self.selection is not None:
            out["selection"] = self.selection.to_json()
        return out


def regime_report(
    model: HmmModel,
    observations: np.ndarray,
    selection: KSelection | None = None,
) -> RegimeReport:
    obs = np.asarray(observations, dtype=float)
    filtered = filter_probs(model, obs)
    smoothed = smooth_probs(model, obs)
    path = smoothed.argmax(axis=1)
    counts = np.bincount(path, minlength=model.k).astype(float)
    return RegimeReport(
        model=model,
        frequencies=counts / counts.sum(),
        mean_risk=model.mean_risk(),
        persistence=np.diag(model.transition).copy(),
        ergodic=ergodic_distribution(model.transition),
        filtered=filtered,
        smoothed=smoothed,
        viterbi=viterbi_path(model, obs),
        selection=selection,
    )


def write_model_json(model: HmmModel, path: Path) -> None:
    path.write_text(json.dumps(model.to_json(), indent=2, sort_keys=True) + "\n")


def write_state_paths(
    path: Path,
    dates: list[date],
    filtered: np.ndarray,
    smoothed: np.ndarray,
    viterbi: np.ndarray,
) -> None:
    k = filtered.shape[1]
    header = (
        ["date"]
        + [f"filtered_p{j + 1}" for j in range(k)]
        + [f"smoothed_p{j + 1}" for j in range(k)]
        + ["viterbi_state"]
    )
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for i, day in enumerate(dates):
            row = (
                [day.isoformat()]
                + [repr(float(v)) for v in filtered[i]]
                + [repr(float(v)) for v in smoothed[i]]
                + [int(viterbi[i])]
            )
            writer.writerow(row)
