"""Logistic-regression separability with stratified k-fold CV, and power-iteration PCA."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import DegenerateData, NonFinite, SingleClass, TooFewSamples


def standardize_fit(X: np.ndarray):
    """Column means and scales; constant columns get scale 1 so they map to zeros."""
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return mean, scale


# ---------------------------------------------------------------- logistic regression


@dataclass
class LogisticConfig:
    max_iters: int = 20000
    learning_rate: float | None = None  # None: 1/L from the data's Lipschitz bound
    l2_lambda: float = 1e-3
    tol: float = 1e-5


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    n_iter: int = 0
    converged: bool = False
    loss_history: list = field(default_factory=list, repr=False)

    def decision_function(self, X) -> np.ndarray:
        Xs = (np.asarray(X, dtype=float) - self.mean) / self.scale
        return Xs @ self.weights + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)


def logistic_loss_grad(w, b, Xs, y, l2_lambda):
    """Mean negative log-likelihood plus ``l2_lambda/2 * |w|^2`` and its gradient (bias unpenalised)."""
    z = Xs @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2_lambda * (w @ w))
    r = expit(z) - y
    gw = Xs.T @ r / len(y) + l2_lambda * w
    gb = float(r.mean())
    return loss, gw, gb


def _check_labels(y):
    y = np.asarray(y).ravel()
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    if np.unique(y).size < 2:
        raise SingleClass("both classes are required to fit a classifier")
    return y.astype(float)


def logistic_fit(X, y, config: LogisticConfig | None = None) -> LogisticModel:
    cfg = config or LogisticConfig()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = _check_labels(y)
    if X.shape[0] != y.size or y.size < 2:
        raise ValueError("X and y must align and hold at least two rows")
    mean, scale = standardize_fit(X)
    Xs = (X - mean) / scale
    n, d = Xs.shape
    lr = cfg.learning_rate
    if lr is None:
        aug = np.hstack([Xs, np.ones((n, 1))])
        lipschitz = 0.25 * np.linalg.norm(aug, 2) ** 2 / n + cfg.l2_lambda
        lr = 1.0 / lipschitz
    w, b = np.zeros(d), 0.0
    history = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        loss, gw, gb = logistic_loss_grad(w, b, Xs, y, cfg.l2_lambda)
        if not np.isfinite(loss):
            raise NonFinite(f"loss diverged at iteration {it}; lower the learning rate")
        history.append(loss)
        if np.sqrt(gw @ gw + gb * gb) < cfg.tol:
            converged = True
            break
        w = w - lr * gw
        b = b - lr * gb
    return LogisticModel(w, b, mean, scale, it, converged, history)


def stratified_folds(y, k: int, seed: int) -> list[np.ndarray]:
    """Seeded, class-stratified partition of row indices into ``k`` folds."""
    y = np.asarray(y).ravel()
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in np.unique(y)])
    fold_of = np.empty(y.size, dtype=int)
    fold_of[order] = np.arange(y.size) % k
    return [np.flatnonzero(fold_of == f) for f in range(k)]


def kfold_cv_accuracy(X, y, k: int = 10, seed: int = 0, config: LogisticConfig | None = None) -> float:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y).ravel().astype(int)
    if y.size < k:
        raise TooFewSamples(f"{y.size} rows cannot fill {k} folds")
    _check_labels(y)
    accs = []
    for test_idx in stratified_folds(y, k, seed):
        train = np.ones(y.size, dtype=bool)
        train[test_idx] = False
        model = logistic_fit(X[train], y[train], config)
        accs.append(float(np.mean(model.predict(X[test_idx]) == y[test_idx])))
    return float(np.mean(accs))


# ---------------------------------------------------------------- PCA


@dataclass
class PcaModel:
    components: np.ndarray  # (n_components, d), orthonormal rows
    mean: np.ndarray
    scale: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    standardized: bool = True


def _power_iteration(A, start, basis, max_iter, tol):
    def orth(v):
        for u in basis:
            v = v - (u @ v) * u
        return v

    v = orth(start)
    v /= np.linalg.norm(v)
    floor = 1e-14 * max(np.abs(A).max(), 1e-300)
    for _ in range(max_iter):
        w = orth(A @ v)
        norm = np.linalg.norm(w)
        if norm <= floor:
            # remaining spectrum is numerically zero; any orthogonal direction will do
            return v
        w /= norm
        if w @ v < 0:
            w = -w
        if np.linalg.norm(w - v) < tol:
            return w
        v = w
    return v


def pca_fit(X, n_components: int = 2, standardize: bool = True, seed: int = 0,
            max_iter: int = 20000, tol: float = 1e-12) -> PcaModel:
    """Top principal axes of the column covariance by power iteration with deflation.

    Each axis is signed so that its largest-magnitude loading is positive.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    if n < 2 or d < n_components:
        raise ValueError(f"need n >= 2 and d >= {n_components}; got {X.shape}")
    if standardize:
        mean, scale = standardize_fit(X)
    else:
        mean, scale = X.mean(axis=0), np.ones(d)
    Z = (X - mean) / scale
    cov = Z.T @ Z / (n - 1)
    total = float(np.trace(cov))
    if total <= 0:
        raise DegenerateData("data has zero total variance")
    rng = np.random.default_rng(seed)
    A = cov.copy()
    comps, eigs = [], []
    for _ in range(n_components):
        v = _power_iteration(A, rng.standard_normal(d), comps, max_iter, tol)
        lam = float(v @ cov @ v)
        A = A - lam * np.outer(v, v)
        j = int(np.argmax(np.abs(v)))
        comps.append(v if v[j] > 0 else -v)
        eigs.append(max(lam, 0.0))
    eigs = np.array(eigs)
    return PcaModel(
        components=np.array(comps),
        mean=mean,
        scale=scale,
        explained_variance=eigs,
        explained_variance_ratio=np.clip(eigs / total, 0.0, 1.0),
        standardized=standardize,
    )


def pca_transform(model: PcaModel, X) -> np.ndarray:
    Z = (np.asarray(X, dtype=float) - model.mean) / model.scale
    return Z @ model.components.T
