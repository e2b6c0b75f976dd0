"""Fold-local standardization, ridge logistic regression, and PCA compression.

The logistic fit minimizes

    mean negative log-likelihood + (lam / n) * 0.5 * ||coefficients||^2

with an unpenalized intercept, solved by damped Newton/IRLS (see
``_kernels.irls_fit``).  Convergence: max-abs gradient < 1e-8 within 100
iterations.  The PCA pipeline projects standardized features onto the top-k
covariance eigenvectors (no whitening) and fits the same logistic model on
the scores; with k = p its predictions coincide with the direct fit because
the ridge penalty is invariant under orthonormal rotation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import irls_fit

__all__ = [
    "Standardizer",
    "LogisticModel",
    "PcaPipeline",
    "fit_standardizer",
    "fit_logistic",
    "predict_proba",
    "fit_pca_pipeline",
    "sigmoid",
    "penalized_objective",
    "penalized_gradient",
]

GRAD_TOL = 1e-8
MAX_ITER = 100

# tightest representable open-interval bounds for predicted risks
_RISK_LO = np.nextafter(0.0, 1.0)
_RISK_HI = np.nextafter(1.0, 0.0)


def sigmoid(eta):
    """Overflow-safe logistic function."""
    eta = np.asarray(eta, dtype=float)
    e = np.exp(-np.abs(eta))
    return np.where(eta >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


@dataclass(frozen=True)
class Standardizer:
    """Per-feature center/scale fitted on a training fold."""

    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        scale = np.asarray(self.scale, dtype=float)
        if mean.shape != scale.shape or mean.ndim != 1:
            raise ValueError("Standardizer mean/scale must be matching 1-D vectors")
        if np.any(scale <= 0):
            raise ValueError("Standardizer invariant violated: scale > 0 for every feature")
        mean.flags.writeable = False
        scale.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.mean.shape[0]:
            raise ValueError("Standardizer.transform: column count mismatch")
        return (X - self.mean) / self.scale


@dataclass(frozen=True)
class LogisticModel:
    coefficients: np.ndarray
    intercept: float
    ridge_strength: float
    n_iter: int
    grad_max: float
    converged: bool

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        if not np.all(np.isfinite(coef)) or not np.isfinite(self.intercept):
            raise ValueError("LogisticModel invariant violated: finite coefficients")
        coef.flags.writeable = False
        object.__setattr__(self, "coefficients", coef)

    def predict(self, X_std: np.ndarray) -> np.ndarray:
        X_std = np.asarray(X_std, dtype=float)
        if X_std.ndim != 2 or X_std.shape[1] != self.coefficients.shape[0]:
            raise ValueError("LogisticModel.predict: column count mismatch")
        eta = self.intercept + X_std @ self.coefficients
        return np.clip(sigmoid(eta), _RISK_LO, _RISK_HI)


@dataclass(frozen=True)
class PcaPipeline:
    standardizer: Standardizer
    components: np.ndarray      # p x k, orthonormal columns
    model: LogisticModel

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        if comps.ndim != 2:
            raise ValueError("PcaPipeline components must be a p x k matrix")
        gram = comps.T @ comps
        if not np.allclose(gram, np.eye(comps.shape[1]), atol=1e-10):
            raise ValueError("PcaPipeline invariant violated: components^T components "
                             "= identity (tol 1e-10)")
        comps.flags.writeable = False
        object.__setattr__(self, "components", comps)

    def predict(self, X_raw: np.ndarray) -> np.ndarray:
        scores = self.standardizer.transform(X_raw) @ self.components
        return self.model.predict(scores)


def fit_standardizer(train_features: np.ndarray) -> Standardizer:
    """Column means and population SDs; zero-variance columns get scale 1."""
    X = np.asarray(train_features, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("fit_standardizer: need a 2-D matrix with at least one row")
    mean = X.mean(axis=0)
    sd = X.std(axis=0)  # population SD
    scale = np.where(sd == 0.0, 1.0, sd)
    return Standardizer(mean=mean, scale=scale)


def penalized_objective(X_std, y, intercept, coef, lam) -> float:
    """The fitted objective: mean NLL plus (lam/n) * 0.5 * ||coef||^2."""
    X_std = np.asarray(X_std, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X_std.shape[0]
    eta = intercept + X_std @ np.asarray(coef, dtype=float)
    nll = np.mean(np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta))) - y * eta)
    return float(nll + 0.5 * lam / n * np.sum(np.square(coef)))


def penalized_gradient(X_std, y, intercept, coef, lam) -> np.ndarray:
    """Gradient of penalized_objective w.r.t. (intercept, coef)."""
    X_std = np.asarray(X_std, dtype=float)
    y = np.asarray(y, dtype=float)
    coef = np.asarray(coef, dtype=float)
    n = X_std.shape[0]
    p = sigmoid(intercept + X_std @ coef)
    g_b = np.mean(p - y)
    g_w = (X_std.T @ (p - y) + lam * coef) / n
    return np.concatenate([[g_b], g_w])


def fit_logistic(X_std: np.ndarray, y: np.ndarray, lam: float = 1.0) -> LogisticModel:
    """Ridge-penalized logistic fit on standardized inputs.

    Raises on single-class y; returns a warning-flagged model if the IRLS
    loop hits the iteration cap without reaching the gradient tolerance.
    """
    X_std = np.asarray(X_std, dtype=float)
    y = np.asarray(y, dtype=float)
    if X_std.ndim != 2:
        raise ValueError("fit_logistic: X_std must be 2-D (use shape (n, 0) for "
                         "intercept-only)")
    n = X_std.shape[0]
    if y.shape != (n,):
        raise ValueError("fit_logistic: y length must match X rows")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("fit_logistic: y must be binary 0/1")
    if y.min() == y.max():
        raise ValueError("fit_logistic: both classes must be present")
    if lam < 0:
        raise ValueError("fit_logistic: ridge strength must be nonnegative")

    Xa = np.concatenate([np.ones((n, 1)), X_std], axis=1)
    beta, n_iter, grad_max, converged, _ = irls_fit(
        Xa, y, float(lam), GRAD_TOL, MAX_ITER
    )
    if not converged:
        warnings.warn(
            f"logistic fit did not reach gradient tolerance {GRAD_TOL:g} in "
            f"{MAX_ITER} iterations (max-abs gradient {grad_max:.3g})",
            RuntimeWarning,
            stacklevel=2,
        )
    return LogisticModel(
        coefficients=beta[1:],
        intercept=float(beta[0]),
        ridge_strength=float(lam),
        n_iter=int(n_iter),
        grad_max=float(grad_max),
        converged=bool(converged),
    )


def predict_proba(
    model: LogisticModel,
    standardizer: Standardizer,
    X_raw: np.ndarray,
    active: tuple[int, ...] | list[int] | None = None,
) -> np.ndarray:
    """Risks for raw rows: standardize the active columns, then apply the model."""
    X_raw = np.asarray(X_raw, dtype=float)
    if X_raw.ndim != 2:
        raise ValueError("predict_proba: X_raw must be 2-D")
    if active is not None:
        active = list(active)
        if any(i < 0 or i >= X_raw.shape[1] for i in active):
            raise ValueError("predict_proba: active indices outside X_raw columns")
        X_raw = X_raw[:, active]
    return model.predict(standardizer.transform(X_raw))


def fit_pca_pipeline(
    X_raw: np.ndarray, y: np.ndarray, k: int, lam: float = 1.0
) -> PcaPipeline:
    """Standardize, project on the top-k covariance eigenvectors, fit logistic.

    Components are ordered by descending eigenvalue with each column's
    largest-magnitude loading made positive; no whitening.
    """
    X_raw = np.asarray(X_raw, dtype=float)
    if X_raw.ndim != 2 or X_raw.shape[0] < 2:
        raise ValueError("fit_pca_pipeline: need at least two rows")
    if k < 1:
        raise ValueError("fit_pca_pipeline: k must be a positive integer")
    std = fit_standardizer(X_raw)
    Z = std.transform(X_raw)
    n = Z.shape[0]
    cov = Z.T @ Z / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    rank = int(np.sum(eigvals > max(eigvals[0], 0.0) * 1e-10)) if eigvals[0] > 0 else 0
    if k > rank:
        raise ValueError(f"fit_pca_pipeline: k={k} exceeds rank {rank} of the "
                         "standardized matrix")
    comps = eigvecs[:, :k].copy()
    for j in range(k):
        jmax = int(np.argmax(np.abs(comps[:, j])))
        if comps[jmax, j] < 0:
            comps[:, j] = -comps[:, j]
    scores = Z @ comps
    model = fit_logistic(scores, y, lam=lam)
    return PcaPipeline(standardizer=std, components=comps, model=model)
