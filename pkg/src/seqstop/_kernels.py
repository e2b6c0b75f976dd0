"""Hot numeric kernels with optional numba acceleration.

The two inner loops that dominate a repeated-split run are the damped
Newton/IRLS solve for the ridge-penalized logistic likelihood and the
midrank AUC statistic.  Both are written once in numba-compatible numpy
and compiled with ``@njit`` when the selected backend is ``numba``; the
uncompiled functions are the pure-numpy fallback.

Backend selection (read once at import):

    SEQSTOP_BACKEND=auto    use numba when importable (default)
    SEQSTOP_BACKEND=numba   require numba, fail loudly if missing
    SEQSTOP_BACKEND=numpy   force the pure-numpy path

``benchmarks/bench_kernels.py`` compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np


def _irls_core(Xa, y, lam, tol, max_iter):
    """Minimize mean logistic NLL + (lam/n) * 0.5 * ||coef||^2, intercept unpenalized.

    Xa is the design matrix with a leading column of ones.  Returns
    (beta, n_iter, grad_max, converged, obj_trace) where obj_trace[i] is the
    objective after i completed steps (obj_trace[0] is the starting value).
    Newton steps are halved until the objective decreases; convergence is
    max-abs gradient < tol.
    """
    n, k1 = Xa.shape
    beta = np.zeros(k1)
    pen = np.ones(k1)
    pen[0] = 0.0
    obj_trace = np.full(max_iter + 1, np.nan)

    # stable mean NLL: mean(max(eta,0) + log1p(exp(-|eta|)) - y*eta)
    eta = Xa @ beta
    cur = np.mean(np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta))) - y * eta)
    cur += 0.5 * lam / n * np.sum((pen * beta) ** 2)
    obj_trace[0] = cur

    converged = False
    grad_max = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        eta = Xa @ beta
        e = np.exp(-np.abs(eta))
        p = np.where(eta >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
        g = (Xa.T @ (p - y) + lam * pen * beta) / n
        grad_max = np.max(np.abs(g))
        if grad_max < tol:
            converged = True
            it -= 1
            break
        w = p * (1.0 - p)
        H = (Xa.T @ (w.reshape(-1, 1) * Xa) + lam * np.diag(pen)) / n
        # tiny jitter keeps the solve defined near separation; the minimizer
        # is unchanged because convergence is measured on the exact gradient
        H = H + 1e-12 * np.eye(k1)
        step = np.linalg.solve(H, g)
        cand = beta - step
        eta = Xa @ cand
        val = np.mean(np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta))) - y * eta)
        val += 0.5 * lam / n * np.sum((pen * cand) ** 2)
        halvings = 0
        while (np.isnan(val) or val > cur) and halvings < 60:
            step = step * 0.5
            cand = beta - step
            eta = Xa @ cand
            val = np.mean(np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta))) - y * eta)
            val += 0.5 * lam / n * np.sum((pen * cand) ** 2)
            halvings += 1
        if np.isnan(val) or val > cur:
            break  # no descent direction left; report non-convergence
        beta = cand
        cur = val
        obj_trace[it] = cur
    return beta, it, grad_max, converged, obj_trace


def _midrank_auc_core(scores, labels):
    """Mann-Whitney AUC with midrank tie handling.

    labels must be 0/1 floats with both classes present (checked upstream).
    """
    n = scores.shape[0]
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(n)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        mid = 0.5 * (i + j) + 1.0
        for m in range(i, j + 1):
            ranks[order[m]] = mid
        i = j + 1
    n1 = 0.0
    rank_sum = 0.0
    for m in range(n):
        if labels[m] == 1.0:
            n1 += 1.0
            rank_sum += ranks[m]
    n0 = n - n1
    return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0)


def _select_backend() -> str:
    choice = os.environ.get("SEQSTOP_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"SEQSTOP_BACKEND must be auto|numba|numpy, got {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
        return "numba"
    except ImportError:
        if choice == "numba":
            raise ImportError("SEQSTOP_BACKEND=numba but numba is not installed")
        return "numpy"


BACKEND = _select_backend()

if BACKEND == "numba":
    from numba import njit

    irls_fit = njit(cache=True)(_irls_core)
    midrank_auc = njit(cache=True)(_midrank_auc_core)
else:
    irls_fit = _irls_core
    midrank_auc = _midrank_auc_core
