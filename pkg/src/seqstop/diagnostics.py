"""Risk-trajectory diagnostics: drift, projection loss, and bridge quantities."""

from __future__ import annotations

import numpy as np

from .core import DriftReport, LossSpec
from .stopping import acting_loss

__all__ = [
    "drift_diagnostic",
    "projection_loss",
    "decomposition_check",
    "decision_stability",
    "threshold_distance",
    "regret_bound_check",
]


def _pair(a, b, name_a="risk_t", name_b="risk_next"):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError(f"{name_a} and {name_b} must be matching nonempty 1-D vectors")
    return a, b


def drift_diagnostic(risk_t, risk_next, n_bins: int = 10) -> DriftReport:
    """Quantile-binned conditional mean of the stage-to-stage risk increment.

    Bins are equal-count groups of risk_t after a stable sort; when tied risk
    values make adjacent bin edges coincide, those bins merge and the weights
    follow the merged counts.
    """
    risk_t, risk_next = _pair(risk_t, risk_next)
    n = risk_t.size
    if n_bins < 1:
        raise ValueError("drift_diagnostic: n_bins must be positive")
    if n < n_bins:
        raise ValueError(f"drift_diagnostic: need at least n_bins={n_bins} points, "
                         f"got {n}")
    order = np.argsort(risk_t, kind="mergesort")
    sorted_risk = risk_t[order]
    delta_sorted = (risk_next - risk_t)[order]
    # equal-count boundaries, then merge any boundary falling inside a tie run
    bounds = [j * n // n_bins for j in range(n_bins + 1)]
    bounds = sorted(set(bounds))
    merged = [bounds[0]]
    for b in bounds[1:-1]:
        if sorted_risk[b - 1] == sorted_risk[b]:
            continue  # duplicate quantile edge: merge adjacent bins
        merged.append(b)
    merged.append(bounds[-1])
    weights = []
    means = []
    edges = [float(sorted_risk[0])]
    for lo, hi in zip(merged, merged[1:]):
        weights.append((hi - lo) / n)
        means.append(float(np.mean(delta_sorted[lo:hi])))
        edges.append(float(sorted_risk[hi - 1]))
    w = np.asarray(weights)
    d = np.asarray(means)
    return DriftReport(
        bin_edges=tuple(edges),
        weights=tuple(weights),
        bin_mean_increment=tuple(means),
        mean_drift=float(w @ d),
        mean_square_drift=float(w @ d**2),
    )


def projection_loss(x_hat, y_hat) -> float:
    """Mean squared gap between the full risk and the compressed risk."""
    x_hat, y_hat = _pair(x_hat, y_hat, "x_hat", "y_hat")
    return float(np.mean((x_hat - y_hat) ** 2))


def decomposition_check(d, x_exact, y_exact, weights=None):
    """Both sides of the squared-error decomposition identity.

    Evaluates lhs = E[(D - Y)^2] - E[(D - X)^2] and rhs = E[(X - Y)^2] over
    the supplied atoms.  With ``weights`` the expectation is probability
    weighted (exact enumeration of a discrete world); without, atoms count
    equally.  The two sides agree whenever the coarse information generating
    Y is contained in the information generating X; a mismatch reports the
    violation.
    """
    d = np.asarray(d, dtype=float)
    x_exact = np.asarray(x_exact, dtype=float)
    y_exact = np.asarray(y_exact, dtype=float)
    if not (d.shape == x_exact.shape == y_exact.shape) or d.ndim != 1 or d.size == 0:
        raise ValueError("decomposition_check: d, x_exact, y_exact must be matching "
                         "nonempty 1-D vectors")
    if weights is None:
        w = np.full(d.size, 1.0 / d.size)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != d.shape or np.any(w < 0):
            raise ValueError("decomposition_check: weights must be nonnegative and "
                             "match the atoms")
        total = w.sum()
        if total <= 0:
            raise ValueError("decomposition_check: weights must have positive mass")
        w = w / total
    lhs = float(w @ (d - y_exact) ** 2 - w @ (d - x_exact) ** 2)
    rhs = float(w @ (x_exact - y_exact) ** 2)
    return lhs, rhs


def decision_stability(risk_t, risk_next, c_star: float) -> float:
    """Fraction of patients whose threshold decision is unchanged across a transition."""
    risk_t, risk_next = _pair(risk_t, risk_next)
    if not (0.0 < c_star < 1.0):
        raise ValueError("decision_stability: c_star must lie in (0, 1)")
    return float(np.mean((risk_t > c_star) == (risk_next > c_star)))


def threshold_distance(risk_t, c_star: float) -> float:
    """Mean absolute distance of the risks from the decision threshold."""
    risk_t = np.asarray(risk_t, dtype=float)
    if risk_t.ndim != 1 or risk_t.size == 0:
        raise ValueError("threshold_distance: need a nonempty 1-D risk vector")
    if np.any((risk_t < 0) | (risk_t > 1)):
        raise ValueError("threshold_distance: risks must lie in [0, 1]")
    if not (0.0 < c_star < 1.0):
        raise ValueError("threshold_distance: c_star must lie in (0, 1)")
    return float(np.mean(np.abs(risk_t - c_star)))


def regret_bound_check(x_hat, y_hat, labels, loss: LossSpec):
    """Acting-loss regret of the compressed risks and its Lipschitz bound.

    regret = mean acting loss of y_hat minus mean acting loss of x_hat (may
    be negative for estimated risks); bound = max(c_fp, c_fn) times the mean
    absolute risk gap.  ``labels`` is validated for shape only: the acting
    loss is an expectation over the risk itself, so the bound holds pointwise
    regardless of the realized outcomes.
    """
    x_hat, y_hat = _pair(x_hat, y_hat, "x_hat", "y_hat")
    labels = np.asarray(labels, dtype=float)
    if labels.shape != x_hat.shape:
        raise ValueError("regret_bound_check: labels must match the risk vectors")
    regret = float(np.mean(acting_loss(y_hat, loss)) - np.mean(acting_loss(x_hat, loss)))
    bound = float(max(loss.c_fp, loss.c_fn) * np.mean(np.abs(x_hat - y_hat)))
    return regret, bound
