"""Discrimination, calibration, and decision metrics for held-out risk vectors."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import midrank_auc
from .core import LossSpec
from . import glm

__all__ = [
    "ConfusionCounts",
    "CalibrationFit",
    "auc",
    "brier",
    "log_loss",
    "confusion_at_threshold",
    "empirical_decision_loss",
    "recalibrate",
    "winsorized_mean_sd",
]

LOG_CLIP = 1e-15      # log-loss probability clip
LOGIT_CLIP = 1e-12    # recalibration logit clip
DEGENERATE_SLOPE = 50.0


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"ConfusionCounts invariant violated: {name} is a "
                                 "nonnegative integer")
            object.__setattr__(self, name, int(v))

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class CalibrationFit:
    slope: float
    intercept: float
    degenerate: bool

    def __post_init__(self):
        if not self.degenerate and not (
            np.isfinite(self.slope) and np.isfinite(self.intercept)
        ):
            raise ValueError("CalibrationFit invariant violated: finite unless "
                             "degenerate flag set")


def _check_pair(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if scores.shape != labels.shape or scores.ndim != 1 or scores.size == 0:
        raise ValueError("scores and labels must be matching nonempty 1-D vectors")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be binary 0/1")
    return scores, labels


def auc(scores, labels) -> float:
    """Mann-Whitney statistic with midrank ties: P(s_pos > s_neg) + 0.5 P(equal)."""
    scores, labels = _check_pair(scores, labels)
    if labels.min() == labels.max():
        raise ValueError("auc is undefined with a single class")
    return float(midrank_auc(scores, labels))


def brier(risks, labels) -> float:
    risks, labels = _check_pair(risks, labels)
    if np.any((risks < 0) | (risks > 1)):
        raise ValueError("brier: risks must lie in [0, 1]")
    return float(np.mean((risks - labels) ** 2))


def log_loss(risks, labels) -> float:
    risks, labels = _check_pair(risks, labels)
    if np.any((risks < 0) | (risks > 1)):
        raise ValueError("log_loss: risks must lie in [0, 1]")
    p = np.clip(risks, LOG_CLIP, 1.0 - LOG_CLIP)
    return float(np.mean(-(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p))))


def confusion_at_threshold(risks, labels, c_star: float) -> ConfusionCounts:
    """Positive decision iff risk > c_star strictly; a tie at c_star is negative."""
    risks, labels = _check_pair(risks, labels)
    if not (0.0 < c_star < 1.0):
        raise ValueError("confusion_at_threshold: c_star must lie in (0, 1)")
    pos = risks > c_star
    event = labels == 1
    return ConfusionCounts(
        tp=int(np.sum(pos & event)),
        fp=int(np.sum(pos & ~event)),
        tn=int(np.sum(~pos & ~event)),
        fn=int(np.sum(~pos & event)),
    )


def empirical_decision_loss(counts: ConfusionCounts, loss: LossSpec) -> float:
    """(c_fp * FP + c_fn * FN) / n."""
    if counts.n == 0:
        raise ValueError("empirical_decision_loss: empty confusion counts")
    return (loss.c_fp * counts.fp + loss.c_fn * counts.fn) / counts.n


def recalibrate(risks, labels) -> CalibrationFit:
    """Unpenalized logistic fit of labels on logit(risk).

    The degenerate flag marks non-convergence (typically separation) or an
    implausibly steep slope (|slope| > 50).
    """
    risks, labels = _check_pair(risks, labels)
    if labels.min() == labels.max():
        raise ValueError("recalibrate is undefined with a single class")
    p = np.clip(risks, LOGIT_CLIP, 1.0 - LOGIT_CLIP)
    logit = np.log(p / (1.0 - p))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        model = glm.fit_logistic(logit[:, None], labels, lam=0.0)
    slope = float(model.coefficients[0])
    intercept = float(model.intercept)
    degenerate = (not model.converged) or abs(slope) > DEGENERATE_SLOPE
    return CalibrationFit(slope=slope, intercept=intercept, degenerate=degenerate)


def winsorized_mean_sd(values, lower_pct: float = 2.5, upper_pct: float = 97.5):
    """Clamp to the [lower_pct, upper_pct] percentile bounds, then mean and SD.

    Percentiles use linear interpolation between closest ranks; the SD is the
    sample SD (ddof=1, zero for a single value).
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("winsorized_mean_sd: need a nonempty 1-D vector")
    if not (0.0 <= lower_pct < upper_pct <= 100.0):
        raise ValueError("winsorized_mean_sd: need 0 <= lower < upper <= 100")
    lo = np.percentile(v, lower_pct)
    hi = np.percentile(v, upper_pct)
    clipped = np.clip(v, lo, hi)
    sd = float(np.std(clipped, ddof=1)) if clipped.size > 1 else 0.0
    return float(np.mean(clipped)), sd
