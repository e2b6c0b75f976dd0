"""Shared domain types.

Pure data: every type is a frozen dataclass validated on construction, so a
constructed object can be trusted downstream and shared freely across
workers.  Validation errors name the violated invariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "StagedDataset",
    "LossSpec",
    "CostSchedule",
    "RiskMatrix",
    "SplitPlan",
    "StageReport",
    "StoppingReport",
    "DriftReport",
    "BridgeReport",
]


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class StagedDataset:
    """Feature matrix, binary outcomes, and nested per-stage feature-index sets."""

    name: str
    features: np.ndarray        # n x p, no missing values
    outcome: np.ndarray         # length n, entries in {0, 1}
    stages: tuple[tuple[int, ...], ...]
    feature_names: tuple[str, ...]

    def __post_init__(self):
        features = _frozen_array(self.features)
        outcome = _frozen_array(self.outcome, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError("StagedDataset.features must be a 2-D matrix")
        n, p = features.shape
        if not np.all(np.isfinite(features)):
            raise ValueError("StagedDataset invariant violated: no missing values "
                             "(features contain NaN or inf)")
        if outcome.shape != (n,):
            raise ValueError("StagedDataset.outcome length must match feature rows")
        if not np.all((outcome == 0) | (outcome == 1)):
            raise ValueError("StagedDataset invariant violated: outcome entries in {0,1}")
        if n < 2 or outcome.min() == outcome.max():
            raise ValueError("StagedDataset invariant violated: n >= 2 with at least "
                             "one example of each class")
        stages = tuple(tuple(int(i) for i in s) for s in self.stages)
        if not stages:
            raise ValueError("StagedDataset requires at least one stage")
        prev: frozenset[int] = frozenset()
        for t, s in enumerate(stages):
            cur = frozenset(s)
            if len(cur) != len(s):
                raise ValueError(f"stage {t} has duplicate feature indices")
            if any(i < 0 or i >= p for i in cur):
                raise ValueError(f"StagedDataset invariant violated: stage {t} has "
                                 f"feature index outside [0, {p})")
            if not prev <= cur:
                raise ValueError("StagedDataset invariant violated: stages must be "
                                 f"nested (stage {t-1} is not a subset of stage {t})")
            prev = cur
        names = tuple(str(x) for x in self.feature_names)
        if len(names) != p:
            raise ValueError("feature_names length must equal number of features")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "outcome", outcome)
        object.__setattr__(self, "stages", stages)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def horizon(self) -> int:
        return len(self.stages)


@dataclass(frozen=True)
class LossSpec:
    """Asymmetric misclassification costs: false positive and false negative."""

    c_fp: float
    c_fn: float

    def __post_init__(self):
        if not (self.c_fp > 0 and np.isfinite(self.c_fp)):
            raise ValueError("LossSpec invariant violated: c_fp > 0")
        if not (self.c_fn > 0 and np.isfinite(self.c_fn)):
            raise ValueError("LossSpec invariant violated: c_fn > 0")

    @property
    def threshold(self) -> float:
        """Risk level above which treating is the lower-loss action."""
        return self.c_fp / (self.c_fp + self.c_fn)


@dataclass(frozen=True)
class CostSchedule:
    """Cumulative testing cost through each stage; starts at zero, nondecreasing."""

    cumulative: tuple[float, ...]

    def __post_init__(self):
        cum = tuple(float(c) for c in self.cumulative)
        if not cum:
            raise ValueError("CostSchedule requires at least one stage")
        if cum[0] != 0.0:
            raise ValueError("CostSchedule invariant violated: cumulative[0] = 0")
        if any(b < a for a, b in zip(cum, cum[1:])):
            raise ValueError("CostSchedule invariant violated: cumulative costs "
                             "must be nondecreasing")
        if any(not np.isfinite(c) or c < 0 for c in cum):
            raise ValueError("CostSchedule invariant violated: nonnegative finite costs")
        object.__setattr__(self, "cumulative", cum)

    @property
    def horizon(self) -> int:
        return len(self.cumulative)

    @property
    def increments(self) -> tuple[float, ...]:
        """Cost of moving from stage t to t+1 (length horizon-1)."""
        return tuple(b - a for a, b in zip(self.cumulative, self.cumulative[1:]))


@dataclass(frozen=True)
class RiskMatrix:
    """Per-patient, per-stage fitted risks."""

    risks: np.ndarray           # n x T, entries in [0, 1]
    patient_ids: tuple[str, ...]

    def __post_init__(self):
        risks = _frozen_array(self.risks)
        if risks.ndim != 2:
            raise ValueError("RiskMatrix.risks must be 2-D (patients x stages)")
        if not np.all((risks >= 0) & (risks <= 1)):
            raise ValueError("RiskMatrix invariant violated: every entry in [0, 1]")
        ids = tuple(str(x) for x in self.patient_ids)
        if len(ids) != risks.shape[0]:
            raise ValueError("patient_ids length must match risk rows")
        object.__setattr__(self, "risks", risks)
        object.__setattr__(self, "patient_ids", ids)

    @property
    def horizon(self) -> int:
        return self.risks.shape[1]


@dataclass(frozen=True)
class SplitPlan:
    """Repeated stratified train/test split plan.

    Per-rep seeds are a pure function of (master_seed, rep_index); see
    harness.derive_rep_seed for the documented mixing function.
    """

    master_seed: int
    n_reps: int
    train_fraction: float = 0.7
    stratified: bool = True

    def __post_init__(self):
        if int(self.n_reps) < 1:
            raise ValueError("SplitPlan invariant violated: n_reps positive")
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("SplitPlan invariant violated: train_fraction in (0,1)")
        if not self.stratified:
            raise ValueError("SplitPlan invariant violated: stratified is always true here")
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "n_reps", int(self.n_reps))


_UNIT_METRICS = ("auc", "brier", "accuracy", "sensitivity", "specificity")


@dataclass(frozen=True)
class StageReport:
    """Across-rep (mean, sd) of every stagewise metric."""

    stage_labels: tuple[str, ...]
    metrics: Mapping[str, tuple[tuple[float, float], ...]]
    n_reps: int

    def __post_init__(self):
        labels = tuple(str(s) for s in self.stage_labels)
        mets = {str(k): tuple((float(m), float(s)) for m, s in v)
                for k, v in dict(self.metrics).items()}
        for name, rows in mets.items():
            if len(rows) != len(labels):
                raise ValueError(f"StageReport metric {name!r} has wrong stage count")
            for mean, sd in rows:
                if sd < 0:
                    raise ValueError("StageReport invariant violated: SD >= 0")
                if name in _UNIT_METRICS and not (-1e-9 <= mean <= 1 + 1e-9):
                    raise ValueError(f"StageReport invariant violated: {name} mean "
                                     "outside [0, 1]")
                if name in ("log_loss", "decision_loss") and mean < -1e-9:
                    raise ValueError(f"StageReport invariant violated: {name} mean >= 0")
        object.__setattr__(self, "stage_labels", labels)
        object.__setattr__(self, "metrics", mets)
        object.__setattr__(self, "n_reps", int(self.n_reps))


@dataclass(frozen=True)
class StoppingReport:
    """Stagewise decision loss, cumulative test cost, and their total."""

    stage_labels: tuple[str, ...]
    decision_loss: tuple[float, ...]
    cumulative_cost: tuple[float, ...]
    total: tuple[float, ...]
    preferred_stage: int

    def __post_init__(self):
        labels = tuple(str(s) for s in self.stage_labels)
        loss = tuple(float(x) for x in self.decision_loss)
        cost = tuple(float(x) for x in self.cumulative_cost)
        total = tuple(float(x) for x in self.total)
        k = len(labels)
        if not (len(loss) == len(cost) == len(total) == k) or k == 0:
            raise ValueError("StoppingReport fields must share one nonzero length")
        for t in range(k):
            if abs(total[t] - (loss[t] + cost[t])) > 1e-12:
                raise ValueError("StoppingReport invariant violated: "
                                 "total[t] = decision_loss[t] + cumulative_cost[t]")
        best = min(total)
        earliest = next(i for i, v in enumerate(total) if v == best)
        if self.preferred_stage != earliest:
            raise ValueError("StoppingReport invariant violated: preferred_stage is "
                             "the earliest argmin of total")
        object.__setattr__(self, "stage_labels", labels)
        object.__setattr__(self, "decision_loss", loss)
        object.__setattr__(self, "cumulative_cost", cost)
        object.__setattr__(self, "total", total)
        object.__setattr__(self, "preferred_stage", int(self.preferred_stage))


@dataclass(frozen=True)
class DriftReport:
    """Quantile-binned conditional increment summary for one stage transition.

    weights are bin count shares; mean_drift and mean_square_drift are the
    weight-averaged bin means and squared bin means.
    """

    bin_edges: tuple[float, ...]
    weights: tuple[float, ...]
    bin_mean_increment: tuple[float, ...]
    mean_drift: float
    mean_square_drift: float

    def __post_init__(self):
        edges = tuple(float(x) for x in self.bin_edges)
        w = np.asarray(self.weights, dtype=float)
        d = np.asarray(self.bin_mean_increment, dtype=float)
        if len(w) != len(d) or len(w) == 0:
            raise ValueError("DriftReport weights and bin means must align")
        if len(edges) != len(w) + 1:
            raise ValueError("DriftReport needs len(bin_edges) == bins + 1")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("DriftReport invariant violated: weights sum to 1")
        if abs(float(w @ d) - self.mean_drift) > 1e-12:
            raise ValueError("DriftReport invariant violated: M = sum_b w_b dbar_b")
        if abs(float(w @ d**2) - self.mean_square_drift) > 1e-12:
            raise ValueError("DriftReport invariant violated: S = sum_b w_b dbar_b^2")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "bin_mean_increment", tuple(float(x) for x in d))
        object.__setattr__(self, "mean_drift", float(self.mean_drift))
        object.__setattr__(self, "mean_square_drift", float(self.mean_square_drift))

    @property
    def n_bins(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class BridgeReport:
    """Patient-level decision stability per transition and threshold distance per stage."""

    stability: tuple[float, ...]            # length T-1
    threshold_distance: tuple[float, ...]   # length T

    def __post_init__(self):
        stab = tuple(float(x) for x in self.stability)
        dist = tuple(float(x) for x in self.threshold_distance)
        if len(dist) != len(stab) + 1:
            raise ValueError("BridgeReport needs one distance per stage and one "
                             "stability per transition")
        if any(not 0.0 <= s <= 1.0 for s in stab):
            raise ValueError("BridgeReport invariant violated: stability in [0, 1]")
        if any(not 0.0 <= v <= 1.0 for v in dist):
            raise ValueError("BridgeReport invariant violated: threshold distance in [0, 1]")
        object.__setattr__(self, "stability", stab)
        object.__setattr__(self, "threshold_distance", dist)
