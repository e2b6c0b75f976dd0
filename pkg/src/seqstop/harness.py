"""Study configuration, ingestion, the repeated-split loop, and report emission.

A study config names a delimited source file, the outcome encoding, nested
stage column lists, the misclassification costs, the cumulative stage-cost
schedule, and the split plan.  ``run_study`` executes the full protocol:
for every rep it draws a stratified 70/30-style split, fits the stagewise
standardize+logistic pipeline on the training fold, scores the shared test
fold, and collects discrimination, calibration, decision, drift, bridge,
and compression summaries; aggregates are means and sample SDs across reps.

Determinism contract: each rep's RNG seed is ``derive_rep_seed(master_seed,
rep_index)`` (a splitmix64 mix), every rep is computed independently, and
aggregation reads a rep-indexed results table, so the emitted bytes depend
only on (config, master_seed) and not on worker count or scheduling.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

from . import diagnostics, glm, metrics
from .core import (
    BridgeReport,
    CostSchedule,
    LossSpec,
    SplitPlan,
    StagedDataset,
    StageReport,
    StoppingReport,
)
from .stopping import retrospective_total_cost

__all__ = [
    "StudyConfig",
    "RunArtifacts",
    "IngestionError",
    "derive_rep_seed",
    "load_study_configs",
    "load_dataset",
    "stratified_split",
    "run_study",
    "emit_reports",
]

_MASK64 = (1 << 64) - 1
_MISSING_TOKENS = {"?", "", "na", "nan", "null"}

STAGE_METRICS = (
    "auc",
    "brier",
    "log_loss",
    "accuracy",
    "sensitivity",
    "specificity",
    "decision_loss",
    "accuracy_at_half",
)


class IngestionError(ValueError):
    """Raised when a source file or config does not match its contract."""


def derive_rep_seed(master_seed: int, rep_index: int) -> int:
    """Pure 64-bit mixing of (master_seed, rep_index) via splitmix64."""

    def mix(x: int) -> int:
        x = (x + 0x9E3779B97F4A7C15) & _MASK64
        x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
        return x ^ (x >> 31)

    return mix((master_seed & _MASK64) ^ mix(rep_index))


@dataclass(frozen=True)
class StudyConfig:
    """Everything needed to run one retrospective study."""

    study: str
    source: str
    outcome_column: str
    positive: Any                      # literal value, or {"gt": threshold}
    stage_columns: tuple[tuple[str, ...], ...]
    loss: LossSpec
    costs: CostSchedule
    split: SplitPlan
    bridge_reps: int = 200
    compression: tuple[int, ...] = (1, 3)
    missing_policy: str = "none"
    expected_rows: int | None = None

    def __post_init__(self):
        stages = tuple(tuple(str(c) for c in s) for s in self.stage_columns)
        if not stages:
            raise ValueError("StudyConfig: at least one stage required")
        prev: frozenset[str] = frozenset()
        for t, s in enumerate(stages):
            cur = frozenset(s)
            if not prev <= cur:
                raise ValueError("StudyConfig invariant violated: stage column lists "
                                 f"must be nested (stage {t} drops earlier columns)")
            prev = cur
        if len(self.costs.cumulative) != len(stages):
            raise ValueError("StudyConfig: cost schedule length must equal stage count")
        if self.missing_policy not in ("none", "train_fold_mode"):
            raise ValueError(f"StudyConfig: unknown missing policy "
                             f"{self.missing_policy!r}")
        if any(int(k) < 1 for k in self.compression):
            raise ValueError("StudyConfig: compression component counts are positive")
        object.__setattr__(self, "stage_columns", stages)
        object.__setattr__(self, "compression", tuple(int(k) for k in self.compression))
        object.__setattr__(self, "bridge_reps", int(self.bridge_reps))

    @property
    def stage_labels(self) -> tuple[str, ...]:
        return tuple(f"F{t + 1}" for t in range(len(self.stage_columns)))


def _parse_positive(spec) -> Any:
    if isinstance(spec, Mapping):
        if set(spec) != {"gt"}:
            raise IngestionError(f"outcome positive rule must be a literal or "
                                 f"{{gt: threshold}}, got {dict(spec)}")
        return {"gt": float(spec["gt"])}
    return spec


def load_study_configs(path) -> dict[str, StudyConfig]:
    """Parse a multi-document YAML config file, one study document per entry."""
    path = Path(path)
    base = path.parent
    configs: dict[str, StudyConfig] = {}
    with open(path) as fh:
        docs = [d for d in yaml.safe_load_all(fh) if d]
    if not docs:
        raise IngestionError(f"{path}: no study documents found")
    for doc in docs:
        try:
            name = str(doc["study"])
            source = str(doc["source"])
            if not os.path.isabs(source):
                source = str(base / source)
            loss = LossSpec(c_fp=float(doc["loss"]["c_fp"]),
                            c_fn=float(doc["loss"]["c_fn"]))
            costs = CostSchedule(cumulative=tuple(float(x)
                                                  for x in doc["cost_schedule"]))
            split_doc = doc.get("split", {})
            split = SplitPlan(
                master_seed=int(split_doc.get("master_seed", 0)),
                n_reps=int(split_doc.get("n_reps", 1000)),
                train_fraction=float(split_doc.get("train_fraction", 0.7)),
            )
            stages = doc["stages"]
            if isinstance(stages, Mapping):
                stage_cols = tuple(tuple(stages[k]) for k in sorted(stages))
            else:
                stage_cols = tuple(tuple(s) for s in stages)
            cfg = StudyConfig(
                study=name,
                source=source,
                outcome_column=str(doc["outcome"]["column"]),
                positive=_parse_positive(doc["outcome"]["positive"]),
                stage_columns=stage_cols,
                loss=loss,
                costs=costs,
                split=split,
                bridge_reps=int(doc.get("bridge_reps", 200)),
                compression=tuple(doc.get("compression", [1, 3])),
                missing_policy=str(doc.get("missing_policy", "none")),
                expected_rows=(int(doc["expected_rows"])
                               if "expected_rows" in doc else None),
            )
        except KeyError as exc:
            raise IngestionError(f"{path}: study document missing key {exc}") from exc
        if cfg.study in configs:
            raise IngestionError(f"{path}: duplicate study name {cfg.study!r}")
        configs[cfg.study] = cfg
    return configs


@dataclass(frozen=True)
class _LoadedStudy:
    """Parsed source data, keeping the missingness mask for fold-local policies."""

    config: StudyConfig
    dataset: StagedDataset
    raw_features: np.ndarray   # may contain NaN where the source was missing
    missing_mask: np.ndarray


def _column_mode(values: np.ndarray) -> float:
    """Most frequent value; ties resolve to the smallest value."""
    vals, counts = np.unique(values, return_counts=True)
    return float(vals[np.argmax(counts)])


def _load_raw(config: StudyConfig) -> _LoadedStudy:
    path = Path(config.source)
    if not path.exists():
        raise IngestionError(f"{config.study}: source file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{config.study}: source file is empty") from None
        header = [h.strip() for h in header]
        rows = [row for row in reader if row]

    col_index = {name: i for i, name in enumerate(header)}
    feature_names = config.stage_columns[-1]
    needed = list(feature_names) + [config.outcome_column]
    missing_cols = [c for c in needed if c not in col_index]
    if missing_cols:
        raise IngestionError(f"{config.study}: columns not found in {path.name}: "
                             f"{missing_cols}")
    if config.expected_rows is not None and len(rows) != config.expected_rows:
        raise IngestionError(f"{config.study}: row-count mismatch: expected "
                             f"{config.expected_rows}, found {len(rows)}")

    n = len(rows)
    p = len(feature_names)
    features = np.empty((n, p))
    for i, row in enumerate(rows):
        for j, name in enumerate(feature_names):
            cell = row[col_index[name]].strip()
            if cell.lower() in _MISSING_TOKENS:
                features[i, j] = np.nan
                continue
            try:
                features[i, j] = float(cell)
            except ValueError:
                raise IngestionError(
                    f"{config.study}: unparseable cell at row {i + 2}, column "
                    f"{name!r}: {cell!r}") from None

    outcome = np.empty(n, dtype=np.int64)
    rule = config.positive
    for i, row in enumerate(rows):
        cell = row[col_index[config.outcome_column]].strip()
        if isinstance(rule, Mapping):
            try:
                outcome[i] = 1 if float(cell) > rule["gt"] else 0
            except ValueError:
                raise IngestionError(
                    f"{config.study}: unparseable outcome at row {i + 2}: "
                    f"{cell!r}") from None
        else:
            try:
                outcome[i] = 1 if float(cell) == float(rule) else 0
            except (TypeError, ValueError):
                outcome[i] = 1 if cell == str(rule) else 0

    mask = np.isnan(features)
    if mask.any() and config.missing_policy == "none":
        i, j = np.argwhere(mask)[0]
        raise IngestionError(
            f"{config.study}: missing value at row {int(i) + 2}, column "
            f"{feature_names[int(j)]!r} but missing_policy is 'none'")

    filled = features.copy()
    if mask.any():
        # load-time view resolves missingness with the whole-data column mode;
        # run_study re-imputes inside each training fold to avoid leakage
        for j in range(p):
            col_mask = mask[:, j]
            if col_mask.any():
                filled[col_mask, j] = _column_mode(features[~col_mask, j])

    name_to_pos = {name: j for j, name in enumerate(feature_names)}
    stages = tuple(tuple(sorted(name_to_pos[c] for c in s))
                   for s in config.stage_columns)
    dataset = StagedDataset(
        name=config.study,
        features=filled,
        outcome=outcome,
        stages=stages,
        feature_names=feature_names,
    )
    return _LoadedStudy(config=config, dataset=dataset,
                        raw_features=features, missing_mask=mask)


def load_dataset(config: StudyConfig) -> StagedDataset:
    """Ingest the study source into a validated StagedDataset."""
    return _load_raw(config).dataset


def stratified_split(n: int, labels, rep_index: int, plan: SplitPlan):
    """Per-class permutation split: floor(class_count * fraction) rows to train.

    Deterministic in (plan.master_seed, rep_index); returns sorted, disjoint
    index arrays covering range(n).
    """
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ValueError("stratified_split: labels length must equal n")
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("stratified_split: both classes must be present")
    counts = {c: int(np.sum(labels == c)) for c in classes}
    small = [c for c, k in counts.items() if k < 2]
    if small:
        raise ValueError(f"stratified_split: class {small[0]!r} has fewer than "
                         "2 members")
    rng = np.random.Generator(np.random.PCG64(derive_rep_seed(plan.master_seed,
                                                              rep_index)))
    train_parts = []
    test_parts = []
    for c in classes:
        idx = np.flatnonzero(labels == c)
        perm = rng.permutation(idx)
        k = int(math.floor(plan.train_fraction * idx.size))
        train_parts.append(perm[:k])
        test_parts.append(perm[k:])
    train = np.sort(np.concatenate(train_parts))
    test = np.sort(np.concatenate(test_parts))
    return train, test


@dataclass(frozen=True)
class RunArtifacts:
    """Aggregated outputs of one study run; every aggregate is (mean, sd)."""

    study: str
    stage_labels: tuple[str, ...]
    n_reps: int
    bridge_reps: int
    master_seed: int
    train_fraction: float
    c_fp: float
    c_fn: float
    c_star: float
    cumulative_cost: tuple[float, ...]
    n_test: int
    stage_report: StageReport
    confusion_means: tuple[dict, ...]
    stopping: StoppingReport
    drift: tuple[dict, ...]
    bridge: BridgeReport
    compression: tuple[dict, ...]
    transition_projection: tuple[dict, ...]
    calibration: tuple[dict, ...]
    regret: tuple[dict, ...]
    failures: tuple[tuple[int, str], ...] = field(default=())


def _impute_fold(raw: np.ndarray, mask: np.ndarray, train: np.ndarray) -> np.ndarray:
    """Fill missing cells with the training-fold column mode (no leakage)."""
    if not mask.any():
        return raw
    filled = raw.copy()
    for j in np.flatnonzero(mask.any(axis=0)):
        train_vals = raw[train, j]
        ok = ~np.isnan(train_vals)
        mode = _column_mode(train_vals[ok])
        col_mask = mask[:, j]
        filled[col_mask, j] = mode
    return filled


def _rep_worker(payload: dict, rep: int) -> dict:
    """All per-rep quantities; pure function of (payload, rep)."""
    raw = payload["raw"]
    mask = payload["mask"]
    outcome = payload["outcome"]
    stages = payload["stages"]
    loss: LossSpec = payload["loss"]
    plan: SplitPlan = payload["plan"]
    compression = payload["compression"]
    n_bins = payload["drift_bins"]

    train, test = stratified_split(raw.shape[0], outcome, rep, plan)
    X = _impute_fold(raw, mask, train)
    y_tr = outcome[train].astype(float)
    y_te = outcome[test].astype(float)
    c_star = loss.threshold

    out: dict[str, Any] = {"n_test": int(test.size)}
    risks = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for t, cols in enumerate(stages):
            cols = list(cols)
            std = glm.fit_standardizer(X[np.ix_(train, cols)])
            model = glm.fit_logistic(std.transform(X[np.ix_(train, cols)]), y_tr)
            p = glm.predict_proba(model, std, X[np.ix_(test, cols)])
            risks.append(p)
            cm = metrics.confusion_at_threshold(p, y_te, c_star)
            cm_half = metrics.confusion_at_threshold(p, y_te, 0.5)
            cal = metrics.recalibrate(p, y_te)
            out[f"s{t}_auc"] = metrics.auc(p, y_te)
            out[f"s{t}_brier"] = metrics.brier(p, y_te)
            out[f"s{t}_log_loss"] = metrics.log_loss(p, y_te)
            out[f"s{t}_accuracy"] = (cm.tp + cm.tn) / cm.n
            out[f"s{t}_accuracy_at_half"] = (cm_half.tp + cm_half.tn) / cm_half.n
            out[f"s{t}_sensitivity"] = cm.tp / (cm.tp + cm.fn)
            out[f"s{t}_specificity"] = cm.tn / (cm.tn + cm.fp)
            out[f"s{t}_decision_loss"] = metrics.empirical_decision_loss(cm, loss)
            out[f"s{t}_tp"], out[f"s{t}_fp"] = cm.tp, cm.fp
            out[f"s{t}_tn"], out[f"s{t}_fn"] = cm.tn, cm.fn
            out[f"s{t}_cal_slope"] = cal.slope
            out[f"s{t}_cal_intercept"] = cal.intercept
            out[f"s{t}_cal_degenerate"] = float(cal.degenerate)
            out[f"s{t}_threshold_distance"] = diagnostics.threshold_distance(p, c_star)

        for t in range(len(stages) - 1):
            report = diagnostics.drift_diagnostic(risks[t], risks[t + 1], n_bins)
            out[f"tr{t}_drift_m"] = report.mean_drift
            out[f"tr{t}_drift_s"] = report.mean_square_drift
            out[f"tr{t}_drift_weights"] = np.asarray(report.weights)
            out[f"tr{t}_drift_deltas"] = np.asarray(report.bin_mean_increment)
            out[f"tr{t}_stability"] = diagnostics.decision_stability(
                risks[t], risks[t + 1], c_star)
            out[f"tr{t}_projection"] = diagnostics.projection_loss(
                risks[t], risks[t + 1])

        final_cols = list(stages[-1])
        x_full = risks[-1]
        for k in compression:
            pipe = glm.fit_pca_pipeline(X[np.ix_(train, final_cols)], y_tr, k=k)
            p = pipe.predict(X[np.ix_(test, final_cols)])
            cm = metrics.confusion_at_threshold(p, y_te, c_star)
            regret, bound = diagnostics.regret_bound_check(x_full, p, y_te, loss)
            out[f"pca{k}_auc"] = metrics.auc(p, y_te)
            out[f"pca{k}_brier"] = metrics.brier(p, y_te)
            out[f"pca{k}_decision_loss"] = metrics.empirical_decision_loss(cm, loss)
            out[f"pca{k}_prob_mse"] = diagnostics.projection_loss(x_full, p)
            out[f"pca{k}_regret"] = regret
            out[f"pca{k}_bound"] = bound
    return out


_POOL_PAYLOAD: dict | None = None


def _pool_init(payload: dict) -> None:
    global _POOL_PAYLOAD
    _POOL_PAYLOAD = payload


def _pool_call(rep: int):
    try:
        return rep, _rep_worker(_POOL_PAYLOAD, rep), None
    except Exception as exc:  # recorded per rep, run aborts past the threshold
        return rep, None, f"{type(exc).__name__}: {exc}"


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return float(np.mean(arr)), sd


def run_study(
    config: StudyConfig,
    n_reps: int | None = None,
    master_seed: int | None = None,
    bridge_reps: int | None = None,
    workers: int = 1,
    drift_bins: int = 10,
) -> RunArtifacts:
    """Execute the repeated-split protocol for one study."""
    loaded = _load_raw(config)
    plan = config.split
    if n_reps is not None or master_seed is not None:
        plan = SplitPlan(
            master_seed=plan.master_seed if master_seed is None else master_seed,
            n_reps=plan.n_reps if n_reps is None else n_reps,
            train_fraction=plan.train_fraction,
        )
    n_reps = plan.n_reps
    bridge_reps = config.bridge_reps if bridge_reps is None else int(bridge_reps)
    bridge_reps = min(bridge_reps, n_reps)

    payload = {
        "raw": loaded.raw_features,
        "mask": loaded.missing_mask,
        "outcome": loaded.dataset.outcome,
        "stages": loaded.dataset.stages,
        "loss": config.loss,
        "plan": plan,
        "compression": config.compression,
        "drift_bins": drift_bins,
    }

    results: list[dict | None] = [None] * n_reps
    failures: list[tuple[int, str]] = []
    if workers <= 1:
        _pool_init(payload)
        for rep in range(n_reps):
            rep, res, err = _pool_call(rep)
            if err is None:
                results[rep] = res
            else:
                failures.append((rep, err))
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_pool_init,
                                 initargs=(payload,)) as pool:
            for rep, res, err in pool.map(_pool_call, range(n_reps),
                                          chunksize=max(1, n_reps // (4 * workers))):
                if err is None:
                    results[rep] = res
                else:
                    failures.append((rep, err))
    if failures and len(failures) > 0.01 * n_reps:
        detail = "; ".join(f"rep {r}: {m}" for r, m in failures[:5])
        raise RuntimeError(f"{config.study}: {len(failures)} of {n_reps} reps "
                           f"failed (threshold 1%): {detail}")
    ok = [r for r in results if r is not None]

    T = len(config.stage_columns)
    labels = config.stage_labels

    stage_metrics = {
        m: tuple(_mean_sd([r[f"s{t}_{m}"] for r in ok]) for t in range(T))
        for m in STAGE_METRICS
    }
    stage_report = StageReport(stage_labels=labels, metrics=stage_metrics,
                               n_reps=len(ok))
    confusion_means = tuple(
        {
            "tp": float(np.mean([r[f"s{t}_tp"] for r in ok])),
            "fp": float(np.mean([r[f"s{t}_fp"] for r in ok])),
            "tn": float(np.mean([r[f"s{t}_tn"] for r in ok])),
            "fn": float(np.mean([r[f"s{t}_fn"] for r in ok])),
        }
        for t in range(T)
    )
    stopping = retrospective_total_cost(
        [stage_metrics["decision_loss"][t][0] for t in range(T)],
        config.costs,
        stage_labels=labels,
    )

    drift = []
    for t in range(T - 1):
        weights = np.zeros(drift_bins)
        deltas = np.zeros(drift_bins)
        present = np.zeros(drift_bins)
        for r in ok:
            w = r[f"tr{t}_drift_weights"]
            d = r[f"tr{t}_drift_deltas"]
            weights[: w.size] += w
            deltas[: d.size] += d
            present[: d.size] += 1
        bins = tuple(
            {
                "weight": float(weights[b] / present[b]),
                "mean_increment": float(deltas[b] / present[b]),
                "reps": int(present[b]),
            }
            for b in range(drift_bins)
            if present[b] > 0
        )
        drift.append({
            "transition": f"{labels[t]}->{labels[t + 1]}",
            "mean_drift": _mean_sd([r[f"tr{t}_drift_m"] for r in ok]),
            "mean_square_drift": _mean_sd([r[f"tr{t}_drift_s"] for r in ok]),
            "bins": bins,
        })

    bridge_rows = ok[:bridge_reps]
    bridge = BridgeReport(
        stability=tuple(float(np.mean([r[f"tr{t}_stability"] for r in bridge_rows]))
                        for t in range(T - 1)),
        threshold_distance=tuple(
            float(np.mean([r[f"s{t}_threshold_distance"] for r in bridge_rows]))
            for t in range(T)),
    )

    compression_rows = [{
        "model": "full",
        "auc": stage_metrics["auc"][T - 1],
        "brier": stage_metrics["brier"][T - 1],
        "decision_loss": stage_metrics["decision_loss"][T - 1],
        "prob_mse": (0.0, 0.0),
    }]
    regret_rows = []
    for k in config.compression:
        compression_rows.append({
            "model": f"pca{k}",
            "auc": _mean_sd([r[f"pca{k}_auc"] for r in ok]),
            "brier": _mean_sd([r[f"pca{k}_brier"] for r in ok]),
            "decision_loss": _mean_sd([r[f"pca{k}_decision_loss"] for r in ok]),
            "prob_mse": _mean_sd([r[f"pca{k}_prob_mse"] for r in ok]),
        })
        regrets = np.asarray([r[f"pca{k}_regret"] for r in ok])
        bounds = np.asarray([r[f"pca{k}_bound"] for r in ok])
        regret_rows.append({
            "model": f"pca{k}",
            "regret": _mean_sd(regrets),
            "bound": _mean_sd(bounds),
            "violations": int(np.sum(regrets > bounds + 1e-12)),
        })

    transition_projection = tuple(
        {
            "transition": f"{labels[t]}->{labels[t + 1]}",
            "prob_mse": _mean_sd([r[f"tr{t}_projection"] for r in ok]),
        }
        for t in range(T - 1)
    )

    calibration = []
    for t in range(T):
        slope_mean, slope_sd = metrics.winsorized_mean_sd(
            [r[f"s{t}_cal_slope"] for r in ok])
        int_mean, int_sd = metrics.winsorized_mean_sd(
            [r[f"s{t}_cal_intercept"] for r in ok])
        calibration.append({
            "stage": labels[t],
            "slope": (slope_mean, slope_sd),
            "intercept": (int_mean, int_sd),
            "degenerate_frac": float(np.mean([r[f"s{t}_cal_degenerate"] for r in ok])),
        })

    return RunArtifacts(
        study=config.study,
        stage_labels=labels,
        n_reps=len(ok),
        bridge_reps=len(bridge_rows),
        master_seed=plan.master_seed,
        train_fraction=plan.train_fraction,
        c_fp=config.loss.c_fp,
        c_fn=config.loss.c_fn,
        c_star=config.loss.threshold,
        cumulative_cost=config.costs.cumulative,
        n_test=int(ok[0]["n_test"]) if ok else 0,
        stage_report=stage_report,
        confusion_means=confusion_means,
        stopping=stopping,
        drift=tuple(drift),
        bridge=bridge,
        compression=tuple(compression_rows),
        transition_projection=transition_projection,
        calibration=tuple(calibration),
        regret=tuple(regret_rows),
        failures=tuple(failures),
    )


def _fmt(value) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def emit_reports(artifacts, out_dir, sensitivity=None) -> list[Path]:
    """Write the CSV family and report.json for one or more study runs.

    ``sensitivity`` is an optional list of (study, schedule, StoppingReport)
    triples; sensitivity.csv is only written when such rows exist.
    """
    if isinstance(artifacts, RunArtifacts):
        artifacts = [artifacts]
    artifacts = list(artifacts)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    summary_rows = []
    for art in artifacts:
        for metric in STAGE_METRICS:
            for t, label in enumerate(art.stage_labels):
                mean, sd = art.stage_report.metrics[metric][t]
                summary_rows.append([art.study, label, metric, mean, sd])
    path = out / "summary.csv"
    _write_csv(path, ["study", "stage", "metric", "mean", "sd"], summary_rows)
    written.append(path)

    rows = []
    for art in artifacts:
        for t, label in enumerate(art.stage_labels):
            rows.append([
                art.study, label,
                art.stopping.decision_loss[t],
                art.stopping.cumulative_cost[t],
                art.stopping.total[t],
                int(t == art.stopping.preferred_stage),
            ])
    path = out / "stopping.csv"
    _write_csv(path, ["study", "stage", "decision_loss", "test_cost", "total_cost",
                      "preferred"], rows)
    written.append(path)

    rows = []
    for art in artifacts:
        for tr in art.drift:
            for b, binrow in enumerate(tr["bins"]):
                rows.append([art.study, tr["transition"], b, binrow["weight"],
                             binrow["mean_increment"], binrow["reps"]])
    path = out / "drift.csv"
    _write_csv(path, ["study", "transition", "bin", "weight", "mean_increment",
                      "reps"], rows)
    written.append(path)

    rows = []
    for art in artifacts:
        for t in range(len(art.stage_labels) - 1):
            rows.append([art.study, "stability",
                         f"{art.stage_labels[t]}->{art.stage_labels[t + 1]}",
                         art.bridge.stability[t]])
        for t, label in enumerate(art.stage_labels):
            rows.append([art.study, "threshold_distance", label,
                         art.bridge.threshold_distance[t]])
    path = out / "bridge.csv"
    _write_csv(path, ["study", "quantity", "where", "value"], rows)
    written.append(path)

    rows = []
    for art in artifacts:
        for comp in art.compression:
            for metric in ("auc", "brier", "decision_loss", "prob_mse"):
                mean, sd = comp[metric]
                rows.append([art.study, "compression", comp["model"], metric,
                             mean, sd])
        for tr in art.transition_projection:
            mean, sd = tr["prob_mse"]
            rows.append([art.study, "transition", tr["transition"], "prob_mse",
                         mean, sd])
    path = out / "projection.csv"
    _write_csv(path, ["study", "kind", "name", "metric", "mean", "sd"], rows)
    written.append(path)

    rows = []
    for art in artifacts:
        for cal in art.calibration:
            rows.append([
                art.study, cal["stage"],
                cal["slope"][0], cal["slope"][1],
                cal["intercept"][0], cal["intercept"][1],
                cal["degenerate_frac"],
            ])
    path = out / "calibration.csv"
    _write_csv(path, ["study", "stage", "slope_mean", "slope_sd", "intercept_mean",
                      "intercept_sd", "degenerate_frac"], rows)
    written.append(path)

    if sensitivity:
        rows = []
        for study, schedule, report in sensitivity:
            rows.append(
                [study, ":".join(_fmt(float(c)) for c in schedule)]
                + [report.total[t] for t in range(len(report.total))]
                + [report.stage_labels[report.preferred_stage]]
            )
        width = max(len(r) for r in rows) - 3
        header = (["study", "schedule"]
                  + [f"total_F{t + 1}" for t in range(width)] + ["preferred"])
        path = out / "sensitivity.csv"
        _write_csv(path, header, rows)
        written.append(path)

    doc = {"studies": {art.study: _artifact_doc(art) for art in artifacts}}
    if sensitivity:
        doc["sensitivity"] = [
            {
                "study": study,
                "schedule": [float(c) for c in schedule],
                "totals": list(report.total),
                "preferred": report.stage_labels[report.preferred_stage],
            }
            for study, schedule, report in sensitivity
        ]
    path = out / "report.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)
    return written


def _artifact_doc(art: RunArtifacts) -> dict:
    return {
        "stage_labels": list(art.stage_labels),
        "n_reps": art.n_reps,
        "bridge_reps": art.bridge_reps,
        "master_seed": art.master_seed,
        "train_fraction": art.train_fraction,
        "loss": {"c_fp": art.c_fp, "c_fn": art.c_fn, "c_star": art.c_star},
        "cumulative_cost": list(art.cumulative_cost),
        "n_test": art.n_test,
        "metrics": {
            m: [{"stage": s, "mean": art.stage_report.metrics[m][t][0],
                 "sd": art.stage_report.metrics[m][t][1]}
                for t, s in enumerate(art.stage_labels)]
            for m in STAGE_METRICS
        },
        "confusion_means": [dict(c, stage=s)
                            for c, s in zip(art.confusion_means, art.stage_labels)],
        "stopping": {
            "decision_loss": list(art.stopping.decision_loss),
            "cumulative_cost": list(art.stopping.cumulative_cost),
            "total": list(art.stopping.total),
            "preferred_stage": art.stopping.stage_labels[art.stopping.preferred_stage],
        },
        "drift": [
            {
                "transition": d["transition"],
                "mean_drift": {"mean": d["mean_drift"][0], "sd": d["mean_drift"][1]},
                "mean_square_drift": {"mean": d["mean_square_drift"][0],
                                      "sd": d["mean_square_drift"][1]},
                "bins": [dict(b) for b in d["bins"]],
            }
            for d in art.drift
        ],
        "bridge": {
            "stability": list(art.bridge.stability),
            "threshold_distance": list(art.bridge.threshold_distance),
        },
        "compression": [
            {
                "model": c["model"],
                **{m: {"mean": c[m][0], "sd": c[m][1]}
                   for m in ("auc", "brier", "decision_loss", "prob_mse")},
            }
            for c in art.compression
        ],
        "transition_projection": [
            {"transition": t["transition"],
             "prob_mse": {"mean": t["prob_mse"][0], "sd": t["prob_mse"][1]}}
            for t in art.transition_projection
        ],
        "calibration": [
            {
                "stage": c["stage"],
                "slope": {"mean": c["slope"][0], "sd": c["slope"][1]},
                "intercept": {"mean": c["intercept"][0], "sd": c["intercept"][1]},
                "degenerate_frac": c["degenerate_frac"],
            }
            for c in art.calibration
        ],
        "regret": [dict(r, regret={"mean": r["regret"][0], "sd": r["regret"][1]},
                        bound={"mean": r["bound"][0], "sd": r["bound"][1]})
                   for r in art.regret],
        "failures": [list(f) for f in art.failures],
    }
