"""Render the result-figure family from seqstop CSV outputs.

Four figure kinds, one per result-file family:

    stage-metric     summary.csv    stagewise metric bars with SD whiskers
    total-cost       stopping.csv   total cost by stage, minimum highlighted
    drift-deciles    drift.csv      per-decile mean risk increments
    projection       projection.csv compression probability-MSE bars

Rendering never recomputes statistics: bar heights are the CSV values.
Images are deterministic for fixed inputs (fixed figure geometry, no
embedded metadata).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

KINDS = ("stage-metric", "total-cost", "drift-deciles", "projection")

_SAVEFIG = dict(dpi=120, metadata={"Software": None})


class SchemaError(ValueError):
    """Input CSV does not match the expected result schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    source: Path
    out: Path
    study: str | None = None      # None: first study found in the file
    metric: str = "auc"           # stage-metric only
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"expected one of {KINDS}")
        object.__setattr__(self, "source", Path(self.source))
        object.__setattr__(self, "out", Path(self.out))


@dataclass(frozen=True)
class RenderedFigure:
    path: Path
    study: str
    annotations: dict = field(default_factory=dict)


def _read_rows(path: Path, required: set[str]) -> list[dict]:
    if not path.exists():
        raise SchemaError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = set(reader.fieldnames or [])
        missing = sorted(required - header)
        if missing:
            raise SchemaError(f"{path.name}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    return rows


def _pick_study(rows: list[dict], study: str | None, path: Path) -> str:
    studies = [r["study"] for r in rows]
    if study is None:
        return studies[0]
    if study not in studies:
        raise SchemaError(f"{path.name}: study {study!r} not present "
                          f"(found {sorted(set(studies))})")
    return study


def _new_axes(title: str):
    fig, ax = plt.subplots(figsize=(5.4, 3.6), constrained_layout=True)
    ax.set_title(title)
    return fig, ax


def render(spec: FigureSpec) -> RenderedFigure:
    """Draw one figure; returns the output path plus testable annotations."""
    if spec.kind == "stage-metric":
        result = _render_stage_metric(spec)
    elif spec.kind == "total-cost":
        result = _render_total_cost(spec)
    elif spec.kind == "drift-deciles":
        result = _render_drift(spec)
    else:
        result = _render_projection(spec)
    return result


def _save(fig, spec: FigureSpec) -> Path:
    spec.out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out, **_SAVEFIG)
    plt.close(fig)
    return spec.out


def _render_stage_metric(spec: FigureSpec) -> RenderedFigure:
    rows = _read_rows(spec.source, {"study", "stage", "metric", "mean", "sd"})
    study = _pick_study(rows, spec.study, spec.source)
    chosen = [r for r in rows if r["study"] == study
              and r["metric"] == spec.metric]
    if not chosen:
        raise SchemaError(f"{spec.source.name}: metric {spec.metric!r} not "
                          f"present for study {study!r}")
    stages = [r["stage"] for r in chosen]
    means = [float(r["mean"]) for r in chosen]
    sds = [float(r["sd"]) for r in chosen]
    fig, ax = _new_axes(spec.title or f"{study}: {spec.metric} by stage")
    ax.bar(stages, means, yerr=sds, capsize=4, color="#4878b0")
    ax.set_ylabel(spec.metric)
    ax.set_xlabel("stage")
    path = _save(fig, spec)
    return RenderedFigure(path=path, study=study,
                          annotations={"stages": stages, "means": means})


def _render_total_cost(spec: FigureSpec) -> RenderedFigure:
    rows = _read_rows(spec.source, {"study", "stage", "decision_loss",
                                    "test_cost", "total_cost"})
    study = _pick_study(rows, spec.study, spec.source)
    chosen = [r for r in rows if r["study"] == study]
    stages = [r["stage"] for r in chosen]
    totals = [float(r["total_cost"]) for r in chosen]
    best = min(range(len(totals)), key=lambda i: (totals[i], i))
    colors = ["#c44e52" if i == best else "#4878b0" for i in range(len(totals))]
    fig, ax = _new_axes(spec.title or f"{study}: total cost by stage")
    ax.bar(stages, totals, color=colors)
    ax.annotate(f"minimum: {stages[best]}",
                xy=(best, totals[best]), xytext=(0, 6),
                textcoords="offset points", ha="center", fontsize=9)
    ax.set_ylabel("decision loss + cumulative test cost")
    ax.set_xlabel("stage")
    path = _save(fig, spec)
    return RenderedFigure(path=path, study=study,
                          annotations={"stages": stages, "totals": totals,
                                       "marked_stage": stages[best]})


def _render_drift(spec: FigureSpec) -> RenderedFigure:
    rows = _read_rows(spec.source, {"study", "transition", "bin", "weight",
                                    "mean_increment"})
    study = _pick_study(rows, spec.study, spec.source)
    chosen = [r for r in rows if r["study"] == study]
    transitions = sorted({r["transition"] for r in chosen})
    fig, axes = plt.subplots(1, len(transitions),
                             figsize=(4.0 * len(transitions), 3.4),
                             constrained_layout=True, squeeze=False)
    for ax, tr in zip(axes[0], transitions):
        sub = [r for r in chosen if r["transition"] == tr]
        bins = [int(r["bin"]) for r in sub]
        deltas = [float(r["mean_increment"]) for r in sub]
        ax.bar(bins, deltas, color="#4878b0")
        ax.axhline(0.0, color="black", linewidth=0.8)
        ax.set_title(tr)
        ax.set_xlabel("risk decile")
        ax.set_ylabel("mean increment")
    fig.suptitle(spec.title or f"{study}: conditional drift by decile")
    path = _save(fig, spec)
    return RenderedFigure(path=path, study=study,
                          annotations={"transitions": transitions})


def _render_projection(spec: FigureSpec) -> RenderedFigure:
    rows = _read_rows(spec.source, {"study", "kind", "name", "metric",
                                    "mean", "sd"})
    study = _pick_study(rows, spec.study, spec.source)
    chosen = [r for r in rows if r["study"] == study
              and r["kind"] == "compression" and r["metric"] == "prob_mse"]
    if not chosen:
        raise SchemaError(f"{spec.source.name}: no compression prob_mse rows "
                          f"for study {study!r}")
    names = [r["name"] for r in chosen]
    means = [float(r["mean"]) for r in chosen]
    sds = [float(r["sd"]) for r in chosen]
    fig, ax = _new_axes(spec.title or f"{study}: projection loss by compression")
    ax.bar(names, means, yerr=sds, capsize=4, color="#4878b0")
    ax.set_ylabel("probability MSE vs full model")
    ax.set_xlabel("model")
    path = _save(fig, spec)
    return RenderedFigure(path=path, study=study,
                          annotations={"models": names, "means": means})
