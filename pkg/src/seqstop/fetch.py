"""Materialize the four study source files.

The breast-cancer table ships with scikit-learn, so it can be written
offline.  The heart-disease and diabetes tables are downloaded from their
public archives when the network allows.  The ICU table must be prepared
from the PhysioNet demo export by the recipe in docs/eicu_preprocessing.md;
this module only checks for its presence.
"""

from __future__ import annotations

import csv
import urllib.error
import urllib.request
from pathlib import Path

CLEVELAND_URL = ("https://archive.ics.uci.edu/ml/machine-learning-databases/"
                 "heart-disease/processed.cleveland.data")
PIMA_URL = ("https://raw.githubusercontent.com/jbrownlee/Datasets/master/"
            "pima-indians-diabetes.data.csv")

CLEVELAND_COLUMNS = [
    "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg",
    "thalach", "exang", "oldpeak", "slope", "ca", "thal", "num",
]
PIMA_COLUMNS = [
    "pregnancies", "glucose", "blood_pressure", "skin_thickness",
    "insulin", "bmi", "pedigree", "age", "outcome",
]


def write_bcw(path: Path) -> str:
    try:
        from sklearn.datasets import load_breast_cancer
    except ImportError:
        return "bcw: scikit-learn not installed (pip install seqstop[data])"
    data = load_breast_cancer()
    names = [n.replace(" ", "_") for n in data.feature_names]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names + ["diagnosis"])
        for row, target in zip(data.data, data.target):
            label = "M" if target == 0 else "B"
            writer.writerow([repr(float(v)) for v in row] + [label])
    return f"bcw: wrote {path} ({len(data.data)} rows)"


def _download_csv(url: str, path: Path, columns: list[str],
                  has_header: bool) -> str:
    try:
        with urllib.request.urlopen(url, timeout=30) as resp:
            text = resp.read().decode("utf-8")
    except (urllib.error.URLError, OSError) as exc:
        return f"{path.stem}: download failed ({exc}); place the file at {path} manually"
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if has_header:
        lines = lines[1:]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for ln in lines:
            writer.writerow([c.strip() for c in ln.split(",")])
    return f"{path.stem}: wrote {path} ({len(lines)} rows)"


def fetch_all(out_dir, studies=None) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    wanted = set(studies) if studies else {"bcw", "cleveland", "pima", "eicu"}
    messages = []
    if "bcw" in wanted:
        messages.append(write_bcw(out / "bcw.csv"))
    if "cleveland" in wanted:
        messages.append(_download_csv(CLEVELAND_URL, out / "cleveland.csv",
                                      CLEVELAND_COLUMNS, has_header=False))
    if "pima" in wanted:
        messages.append(_download_csv(PIMA_URL, out / "pima.csv",
                                      PIMA_COLUMNS, has_header=False))
    if "eicu" in wanted:
        path = out / "eicu.csv"
        if path.exists():
            messages.append(f"eicu: found {path}")
        else:
            messages.append("eicu: not fetchable automatically; build it from the "
                            "PhysioNet demo with docs/eicu_preprocessing.md and "
                            f"place it at {path}")
    return messages
