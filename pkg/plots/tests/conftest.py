import csv
from pathlib import Path

import pytest

# stagewise decision losses and cumulative schedules for the four studies,
# matching the result tables the primary package reproduces
STOPPING = {
    "bcw": ([0.1535, 0.1416, 0.0860], [0.0, 0.01, 0.03]),
    "cleveland": ([0.486, 0.424, 0.416], [0.0, 0.02, 0.06]),
    "pima": ([0.446, 0.437, 0.448], [0.0, 0.01, 0.03]),
    "eicu": ([0.918, 0.911, 0.816], [0.0, 0.01, 0.03]),
}


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


@pytest.fixture(scope="session")
def results_dir(tmp_path_factory) -> Path:
    """A results directory in the harness's emitted-CSV schema."""
    out = tmp_path_factory.mktemp("results")

    rows = []
    for study, (losses, costs) in STOPPING.items():
        totals = [l + c for l, c in zip(losses, costs)]
        best = totals.index(min(totals))
        for t in range(3):
            rows.append([study, f"F{t + 1}", losses[t], costs[t], totals[t],
                         int(t == best)])
    write_csv(out / "stopping.csv",
              ["study", "stage", "decision_loss", "test_cost", "total_cost",
               "preferred"], rows)

    rows = []
    summary = {
        "bcw": {"auc": [0.9848, 0.9867, 0.9947], "brier": [0.0452, 0.0382, 0.0203]},
        "cleveland": {"auc": [0.820, 0.861, 0.898], "brier": [0.174, 0.153, 0.128]},
        "pima": {"auc": [0.827, 0.839, 0.835], "brier": [0.161, 0.156, 0.158]},
        "eicu": {"auc": [0.699, 0.731, 0.770], "brier": [0.209, 0.190, 0.180]},
    }
    for study, metrics in summary.items():
        for metric, means in metrics.items():
            for t, mean in enumerate(means):
                rows.append([study, f"F{t + 1}", metric, mean, 0.01])
    write_csv(out / "summary.csv", ["study", "stage", "metric", "mean", "sd"],
              rows)

    rows = []
    drift = {
        "bcw": [0.003, -0.004, 0.009, 0.012, -0.006, 0.004, -0.002, 0.008,
                -0.011, 0.001],
        "cleveland": [0.02, -0.03, 0.05, -0.01, 0.04, 0.06, -0.02, 0.01,
                      -0.03, 0.02],
        "pima": [0.001, -0.002, 0.002, -0.001, 0.0, 0.001, -0.001, 0.002,
                 -0.002, 0.001],
        "eicu": [-0.02, -0.03, -0.04, -0.035, -0.03, -0.04, -0.03, -0.04,
                 -0.05, -0.03],
    }
    for study, deltas in drift.items():
        for transition in ("F1->F2", "F2->F3"):
            for b, delta in enumerate(deltas):
                rows.append([study, transition, b, 0.1, delta, 200])
    write_csv(out / "drift.csv",
              ["study", "transition", "bin", "weight", "mean_increment",
               "reps"], rows)

    rows = []
    projection = {
        "bcw": {"full": 0.0, "pca3": 0.0143, "pca1": 0.0419},
        "cleveland": {"full": 0.0, "pca3": 0.019, "pca1": 0.024},
        "pima": {"full": 0.0, "pca3": 0.015, "pca1": 0.021},
        "eicu": {"full": 0.0, "pca3": 0.016, "pca1": 0.022},
    }
    for study, models in projection.items():
        for model, mse in models.items():
            rows.append([study, "compression", model, "prob_mse", mse, 0.004])
        rows.append([study, "transition", "F1->F2", "prob_mse", 0.018, 0.003])
    write_csv(out / "projection.csv",
              ["study", "kind", "name", "metric", "mean", "sd"], rows)

    return out
