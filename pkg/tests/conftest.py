import csv
import os
from pathlib import Path

import numpy as np
import pytest

from seqstop import harness

REPO = Path(__file__).resolve().parent.parent
CONFIG = REPO / "configs" / "studies.yaml"
DATA = REPO / "data"

# per-study stand-in facts: (rows, outcome column, '?'-bearing columns, positive pair)
SYNTH_SPECS = {
    "cleveland": (303, "num", ("ca", "thal"), (0, 4)),
    "pima": (768, "outcome", (), (0, 1)),
    "eicu": (2359, "hospital_death", (), (0, 1)),
}


def synthetic_csv(path, columns, n_rows, outcome_col, rng,
                  missing_cols=(), outcome_values=(0, 1)):
    """Random source file matching a study's fetched column layout."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for _ in range(n_rows):
            row = []
            for c in columns:
                if c == outcome_col:
                    row.append(outcome_values[int(rng.random() < 0.4)])
                elif c in missing_cols and rng.random() < 0.02:
                    row.append("?")
                else:
                    row.append(round(float(rng.normal(50, 10)), 3))
            writer.writerow(row)


def synthetic_source_for(cfg, tmp_dir):
    """Write a fetch-format stand-in for one configured study; returns its path."""
    from seqstop import fetch

    n_rows, outcome, missing, outcome_values = SYNTH_SPECS[cfg.study]
    columns = {
        "cleveland": fetch.CLEVELAND_COLUMNS,
        "pima": fetch.PIMA_COLUMNS,
        "eicu": list(cfg.stage_columns[-1]) + [outcome],
    }[cfg.study]
    rng = np.random.default_rng(hash(cfg.study) % (2**32))
    path = Path(tmp_dir) / f"{cfg.study}.csv"
    synthetic_csv(path, columns, n_rows, outcome, rng,
                  missing_cols=missing, outcome_values=outcome_values)
    return path


@pytest.fixture(scope="session")
def study_configs():
    return harness.load_study_configs(CONFIG)


@pytest.fixture(scope="session")
def bcw_config(study_configs):
    cfg = study_configs["bcw"]
    if not Path(cfg.source).exists():
        pytest.skip("bcw source csv missing (run: seqstop fetch-data)")
    return cfg


def _maybe_run(study_configs, name, cache={}):
    """Full-length run of one study, cached for the whole session."""
    if name not in cache:
        cfg = study_configs[name]
        if not Path(cfg.source).exists():
            cache[name] = None
        else:
            workers = int(os.environ.get("SEQSTOP_TEST_WORKERS", "1"))
            cache[name] = harness.run_study(cfg, workers=workers)
    return cache[name]


@pytest.fixture(scope="session")
def full_runs(study_configs):
    """Factory: full_runs('bcw') -> RunArtifacts or None when data is absent."""

    def get(name):
        return _maybe_run(study_configs, name)

    return get
