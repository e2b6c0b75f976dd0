import json
import os
import subprocess
import sys

import numpy as np
import pytest

from seqstop import _kernels

PROBE = """
import json
import numpy as np
import seqstop
from seqstop import glm, metrics

rng = np.random.default_rng(99)
X = rng.normal(size=(60, 4))
y = (rng.random(60) < glm.sigmoid(X @ np.array([1.0, -1.5, 0.3, 0.0]))).astype(float)
model = glm.fit_logistic(X, y, lam=1.0)
scores = rng.random(60)
print(json.dumps({
    "backend": seqstop.BACKEND,
    "coef": list(model.coefficients),
    "intercept": model.intercept,
    "auc": metrics.auc(scores, y),
}))
"""


def run_probe(backend):
    env = dict(os.environ, SEQSTOP_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", PROBE], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


class TestBackendSelection:
    def test_numpy_fallback_forced_by_env(self):
        out = run_probe("numpy")
        assert out["backend"] == "numpy"

    def test_paths_agree(self):
        a = run_probe("numpy")
        b = run_probe("auto")
        assert np.allclose(a["coef"], b["coef"], atol=1e-10)
        assert a["intercept"] == pytest.approx(b["intercept"], abs=1e-10)
        assert a["auc"] == pytest.approx(b["auc"], abs=1e-12)

    def test_invalid_choice_rejected(self):
        env = dict(os.environ, SEQSTOP_BACKEND="gpu")
        proc = subprocess.run([sys.executable, "-c", "import seqstop"],
                              env=env, capture_output=True, text=True)
        assert proc.returncode != 0
        assert "SEQSTOP_BACKEND" in proc.stderr

    def test_active_backend_exported(self):
        assert _kernels.BACKEND in ("numba", "numpy")
