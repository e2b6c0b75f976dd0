import math
import warnings

import numpy as np
import pytest

from seqstop import glm
from seqstop._kernels import irls_fit


class TestStandardizer:
    def test_two_point_column(self):
        std = glm.fit_standardizer(np.array([[1.0], [3.0]]))
        assert std.mean[0] == pytest.approx(2.0)
        assert std.scale[0] == pytest.approx(1.0)

    def test_constant_column_gets_unit_scale(self):
        std = glm.fit_standardizer(np.array([[5.0], [5.0], [5.0]]))
        assert std.mean[0] == 5.0
        assert std.scale[0] == 1.0

    def test_population_sd(self):
        # hand arithmetic: mean 1.5, population SD sqrt(mean([1.5^2]*4)) = 1.5
        std = glm.fit_standardizer(np.array([[0.0], [0.0], [3.0], [3.0]]))
        assert std.mean[0] == pytest.approx(1.5)
        assert std.scale[0] == pytest.approx(1.5)

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError):
            glm.fit_standardizer(np.empty((0, 3)))


class TestFitLogistic:
    def test_intercept_only_matches_bernoulli_mle(self):
        y = np.array([1, 1, 1] + [0] * 7, dtype=float)
        model = glm.fit_logistic(np.zeros((10, 0)), y, lam=0.0)
        assert model.converged
        assert model.intercept == pytest.approx(math.log(0.3 / 0.7), abs=1e-6)

    def test_separable_data_stays_finite_with_ridge(self):
        x = np.linspace(-1, 1, 20)[:, None]
        y = (x[:, 0] > 0).astype(float)
        model = glm.fit_logistic(x, y, lam=1.0)
        assert np.isfinite(model.coefficients).all()

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="both classes"):
            glm.fit_logistic(np.zeros((4, 1)), np.ones(4))

    def test_objective_decreases_monotonically(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(40, 3))
        y = (rng.random(40) < glm.sigmoid(X @ np.array([1.0, -2.0, 0.5]))).astype(float)
        Xa = np.concatenate([np.ones((40, 1)), X], axis=1)
        _, n_iter, _, converged, trace = irls_fit(Xa, y, 1.0, 1e-8, 100)
        assert converged
        recorded = trace[: n_iter + 1]
        recorded = recorded[~np.isnan(recorded)]
        assert np.all(np.diff(recorded) <= 0)

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(5, 3))
        y = np.array([0, 1, 1, 0, 1], dtype=float)
        lam = 0.7
        point = rng.normal(size=4) * 0.5
        analytic = glm.penalized_gradient(X, y, point[0], point[1:], lam)
        h = 1e-6
        numeric = np.empty(4)
        for j in range(4):
            up, dn = point.copy(), point.copy()
            up[j] += h
            dn[j] -= h
            numeric[j] = (
                glm.penalized_objective(X, y, up[0], up[1:], lam)
                - glm.penalized_objective(X, y, dn[0], dn[1:], lam)
            ) / (2 * h)
        assert np.allclose(analytic, numeric, rtol=1e-5, atol=1e-9)

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(60, 4))
        y = (rng.random(60) < 0.4).astype(float)
        perm = rng.permutation(60)
        a = glm.fit_logistic(X, y, lam=1.0)
        b = glm.fit_logistic(X[perm], y[perm], lam=1.0)
        assert np.allclose(a.coefficients, b.coefficients, atol=1e-10)
        assert a.intercept == pytest.approx(b.intercept, abs=1e-10)

    def test_solution_minimizes_stated_objective(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(50, 3))
        y = (rng.random(50) < 0.5).astype(float)
        model = glm.fit_logistic(X, y, lam=2.0)
        grad = glm.penalized_gradient(X, y, model.intercept, model.coefficients, 2.0)
        assert np.max(np.abs(grad)) < 1e-8

    def test_nonconvergence_flagged(self, monkeypatch):
        monkeypatch.setattr(glm, "MAX_ITER", 2)
        rng = np.random.default_rng(21)
        X = rng.normal(size=(50, 3))
        y = (rng.random(50) < glm.sigmoid(2 * X[:, 0])).astype(float)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            model = glm.fit_logistic(X, y, lam=1.0)
        assert not model.converged
        assert any("gradient tolerance" in str(w.message) for w in caught)


class TestPredictProba:
    def test_zero_model_gives_half(self):
        std = glm.fit_standardizer(np.array([[0.0, 1.0], [2.0, 3.0]]))
        model = glm.fit_logistic(np.zeros((4, 2)),
                                 np.array([0.0, 1.0, 0.0, 1.0]), lam=1e9)
        risks = glm.predict_proba(model, std, np.array([[1.0, 2.0]]), active=[0, 1])
        assert risks[0] == pytest.approx(0.5, abs=1e-6)

    def test_sigmoid_saturation(self):
        assert glm.sigmoid(30.0) > 1 - 1e-9

    def test_dimension_mismatch(self):
        std = glm.fit_standardizer(np.array([[0.0], [1.0]]))
        model = glm.fit_logistic(np.array([[0.0], [1.0]]),
                                 np.array([0.0, 1.0]), lam=1.0)
        with pytest.raises(ValueError, match="column count"):
            glm.predict_proba(model, std, np.zeros((2, 3)))

    def test_risks_in_open_interval(self):
        std = glm.Standardizer(mean=np.zeros(1), scale=np.ones(1))
        model = glm.LogisticModel(
            coefficients=np.array([0.0]), intercept=1000.0,
            ridge_strength=0.0, n_iter=0, grad_max=0.0, converged=True)
        risks = glm.predict_proba(model, std, np.zeros((1, 1)))
        assert 0.0 < risks[0] < 1.0


class TestPcaPipeline:
    def test_degenerate_single_axis(self):
        rng = np.random.default_rng(0)
        X = np.zeros((30, 2))
        X[:, 0] = rng.normal(size=30)
        y = (X[:, 0] > 0).astype(float)
        pipe = glm.fit_pca_pipeline(X, y, k=1)
        assert np.allclose(pipe.components[:, 0], [1.0, 0.0], atol=1e-12)

    def test_k_above_rank_rejected(self):
        X = np.zeros((20, 3))
        X[:, 0] = np.arange(20.0)
        y = (X[:, 0] > 10).astype(float)
        with pytest.raises(ValueError, match="rank"):
            glm.fit_pca_pipeline(X, y, k=2)

    def test_orthonormal_components(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(50, 6))
        y = (rng.random(50) < 0.5).astype(float)
        pipe = glm.fit_pca_pipeline(X, y, k=3)
        assert np.allclose(pipe.components.T @ pipe.components, np.eye(3),
                           atol=1e-10)

    def test_full_rank_equals_direct_fit(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(80, 5)) @ rng.normal(size=(5, 5))
        y = (rng.random(80) < glm.sigmoid(X[:, 0] - X[:, 1])).astype(float)
        pipe = glm.fit_pca_pipeline(X, y, k=5, lam=1.0)
        std = glm.fit_standardizer(X)
        direct = glm.fit_logistic(std.transform(X), y, lam=1.0)
        X_new = rng.normal(size=(40, 5)) @ rng.normal(size=(5, 5))
        assert np.allclose(pipe.predict(X_new),
                           glm.predict_proba(direct, std, X_new), atol=1e-6)
