import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqstop import metrics
from seqstop.core import LossSpec


def brute_force_auc(scores, labels):
    """Independent pairwise oracle for the rank-based implementation."""
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                total += 1.0
            elif sp == sn:
                total += 0.5
    return total / (len(pos) * len(neg))


class TestAuc:
    def test_perfect_separation(self):
        assert metrics.auc([0.2, 0.8], [0, 1]) == 1.0

    def test_all_tied_scores(self):
        assert metrics.auc([0.4, 0.4, 0.4, 0.4], [0, 1, 0, 1]) == 0.5

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="single class"):
            metrics.auc([0.1, 0.2], [1, 1])

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(5, 40))
            scores = rng.choice([0.1, 0.25, 0.5, 0.8], size=n)  # force ties
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                continue
            assert metrics.auc(scores, labels) == pytest.approx(
                brute_force_auc(scores, labels), abs=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_invariant_under_increasing_transform(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 30))
        scores = rng.normal(size=n)
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            return
        base = metrics.auc(scores, labels)
        transformed = metrics.auc(np.exp(2.0 * scores) + 1.0, labels)
        assert transformed == pytest.approx(base, abs=1e-12)


class TestBrierLogLoss:
    def test_perfect_risks(self):
        labels = np.array([0, 1, 1, 0])
        assert metrics.brier(labels.astype(float), labels) == 0.0
        assert metrics.log_loss(labels.astype(float), labels) <= 3.5e-15

    def test_constant_half(self):
        labels = np.array([0, 1, 0, 1])
        assert metrics.brier([0.5] * 4, labels) == 0.25
        assert metrics.log_loss([0.5] * 4, labels) == pytest.approx(np.log(2))

    def test_minimized_at_prevalence_over_constants(self):
        rng = np.random.default_rng(9)
        labels = (rng.random(200) < 0.3).astype(int)
        prevalence = labels.mean()
        grid = np.linspace(0.01, 0.99, 99)
        for fn in (metrics.brier, metrics.log_loss):
            at_prev = fn(np.full(200, prevalence), labels)
            assert all(at_prev <= fn(np.full(200, c), labels) + 1e-12
                       for c in grid)


class TestConfusion:
    def test_trivial(self):
        cm = metrics.confusion_at_threshold([0.1, 0.9], [0, 1], 1 / 6)
        assert (cm.tp, cm.tn, cm.fp, cm.fn) == (1, 1, 0, 0)

    def test_tie_is_negative_decision(self):
        cm = metrics.confusion_at_threshold([1 / 6], [1], 1 / 6)
        assert cm.fn == 1 and cm.tp == 0

    def test_hand_enumeration(self):
        cm = metrics.confusion_at_threshold([0.2, 0.2, 0.05], [1, 0, 1], 1 / 6)
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (1, 1, 1, 0)

    def test_counts_partition_n(self):
        rng = np.random.default_rng(3)
        risks = rng.random(57)
        labels = rng.integers(0, 2, size=57)
        cm = metrics.confusion_at_threshold(risks, labels, 0.37)
        assert cm.n == 57


class TestDecisionLoss:
    def test_zero_when_no_errors(self):
        cm = metrics.ConfusionCounts(tp=5, fp=0, tn=5, fn=0)
        assert metrics.empirical_decision_loss(cm, LossSpec(1, 5)) == 0.0

    def test_direct_arithmetic(self):
        cm = metrics.ConfusionCounts(tp=4, fp=2, tn=3, fn=1)
        assert metrics.empirical_decision_loss(cm, LossSpec(1, 5)) == pytest.approx(0.7)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(8)
        risks = rng.random(80)
        labels = rng.integers(0, 2, size=80)
        loss = LossSpec(1.0, 5.0)
        scaled = LossSpec(3.0, 15.0)
        assert loss.threshold == scaled.threshold  # decisions unchanged
        cm = metrics.confusion_at_threshold(risks, labels, loss.threshold)
        assert metrics.empirical_decision_loss(cm, scaled) == pytest.approx(
            3.0 * metrics.empirical_decision_loss(cm, loss))


class TestRecalibrate:
    def test_calibrated_by_construction(self):
        rng = np.random.default_rng(123)
        n = 100_000
        p = rng.uniform(0.02, 0.98, size=n)
        y = (rng.random(n) < p).astype(int)
        fit = metrics.recalibrate(p, y)
        assert not fit.degenerate
        assert fit.slope == pytest.approx(1.0, abs=0.05)
        assert fit.intercept == pytest.approx(0.0, abs=0.05)

    def test_separation_flagged_degenerate(self):
        # tightly spread separated risks force an exploding recalibration slope
        risks = np.array([0.49, 0.495, 0.505, 0.51])
        labels = np.array([0, 0, 1, 1])
        fit = metrics.recalibrate(risks, labels)
        assert fit.degenerate

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="single class"):
            metrics.recalibrate([0.2, 0.4], [1, 1])


class TestWinsorizedMeanSd:
    def test_constant_vector(self):
        mean, sd = metrics.winsorized_mean_sd(np.full(10, 3.5))
        assert (mean, sd) == (3.5, 0.0)

    def test_outliers_clamped_to_percentile_bound(self):
        values = np.array([0.0] * 97 + [1000.0] * 3)
        # linear-interpolation oracle: upper bound at fractional index
        # 0.975 * 99 = 96.525 between 0 and 1000 -> 525; lower bound 0
        clipped = np.array([0.0] * 97 + [525.0] * 3)
        expect_mean = clipped.mean()
        expect_sd = np.sqrt(((clipped - expect_mean) ** 2).sum() / 99)
        mean, sd = metrics.winsorized_mean_sd(values)
        assert mean == pytest.approx(expect_mean, abs=1e-9)
        assert sd == pytest.approx(expect_sd, abs=1e-9)
        assert mean == pytest.approx(15.75, abs=1e-9)

    def test_symmetric_data_mean_unchanged(self):
        values = np.concatenate([np.linspace(-3, 3, 101)])
        mean, _ = metrics.winsorized_mean_sd(values)
        assert mean == pytest.approx(0.0, abs=1e-12)
