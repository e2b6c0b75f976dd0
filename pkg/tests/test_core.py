import dataclasses

import numpy as np
import pytest

from seqstop.core import (
    BridgeReport,
    CostSchedule,
    DriftReport,
    LossSpec,
    RiskMatrix,
    SplitPlan,
    StagedDataset,
    StoppingReport,
)


def make_dataset(**overrides):
    base = dict(
        name="toy",
        features=np.arange(12.0).reshape(4, 3),
        outcome=np.array([0, 1, 0, 1]),
        stages=((0,), (0, 1), (0, 1, 2)),
        feature_names=("a", "b", "c"),
    )
    base.update(overrides)
    return StagedDataset(**base)


class TestStagedDataset:
    def test_valid(self):
        ds = make_dataset()
        assert ds.n == 4 and ds.p == 3 and ds.horizon == 3

    def test_outcome_not_binary(self):
        with pytest.raises(ValueError, match="outcome entries"):
            make_dataset(outcome=np.array([0, 2, 0, 1]))

    def test_single_class(self):
        with pytest.raises(ValueError, match="each class"):
            make_dataset(outcome=np.array([1, 1, 1, 1]))

    def test_nesting_violated(self):
        with pytest.raises(ValueError, match="nested"):
            make_dataset(stages=((0, 1), (1, 2), (0, 1, 2)))

    def test_stage_index_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            make_dataset(stages=((0,), (0, 3), (0, 1, 3)))

    def test_missing_values_rejected(self):
        bad = np.arange(12.0).reshape(4, 3)
        bad[2, 1] = np.nan
        with pytest.raises(ValueError, match="no missing values"):
            make_dataset(features=bad)

    def test_immutable(self):
        ds = make_dataset()
        with pytest.raises(dataclasses.FrozenInstanceError):
            ds.name = "other"
        with pytest.raises(ValueError):
            ds.features[0, 0] = 99.0


class TestLossSpec:
    def test_threshold(self):
        assert LossSpec(1.0, 5.0).threshold == pytest.approx(1 / 6)

    @pytest.mark.parametrize("c_fp,c_fn", [(0.0, 1.0), (1.0, -2.0)])
    def test_positive_costs(self, c_fp, c_fn):
        with pytest.raises(ValueError, match="c_f"):
            LossSpec(c_fp, c_fn)


class TestCostSchedule:
    def test_increments(self):
        assert CostSchedule((0.0, 0.01, 0.03)).increments == pytest.approx((0.01, 0.02))

    def test_must_start_at_zero(self):
        with pytest.raises(ValueError, match=r"cumulative\[0\]"):
            CostSchedule((0.01, 0.02))

    def test_nondecreasing(self):
        with pytest.raises(ValueError, match="nondecreasing"):
            CostSchedule((0.0, 0.05, 0.02))


class TestRiskMatrix:
    def test_range_enforced(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            RiskMatrix(np.array([[0.2, 1.4]]), ("p1",))

    def test_valid(self):
        rm = RiskMatrix(np.array([[0.2, 0.4], [0.9, 0.8]]), ("p1", "p2"))
        assert rm.horizon == 2


class TestSplitPlan:
    def test_fraction_bounds(self):
        with pytest.raises(ValueError, match="train_fraction"):
            SplitPlan(master_seed=1, n_reps=10, train_fraction=1.0)

    def test_positive_reps(self):
        with pytest.raises(ValueError, match="n_reps"):
            SplitPlan(master_seed=1, n_reps=0)


class TestStoppingReport:
    def test_total_consistency(self):
        with pytest.raises(ValueError, match="total"):
            StoppingReport(("F1", "F2"), (0.5, 0.4), (0.0, 0.1), (0.5, 0.55), 0)

    def test_earliest_argmin_on_ties(self):
        with pytest.raises(ValueError, match="earliest argmin"):
            StoppingReport(("F1", "F2"), (0.5, 0.4), (0.0, 0.1), (0.5, 0.5), 1)
        rep = StoppingReport(("F1", "F2"), (0.5, 0.4), (0.0, 0.1), (0.5, 0.5), 0)
        assert rep.preferred_stage == 0


class TestDriftReport:
    def test_invariants_checked(self):
        with pytest.raises(ValueError, match="weights sum"):
            DriftReport((0.0, 0.5, 1.0), (0.4, 0.4), (0.1, 0.2), 0.12, 0.02)
        w, d = (0.5, 0.5), (0.1, -0.1)
        with pytest.raises(ValueError, match="M = "):
            DriftReport((0.0, 0.5, 1.0), w, d, 0.05, 0.01)
        rep = DriftReport((0.0, 0.5, 1.0), w, d, 0.0, 0.01)
        assert rep.n_bins == 2


class TestBridgeReport:
    def test_lengths(self):
        with pytest.raises(ValueError, match="one distance per stage"):
            BridgeReport(stability=(0.9,), threshold_distance=(0.3,))

    def test_ranges(self):
        with pytest.raises(ValueError, match="stability"):
            BridgeReport(stability=(1.2, 0.9), threshold_distance=(0.1, 0.2, 0.3))
