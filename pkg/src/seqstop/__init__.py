"""Staged risk prediction as an optimal-stopping problem.

Stagewise ridge-logistic risk models, Bayes threshold decisions, exact
Bellman stopping analysis on discrete synthetic worlds, martingale drift and
projection diagnostics, and a reproducible repeated-split study harness.
"""

from ._kernels import BACKEND
from .core import (
    BridgeReport,
    CostSchedule,
    DriftReport,
    LossSpec,
    RiskMatrix,
    SplitPlan,
    StagedDataset,
    StageReport,
    StoppingReport,
)
from .diagnostics import (
    decision_stability,
    decomposition_check,
    drift_diagnostic,
    projection_loss,
    regret_bound_check,
    threshold_distance,
)
from .glm import (
    LogisticModel,
    PcaPipeline,
    Standardizer,
    fit_logistic,
    fit_pca_pipeline,
    fit_standardizer,
    predict_proba,
)
from .harness import (
    RunArtifacts,
    StudyConfig,
    derive_rep_seed,
    emit_reports,
    load_dataset,
    load_study_configs,
    run_study,
    stratified_split,
)
from .metrics import (
    CalibrationFit,
    ConfusionCounts,
    auc,
    brier,
    confusion_at_threshold,
    empirical_decision_loss,
    log_loss,
    recalibrate,
    winsorized_mean_sd,
)
from .stopping import (
    BellmanSolution,
    acting_loss,
    bayes_threshold,
    bellman_solve,
    exhaustive_policy_cost,
    retrospective_total_cost,
    sensitivity_sweep,
)
from .synth import (
    SyntheticWorld,
    exact_posteriors,
    exact_projections,
    martingale_check,
    random_world,
    reverse_martingale_check,
    sample_trajectories,
)

__version__ = "0.1.0"
