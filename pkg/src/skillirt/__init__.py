"""Student ability and skill difficulty estimation from graded response logs."""
from .analytics import (
    CohortSummary,
    Distribution,
    SkillRanking,
    Trajectory,
    ability_histogram,
    ability_vs_attempts,
    cohort_summary,
    difficulty_vs_practice,
    rank_skills,
    relative_mastery,
    skill_observed_vs_predicted,
    student_trajectory,
)
from .fit import BaselineModel, FitConfig, FitResult, check_gradient, fit_baseline, fit_map
from .ingest import (
    CleaningReport,
    ColumnSchema,
    InteractionTable,
    ResponseRecord,
    build_table,
    clean,
    holdout_split,
    load_table,
    parse_records,
    subsample,
)
from .metrics import CalibrationTable, auc, calibration, log_loss
from .model import ModelParams, PriorConfig, gradient, neg_log_posterior, predict_prob, record_probs
from .synth import SynthSpec, generate

__version__ = "0.1.0"
