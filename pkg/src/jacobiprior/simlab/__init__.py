"""Seeded data generators, metrics, and the benchmark experiment harness."""

from .generators import (
    EXP_LOGISTIC_BETA,
    EXP_POISSON_BETA,
    contaminate_flip,
    contaminate_poisson,
    gen_circular,
    gen_dmr,
    gen_logistic,
    gen_poisson,
    gen_sinc,
)
from .metrics import (
    accuracy,
    beta_rmse,
    bootstrap_median_se,
    multiclass_accuracy,
    proportion_rmse,
    surrogate_rmse,
    utility_total,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    ReportRow,
    run_consistency,
    run_experiment,
)

__all__ = [
    "EXP_LOGISTIC_BETA",
    "EXP_POISSON_BETA",
    "contaminate_flip",
    "contaminate_poisson",
    "gen_circular",
    "gen_dmr",
    "gen_logistic",
    "gen_poisson",
    "gen_sinc",
    "accuracy",
    "beta_rmse",
    "bootstrap_median_se",
    "multiclass_accuracy",
    "proportion_rmse",
    "surrogate_rmse",
    "utility_total",
    "ExperimentConfig",
    "ExperimentReport",
    "ReportRow",
    "run_consistency",
    "run_experiment",
]
