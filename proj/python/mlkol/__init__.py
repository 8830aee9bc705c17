"""Spectral simulator for multilevel kernel operator learning."""

from ._mlkol import (
    CheckResult,
    ConfigError,
    LambdaSchedule,
    Level,
    LevelSchedule,
    ProblemConfig,
    RateFit,
    TheoreticalRate,
    bg_norm,
    bias_lambdas,
    decay_values,
    estimate,
    fit_rate,
    load_config,
    make_dataset,
    multilevel_schedule,
    operator_from_source,
    random_source_operator,
    run_oracle_checks,
    run_rates,
    theoretical_rate,
    variance_lambdas,
)

__all__ = [
    "CheckResult",
    "ConfigError",
    "LambdaSchedule",
    "Level",
    "LevelSchedule",
    "ProblemConfig",
    "RateFit",
    "TheoreticalRate",
    "bg_norm",
    "bias_lambdas",
    "decay_values",
    "estimate",
    "fit_rate",
    "load_config",
    "make_dataset",
    "multilevel_schedule",
    "operator_from_source",
    "random_source_operator",
    "run_oracle_checks",
    "run_rates",
    "theoretical_rate",
    "variance_lambdas",
]
