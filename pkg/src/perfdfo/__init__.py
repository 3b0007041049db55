"""Derivative-free optimization with decision-dependent Markovian data.

Library layout: ``core`` holds the shared numeric primitives, ``envs`` the
controlled Markov-chain benchmark environments, ``optim`` the accumulation
optimizer and its baselines, ``diag`` estimator diagnostics, and ``harness``
the declarative experiment runner behind the ``perfdfo`` CLI.
"""

from .core import (
    Schedule,
    default_tau0,
    forgetting_weight,
    make_rng,
    nonsmooth_schedule,
    one_point_gradient,
    sample_unit_sphere,
    schedule_at,
    smooth_schedule,
)
from .diag import MomentReport, estimator_moments, finite_diff_grad, slope_fit, smoothed_risk
from .envs import ArPricing, ArRegression, ArScalarQuartic, Environment, make_environment
from .errors import (
    AggregationError,
    ConfigError,
    OracleUnavailableError,
    UnsupportedAlgorithmError,
)
from .harness import (
    AggregateCurve,
    AlgorithmPlan,
    ExperimentConfig,
    ExperimentResult,
    aggregate,
    config_from_dict,
    load_config,
    run_experiment,
)
from .optim import ALGORITHM_TAGS, AlgoConfig, RunTrace, run_algorithm
from .presets import PRESET_NAMES, dump_preset, preset_config

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM_TAGS",
    "AggregateCurve",
    "AggregationError",
    "AlgoConfig",
    "AlgorithmPlan",
    "ArPricing",
    "ArRegression",
    "ArScalarQuartic",
    "ConfigError",
    "Environment",
    "ExperimentConfig",
    "ExperimentResult",
    "MomentReport",
    "OracleUnavailableError",
    "PRESET_NAMES",
    "RunTrace",
    "Schedule",
    "UnsupportedAlgorithmError",
    "aggregate",
    "config_from_dict",
    "default_tau0",
    "dump_preset",
    "estimator_moments",
    "finite_diff_grad",
    "forgetting_weight",
    "load_config",
    "make_environment",
    "make_rng",
    "nonsmooth_schedule",
    "one_point_gradient",
    "preset_config",
    "run_algorithm",
    "run_experiment",
    "sample_unit_sphere",
    "schedule_at",
    "slope_fit",
    "smooth_schedule",
    "smoothed_risk",
]
