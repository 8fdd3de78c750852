"""
Experiments — hockey-stick 任务、误差度量、收敛/维度研究与下界构造。

Quick Start::

    from otmap.core import RunConfig
    from otmap.experiments import convergence_study

    report = convergence_study("nn", q=1.0, d=50, ns=[50, 100, 200], seeds=3, cfg=RunConfig())
    report.write_json("report.json")
    report.write_errors_csv("errors.csv")
"""

from otmap.estimators.linear import LinearMap, linear_ot_baseline
from otmap.experiments.hockey import (
    HockeyStickMap,
    ellipsoid_smoothness,
    gen_ellipsoid_data,
    gen_pushforward_data,
    hockey_eval,
    hockey_smoothness,
    kappa,
)
from otmap.experiments.lower_bound import (
    FixtureReport,
    generate_codes,
    hamming_matrix,
    lower_bound_fixture,
    packing_frequencies,
    packing_gamma,
)
from otmap.experiments.metrics import (
    ErrorEstimate,
    fit_loglog,
    l2_error,
    rate_exponent,
    theoretical_rates,
)
from otmap.experiments.study import (
    ErrorRecord,
    ExperimentReport,
    StudyTask,
    convergence_study,
    dimension_study,
    make_task,
)

__all__ = [
    # hockey
    "HockeyStickMap",
    "ellipsoid_smoothness",
    "gen_ellipsoid_data",
    "gen_pushforward_data",
    "hockey_eval",
    "hockey_smoothness",
    "kappa",
    # baseline
    "LinearMap",
    "linear_ot_baseline",
    # metrics
    "ErrorEstimate",
    "fit_loglog",
    "l2_error",
    "rate_exponent",
    "theoretical_rates",
    # studies
    "ErrorRecord",
    "ExperimentReport",
    "StudyTask",
    "convergence_study",
    "dimension_study",
    "make_task",
    # lower bound
    "FixtureReport",
    "generate_codes",
    "hamming_matrix",
    "lower_bound_fixture",
    "packing_frequencies",
    "packing_gamma",
]
