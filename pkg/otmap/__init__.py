"""
otmap — Optimal transport map estimation on [0,1]^d.

基于 γ-光滑函数空间的半对偶 Brenier 势估计：截断 Fourier 估计器、ReLU 神经网络估计器、
最近邻插值估计器，以及模拟研究、下界构造与函数型数据 (FDA) 工具。

Quick Start:
    from otmap import RunConfig, HockeyStickMap, gen_pushforward_data, hockey_smoothness
    from otmap import default_registry, FitContext, l2_error

    cfg = RunConfig.from_env()
    T0 = HockeyStickMap(d=5, q=1.0)
    X, Y = gen_pushforward_data(T0, n=200, d=5, seed=cfg.seed)

    est = default_registry.fit("fourier", X, Y, hockey_smoothness(1.0), FitContext())
    print(l2_error(est.transport_batch, T0, d=5).value)
"""

__version__ = "0.1.0"

from otmap.core.config import (
    CoeffConfig,
    ConjugateConfig,
    NeuralConfig,
    RunConfig,
    SemidualConfig,
    StudyConfig,
)
from otmap.core.errors import (
    CalibrationError,
    CodeGenerationError,
    ConfigError,
    DomainError,
    EnumerationLimitError,
    ModelFormatError,
    NumericalFailure,
    OTMapError,
    SchemaVersionError,
    UsageError,
)
from otmap.gamma.space import DyadicScale, FrequencyIndex, SmoothnessMap, WeightRule, alpha, select_J
from otmap.fourier.potential import FourierPotential
from otmap.conjugate.solver import conjugate, conjugate_batch
from otmap.estimators.base import FitContext, TransportEstimate
from otmap.estimators.registry import EstimatorRegistry, default_registry, estimator
from otmap.estimators.semidual import fit_fourier
from otmap.estimators.neural import MlpPotential, train_nn
from otmap.estimators.linear import linear_ot_baseline
from otmap.discrete.assignment import NearestNeighborMap, nn_transport, solve_assignment, w2_distance
from otmap.experiments.hockey import HockeyStickMap, gen_pushforward_data, hockey_smoothness
from otmap.experiments.metrics import l2_error
from otmap.experiments.study import ExperimentReport, convergence_study, dimension_study
from otmap.experiments.lower_bound import lower_bound_fixture
from otmap.fda.sample import FunctionSample
from otmap.fda.coeffs import from_coeffs, to_coeffs
from otmap.fda.dtw import avg_dtw
from otmap.fda.pipeline import transport_functions
from otmap.io.models import load_model, save_model
from otmap.tracing.engine import ConsoleExporter, Span, SpanKind, Tracer

__all__ = [
    "__version__",
    # config / errors
    "RunConfig",
    "ConjugateConfig",
    "SemidualConfig",
    "NeuralConfig",
    "StudyConfig",
    "CoeffConfig",
    "OTMapError",
    "UsageError",
    "ConfigError",
    "DomainError",
    "EnumerationLimitError",
    "NumericalFailure",
    "CalibrationError",
    "CodeGenerationError",
    "ModelFormatError",
    "SchemaVersionError",
    # smoothness / potentials
    "DyadicScale",
    "FrequencyIndex",
    "SmoothnessMap",
    "WeightRule",
    "alpha",
    "select_J",
    "FourierPotential",
    "conjugate",
    "conjugate_batch",
    # estimators
    "FitContext",
    "TransportEstimate",
    "EstimatorRegistry",
    "default_registry",
    "estimator",
    "fit_fourier",
    "MlpPotential",
    "train_nn",
    "linear_ot_baseline",
    "NearestNeighborMap",
    "nn_transport",
    "solve_assignment",
    "w2_distance",
    # experiments
    "HockeyStickMap",
    "gen_pushforward_data",
    "hockey_smoothness",
    "l2_error",
    "ExperimentReport",
    "convergence_study",
    "dimension_study",
    "lower_bound_fixture",
    # fda
    "FunctionSample",
    "to_coeffs",
    "from_coeffs",
    "avg_dtw",
    "transport_functions",
    # io / tracing
    "load_model",
    "save_model",
    "Tracer",
    "Span",
    "SpanKind",
    "ConsoleExporter",
]
