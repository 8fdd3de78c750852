"""
Estimators — Fourier 半对偶、神经网络、最近邻插值与线性基线四个估计器族。

Quick Start::

    from otmap.estimators import FitContext, default_registry

    est = default_registry.fit("fourier", X, Y, smoothness, FitContext())
    Y_hat = est.transport_batch(X_new)
"""

from otmap.estimators.base import FitContext, TransportEstimate
from otmap.estimators.linear import LinearMap, linear_ot_baseline
from otmap.estimators.neural import (
    MlpPotential,
    Truncation,
    clip_unit,
    default_config,
    forward,
    input_grad,
    study_learning_rate,
    train_nn,
    transport_nn,
)
from otmap.estimators.registry import EstimatorDef, EstimatorRegistry, default_registry, estimator
from otmap.estimators.semidual import SemidualFit, empirical_semidual, fit_fourier, project_ball, transport

__all__ = [
    "EstimatorDef",
    "EstimatorRegistry",
    "FitContext",
    "LinearMap",
    "MlpPotential",
    "SemidualFit",
    "TransportEstimate",
    "Truncation",
    "clip_unit",
    "default_config",
    "default_registry",
    "empirical_semidual",
    "estimator",
    "fit_fourier",
    "forward",
    "input_grad",
    "linear_ot_baseline",
    "project_ball",
    "study_learning_rate",
    "train_nn",
    "transport",
    "transport_nn",
]
