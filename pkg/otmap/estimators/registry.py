"""
EstimatorRegistry — 估计器注册表与 @estimator 装饰器。

每个估计器是一个拟合函数 ``(X, Y, smoothness, ctx) -> TransportEstimate``，
外加用于从 JSON 还原模型的 ``model_type``。
convergence_study 与 CLI 均通过注册表按名称分发。
"""

from __future__ import annotations

import inspect
import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np

from otmap.core.config import canonical_preset
from otmap.core.errors import UsageError
from otmap.discrete.assignment import NearestNeighborMap
from otmap.estimators.base import FitContext, TransportEstimate
from otmap.estimators.linear import LinearMap, linear_ot_baseline
from otmap.estimators.neural import MlpPotential, default_config, train_nn
from otmap.estimators.semidual import SemidualFit, fit_fourier
from otmap.gamma.space import SmoothnessMap

logger = logging.getLogger("otmap.estimators")

FitFunction = Callable[[np.ndarray, np.ndarray, SmoothnessMap, FitContext], TransportEstimate]


# ──────────────────────────────────────────────
# EstimatorDef
# ──────────────────────────────────────────────


@dataclass
class EstimatorDef:
    """A registered estimator.

    Attributes:
        name: Unique estimator name (also the model ``kind`` on disk).
        description: One-line description.
        fit: The fitting function.
        model_type: Class with ``from_dict`` that rebuilds the fitted model.
        needs_smoothness: Whether the fit uses the smoothness map.
    """

    name: str
    description: str
    fit: FitFunction
    model_type: Any = None
    needs_smoothness: bool = True

    def load(self, data: Dict[str, Any]) -> TransportEstimate:
        return TransportEstimate(self.name, self.model_type.from_dict(data["model"]), dict(data.get("meta", {})))


# ──────────────────────────────────────────────
# @estimator decorator
# ──────────────────────────────────────────────


def estimator(
    fn: Optional[Callable] = None,
    *,
    name: Optional[str] = None,
    model_type: Any = None,
    needs_smoothness: bool = True,
) -> Union[EstimatorDef, Callable[[Callable], EstimatorDef]]:
    """Decorator that turns a fitting function into an :class:`EstimatorDef`.

    Can be used with or without arguments::

        @estimator
        def fourier(X, Y, smoothness, ctx): ...

        @estimator(name="nnplan", model_type=NearestNeighborMap)
        def _nnplan(X, Y, smoothness, ctx): ...
    """

    def decorator(func: Callable) -> EstimatorDef:
        doc = inspect.getdoc(func) or ""
        return EstimatorDef(
            name=name or func.__name__,
            description=doc.split("\n")[0].strip(),
            fit=func,
            model_type=model_type,
            needs_smoothness=needs_smoothness,
        )

    if fn is not None:
        return decorator(fn)
    return decorator


# ──────────────────────────────────────────────
# EstimatorRegistry
# ──────────────────────────────────────────────


class EstimatorRegistry:
    """Central registry for estimators.

    Usage::

        registry = EstimatorRegistry()
        registry.register(fourier)
        est = registry.fit("fourier", X, Y, smoothness, FitContext())
    """

    def __init__(self) -> None:
        self._estimators: Dict[str, EstimatorDef] = {}

    def register(self, est: Union[EstimatorDef, Callable]) -> EstimatorDef:
        if not isinstance(est, EstimatorDef):
            est = estimator(est)
        if est.name in self._estimators:
            logger.warning("Estimator %r already registered, overwriting", est.name)
        self._estimators[est.name] = est
        logger.debug("Estimator registered: %s", est.name)
        return est

    def get(self, name: str) -> EstimatorDef:
        try:
            return self._estimators[name]
        except KeyError:
            raise UsageError(f"unknown estimator {name!r}; choose from {', '.join(self.names())}") from None

    def names(self) -> List[str]:
        return list(self._estimators.keys())

    def __len__(self) -> int:
        return len(self._estimators)

    def __contains__(self, name: str) -> bool:
        return name in self._estimators

    def fit(
        self,
        name: str,
        X: np.ndarray,
        Y: np.ndarray,
        smoothness: Optional[SmoothnessMap],
        ctx: Optional[FitContext] = None,
    ) -> TransportEstimate:
        est = self.get(name)
        if est.needs_smoothness and smoothness is None:
            raise UsageError(f"estimator {name!r} needs a smoothness map")
        return est.fit(X, Y, smoothness, ctx or FitContext())

    def load(self, data: Dict[str, Any]) -> TransportEstimate:
        """Rebuild a :class:`TransportEstimate` from ``TransportEstimate.to_dict()`` output."""
        return self.get(data["kind"]).load(data)


# ──────────────────────────────────────────────
# Built-in estimators
# ──────────────────────────────────────────────


@estimator(model_type=SemidualFit)
def fourier(X: np.ndarray, Y: np.ndarray, smoothness: SmoothnessMap, ctx: FitContext) -> TransportEstimate:
    """Truncated Fourier series fitted by projected semi-dual descent."""
    fit = fit_fourier(X, Y, smoothness, J=ctx.J, cfg=ctx.semidual, conj=ctx.conjugate, tracer=ctx.tracer)
    return TransportEstimate("fourier", fit, {"J": fit.J, "iterations": fit.iterations})


@estimator(model_type=MlpPotential)
def nn(X: np.ndarray, Y: np.ndarray, smoothness: SmoothnessMap, ctx: FitContext) -> TransportEstimate:
    """ReLU network potential trained by semi-dual SGD."""
    cfg = ctx.neural
    if canonical_preset(cfg.preset) == "embedded":
        base = default_config(smoothness, X.shape[0], preset="embedded", d=X.shape[1], q=ctx.q)
        cfg = _overlay(base, cfg)
    net = train_nn(X, Y, smoothness, cfg=cfg, conj=ctx.conjugate, tracer=ctx.tracer)
    return TransportEstimate("nn", net, {"d_max": net.d_max, "preset": cfg.preset})


@estimator(model_type=NearestNeighborMap, needs_smoothness=False)
def nnplan(X: np.ndarray, Y: np.ndarray, smoothness: Optional[SmoothnessMap], ctx: FitContext) -> TransportEstimate:
    """Nearest-neighbour plug-in map through the optimal assignment."""
    with ctx.tracer.fit_span("nnplan", n=X.shape[0], d=X.shape[1]):
        model = NearestNeighborMap.fit(X, Y)
    return TransportEstimate("nnplan", model, {"cost": model.plan.cost})


@estimator(model_type=LinearMap, needs_smoothness=False)
def linear(X: np.ndarray, Y: np.ndarray, smoothness: Optional[SmoothnessMap], ctx: FitContext) -> TransportEstimate:
    """Gaussian (Bures) affine map."""
    with ctx.tracer.fit_span("linear", n=X.shape[0], d=X.shape[1]):
        model = linear_ot_baseline(X, Y)
    return TransportEstimate("linear", model)


def _overlay(base: Any, user: Any) -> Any:
    """Keep *base* values except where *user* sets a size explicitly."""
    explicit = {
        f.name: getattr(user, f.name)
        for f in fields(user)
        if f.name in ("d_max", "width", "depth", "bound") and getattr(user, f.name) is not None
    }
    explicit["seed"] = user.seed
    return replace(base, **explicit)


default_registry = EstimatorRegistry()
for _est in (fourier, nn, nnplan, linear):
    default_registry.register(_est)
