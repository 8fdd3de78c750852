"""
TransportEstimate — 任意已拟合模型的统一包装。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Protocol

import numpy as np

from otmap.core.config import ConjugateConfig, NeuralConfig, SemidualConfig
from otmap.tracing import Tracer


class TransportModel(Protocol):
    def transport_batch(self, X: np.ndarray) -> np.ndarray: ...

    def to_dict(self) -> Dict[str, Any]: ...


@dataclass
class FitContext:
    """Settings handed to every registered fitting function.

    Attributes:
        semidual: Fourier fit settings.
        neural: Neural training settings (``None`` sizes are derived).
        conjugate: Conjugate solver settings.
        q: Hockey-stick parameter of the task, when known.
        J: Explicit truncation budget for the Fourier estimator.
        tracer: Tracer receiving the fit span.
    """

    semidual: SemidualConfig = field(default_factory=SemidualConfig)
    neural: NeuralConfig = field(default_factory=NeuralConfig)
    conjugate: ConjugateConfig = field(default_factory=ConjugateConfig)
    q: Optional[float] = None
    J: Optional[float] = None
    tracer: Tracer = field(default_factory=lambda: Tracer(enabled=False))


@dataclass
class TransportEstimate:
    """A fitted map x ↦ T̂(x) tagged with its estimator family."""

    family: str
    model: TransportModel
    meta: Dict[str, Any] = field(default_factory=dict)

    def transport_batch(self, X: np.ndarray) -> np.ndarray:
        return self.model.transport_batch(np.atleast_2d(np.asarray(X, dtype=float)))

    def transport(self, x: np.ndarray) -> np.ndarray:
        return self.transport_batch(x)[0]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.transport_batch(X)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.family, "model": self.model.to_dict(), "meta": dict(self.meta)}
