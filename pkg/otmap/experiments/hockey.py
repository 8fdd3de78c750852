"""
Hockey-stick 合成任务 — 维度越高越光滑的真实传输映射。

    (T_0(x))_i = cl( x_i − |x_i − 0.5|^{κ(i)} / κ(i) ),   κ(i) = i^{0.1q} + q + 0.6
"""

from __future__ import annotations

import logging
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from otmap.core.errors import DomainError
from otmap.discrete.ellipsoid import EllipsoidTaskMap, sample_sobolev_ellipsoid
from otmap.gamma.space import SmoothnessMap, WeightRule
from otmap.utils.rng import STREAM_DATA_X, STREAM_DATA_Y, make_rng

logger = logging.getLogger("otmap.experiments")


class HockeyStickMap:
    """Separable ground-truth map on [0,1]^d.

    The raw formula dips below 0 near x_i = 0 (its minimum is −0.5^κ/κ); the
    clip keeps the range inside the cube while staying monotone per axis.

    Parameters:
        d: Dimension.
        q: Smoothness parameter.
    """

    def __init__(self, d: int, q: float) -> None:
        if d < 1:
            raise DomainError(f"dimension must be >= 1, got {d}")
        if q <= 0:
            raise DomainError(f"q must be > 0, got {q}")
        self.d = int(d)
        self.q = float(q)
        self.kappa = kappa(np.arange(1, self.d + 1), self.q)

    def raw(self, X: np.ndarray) -> np.ndarray:
        """The unclipped formula."""
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.d:
            raise DomainError(f"expected dimension {self.d}, got {X.shape[-1]}")
        return X - np.abs(X - 0.5) ** self.kappa / self.kappa

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return np.clip(self.raw(X), 0.0, 1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"task": "hockey", "d": self.d, "q": self.q}


def kappa(i: Any, q: float) -> np.ndarray:
    """κ(i) = i^{0.1q} + q + 0.6."""
    return np.asarray(i, dtype=float) ** (0.1 * q) + q + 0.6


def hockey_eval(T0: HockeyStickMap, x: Sequence[float]) -> np.ndarray:
    return T0(np.asarray(x, dtype=float))


def hockey_smoothness(q: float) -> SmoothnessMap:
    """Mixed smoothness map with a_i = κ(i) + 1/2 = i^{0.1q} + q + 1.1."""
    return SmoothnessMap.mixed(WeightRule(kind="power", scale=1.0, exponent=0.1 * q, offset=q + 1.1))


def ellipsoid_smoothness(b: float) -> SmoothnessMap:
    """Mixed map with a_i = i^b, used when a smoothness-driven estimator runs on the ellipsoid task."""
    return SmoothnessMap.mixed(WeightRule(kind="power", exponent=b))


def gen_pushforward_data(
    T0: HockeyStickMap, n: int, d: int, seed: int, *keys: int
) -> Tuple[np.ndarray, np.ndarray]:
    """X ~ U[0,1]^d and Y = T_0(U) for an independent uniform sample U."""
    if d != T0.d:
        raise DomainError(f"map dimension {T0.d} does not match d={d}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    X = make_rng(seed, STREAM_DATA_X, *keys).random((n, d))
    U = make_rng(seed, STREAM_DATA_Y, *keys).random((n, d))
    return X, T0(U)


def gen_ellipsoid_data(
    task: EllipsoidTaskMap, n: int, seed: int, *keys: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Source and pushed-forward target samples on the truncated ellipsoid."""
    X = sample_sobolev_ellipsoid(task.b, task.d, n, seed, *keys, 0)
    U = sample_sobolev_ellipsoid(task.b, task.d, n, seed, *keys, 1)
    return X, task(U)
