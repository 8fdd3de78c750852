"""
Sobolev 椭球 — Θ^d(b) = {θ ∈ [0,1]^d : Σ_j j^{2b} θ_j² < 1} 上的采样与慢速率任务映射。
"""

from __future__ import annotations

import logging

import numpy as np

from otmap.core.errors import DomainError
from otmap.utils.rng import STREAM_ELLIPSOID, make_rng

logger = logging.getLogger("otmap.discrete")

# Violating draws are pulled back to this fraction of the boundary.
SHRINK = 0.999


def ellipsoid_norm(theta: np.ndarray, b: float) -> np.ndarray:
    """Σ_j j^{2b} θ_j² for every row."""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    j = np.arange(1, theta.shape[1] + 1, dtype=float)
    return np.sum(j ** (2.0 * b) * theta**2, axis=1)


def draw_sobolev_ellipsoid(rng: np.random.Generator, b: float, d: int, n: int) -> np.ndarray:
    """Draw n points of the truncated ellipsoid from *rng*.

    θ_j ~ U[0, j^{-b}] independently; rows with Σ j^{2b}θ_j² ≥ 1 are scaled
    by 0.999/√(Σ j^{2b}θ_j²).
    """
    if b <= 0 or d < 1 or n < 0:
        raise DomainError(f"invalid ellipsoid request b={b}, d={d}, n={n}")
    j = np.arange(1, d + 1, dtype=float)
    theta = rng.random((n, d)) * j ** (-b)
    s = ellipsoid_norm(theta, b)
    bad = s >= 1.0
    theta[bad] *= (SHRINK / np.sqrt(s[bad]))[:, None]
    logger.debug("ellipsoid: b=%g d=%d n=%d rescaled=%d", b, d, n, int(bad.sum()))
    return theta


def sample_sobolev_ellipsoid(b: float, d: int, n: int, seed: int, *keys: int) -> np.ndarray:
    """:func:`draw_sobolev_ellipsoid` on the stream ``(seed, ellipsoid, *keys)``."""
    return draw_sobolev_ellipsoid(make_rng(seed, STREAM_ELLIPSOID, *keys), b, d, n)


class EllipsoidTaskMap:
    """Separable monotone map T_j(θ) = θ_j − ½ j^b θ_j² on the ellipsoid coordinates.

    Each coordinate is the derivative of a convex function on [0, j^{-b}], so T
    is an optimal transport map and stays inside [0,1]^d.
    """

    def __init__(self, b: float, d: int) -> None:
        self.b = float(b)
        self.d = int(d)
        self._scale = np.arange(1, d + 1, dtype=float) ** self.b

    def __call__(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return theta - 0.5 * self._scale * theta**2

    def to_dict(self) -> dict:
        return {"task": "ellipsoid", "b": self.b, "d": self.d}
