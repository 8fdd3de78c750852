"""
线性（Gaussian / Bures）OT 基线 — T(x) = m_Y + A (x − m_X)。

    A = Σ_X^{-1/2} (Σ_X^{1/2} Σ_Y Σ_X^{1/2})^{1/2} Σ_X^{-1/2}

协方差加 ε = 1e-6 的岭项；对称矩阵平方根由 eigh 计算。
"""

from __future__ import annotations

import logging
from typing import Any, Dict, Mapping

import numpy as np
from scipy.linalg import eigh

from otmap.core.errors import DomainError

logger = logging.getLogger("otmap.estimators.linear")

RIDGE = 1e-6


def sym_sqrt(S: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Square root (or inverse square root) of a symmetric PSD matrix."""
    w, V = eigh(S)
    w = np.clip(w, 0.0, None)
    if inverse:
        if np.any(w <= 0.0):
            raise DomainError("matrix is singular; cannot take an inverse square root")
        w = 1.0 / np.sqrt(w)
    else:
        w = np.sqrt(w)
    return (V * w) @ V.T


class LinearMap:
    """Affine transport map with a symmetric PSD slope."""

    def __init__(self, mean_x: np.ndarray, mean_y: np.ndarray, A: np.ndarray) -> None:
        self.mean_x = np.asarray(mean_x, dtype=float).reshape(-1)
        self.mean_y = np.asarray(mean_y, dtype=float).reshape(-1)
        self.A = np.asarray(A, dtype=float).reshape(self.mean_x.size, self.mean_x.size)

    @property
    def d(self) -> int:
        return self.mean_x.size

    def transport_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise DomainError(f"expected dimension {self.d}, got {X.shape[1]}")
        return self.mean_y + (X - self.mean_x) @ self.A.T

    def transport(self, x: np.ndarray) -> np.ndarray:
        return self.transport_batch(x)[0]

    def to_dict(self) -> Dict[str, Any]:
        return {"mean_x": self.mean_x.tolist(), "mean_y": self.mean_y.tolist(), "A": self.A.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "LinearMap":
        return cls(np.asarray(d["mean_x"]), np.asarray(d["mean_y"]), np.asarray(d["A"]))


def linear_ot_baseline(X: np.ndarray, Y: np.ndarray, ridge: float = RIDGE) -> LinearMap:
    """Gaussian OT map between the moment-matched normals of X and Y."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != Y.shape[1]:
        raise DomainError(f"expected n×d matrices of equal d, got {X.shape} and {Y.shape}")
    if X.shape[0] == 0 or Y.shape[0] == 0:
        raise DomainError("empty sample")
    d = X.shape[1]
    mx, my = X.mean(axis=0), Y.mean(axis=0)
    eye = ridge * np.eye(d)
    Sx = np.atleast_2d(np.cov(X, rowvar=False, bias=True)) + eye
    Sy = np.atleast_2d(np.cov(Y, rowvar=False, bias=True)) + eye
    rx = sym_sqrt(Sx)
    rx_inv = sym_sqrt(Sx, inverse=True)
    A = rx_inv @ sym_sqrt(rx @ Sy @ rx) @ rx_inv
    A = 0.5 * (A + A.T)
    logger.debug("linear baseline: d=%d trace(A)=%.6g", d, float(np.trace(A)))
    return LinearMap(mx, my, A)
