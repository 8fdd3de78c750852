"""
动态时间规整 — 平方点距、无窗口约束、不做长度归一化。
"""

from __future__ import annotations

from typing import Union

import numpy as np

from otmap.core.errors import DomainError
from otmap.fda.sample import FunctionSample

Series = Union[np.ndarray, FunctionSample]


def dtw_matrix(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Accumulated cost table with an ∞-padded first row and column.

    D[i+1, j+1] = (x_i − y_j)² + min(D[i, j], D[i, j+1], D[i+1, j]).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size == 0 or y.size == 0:
        raise DomainError("DTW needs non-empty series")
    r, c = x.size, y.size
    D = np.full((r + 1, c + 1), np.inf)
    D[0, 0] = 0.0
    cost = (x[:, None] - y[None, :]) ** 2
    for i in range(r):
        for j in range(c):
            D[i + 1, j + 1] = cost[i, j] + min(D[i, j], D[i, j + 1], D[i + 1, j])
    return D


def dtw(x: np.ndarray, y: np.ndarray) -> float:
    """DTW cost between two univariate series."""
    return float(dtw_matrix(x, y)[-1, -1])


def _rows(a: Series) -> np.ndarray:
    if isinstance(a, FunctionSample):
        return a.values
    return np.atleast_2d(np.asarray(a, dtype=float))


def avg_dtw(A: Series, B: Series) -> float:
    """Mean DTW over paired rows (one row per coordinate series)."""
    A, B = _rows(A), _rows(B)
    if A.shape[0] != B.shape[0]:
        raise DomainError(f"cannot pair {A.shape[0]} series with {B.shape[0]}")
    return float(np.mean([dtw(a, b) for a, b in zip(A, B)]))
