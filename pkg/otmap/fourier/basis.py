"""
三角基 — ψ_l(x) = Π_i ψ_{l_i}(x_i)。

    ψ_k(t) = √2·cos(2π|k|t)   (k < 0)
    ψ_k(t) = √2·sin(2πk t)    (k > 0)
    ψ_0(t) = 1

FourierBasis 以规范顺序保存截断基 {(s, l)}，并用逐轴缓存的
sin/cos 表批量计算设计矩阵与精确梯度。
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from otmap.core.errors import DomainError
from otmap.gamma.space import (
    DEFAULT_ENUMERATION_CAP,
    DyadicScale,
    FrequencyIndex,
    SmoothnessMap,
    admissible,
    alpha,
    gamma_value,
    iter_basis,
)

logger = logging.getLogger("otmap.fourier")

SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi

# Rows per block when building factor tables; bounds peak memory.
_ROW_BLOCK = 8192


def basis_eval(l: FrequencyIndex, x: Sequence[float]) -> float:
    """Evaluate ψ_l at a single point.

    Raises:
        DomainError: If *l* touches an axis beyond ``len(x)``.
    """
    x = np.asarray(x, dtype=float)
    if l.max_axis > x.shape[-1]:
        raise DomainError(f"frequency axis {l.max_axis} exceeds point dimension {x.shape[-1]}")
    value = 1.0
    for axis, k in l.entries:
        t = float(x[axis - 1])
        if k < 0:
            value *= SQRT2 * math.cos(TWO_PI * (-k) * t)
        else:
            value *= SQRT2 * math.sin(TWO_PI * k * t)
    return value


def _tables(cols: np.ndarray, K: int, with_deriv: bool) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Per-axis factor tables indexed by ``K + k`` for k ∈ [-K, K]."""
    n, D = cols.shape
    T = np.ones((n, D, 2 * K + 1))
    dT = np.zeros((n, D, 2 * K + 1)) if with_deriv else None
    if K == 0:
        return T, dT
    m = np.arange(1, K + 1, dtype=float)
    ang = TWO_PI * cols[:, :, None] * m
    c = SQRT2 * np.cos(ang)
    s = SQRT2 * np.sin(ang)
    T[:, :, K + 1:] = s
    T[:, :, :K] = c[:, :, ::-1]
    if with_deriv:
        w = TWO_PI * m
        dT[:, :, K + 1:] = w * c
        dT[:, :, :K] = (-w * s)[:, :, ::-1]
    return T, dT


class FourierBasis:
    """Canonically ordered truncated Fourier basis.

    Parameters:
        smoothness: The smoothness map the basis belongs to.
        entries: ``(scale, frequency)`` pairs in storage order.
        J: The truncation budget the entries were enumerated under, or
            ``None`` for hand-picked bases.
    """

    def __init__(
        self,
        smoothness: SmoothnessMap,
        entries: Sequence[Tuple[DyadicScale, FrequencyIndex]],
        J: Optional[float] = None,
    ) -> None:
        self.smoothness = smoothness
        self.J = J
        self.scales: List[DyadicScale] = [s for s, _ in entries]
        self.freqs: List[FrequencyIndex] = [l for _, l in entries]
        self._index = {l: i for i, l in enumerate(self.freqs)}
        if len(self._index) != len(self.freqs):
            raise DomainError("FourierBasis: duplicate frequencies")
        for s, l in entries:
            if l.scale() != s:
                raise DomainError(f"frequency {l.entries} does not belong to scale {s.entries}")

        m = len(self.freqs)
        P = max((len(l.entries) for l in self.freqs), default=0)
        self._axes = np.zeros((m, max(P, 1)), dtype=np.intp)
        self._ks = np.zeros((m, max(P, 1)), dtype=np.intp)
        for j, l in enumerate(self.freqs):
            for p, (axis, k) in enumerate(l.entries):
                self._axes[j, p] = axis - 1
                self._ks[j, p] = k
        self.max_axis = max((l.max_axis for l in self.freqs), default=0)
        self.max_freq = int(np.abs(self._ks).max()) if m else 0
        self.gammas = np.array([gamma_value(smoothness, s) for s in self.scales], dtype=float)

    # ─── Construction ───

    @classmethod
    def truncated(
        cls,
        smoothness: SmoothnessMap,
        J: float,
        cap: int = DEFAULT_ENUMERATION_CAP,
        max_axis: Optional[int] = None,
    ) -> "FourierBasis":
        """All frequencies of all scales with (1+2α)·γ(s) ≤ J."""
        basis = cls(smoothness, list(iter_basis(smoothness, J, cap=cap, max_axis=max_axis)), J=J)
        logger.debug("truncated basis: J=%g, %d functions, max axis %d", J, len(basis), basis.max_axis)
        return basis

    @classmethod
    def from_frequencies(
        cls,
        smoothness: SmoothnessMap,
        freqs: Iterable[FrequencyIndex],
        J: Optional[float] = None,
    ) -> "FourierBasis":
        """Basis over explicit frequencies (each placed in its own dyadic scale)."""
        return cls(smoothness, [(l.scale(), l) for l in freqs], J=J)

    def __len__(self) -> int:
        return len(self.freqs)

    def __contains__(self, l: FrequencyIndex) -> bool:
        return l in self._index

    def index_of(self, l: FrequencyIndex) -> int:
        return self._index[l]

    def check_admissible(self) -> None:
        """Verify every stored scale satisfies the budget (when J is set)."""
        if self.J is None:
            return
        for s in set(self.scales):
            if not admissible(self.smoothness, s, self.J):
                raise DomainError(f"scale {s.entries} is not admissible at J={self.J}")

    # ─── Weights ───

    def norm_weights(self, order: str) -> np.ndarray:
        """Squared-norm weights per basis element: 2^{2γ} or 2^{2(1+2α)γ}."""
        if order == "gamma":
            return np.exp2(2.0 * self.gammas)
        if order == "gamma_plus_2":
            return np.exp2(2.0 * (1.0 + 2.0 * alpha(self.smoothness)) * self.gammas)
        raise DomainError(f"unknown norm order {order!r}")

    # ─── Evaluation ───

    def _check_points(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise DomainError(f"expected a 2-D point array, got shape {X.shape}")
        if self.max_axis > X.shape[1]:
            raise DomainError(
                f"basis uses axis {self.max_axis} but points have dimension {X.shape[1]}"
            )
        return X

    def design(self, X: np.ndarray) -> np.ndarray:
        """Design matrix Ψ with Ψ[i, j] = ψ_{l_j}(X_i)."""
        X = self._check_points(X)
        n, m = X.shape[0], len(self)
        out = np.empty((n, m))
        if m == 0:
            return out
        D = self.max_axis
        for start in range(0, n, _ROW_BLOCK):
            block = X[start:start + _ROW_BLOCK, :D]
            T, _ = _tables(block, self.max_freq, with_deriv=False)
            prod = np.ones((block.shape[0], m))
            for p in range(self._axes.shape[1]):
                prod *= T[:, self._axes[:, p], self.max_freq + self._ks[:, p]]
            out[start:start + block.shape[0]] = prod
        return out

    def values_and_grads(self, X: np.ndarray, coeffs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Values Σω_lψ_l(X_i) and exact gradients, both batched."""
        X = self._check_points(X)
        n, d = X.shape
        values = np.zeros(n)
        grads = np.zeros((n, d))
        m = len(self)
        if m == 0:
            return values, grads
        D = self.max_axis
        K = self.max_freq
        P = self._axes.shape[1]
        onehot = [np.eye(D)[self._axes[:, p]] for p in range(P)]
        for start in range(0, n, _ROW_BLOCK):
            block = X[start:start + _ROW_BLOCK, :D]
            T, dT = _tables(block, K, with_deriv=True)
            fac = [T[:, self._axes[:, p], K + self._ks[:, p]] for p in range(P)]
            dfac = [dT[:, self._axes[:, p], K + self._ks[:, p]] for p in range(P)]
            full = np.ones_like(fac[0])
            for f in fac:
                full = full * f
            rows = slice(start, start + block.shape[0])
            values[rows] = full @ coeffs
            g = np.zeros((block.shape[0], D))
            for p in range(P):
                others = np.ones_like(fac[0])
                for q in range(P):
                    if q != p:
                        others = others * fac[q]
                g += (dfac[p] * others * coeffs) @ onehot[p]
            grads[rows, :D] = g
        return values, grads
