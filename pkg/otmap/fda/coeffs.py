"""
余弦系数 — 函数与 [0,1]^d 中系数向量之间的往返变换。

    u_j(t) = √(2/|I|) · cos(πj(t − t₀)/|I|),   j ≥ 1
    w_{i,j} = c1 · ∫ f_i u_j dt + c2

1-D 模式在给定网格上用梯形求积；2-D 模式在单元中心网格上用中点求积，
取前 k×k 个张量余弦系数并按行优先展平（与 DCT-II 一致）。
"""

from __future__ import annotations

import logging
from typing import Iterable, Optional

import numpy as np

from otmap.core.config import CoeffConfig
from otmap.core.errors import CalibrationError, DomainError
from otmap.fda.sample import FunctionSample, cell_centres

logger = logging.getLogger("otmap.fda")

DEFAULT_MARGIN = 0.05


# ──────────────────────────────────────────────
# Basis and quadrature
# ──────────────────────────────────────────────


def cosine_basis(
    grid: np.ndarray,
    count: int,
    t0: Optional[float] = None,
    length: Optional[float] = None,
) -> np.ndarray:
    """count × len(grid) matrix with rows u_1, …, u_count on the grid.

    The interval defaults to [grid[0], grid[-1]].
    """
    grid = np.asarray(grid, dtype=float)
    t0 = float(grid[0]) if t0 is None else t0
    length = float(grid[-1] - grid[0]) if length is None else length
    j = np.arange(1, count + 1, dtype=float)[:, None]
    return np.sqrt(2.0 / length) * np.cos(np.pi * j * (grid[None, :] - t0) / length)


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    h = np.diff(grid)
    w = np.zeros_like(grid)
    w[:-1] += h / 2.0
    w[1:] += h / 2.0
    return w


def gram_matrix(grid: np.ndarray, count: int) -> np.ndarray:
    """Quadrature Gram matrix of u_1..u_count; the identity up to rounding."""
    U = cosine_basis(grid, count)
    return (U * trapezoid_weights(grid)) @ U.T


def coeff_count(cfg: CoeffConfig) -> int:
    if cfg.mode == "2d":
        if cfg.k < 1:
            raise DomainError("2-D mode needs k >= 1")
        return cfg.k * cfg.k
    if cfg.mode != "1d":
        raise DomainError(f"unknown coefficient mode {cfg.mode!r}")
    if cfg.n_coeffs < 1:
        raise DomainError("n_coeffs must be >= 1")
    return cfg.n_coeffs


def _axis_2d(grid: np.ndarray, k: int) -> np.ndarray:
    """Basis rows on a cell-centred axis of [0,1]."""
    count = grid.shape[0]
    if not np.allclose(grid, cell_centres(count)):
        raise DomainError("2-D mode expects the cell-centred unit grid")
    if k > count:
        raise DomainError(f"k={k} exceeds the grid size {count}")
    return cosine_basis(grid, k, t0=0.0, length=1.0)


def _check_mode(fs: FunctionSample, cfg: CoeffConfig) -> None:
    if fs.is_2d != (cfg.mode == "2d"):
        raise DomainError(f"coefficient mode {cfg.mode!r} does not match a {len(fs.shape)}-D sample")


def raw_coefficients(fs: FunctionSample, cfg: CoeffConfig) -> np.ndarray:
    """Inner products ⟨f_i, u_j⟩ before the affine map, n × coeff_count(cfg)."""
    _check_mode(fs, cfg)
    count = coeff_count(cfg)
    if not fs.is_2d:
        U = cosine_basis(fs.grid, count)
        return fs.values @ (U * trapezoid_weights(fs.grid)).T
    rows, cols = fs.shape
    Ur = _axis_2d(fs.grid, cfg.k) / rows
    Uc = _axis_2d(fs.col_grid, cfg.k) / cols
    F = fs.values.reshape(len(fs), rows, cols)
    return np.einsum("ir,nrc,jc->nij", Ur, F, Uc).reshape(len(fs), count)


# ──────────────────────────────────────────────
# Public API
# ──────────────────────────────────────────────


def to_coeffs(fs: FunctionSample, cfg: CoeffConfig) -> np.ndarray:
    """Scaled, truncated cosine coefficients in [0,1].

    Raises:
        CalibrationError: For the first coefficient (row-major) outside [0,1].
    """
    if cfg.c1 <= 0:
        raise DomainError(f"c1 must be > 0, got {cfg.c1}")
    W = cfg.c1 * raw_coefficients(fs, cfg) + cfg.c2
    bad = np.argwhere((W < 0.0) | (W > 1.0))
    if bad.size:
        i, j = (int(v) for v in bad[0])
        raise CalibrationError(i, j, float(W[i, j]))
    return W


def from_coeffs(
    coeffs: np.ndarray,
    cfg: CoeffConfig,
    grid: np.ndarray,
    col_grid: Optional[np.ndarray] = None,
) -> FunctionSample:
    """Invert the affine map and synthesize Σ_j θ_j u_j on the grid."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    count = coeff_count(cfg)
    if coeffs.shape[1] != count:
        raise DomainError(f"expected {count} coefficients per row, got {coeffs.shape[1]}")
    theta = (coeffs - cfg.c2) / cfg.c1
    if cfg.mode == "1d":
        return FunctionSample(grid, theta @ cosine_basis(grid, count))
    if col_grid is None:
        raise DomainError("2-D synthesis needs a column grid")
    Ur = _axis_2d(np.asarray(grid, dtype=float), cfg.k)
    Uc = _axis_2d(np.asarray(col_grid, dtype=float), cfg.k)
    T = theta.reshape(-1, cfg.k, cfg.k)
    values = np.einsum("nij,ir,jc->nrc", T, Ur, Uc).reshape(T.shape[0], -1)
    return FunctionSample(grid, values, col_grid=col_grid)


def calibrate(
    samples: Iterable[FunctionSample],
    n_coeffs: int = 16,
    margin: float = DEFAULT_MARGIN,
    mode: str = "1d",
    k: int = 0,
) -> CoeffConfig:
    """Choose c1, c2 so the raw coefficients of every sample land in [margin, 1 − margin]."""
    if not 0.0 <= margin < 0.5:
        raise DomainError(f"margin must lie in [0, 0.5), got {margin}")
    cfg = CoeffConfig(n_coeffs=n_coeffs, mode=mode, k=k)
    raw = [raw_coefficients(fs, cfg) for fs in samples]
    if not raw:
        raise DomainError("calibration needs at least one sample")
    lo = min(float(r.min()) for r in raw)
    hi = max(float(r.max()) for r in raw)
    span = hi - lo if hi > lo else 1.0
    c1 = (1.0 - 2.0 * margin) / span
    c2 = margin - c1 * lo
    logger.info("fda: calibrated c1=%.6g c2=%.6g from raw range [%.4g, %.4g]", c1, c2, lo, hi)
    return CoeffConfig(n_coeffs=n_coeffs, c1=c1, c2=c2, mode=mode, k=k)
