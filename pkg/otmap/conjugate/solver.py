"""
Legendre–Fenchel 共轭求解器 — φ*(y) = sup_{x∈[0,1]^d} ⟨x, y⟩ − φ(x)。

核心流程:
    starts = {clip(y), 随机点 ×n_starts, warm start, 最佳训练样本}
    → 向量化投影梯度上升 + 回溯线搜索
    → 每个 y 取最优局部解（argmax 供 Danskin 梯度使用）

任何提供 ``value_and_grad(X) -> (values, grads)`` 的 Brenier 势均可求解；
:class:`BrenierPotential` 把 Kantorovich 势 φ̃ 包装为 ‖x‖²/2 − φ̃。
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass
from typing import List, Optional, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np

from otmap.core.config import ConjugateConfig
from otmap.core.errors import DomainError, NumericalFailure
from otmap.tracing import Tracer
from otmap.utils.rng import STREAM_CONJUGATE, make_rng

logger = logging.getLogger("otmap.conjugate")

_MIN_STEP = 1e-20
_MAX_STEP = 1e4


# ──────────────────────────────────────────────
# Types
# ──────────────────────────────────────────────


@dataclass
class ConjugateResult:
    """Outcome of one conjugate evaluation."""

    value: float
    argmax: np.ndarray
    iterations: int = 0
    converged: bool = False


@dataclass
class ConjugateBatch:
    """Array form of a batch of conjugate evaluations."""

    values: np.ndarray
    argmax: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]

    def to_results(self) -> List[ConjugateResult]:
        return [
            ConjugateResult(
                value=float(self.values[i]),
                argmax=self.argmax[i].copy(),
                iterations=int(self.iterations[i]),
                converged=bool(self.converged[i]),
            )
            for i in range(len(self))
        ]


@runtime_checkable
class Potential(Protocol):
    """Anything exposing batched values and gradients."""

    def value_and_grad(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]: ...


class BrenierPotential:
    """Brenier potential φ(x) = ‖x‖²/2 − φ̃(x) + offset for a Kantorovich φ̃.

    Parameters:
        kantorovich: Object with ``value_and_grad`` (Fourier series or MLP).
        offset: Constant added to φ (e.g. the empirical mean of φ̃ on X).
    """

    def __init__(self, kantorovich: Potential, offset: float = 0.0) -> None:
        self.kantorovich = kantorovich
        self.offset = float(offset)

    def value_and_grad(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        X = np.asarray(X, dtype=float)
        v, g = self.kantorovich.value_and_grad(X)
        return 0.5 * np.sum(X * X, axis=1) - v + self.offset, X - g


# ──────────────────────────────────────────────
# Public API
# ──────────────────────────────────────────────


def conjugate(
    potential: Potential,
    y: Sequence[float],
    cfg: Optional[ConjugateConfig] = None,
    index: int = 0,
    warm_start: Optional[Sequence[float]] = None,
    candidates: Optional[np.ndarray] = None,
) -> ConjugateResult:
    """Compute φ*(y) and its maximizer on the unit box.

    Parameters:
        potential: Brenier potential with ``value_and_grad``.
        y: The dual point.
        cfg: Solver settings.
        index: Point index used to seed the random starts.
        warm_start: Optional extra start (e.g. a previous argmax).
        candidates: Optional training points; the best one joins the starts.

    Raises:
        NumericalFailure: If the potential returns a non-finite value.
    """
    ys = np.atleast_2d(np.asarray(y, dtype=float))
    warm = None if warm_start is None else np.atleast_2d(np.asarray(warm_start, dtype=float))
    batch = solve_batch(potential, ys, cfg, warm_starts=warm, candidates=candidates, indices=[index])
    return batch.to_results()[0]


def conjugate_batch(
    potential: Potential,
    ys: np.ndarray,
    warm_starts: Optional[np.ndarray] = None,
    cfg: Optional[ConjugateConfig] = None,
    candidates: Optional[np.ndarray] = None,
) -> List[ConjugateResult]:
    """Per-point conjugates for every row of *ys* (same contract as :func:`conjugate`)."""
    ys = np.asarray(ys, dtype=float)
    if ys.size == 0:
        return []
    return solve_batch(potential, ys, cfg, warm_starts=warm_starts, candidates=candidates).to_results()


def solve_batch(
    potential: Potential,
    ys: np.ndarray,
    cfg: Optional[ConjugateConfig] = None,
    warm_starts: Optional[np.ndarray] = None,
    candidates: Optional[np.ndarray] = None,
    indices: Optional[Sequence[int]] = None,
    n_random: Optional[int] = None,
    tracer: Optional[Tracer] = None,
) -> ConjugateBatch:
    """Vectorized conjugate solve; the workhorse behind the public API.

    Parameters:
        n_random: Override for ``cfg.n_starts`` (warm-started training
            iterations pass 0).
        tracer: When given, the batch is timed as a ``conjugate`` span.
    """
    cfg = cfg or ConjugateConfig()
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    n, d = ys.shape
    if n == 0:
        return ConjugateBatch(np.zeros(0), np.zeros((0, d)), np.zeros(0, dtype=int), np.zeros(0, dtype=bool))
    idx = np.arange(n) if indices is None else np.asarray(indices, dtype=np.int64)
    if idx.shape[0] != n:
        raise DomainError("indices must match the number of points")
    if warm_starts is not None:
        warm_starts = np.atleast_2d(np.asarray(warm_starts, dtype=float))
        if warm_starts.shape != ys.shape:
            raise DomainError(f"warm starts have shape {warm_starts.shape}, expected {ys.shape}")
    k = cfg.n_starts if n_random is None else n_random

    cand_phi = None
    if candidates is not None:
        candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
        cand_phi, _ = potential.value_and_grad(candidates)
        _check_finite(cand_phi, "candidate evaluation")

    chunks = [slice(i, min(i + cfg.chunk_size, n)) for i in range(0, n, cfg.chunk_size)]

    def work(sl: slice) -> ConjugateBatch:
        return _solve_chunk(
            potential,
            ys[sl],
            idx[sl],
            None if warm_starts is None else warm_starts[sl],
            candidates,
            cand_phi,
            k,
            cfg,
        )

    timing = tracer.conjugate_span(points=n, d=d, starts=k) if tracer is not None else nullcontext()
    with timing as span:
        if cfg.threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                parts = list(pool.map(work, chunks))
        else:
            parts = [work(sl) for sl in chunks]

        batch = ConjugateBatch(
            values=np.concatenate([p.values for p in parts]),
            argmax=np.concatenate([p.argmax for p in parts]),
            iterations=np.concatenate([p.iterations for p in parts]),
            converged=np.concatenate([p.converged for p in parts]),
        )
        unconverged = int(np.sum(~batch.converged))
        if span is not None:
            span.set_attribute("unconverged", unconverged)
    if unconverged:
        logger.debug("conjugate: %d/%d points hit max_iter before tol", unconverged, n)
    return batch


# ──────────────────────────────────────────────
# Internals
# ──────────────────────────────────────────────


def _check_finite(values: np.ndarray, stage: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericalFailure("conjugate", f"non-finite potential value during {stage}")


def _solve_chunk(
    potential: Potential,
    ys: np.ndarray,
    idx: np.ndarray,
    warm: Optional[np.ndarray],
    candidates: Optional[np.ndarray],
    cand_phi: Optional[np.ndarray],
    n_random: int,
    cfg: ConjugateConfig,
) -> ConjugateBatch:
    c, d = ys.shape
    starts: List[np.ndarray] = [np.clip(ys, 0.0, 1.0)]
    if n_random > 0:
        rand = np.stack([make_rng(cfg.seed, STREAM_CONJUGATE, int(i)).random((n_random, d)) for i in idx])
        starts.extend(rand[:, j, :] for j in range(n_random))
    if warm is not None:
        starts.append(np.clip(warm, 0.0, 1.0))
    if candidates is not None:
        scores = ys @ candidates.T - cand_phi[None, :]
        starts.append(candidates[np.argmax(scores, axis=1)])
    S = len(starts)
    X0 = np.stack(starts, axis=1).reshape(c * S, d)
    Yrep = np.repeat(ys, S, axis=0)

    x, val, iters, conv = _ascend(potential, Yrep, X0, cfg)

    val = val.reshape(c, S)
    best = np.argmax(val, axis=1)
    rows = np.arange(c)
    return ConjugateBatch(
        values=val[rows, best],
        argmax=x.reshape(c, S, d)[rows, best],
        iterations=iters.reshape(c, S)[rows, best],
        converged=conv.reshape(c, S)[rows, best],
    )


def _ascend(
    potential: Potential, Y: np.ndarray, X0: np.ndarray, cfg: ConjugateConfig
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Projected gradient ascent on g(x) = ⟨x, y⟩ − φ(x) for every row."""
    x = X0.copy()
    phi, grad_phi = potential.value_and_grad(x)
    _check_finite(phi, "initial evaluation")
    obj = np.sum(x * Y, axis=1) - phi
    grad = Y - grad_phi
    m = x.shape[0]
    step = np.full(m, cfg.initial_step)
    iters = np.zeros(m, dtype=int)
    conv = np.zeros(m, dtype=bool)
    active = np.ones(m, dtype=bool)

    for _ in range(cfg.max_iter):
        pending = np.flatnonzero(active)
        if pending.size == 0:
            break
        accepted = []
        while pending.size:
            t = step[pending]
            xn = np.clip(x[pending] + t[:, None] * grad[pending], 0.0, 1.0)
            diff = xn - x[pending]
            gmap = np.sqrt(np.sum(diff * diff, axis=1)) / t
            pn, gn = potential.value_and_grad(xn)
            _check_finite(pn, "ascent step")
            on = np.sum(xn * Y[pending], axis=1) - pn
            lower = (
                obj[pending]
                + np.sum(grad[pending] * diff, axis=1)
                - np.sum(diff * diff, axis=1) / (2.0 * t)
            )
            small = gmap < cfg.tol
            ok = (on >= lower) | (small & (on >= obj[pending]))
            take = pending[ok]
            if take.size:
                x[take] = xn[ok]
                obj[take] = on[ok]
                grad[take] = Y[take] - gn[ok]
                iters[take] += 1
                accepted.append(take)
            done = pending[small]
            conv[done] = True
            active[done] = False
            retry = pending[~ok & ~small]
            step[retry] *= 0.5
            stalled = retry[step[retry] < _MIN_STEP]
            active[stalled] = False
            pending = retry[step[retry] >= _MIN_STEP]
        if accepted:
            grow = np.concatenate(accepted)
            step[grow] = np.minimum(step[grow] * 2.0, _MAX_STEP)
    return x, obj, iters, conv

