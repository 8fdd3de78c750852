"""
Fourier 半对偶估计器 — 在 F*_J 上最小化经验半对偶目标。

    Ŝ(ω) = mean ‖X_i‖²/2 − mean φ̃_c(X_i) + mean φ*(Y_i)
    φ = ‖x‖²/2 − φ̃_c,   φ̃_c = Σ ω_l ψ_l − mean_i Σ ω_l ψ_l(X_i)

ω 的梯度由 Danskin 规则给出（共轭 argmax 固定）:

    ∂Ŝ/∂ω_l = mean ψ_l(x*_{Y_i}) − mean ψ_l(X_i)

每步之后把 ω 径向投影到 ‖φ̃‖_{H^{γ+2}} ≤ radius 的加权球上。
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from otmap.conjugate.solver import BrenierPotential, solve_batch
from otmap.core.config import ConjugateConfig, SemidualConfig
from otmap.core.errors import DomainError
from otmap.fourier.basis import FourierBasis
from otmap.fourier.potential import FourierPotential
from otmap.gamma.space import SmoothnessMap, alpha, select_J
from otmap.tracing import Tracer

logger = logging.getLogger("otmap.estimators.semidual")


@dataclass
class SemidualFit:
    """Result of :func:`fit_fourier`.

    Attributes:
        potential: The fitted Kantorovich potential φ̃ (uncentered coefficients).
        center: Empirical mean of φ̃ over X; the Brenier potential is
            ‖x‖²/2 − (φ̃ − center).
        objective_trace: Ŝ after every accepted step (first entry: start).
        objective: Ŝ at the final iterate, re-evaluated with a cold multistart.
        constraint_slack: ‖φ̃‖_{H^{γ+2}} at the final iterate.
        n: Sample size of X.
        J: Truncation budget used.
        iterations: Accepted outer steps.
        converged: Whether the relative-change test fired before ``max_iter``.
    """

    potential: FourierPotential
    center: float
    objective_trace: List[float] = field(default_factory=list)
    objective: float = float("nan")
    constraint_slack: float = 0.0
    n: int = 0
    J: float = 0.0
    iterations: int = 0
    converged: bool = False

    @property
    def d(self) -> int:
        return self.potential.ambient_dim

    def transport_batch(self, X: np.ndarray) -> np.ndarray:
        """T̂(X_i) = clip(X_i − ∇φ̃(X_i)) row by row."""
        X = _as_points(X, "X")
        return np.clip(self.potential.brenier_grads(X), 0.0, 1.0)

    def transport(self, x: np.ndarray) -> np.ndarray:
        return self.transport_batch(np.atleast_2d(np.asarray(x, dtype=float)))[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "potential": self.potential.to_dict(),
            "center": self.center,
            "objective_trace": list(self.objective_trace),
            "objective": self.objective,
            "constraint_slack": self.constraint_slack,
            "n": self.n,
            "J": self.J,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SemidualFit":
        return cls(
            potential=FourierPotential.from_dict(d["potential"]),
            center=float(d["center"]),
            objective_trace=[float(v) for v in d.get("objective_trace", [])],
            objective=float(d.get("objective", float("nan"))),
            constraint_slack=float(d.get("constraint_slack", 0.0)),
            n=int(d.get("n", 0)),
            J=float(d.get("J", 0.0)),
            iterations=int(d.get("iterations", 0)),
            converged=bool(d.get("converged", False)),
        )


# ──────────────────────────────────────────────
# Objective
# ──────────────────────────────────────────────


def _as_points(X: Any, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DomainError(f"{name} must be an n×d matrix, got shape {X.shape}")
    if X.shape[0] == 0:
        raise DomainError(f"{name} is empty")
    if not np.all(np.isfinite(X)):
        raise DomainError(f"{name} contains non-finite values")
    return X


def _check_pair(X: Any, Y: Any) -> Tuple[np.ndarray, np.ndarray]:
    X = _as_points(X, "X")
    Y = _as_points(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise DomainError(f"dimension mismatch: X has d={X.shape[1]}, Y has d={Y.shape[1]}")
    return X, Y


@dataclass
class _Evaluation:
    value: float
    grad: np.ndarray
    argmax: np.ndarray
    center: float


def _evaluate(
    phi: FourierPotential,
    psi_x: np.ndarray,
    half_sq_x: float,
    X: np.ndarray,
    Y: np.ndarray,
    conj: ConjugateConfig,
    warm: Optional[np.ndarray],
    n_random: Optional[int],
    tracer: Optional[Tracer] = None,
) -> _Evaluation:
    center = float(np.mean(psi_x @ phi.coeffs)) if len(phi) else 0.0
    brenier = BrenierPotential(phi, offset=center)
    batch = solve_batch(
        brenier, Y, conj, warm_starts=warm, candidates=X, n_random=n_random, tracer=tracer
    )
    value = half_sq_x + float(np.mean(batch.values))
    if len(phi):
        grad = phi.basis.design(batch.argmax).mean(axis=0) - psi_x.mean(axis=0)
    else:
        grad = np.zeros(0)
    return _Evaluation(value=value, grad=grad, argmax=batch.argmax, center=center)


def empirical_semidual(
    phi: FourierPotential,
    X: np.ndarray,
    Y: np.ndarray,
    conj: Optional[ConjugateConfig] = None,
) -> float:
    """Ŝ(φ̃) with φ̃ centered at its empirical X-mean.

    Example: φ̃ ≡ 0, X = Y = [[0.5]] gives 0.125 + 0.125 = 0.25.
    """
    X, Y = _check_pair(X, Y)
    psi_x = phi.basis.design(X) if len(phi) else np.zeros((X.shape[0], 0))
    half_sq = float(np.mean(0.5 * np.sum(X * X, axis=1)))
    return _evaluate(phi, psi_x, half_sq, X, Y, conj or ConjugateConfig(), None, None).value


# ──────────────────────────────────────────────
# Fit
# ──────────────────────────────────────────────


def project_ball(coeffs: np.ndarray, weights: np.ndarray, radius: float) -> np.ndarray:
    """Radial projection onto {ω : Σ w_l ω_l² ≤ radius²}."""
    norm = math.sqrt(float(np.sum(weights * coeffs**2)))
    if norm <= radius:
        return coeffs
    return coeffs * (radius / norm)


def fit_fourier(
    X: np.ndarray,
    Y: np.ndarray,
    smoothness: SmoothnessMap,
    J: Optional[float] = None,
    cfg: Optional[SemidualConfig] = None,
    conj: Optional[ConjugateConfig] = None,
    tracer: Optional[Tracer] = None,
) -> SemidualFit:
    """Minimize the empirical semi-dual over the truncated Fourier class.

    Parameters:
        X: Source sample, n×d.
        Y: Target sample, m×d.
        smoothness: Smoothness map; α(γ) must be finite.
        J: Truncation budget (overrides ``cfg.J``; default ``select_J``).
        cfg: Outer-loop settings.
        conj: Conjugate solver settings.
        tracer: Optional tracer receiving a ``fit:fourier`` span.

    Raises:
        DomainError: On empty or mismatched samples, or infinite α.
        EnumerationLimitError: If the basis at this J exceeds ``cfg.cap``.
    """
    cfg = cfg or SemidualConfig()
    conj = conj or ConjugateConfig()
    tracer = tracer or Tracer(enabled=False)
    X, Y = _check_pair(X, Y)
    n, d = X.shape

    a = alpha(smoothness)
    if not math.isfinite(a):
        raise DomainError("the Fourier estimator needs a smoothness map with finite α(γ)")
    if a > 1.0:
        logger.warning("α(γ) = %.4g > 1: the rate guarantee does not apply, fitting anyway", a)
    if J is None:
        J = cfg.J if cfg.J is not None else select_J(smoothness, n)

    with tracer.fit_span("fourier", n=n, d=d, J=J) as span:
        basis = FourierBasis.truncated(smoothness, J, cap=cfg.cap, max_axis=d)
        logger.info("fit-fourier: n=%d d=%d J=%g basis=%d α=%.4g", n, d, J, len(basis), a)
        weights = basis.norm_weights("gamma_plus_2")
        psi_x = basis.design(X)
        half_sq = float(np.mean(0.5 * np.sum(X * X, axis=1)))

        phi = FourierPotential(basis, np.zeros(len(basis)), d)
        current = _evaluate(phi, psi_x, half_sq, X, Y, conj, None, None, tracer)
        trace = [current.value]
        lipschitz = cfg.initial_lipschitz
        converged = False
        iterations = 0

        for it in range(cfg.max_iter):
            if len(basis) == 0:
                converged = True
                break
            accepted = None
            for _ in range(cfg.max_backtracks):
                step = 0.5 / lipschitz
                coeffs = project_ball(phi.coeffs - step * current.grad, weights, cfg.radius)
                delta = coeffs - phi.coeffs
                if not np.any(delta):
                    break
                candidate = phi.with_coeffs(coeffs)
                trial = _evaluate(
                    candidate, psi_x, half_sq, X, Y, conj, current.argmax, cfg.warm_random_starts, tracer
                )
                if trial.value <= current.value:
                    accepted = (candidate, trial, delta)
                    break
                lipschitz *= 2.0
            if accepted is None:
                converged = True
                logger.debug("fit-fourier: no descent step at iteration %d", it)
                break

            candidate, trial, delta = accepted
            change = float(np.linalg.norm(trial.grad - current.grad))
            ratio = change / float(np.linalg.norm(delta))
            if ratio > 0.0 and math.isfinite(ratio):
                lipschitz = ratio
            rel = abs(current.value - trial.value) / max(abs(current.value), 1e-12)
            phi, current = candidate, trial
            trace.append(current.value)
            iterations += 1
            logger.debug("fit-fourier: iter %d Ŝ=%.10g step=%.3g", it, current.value, 0.5 / lipschitz)
            if rel < cfg.tol:
                converged = True
                break

        final = _evaluate(phi, psi_x, half_sq, X, Y, conj, current.argmax, None, tracer)
        fit = SemidualFit(
            potential=phi,
            center=final.center,
            objective_trace=trace,
            objective=final.value,
            constraint_slack=phi.h_norm("gamma_plus_2"),
            n=n,
            J=float(J),
            iterations=iterations,
            converged=converged,
        )
        span.set_attribute("iterations", iterations)
        span.set_attribute("objective", fit.objective)

    if not converged:
        logger.warning("fit-fourier: stopped at max_iter=%d before tol", cfg.max_iter)
    logger.info(
        "fit-fourier: done in %d iterations, Ŝ=%.8g, ‖φ̃‖_{H^{γ+2}}=%.4g",
        iterations,
        fit.objective,
        fit.constraint_slack,
    )
    return fit


def transport(fit: SemidualFit, x: np.ndarray) -> np.ndarray:
    """Clipped transport map of a fitted potential at one point."""
    return fit.transport(x)
