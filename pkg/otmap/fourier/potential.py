"""
Fourier Kantorovich 势函数 — φ = Σ ω_l ψ_l 及其 Brenier 势 ‖x‖²/2 − φ。

提供取值、精确梯度、传输映射 T(x) = x − ∇φ(x)、H^γ / H^{γ+2} 范数、
对参考势的截断，以及 JSON 序列化。
"""

from __future__ import annotations

import logging
import math
from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from otmap.core.errors import DomainError
from otmap.fourier.basis import FourierBasis
from otmap.gamma.space import (
    DEFAULT_ENUMERATION_CAP,
    DyadicScale,
    FrequencyIndex,
    SmoothnessMap,
)

logger = logging.getLogger("otmap.fourier")

NORM_ORDERS = ("gamma", "gamma_plus_2")

CoefficientRule = Callable[[DyadicScale, FrequencyIndex], float]


class FourierPotential:
    """Sparse Fourier series φ = Σ ω_l ψ_l on [0,1]^d (no zero-frequency term).

    Parameters:
        basis: Canonically ordered basis.
        coeffs: Coefficients ω aligned with ``basis``.
        ambient_dim: Evaluation dimension d (>= every basis axis).
    """

    def __init__(self, basis: FourierBasis, coeffs: np.ndarray, ambient_dim: int) -> None:
        coeffs = np.array(coeffs, dtype=float).reshape(-1)
        if coeffs.shape[0] != len(basis):
            raise DomainError(
                f"coefficient vector has {coeffs.shape[0]} entries, basis has {len(basis)}"
            )
        if basis.max_axis > ambient_dim:
            raise DomainError(
                f"basis uses axis {basis.max_axis} beyond ambient dimension {ambient_dim}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise DomainError("non-finite Fourier coefficient")
        coeffs.setflags(write=False)
        self.basis = basis
        self.coeffs = coeffs
        self.ambient_dim = int(ambient_dim)

    # ─── Construction ───

    @classmethod
    def zero(
        cls,
        smoothness: SmoothnessMap,
        J: float,
        ambient_dim: int,
        cap: int = DEFAULT_ENUMERATION_CAP,
    ) -> "FourierPotential":
        basis = FourierBasis.truncated(smoothness, J, cap=cap, max_axis=ambient_dim)
        return cls(basis, np.zeros(len(basis)), ambient_dim)

    @classmethod
    def from_rule(
        cls,
        smoothness: SmoothnessMap,
        J: float,
        ambient_dim: int,
        rule: CoefficientRule,
        cap: int = DEFAULT_ENUMERATION_CAP,
    ) -> "FourierPotential":
        """Fill every basis coefficient from a closed-form rule ``(s, l) -> ω``."""
        basis = FourierBasis.truncated(smoothness, J, cap=cap, max_axis=ambient_dim)
        coeffs = np.array([rule(s, l) for s, l in zip(basis.scales, basis.freqs)], dtype=float)
        return cls(basis, coeffs, ambient_dim)

    @classmethod
    def from_terms(
        cls,
        smoothness: SmoothnessMap,
        terms: Mapping[FrequencyIndex, float],
        ambient_dim: int,
        J: Optional[float] = None,
    ) -> "FourierPotential":
        """Potential over exactly the given frequencies (canonical order)."""
        freqs = sorted(terms, key=lambda l: (l.scale(), l))
        basis = FourierBasis.from_frequencies(smoothness, freqs, J=J)
        return cls(basis, np.array([terms[l] for l in freqs], dtype=float), ambient_dim)

    def with_coeffs(self, coeffs: np.ndarray) -> "FourierPotential":
        return FourierPotential(self.basis, coeffs, self.ambient_dim)

    # ─── Properties ───

    @property
    def smoothness(self) -> SmoothnessMap:
        return self.basis.smoothness

    @property
    def J(self) -> Optional[float]:
        return self.basis.J

    def __len__(self) -> int:
        return len(self.basis)

    def coefficient(self, l: FrequencyIndex) -> float:
        """ω_l, or 0 when l is not stored."""
        if l not in self.basis:
            return 0.0
        return float(self.coeffs[self.basis.index_of(l)])

    # ─── Evaluation ───

    def values(self, X: np.ndarray) -> np.ndarray:
        """φ(X_i) for each row."""
        if len(self.basis) == 0:
            return np.zeros(np.asarray(X).shape[0])
        return self.basis.design(X) @ self.coeffs

    def value_and_grad(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Batched values and exact gradients ∇φ(X_i)."""
        return self.basis.values_and_grads(X, self.coeffs)

    def grads(self, X: np.ndarray) -> np.ndarray:
        return self.value_and_grad(X)[1]

    def value(self, x: Sequence[float]) -> float:
        return float(self.values(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def grad(self, x: Sequence[float]) -> np.ndarray:
        return self.grads(np.atleast_2d(np.asarray(x, dtype=float)))[0]

    def brenier_grads(self, X: np.ndarray) -> np.ndarray:
        """T(X_i) = X_i − ∇φ(X_i), the gradient of ‖x‖²/2 − φ."""
        X = np.asarray(X, dtype=float)
        return X - self.grads(X)

    # ─── Norms ───

    def h_norm(self, order: str = "gamma") -> float:
        """‖φ‖_{H^γ} (``"gamma"``) or ‖φ‖_{H^{γ+2}} (``"gamma_plus_2"``)."""
        if len(self.basis) == 0:
            return 0.0
        w = self.basis.norm_weights(order)
        return float(math.sqrt(np.sum(w * self.coeffs**2)))

    def hessian_bound(self) -> float:
        """Upper bound 4π²‖φ‖_{H^{γ+2}} on ‖∇²φ‖_op."""
        return 4.0 * math.pi**2 * self.h_norm("gamma_plus_2")

    def l2_norm(self) -> float:
        """‖φ‖_{L²} = ‖ω‖₂ by orthonormality."""
        return float(np.linalg.norm(self.coeffs))

    # ─── Serialization ───

    def to_dict(self) -> Dict[str, Any]:
        return {
            "smoothness_map": self.smoothness.to_dict(),
            "J": self.J,
            "ambient_dim": self.ambient_dim,
            "entries": [
                {"scale": s.to_list(), "freq": l.to_list(), "omega": float(w)}
                for s, l, w in zip(self.basis.scales, self.basis.freqs, self.coeffs)
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FourierPotential":
        unknown = set(d) - {"smoothness_map", "J", "ambient_dim", "entries"}
        if unknown:
            raise DomainError(f"unknown FourierPotential keys: {sorted(unknown)}")
        smoothness = SmoothnessMap.from_dict(d["smoothness_map"])
        J = d.get("J")
        entries = [
            (DyadicScale.from_list(e["scale"]), FrequencyIndex.from_list(e["freq"]))
            for e in d["entries"]
        ]
        basis = FourierBasis(smoothness, entries, J=J)
        basis.check_admissible()
        coeffs = np.array([float(e["omega"]) for e in d["entries"]], dtype=float)
        return cls(basis, coeffs, int(d["ambient_dim"]))


# ──────────────────────────────────────────────
# Functional API
# ──────────────────────────────────────────────


def potential_eval(phi: FourierPotential, x: Sequence[float]) -> float:
    """φ(x) = Σ ω_l ψ_l(x)."""
    return phi.value(x)


def potential_grad(phi: FourierPotential, x: Sequence[float]) -> np.ndarray:
    """Exact gradient ∇φ(x) by direct differentiation of each factor."""
    return phi.grad(x)


def brenier_grad(phi: FourierPotential, x: Sequence[float]) -> np.ndarray:
    """Transport map T(x) = x − ∇φ(x)."""
    x = np.asarray(x, dtype=float)
    return x - phi.grad(x)


def h_norm(phi: FourierPotential, order: str = "gamma") -> float:
    return phi.h_norm(order)


def truncate_reference(
    phi0: Union[FourierPotential, CoefficientRule],
    smoothness: SmoothnessMap,
    J: float,
    ambient_dim: Optional[int] = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> FourierPotential:
    """φ̄_J: keep exactly the coefficients of scales with (1+2α)·γ(s) ≤ J.

    Parameters:
        phi0: A stored potential, or a closed-form coefficient rule.
        smoothness: Smoothness map defining admissibility.
        J: Truncation budget.
        ambient_dim: Evaluation dimension; defaults to ``phi0.ambient_dim``.
    """
    if isinstance(phi0, FourierPotential):
        dim = ambient_dim if ambient_dim is not None else phi0.ambient_dim
        basis = FourierBasis.truncated(smoothness, J, cap=cap, max_axis=dim)
        coeffs = np.array([phi0.coefficient(l) for l in basis.freqs], dtype=float)
        return FourierPotential(basis, coeffs, dim)
    if ambient_dim is None:
        raise DomainError("truncate_reference with a coefficient rule needs ambient_dim")
    return FourierPotential.from_rule(smoothness, J, ambient_dim, phi0, cap=cap)
