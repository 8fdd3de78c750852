"""
下界构造 — 由二进制码索引的一族良分离 Brenier 势。

    g_l = (2√2π)^{-2} · 2^{-γ(S)} · M^{-1/2} · ‖l‖^{-1} · ψ_l,   l ∈ I(S) − {0}
    φ_m = Σ_l w_{m,l} g_l,   w_m ∈ {0,1}^{M-1},   M = 2^{dS}

码字两两 Hamming 距离 ≥ M/8 时，梯度之间的 L² 距离按 2^{-2γ(S)} 缩放。
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from otmap.core.errors import CodeGenerationError, DomainError
from otmap.fourier.potential import FourierPotential
from otmap.gamma.space import DyadicScale, FrequencyIndex, SmoothnessMap, gamma_value
from otmap.utils.rng import STREAM_CODES, STREAM_FIXTURE_MC, make_rng

logger = logging.getLogger("otmap.experiments")

CODE_ATTEMPT_CAP = 100_000
MC_SIZE = 100_000
# Bases beyond this size make the per-code Monte Carlo gradients too large.
MAX_FIXTURE_FREQUENCIES = 1 << 12

_LEAD = (2.0 * math.sqrt(2.0) * math.pi) ** -2


@dataclass
class FixtureReport:
    """Numerical check of the packing construction.

    Attributes:
        d, S, K: Dimension, scale and number of codes.
        M: 2^{dS}.
        gamma: γ at the scale (S, …, S) on the first d axes.
        codes: The accepted binary codes.
        min_hamming: Smallest pairwise Hamming distance.
        coefficient_sum: Σ 2^{2γ(s(l))} c_l² 4π²‖l‖²; at most 1.
        separation_exact: Pairwise ∫‖∇φ_m − ∇φ_m′‖² from orthogonality.
        separation_mc: The same integrals estimated by Monte Carlo.
        min_separation: Smallest Monte Carlo separation.
        normalized_separation: min over pairs of separation · M / Hamming.
        fitted_c: min_separation / 2^{-2γ}.
    """

    d: int
    S: int
    K: int
    M: int
    gamma: float
    codes: np.ndarray
    min_hamming: int
    coefficient_sum: float
    separation_exact: np.ndarray
    separation_mc: np.ndarray
    min_separation: float
    normalized_separation: float
    fitted_c: float
    mc_size: int = MC_SIZE
    smoothness: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "S": self.S,
            "K": self.K,
            "M": self.M,
            "gamma": self.gamma,
            "codes": self.codes.astype(int).tolist(),
            "min_hamming": self.min_hamming,
            "hamming_target": self.M / 8.0,
            "coefficient_sum": self.coefficient_sum,
            "separation_exact": self.separation_exact.tolist(),
            "separation_mc": self.separation_mc.tolist(),
            "min_separation": self.min_separation,
            "normalized_separation": self.normalized_separation,
            "fitted_c": self.fitted_c,
            "mc_size": self.mc_size,
            "smoothness": self.smoothness,
        }


# ──────────────────────────────────────────────
# Building blocks
# ──────────────────────────────────────────────


def packing_frequencies(d: int, S: int) -> List[FrequencyIndex]:
    """I(S) − {0}: cosine frequencies with 0 ≤ l_i < 2^S on the first d axes."""
    if d < 1 or S < 1:
        raise DomainError(f"need d >= 1 and S >= 1, got d={d}, S={S}")
    top = 1 << S
    freqs = []
    for combo in itertools.product(range(top), repeat=d):
        if any(combo):
            freqs.append(FrequencyIndex.of({i + 1: -k for i, k in enumerate(combo) if k}))
    return freqs


def packing_gamma(smoothness: SmoothnessMap, d: int, S: int) -> float:
    """γ(S) at the scale with s_i = S for i ≤ d."""
    return gamma_value(smoothness, DyadicScale.of({i: S for i in range(1, d + 1)}))


def packing_coefficients(freqs: List[FrequencyIndex], gamma: float, M: int) -> np.ndarray:
    norms = np.array([l.norm for l in freqs])
    return _LEAD * 2.0 ** (-gamma) / math.sqrt(M) / norms


def generate_codes(K: int, length: int, min_distance: int, seed: int = 0) -> np.ndarray:
    """Rejection-sample K binary codes with pairwise Hamming distance ≥ *min_distance*.

    Raises:
        CodeGenerationError: If the attempt cap is reached first.
    """
    if K < 1 or length < 1:
        raise DomainError(f"need K >= 1 and length >= 1, got K={K}, length={length}")
    rng = make_rng(seed, STREAM_CODES, K, length)
    codes: List[np.ndarray] = []
    attempts = 0
    while len(codes) < K:
        if attempts >= CODE_ATTEMPT_CAP:
            raise CodeGenerationError(K, length, attempts)
        attempts += 1
        cand = rng.integers(0, 2, size=length, dtype=np.int8)
        if all(int(np.sum(cand != c)) >= min_distance for c in codes):
            codes.append(cand)
    logger.debug("codes: K=%d length=%d min_distance=%d after %d draws", K, length, min_distance, attempts)
    return np.stack(codes)


def hamming_matrix(codes: np.ndarray) -> np.ndarray:
    return np.sum(codes[:, None, :] != codes[None, :, :], axis=2)


# ──────────────────────────────────────────────
# Fixture
# ──────────────────────────────────────────────


def lower_bound_fixture(
    d: int,
    S: int,
    smoothness: Optional[SmoothnessMap] = None,
    K: int = 8,
    seed: int = 0,
    m: int = MC_SIZE,
) -> FixtureReport:
    """Build the packing family and measure its separations.

    Parameters:
        d: Dimension of the perturbation.
        S: Dyadic scale on every axis.
        smoothness: Smoothness map defining γ (default: Sobolev of order 1 in d).
        K: Number of codes.
        seed: Global seed for the codes and the Monte Carlo points.
        m: Monte Carlo size.

    Raises:
        CodeGenerationError: When K codes at Hamming distance ≥ M/8 cannot be drawn.
    """
    smoothness = smoothness or SmoothnessMap.sobolev(d, 1)
    freqs = packing_frequencies(d, S)
    if len(freqs) > MAX_FIXTURE_FREQUENCIES:
        raise DomainError(f"2^(dS) = {len(freqs) + 1} frequencies is too large for the fixture")
    M = len(freqs) + 1
    gamma = packing_gamma(smoothness, d, S)
    c = packing_coefficients(freqs, gamma, M)
    grad_sq = 4.0 * math.pi**2 * np.array([l.norm**2 for l in freqs])

    scale_gammas = np.array([gamma_value(smoothness, l.scale()) for l in freqs])
    coefficient_sum = float(np.sum(2.0 ** (2.0 * scale_gammas) * c**2 * grad_sq))

    min_distance = max(1, math.ceil(M / 8))
    codes = generate_codes(K, M - 1, min_distance, seed)
    H = hamming_matrix(codes)

    weight = c**2 * grad_sq
    diff = (codes[:, None, :] != codes[None, :, :]).astype(float)
    exact = diff @ weight

    X = make_rng(seed, STREAM_FIXTURE_MC, d, S).random((m, d))
    grads = []
    for code in codes:
        phi = FourierPotential.from_terms(smoothness, dict(zip(freqs, c * code)), d)
        grads.append(phi.grads(X))
    mc = np.zeros((K, K))
    for i, j in itertools.combinations(range(K), 2):
        delta = grads[i] - grads[j]
        mc[i, j] = mc[j, i] = float(np.mean(np.sum(delta * delta, axis=1)))

    if K > 1:
        iu = np.triu_indices(K, k=1)
        min_hamming = int(H[iu].min())
        min_sep = float(mc[iu].min())
        normalized = float(np.min(mc[iu] * M / H[iu]))
    else:
        min_hamming, min_sep, normalized = M - 1, 0.0, 0.0
    report = FixtureReport(
        d=d,
        S=S,
        K=K,
        M=M,
        gamma=gamma,
        codes=codes,
        min_hamming=min_hamming,
        coefficient_sum=coefficient_sum,
        separation_exact=exact,
        separation_mc=mc,
        min_separation=min_sep,
        normalized_separation=normalized,
        fitted_c=min_sep / 2.0 ** (-2.0 * gamma),
        mc_size=m,
        smoothness=smoothness.to_dict(),
    )
    logger.info(
        "fixture-lb: d=%d S=%d K=%d M=%d γ=%g min Hamming=%d min separation=%.4g coefficient sum=%.4g",
        d,
        S,
        K,
        M,
        gamma,
        min_hamming,
        min_sep,
        coefficient_sum,
    )
    return report
