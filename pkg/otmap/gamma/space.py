"""
γ-smooth 空间 — 光滑度映射、逆光滑度指数 α(γ)、二进尺度与频率枚举。

三族光滑度映射:
- sobolev:     γ(s) = k · max{s_1, ..., s_d}          α = d / k
- mixed:       γ(s) = Σ a_i s_i                        α = 1 / a_1
- anisotropic: γ(s) = max_i a_i s_i                    α = Σ 1 / a_i

权重序列 a_i 以闭式规则给出（幂律或几何），因此任意多坐标轴都可寻址。
所有枚举结果按稀疏条目字典序排列；下游系数向量均按此顺序索引。
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import zeta

from otmap.core.errors import DomainError, EnumerationLimitError

logger = logging.getLogger("otmap.gamma")

DEFAULT_ENUMERATION_CAP = 10**6

# Admissibility comparisons tolerate float round-off in (1+2α)·γ(s) ≤ J.
_REL_TOL = 1e-12
_FLOOR_EPS = 1e-9
_TAIL_TOL = 1e-12


# ──────────────────────────────────────────────
# Sparse multi-indices
# ──────────────────────────────────────────────


def _check_sparse(entries: Tuple[Tuple[int, int], ...], what: str) -> None:
    prev = 0
    for axis, value in entries:
        if not isinstance(axis, (int, np.integer)) or axis < 1:
            raise DomainError(f"{what}: axis must be a positive integer, got {axis!r}")
        if axis <= prev:
            raise DomainError(f"{what}: axes must be strictly increasing, got {entries!r}")
        prev = axis


@dataclass(frozen=True, order=True)
class DyadicScale:
    """A dyadic scale s ∈ N₀^∞ stored as sorted ``(axis, scale)`` pairs.

    Absent axes have s_i = 0; the zero scale is the empty tuple.
    """

    entries: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        entries = tuple((int(a), int(v)) for a, v in self.entries)
        object.__setattr__(self, "entries", entries)
        _check_sparse(entries, "DyadicScale")
        for _, value in entries:
            if value < 1:
                raise DomainError(f"DyadicScale: scale values must be >= 1, got {entries!r}")

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> "DyadicScale":
        """Build from ``{axis: scale}``; zero entries are dropped."""
        return cls(tuple(sorted((a, v) for a, v in mapping.items() if v != 0)))

    @classmethod
    def single(cls, axis: int, scale: int = 1) -> "DyadicScale":
        return cls(((axis, scale),))

    @classmethod
    def from_list(cls, data: Sequence[Sequence[int]]) -> "DyadicScale":
        return cls(tuple((int(a), int(v)) for a, v in data))

    def to_list(self) -> List[List[int]]:
        return [[a, v] for a, v in self.entries]

    def get(self, axis: int) -> int:
        for a, v in self.entries:
            if a == axis:
                return v
        return 0

    @property
    def axes(self) -> Tuple[int, ...]:
        return tuple(a for a, _ in self.entries)

    @property
    def is_zero(self) -> bool:
        return not self.entries

    @property
    def total(self) -> int:
        """Σ s_i."""
        return sum(v for _, v in self.entries)

    @property
    def max_axis(self) -> int:
        return self.entries[-1][0] if self.entries else 0


@dataclass(frozen=True, order=True)
class FrequencyIndex:
    """A frequency l ∈ Z₀^∞ stored as sorted ``(axis, freq)`` pairs, freq ≠ 0.

    Negative frequencies select the cosine factor, positive ones the sine.
    """

    entries: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        entries = tuple((int(a), int(v)) for a, v in self.entries)
        object.__setattr__(self, "entries", entries)
        _check_sparse(entries, "FrequencyIndex")
        for _, value in entries:
            if value == 0:
                raise DomainError(f"FrequencyIndex: stored frequencies must be nonzero, got {entries!r}")

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> "FrequencyIndex":
        return cls(tuple(sorted((a, v) for a, v in mapping.items() if v != 0)))

    @classmethod
    def from_list(cls, data: Sequence[Sequence[int]]) -> "FrequencyIndex":
        return cls(tuple((int(a), int(v)) for a, v in data))

    def to_list(self) -> List[List[int]]:
        return [[a, v] for a, v in self.entries]

    @property
    def axes(self) -> Tuple[int, ...]:
        return tuple(a for a, _ in self.entries)

    @property
    def max_axis(self) -> int:
        return self.entries[-1][0] if self.entries else 0

    @property
    def norm(self) -> float:
        """Euclidean norm ‖l‖."""
        return math.sqrt(sum(v * v for _, v in self.entries))

    def scale(self) -> DyadicScale:
        """The unique dyadic scale whose block contains this frequency."""
        return DyadicScale(tuple((a, abs(v).bit_length()) for a, v in self.entries))


# ──────────────────────────────────────────────
# Weight rules and smoothness maps
# ──────────────────────────────────────────────


@dataclass(frozen=True)
class WeightRule:
    """Closed-form weight sequence i ↦ a_i.

    Attributes:
        kind: ``"power"`` (a_i = scale·i^exponent + offset) or
            ``"geometric"`` (a_i = scale·ratio^i).
        scale: Positive multiplier.
        exponent: Power-law exponent (power rules), >= 0.
        offset: Additive shift (power rules); a_1 must stay positive.
        ratio: Growth ratio (geometric rules), >= 1.
    """

    kind: str = "power"
    scale: float = 1.0
    exponent: float = 1.0
    offset: float = 0.0
    ratio: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in ("power", "geometric"):
            raise DomainError(f"unknown weight rule kind {self.kind!r}")
        if self.scale <= 0:
            raise DomainError("weight rule scale must be > 0")
        if self.kind == "power":
            if self.exponent < 0:
                raise DomainError("power weight exponent must be >= 0 (weights nondecreasing)")
            if self.scale + self.offset <= 0:
                raise DomainError("power weight rule gives a_1 <= 0")
        elif self.ratio < 1:
            raise DomainError("geometric weight ratio must be >= 1 (weights nondecreasing)")

    def __call__(self, i: int) -> float:
        if self.kind == "power":
            return self.scale * float(i) ** self.exponent + self.offset
        return self.scale * self.ratio ** float(i)

    def weights(self, count: int) -> np.ndarray:
        """Return a_1, ..., a_count."""
        idx = np.arange(1, count + 1, dtype=float)
        if self.kind == "power":
            return self.scale * idx**self.exponent + self.offset
        return self.scale * self.ratio**idx

    @property
    def growth_exponent(self) -> float:
        """Polynomial growth exponent q (a_i ≍ i^q); geometric rules count as ∞."""
        if self.kind == "power":
            return self.exponent
        return math.inf if self.ratio > 1 else 0.0

    def reciprocal_sum(self) -> float:
        """Σ_i 1/a_i, or ``inf`` when the series diverges."""
        if self.kind == "geometric":
            if self.ratio == 1:
                return math.inf
            return 1.0 / (self.scale * (self.ratio - 1.0))
        q = self.exponent
        if q <= 1:
            return math.inf
        if self.offset == 0:
            return float(zeta(q)) / self.scale
        return self._power_series_with_offset()

    def _power_series_with_offset(self) -> float:
        # Partial sums in doubling blocks until the integral tail bound is tiny.
        q = self.exponent
        n = 1024
        total = float(np.sum(1.0 / self.weights(n)))
        while True:
            eff = self.scale + min(self.offset, 0.0) / n**q
            bound = n ** (1.0 - q) / (eff * (q - 1.0)) if eff > 0 else math.inf
            if bound < _TAIL_TOL or n >= 2**23:
                break
            block = np.arange(n + 1, 2 * n + 1, dtype=float)
            total += float(np.sum(1.0 / (self.scale * block**q + self.offset)))
            n *= 2
        # Midpoint integral estimate of what is left.
        total += (n + 0.5) ** (1.0 - q) / (self.scale * (q - 1.0))
        logger.debug("Σ1/a_i truncated at N=%d", n)
        return total

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "power":
            return {"kind": "power", "scale": self.scale, "exponent": self.exponent, "offset": self.offset}
        return {"kind": "geometric", "scale": self.scale, "ratio": self.ratio}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "WeightRule":
        allowed = {"kind", "scale", "exponent", "offset", "ratio"}
        unknown = set(d) - allowed
        if unknown:
            raise DomainError(f"unknown weight rule keys: {sorted(unknown)}")
        return cls(**{k: (float(v) if k != "kind" else str(v)) for k, v in d.items()})


class Family(str, Enum):
    SOBOLEV = "sobolev"
    MIXED = "mixed"
    ANISOTROPIC = "anisotropic"


@dataclass(frozen=True)
class SmoothnessMap:
    """One of the three smoothness-map families γ: N₀^∞ → R_{>0}.

    Build with :meth:`sobolev`, :meth:`mixed` or :meth:`anisotropic`.
    """

    family: Family
    d: int = 0
    k: int = 0
    weights: Optional[WeightRule] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if self.family == Family.SOBOLEV:
            if self.d < 1 or self.k < 1:
                raise DomainError("Sobolev smoothness map needs d >= 1 and k >= 1")
        elif self.weights is None:
            raise DomainError(f"{self.family.value} smoothness map needs a weight rule")

    @classmethod
    def sobolev(cls, d: int, k: int) -> "SmoothnessMap":
        return cls(Family.SOBOLEV, d=int(d), k=int(k))

    @classmethod
    def mixed(cls, weights: WeightRule) -> "SmoothnessMap":
        return cls(Family.MIXED, weights=weights)

    @classmethod
    def anisotropic(cls, weights: WeightRule) -> "SmoothnessMap":
        return cls(Family.ANISOTROPIC, weights=weights)

    def weight(self, axis: int) -> float:
        """Per-axis cost γ(e_axis) of a single-axis unit scale."""
        if self.family == Family.SOBOLEV:
            if axis > self.d:
                return math.inf
            return float(self.k)
        return self.weights(axis)

    @property
    def growth_exponent(self) -> float:
        """q in a_i ≍ i^q; Sobolev maps behave like q = ∞."""
        if self.family == Family.SOBOLEV:
            return math.inf
        return self.weights.growth_exponent

    def to_dict(self) -> Dict[str, Any]:
        if self.family == Family.SOBOLEV:
            return {"family": "sobolev", "params": {"d": self.d, "k": self.k}}
        return {"family": self.family.value, "params": {"weights": self.weights.to_dict()}}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SmoothnessMap":
        unknown = set(d) - {"family", "params"}
        if unknown:
            raise DomainError(f"unknown smoothness map keys: {sorted(unknown)}")
        try:
            family = Family(d["family"])
        except (KeyError, ValueError):
            raise DomainError(f"smoothness map needs a family in {[f.value for f in Family]}") from None
        params = dict(d.get("params", {}))
        if family == Family.SOBOLEV:
            unknown = set(params) - {"d", "k"}
            if unknown:
                raise DomainError(f"unknown sobolev params: {sorted(unknown)}")
            return cls.sobolev(params.get("d", 0), params.get("k", 0))
        unknown = set(params) - {"weights"}
        if unknown:
            raise DomainError(f"unknown {family.value} params: {sorted(unknown)}")
        return cls(family, weights=WeightRule.from_dict(params.get("weights", {})))


# ──────────────────────────────────────────────
# γ(s) and α(γ)
# ──────────────────────────────────────────────


def gamma_value(smoothness: SmoothnessMap, s: DyadicScale) -> float:
    """Evaluate γ(s); the zero scale maps to 0.

    Raises:
        DomainError: If a Sobolev map sees an axis beyond its dimension.
    """
    if s.is_zero:
        return 0.0
    if smoothness.family == Family.SOBOLEV:
        if s.max_axis > smoothness.d:
            raise DomainError(
                f"axis {s.max_axis} out of range for Sobolev map with d={smoothness.d}"
            )
        return float(smoothness.k * max(v for _, v in s.entries))
    terms = [smoothness.weights(a) * v for a, v in s.entries]
    if smoothness.family == Family.MIXED:
        return float(sum(terms))
    return float(max(terms))


def alpha(smoothness: SmoothnessMap) -> float:
    """Inverse smoothness index α(γ) = sup_s Σs_i / γ(s) in closed form.

    Anisotropic maps return ``inf`` when Σ 1/a_i diverges.
    """
    if smoothness.family == Family.SOBOLEV:
        return smoothness.d / smoothness.k
    if smoothness.family == Family.MIXED:
        return 1.0 / smoothness.weights(1)
    return smoothness.weights.reciprocal_sum()


def _coef(smoothness: SmoothnessMap) -> float:
    a = alpha(smoothness)
    if not math.isfinite(a):
        raise DomainError(
            "α(γ) is infinite for this smoothness map; truncated Fourier classes are undefined"
        )
    return 1.0 + 2.0 * a


def admissible(smoothness: SmoothnessMap, s: DyadicScale, budget: float) -> bool:
    """True when (1+2α)·γ(s) ≤ budget (up to round-off)."""
    value = _coef(smoothness) * gamma_value(smoothness, s)
    return value <= budget * (1.0 + _REL_TOL) + _REL_TOL


# ──────────────────────────────────────────────
# Enumeration
# ──────────────────────────────────────────────


def _admissible_axes(
    smoothness: SmoothnessMap, threshold: float, cap: int, max_axis: Optional[int]
) -> List[int]:
    axes: List[int] = []
    i = 1
    limit = threshold * (1.0 + _REL_TOL) + _REL_TOL
    while smoothness.weight(i) <= limit:
        if max_axis is not None and i > max_axis:
            break
        if i > cap:
            raise EnumerationLimitError("axis", i, cap)
        axes.append(i)
        i += 1
    return axes


def enumerate_scales(
    smoothness: SmoothnessMap,
    budget: float,
    cap: int = DEFAULT_ENUMERATION_CAP,
    max_axis: Optional[int] = None,
) -> List[DyadicScale]:
    """Every nonzero s with (1+2α)·γ(s) ≤ budget, in canonical order.

    Parameters:
        smoothness: The smoothness map.
        budget: The threshold J (already the full right-hand side).
        cap: Maximum number of scales before :class:`EnumerationLimitError`.
        max_axis: Optional restriction to axes ``<= max_axis`` (observed coordinates).

    Raises:
        DomainError: If budget <= 0 or α(γ) is infinite.
        EnumerationLimitError: If the count exceeds *cap*.
    """
    if budget <= 0:
        raise DomainError(f"budget must be > 0, got {budget}")
    t = budget / _coef(smoothness)
    axes = _admissible_axes(smoothness, t, cap, max_axis)
    if not axes:
        return []

    if smoothness.family == Family.MIXED:
        raw = _enumerate_mixed(smoothness, axes, t, cap)
    else:
        ranges = [range(int(math.floor(t / smoothness.weight(a) + _FLOOR_EPS)) + 1) for a in axes]
        count = math.prod(len(r) for r in ranges) - 1
        if count > cap:
            raise EnumerationLimitError("scale", count, cap)
        raw = [
            DyadicScale(tuple((a, v) for a, v in zip(axes, combo) if v))
            for combo in itertools.product(*ranges)
            if any(combo)
        ]

    scales = sorted(s for s in raw if admissible(smoothness, s, budget))
    logger.debug("enumerated %d scales (budget=%g, family=%s)", len(scales), budget, smoothness.family.value)
    return scales


def _enumerate_mixed(
    smoothness: SmoothnessMap, axes: Sequence[int], t: float, cap: int
) -> List[DyadicScale]:
    out: List[DyadicScale] = []
    weights = [smoothness.weight(a) for a in axes]

    def rec(pos: int, remaining: float, acc: List[Tuple[int, int]]) -> None:
        if pos == len(axes):
            if acc:
                out.append(DyadicScale(tuple(acc)))
                if len(out) > cap:
                    raise EnumerationLimitError("scale", len(out), cap)
            return
        top = int(math.floor(remaining / weights[pos] + _FLOOR_EPS))
        for v in range(top + 1):
            if v:
                acc.append((axes[pos], v))
            rec(pos + 1, remaining - v * weights[pos], acc)
            if v:
                acc.pop()

    rec(0, t, [])
    return out


def frequency_count(s: DyadicScale) -> int:
    """|{l in the δ_s block}| = Π 2·(2^{s_i} − ⌊2^{s_i−1}⌋)."""
    return math.prod(2 * (2**v - 2 ** (v - 1)) for _, v in s.entries)


def enumerate_frequencies(
    s: DyadicScale, cap: int = DEFAULT_ENUMERATION_CAP
) -> List[FrequencyIndex]:
    """All frequencies l with ⌊2^{s_i−1}⌋ ≤ |l_i| < 2^{s_i} on stored axes.

    Raises:
        DomainError: For the zero scale.
        EnumerationLimitError: If the block is larger than *cap*.
    """
    if s.is_zero:
        raise DomainError("enumerate_frequencies needs a nonzero scale")
    count = frequency_count(s)
    if count > cap:
        raise EnumerationLimitError("frequency", count, cap)
    per_axis = []
    for _, v in s.entries:
        lo, hi = 2 ** (v - 1), 2**v
        mags = range(lo, hi)
        per_axis.append(sorted([-m for m in mags] + list(mags)))
    return [
        FrequencyIndex(tuple(zip(s.axes, combo)))
        for combo in itertools.product(*per_axis)
    ]


# ──────────────────────────────────────────────
# Truncation parameters
# ──────────────────────────────────────────────


def select_J(smoothness: SmoothnessMap, n: int) -> int:
    """J = ⌊(1+2α)/(2+α) · log₂ n⌋, floored at 1."""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    a = alpha(smoothness)
    if not math.isfinite(a):
        raise DomainError("select_J needs a finite α(γ)")
    value = (1.0 + 2.0 * a) / (2.0 + a) * math.log2(n)
    return max(1, int(math.floor(value + _FLOOR_EPS)))


def d_max(
    smoothness: SmoothnessMap, J: float, axis_cap: int = DEFAULT_ENUMERATION_CAP
) -> int:
    """Largest axis i with (1+2α)·γ(e_i) < J; 1 if no axis qualifies."""
    a = alpha(smoothness)
    if not math.isfinite(a):
        return 1
    coef = 1.0 + 2.0 * a
    flat = smoothness.family != Family.SOBOLEV and smoothness.growth_exponent == 0
    if flat and coef * smoothness.weight(1) < J:
        raise DomainError(f"constant axis weights put every axis under J={J:g}; d_max is unbounded")
    best = 0
    i = 1
    while coef * smoothness.weight(i) < J:
        best = i
        if i >= axis_cap:
            raise EnumerationLimitError("axis", i, axis_cap)
        i += 1
    return max(best, 1)


def iter_basis(
    smoothness: SmoothnessMap,
    J: float,
    cap: int = DEFAULT_ENUMERATION_CAP,
    max_axis: Optional[int] = None,
) -> Iterable[Tuple[DyadicScale, FrequencyIndex]]:
    """Yield (scale, frequency) pairs of the truncated basis in canonical order."""
    total = 0
    for s in enumerate_scales(smoothness, J, cap=cap, max_axis=max_axis):
        total += frequency_count(s)
        if total > cap:
            raise EnumerationLimitError("frequency", total, cap)
        for l in enumerate_frequencies(s, cap=cap):
            yield s, l
