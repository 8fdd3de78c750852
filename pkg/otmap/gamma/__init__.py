"""
γ-smooth 空间 — 光滑度映射与截断参数。

Quick Start::

    from otmap.gamma import SmoothnessMap, WeightRule, alpha, select_J, d_max

    gamma = SmoothnessMap.mixed(WeightRule(kind="power", exponent=1.0))
    J = select_J(gamma, n=1024)        # 10
    dims = d_max(gamma, J)             # 3
"""

from otmap.gamma.space import (
    DEFAULT_ENUMERATION_CAP,
    DyadicScale,
    Family,
    FrequencyIndex,
    SmoothnessMap,
    WeightRule,
    admissible,
    alpha,
    d_max,
    enumerate_frequencies,
    enumerate_scales,
    frequency_count,
    gamma_value,
    iter_basis,
    select_J,
)

__all__ = [
    "DEFAULT_ENUMERATION_CAP",
    "DyadicScale",
    "Family",
    "FrequencyIndex",
    "SmoothnessMap",
    "WeightRule",
    "admissible",
    "alpha",
    "d_max",
    "enumerate_frequencies",
    "enumerate_scales",
    "frequency_count",
    "gamma_value",
    "iter_basis",
    "select_J",
]
