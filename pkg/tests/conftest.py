"""
共享测试夹具。
"""

import numpy as np
import pytest

from otmap.core.config import ConjugateConfig
from otmap.gamma.space import SmoothnessMap, WeightRule


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fast_conj():
    """Conjugate settings small enough for unit tests."""
    return ConjugateConfig(tol=1e-9, max_iter=200, n_starts=4, seed=0)


@pytest.fixture
def mixed_linear():
    """Mixed map with a_i = i (α = 1)."""
    return SmoothnessMap.mixed(WeightRule(kind="power", scale=1.0, exponent=1.0))


@pytest.fixture
def isolated_env(tmp_path, monkeypatch):
    """Run in an empty directory with no OTMAP_* variables set."""
    for key in (
        "OTMAP_SEED",
        "OTMAP_OUTPUT_DIR",
        "OTMAP_THREADS",
        "OTMAP_LOG_LEVEL",
        "OTMAP_LOG_FILE",
        "OTMAP_DEBUG",
        "OTMAP_TRACE",
    ):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path
