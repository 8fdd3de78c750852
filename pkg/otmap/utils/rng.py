"""
随机数工具 — 基于 SeedSequence 的可复现随机流。

每个随机流由 (global_seed, stream, index...) 唯一确定，
与批次划分、线程数无关。
"""

from __future__ import annotations

import numpy as np

# Stream identifiers keep independent consumers apart under the same seed.
STREAM_CONJUGATE = 1
STREAM_DATA_X = 2
STREAM_DATA_Y = 3
STREAM_EVAL = 4
STREAM_INIT = 5
STREAM_TRAIN = 6
STREAM_CODES = 7
STREAM_FIXTURE_MC = 8
STREAM_ELLIPSOID = 9
STREAM_REPLICATE = 10


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return a generator for the stream ``(seed, *keys)``."""
    entropy = [int(seed) & 0xFFFFFFFF, *(int(k) & 0xFFFFFFFF for k in keys)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *keys: int) -> int:
    """A 32-bit seed for the stream ``(seed, *keys)``, for configs that store an int."""
    entropy = [int(seed) & 0xFFFFFFFF, *(int(k) & 0xFFFFFFFF for k in keys)]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])
