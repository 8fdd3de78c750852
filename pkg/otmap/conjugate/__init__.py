"""
Conjugate — 单位立方体上的 Legendre–Fenchel 共轭。

Quick Start::

    from otmap.conjugate import BrenierPotential, conjugate

    brenier = BrenierPotential(phi)            # φ = ‖x‖²/2 − φ̃
    res = conjugate(brenier, [0.3, 0.7])
    res.value, res.argmax, res.converged
"""

from otmap.core.config import ConjugateConfig
from otmap.conjugate.solver import (
    BrenierPotential,
    ConjugateBatch,
    ConjugateResult,
    Potential,
    conjugate,
    conjugate_batch,
    solve_batch,
)

__all__ = [
    "BrenierPotential",
    "ConjugateBatch",
    "ConjugateConfig",
    "ConjugateResult",
    "Potential",
    "conjugate",
    "conjugate_batch",
    "solve_batch",
]
