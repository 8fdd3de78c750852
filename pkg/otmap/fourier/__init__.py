"""
Fourier 势函数 — 三角基、截断 Fourier 级数与其梯度 / 范数。

Quick Start::

    from otmap.fourier import FourierPotential
    from otmap.gamma import SmoothnessMap

    phi = FourierPotential.zero(SmoothnessMap.sobolev(d=2, k=2), J=6, ambient_dim=2)
    T = phi.brenier_grads(points)   # identity for the zero potential
"""

from otmap.fourier.basis import FourierBasis, basis_eval
from otmap.fourier.potential import (
    NORM_ORDERS,
    FourierPotential,
    brenier_grad,
    h_norm,
    potential_eval,
    potential_grad,
    truncate_reference,
)

__all__ = [
    "FourierBasis",
    "FourierPotential",
    "NORM_ORDERS",
    "basis_eval",
    "brenier_grad",
    "h_norm",
    "potential_eval",
    "potential_grad",
    "truncate_reference",
]
