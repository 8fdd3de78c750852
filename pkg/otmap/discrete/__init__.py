"""
Discrete OT — 线性指派、最近邻插值估计器、W₂ 诊断与 Sobolev 椭球任务。

Quick Start::

    from otmap.discrete import solve_assignment, nn_transport

    plan = solve_assignment(X, Y)
    y_hat = nn_transport(plan, X, Y, query)
"""

from otmap.discrete.assignment import (
    MAX_ASSIGNMENT_SIZE,
    NearestNeighborMap,
    TransportPlan,
    nearest_index,
    nn_transport,
    plan_cost,
    solve_assignment,
    w2_distance,
)
from otmap.discrete.ellipsoid import (
    EllipsoidTaskMap,
    draw_sobolev_ellipsoid,
    ellipsoid_norm,
    sample_sobolev_ellipsoid,
)

__all__ = [
    "MAX_ASSIGNMENT_SIZE",
    "EllipsoidTaskMap",
    "NearestNeighborMap",
    "TransportPlan",
    "draw_sobolev_ellipsoid",
    "ellipsoid_norm",
    "nearest_index",
    "nn_transport",
    "plan_cost",
    "sample_sobolev_ellipsoid",
    "solve_assignment",
    "w2_distance",
]
