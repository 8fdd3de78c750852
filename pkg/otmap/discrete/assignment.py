"""
离散最优传输 — 等规模均匀经验测度之间的线性指派问题与最近邻插值估计器。

    σ̂ = argmin_σ Σ_i ‖X_i − Y_{σ(i)}‖²        (scipy linear_sum_assignment)
    T̂^NN(x) = Y_{σ̂(i)},  i = argmin_k ‖x − X_k‖  (平局取最小下标)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.spatial.distance import cdist

from otmap.core.errors import DomainError, NumericalFailure

logger = logging.getLogger("otmap.discrete")

MAX_ASSIGNMENT_SIZE = 5000

# Query rows per cdist block in nearest-neighbour search.
_QUERY_BLOCK = 2048


@dataclass
class TransportPlan:
    """Optimal permutation plan between two n-point uniform clouds.

    Attributes:
        n: Number of points on each side.
        assignment: σ as a 0-based index array; source i goes to target σ[i].
        cost: Σ ‖X_i − Y_{σ(i)}‖², recomputed from the coordinates.
    """

    n: int
    assignment: np.ndarray
    cost: float

    def is_permutation(self) -> bool:
        return self.assignment.shape == (self.n,) and np.array_equal(
            np.sort(self.assignment), np.arange(self.n)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "assignment": self.assignment.tolist(), "cost": self.cost}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TransportPlan":
        plan = cls(
            n=int(d["n"]),
            assignment=np.asarray(d["assignment"], dtype=np.int64),
            cost=float(d["cost"]),
        )
        if not plan.is_permutation():
            raise DomainError("stored assignment is not a permutation")
        return plan


def _pair(X: Any, Y: Any) -> tuple:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.ndim != 2:
        raise DomainError(f"expected n×d matrices, got {X.shape} and {Y.shape}")
    if X.shape[1] != Y.shape[1]:
        raise DomainError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    return X, Y


def plan_cost(X: np.ndarray, Y: np.ndarray, assignment: np.ndarray) -> float:
    diff = X - Y[assignment]
    return float(np.sum(diff * diff))


def solve_assignment(X: np.ndarray, Y: np.ndarray) -> TransportPlan:
    """Exact optimal assignment under the squared Euclidean cost.

    Raises:
        DomainError: On a size mismatch, an empty input, or n above 5000.
    """
    X, Y = _pair(X, Y)
    n = X.shape[0]
    if Y.shape[0] != n:
        raise DomainError(f"size mismatch: {n} sources vs {Y.shape[0]} targets")
    if n == 0:
        raise DomainError("empty point clouds")
    if n > MAX_ASSIGNMENT_SIZE:
        raise DomainError(f"n={n} exceeds the assignment limit {MAX_ASSIGNMENT_SIZE}")
    C = cdist(X, Y, metric="sqeuclidean")
    rows, cols = linear_sum_assignment(C)
    assignment = np.empty(n, dtype=np.int64)
    assignment[rows] = cols
    plan = TransportPlan(n=n, assignment=assignment, cost=plan_cost(X, Y, assignment))
    logger.debug("assignment: n=%d cost=%.10g", n, plan.cost)
    return plan


def nearest_index(X: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Index of the nearest row of *X* for every query (ties → lowest index)."""
    X, queries = _pair(X, queries)
    out = np.empty(queries.shape[0], dtype=np.int64)
    for start in range(0, queries.shape[0], _QUERY_BLOCK):
        block = queries[start:start + _QUERY_BLOCK]
        out[start:start + block.shape[0]] = np.argmin(cdist(block, X, metric="sqeuclidean"), axis=1)
    return out


class NearestNeighborMap:
    """Plug-in estimator T̂^NN built from a plan on the training clouds."""

    def __init__(self, X: np.ndarray, Y: np.ndarray, plan: TransportPlan) -> None:
        X, Y = _pair(X, Y)
        if X.shape[0] != plan.n or Y.shape[0] != plan.n:
            raise DomainError("plan size does not match the training clouds")
        self.X = X
        self.Y = Y
        self.plan = plan

    @classmethod
    def fit(cls, X: np.ndarray, Y: np.ndarray) -> "NearestNeighborMap":
        return cls(X, Y, solve_assignment(X, Y))

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def transport_batch(self, Q: np.ndarray) -> np.ndarray:
        idx = nearest_index(self.X, np.atleast_2d(Q))
        return self.Y[self.plan.assignment[idx]].copy()

    def transport(self, x: np.ndarray) -> np.ndarray:
        return self.transport_batch(np.atleast_2d(np.asarray(x, dtype=float)))[0]

    def to_dict(self) -> Dict[str, Any]:
        return {"X": self.X.tolist(), "Y": self.Y.tolist(), "plan": self.plan.to_dict()}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "NearestNeighborMap":
        return cls(
            np.asarray(d["X"], dtype=float),
            np.asarray(d["Y"], dtype=float),
            TransportPlan.from_dict(d["plan"]),
        )


def nn_transport(plan: TransportPlan, X: np.ndarray, Y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """T̂^NN(x): the plan image of the nearest training source point."""
    return NearestNeighborMap(X, Y, plan).transport(x)


# ──────────────────────────────────────────────
# W₂ diagnostic
# ──────────────────────────────────────────────


def w2_distance(
    X: np.ndarray,
    Y: np.ndarray,
    a: Optional[np.ndarray] = None,
    b: Optional[np.ndarray] = None,
) -> float:
    """2-Wasserstein distance between two (weighted) empirical measures.

    Equal-size uniform clouds go through :func:`solve_assignment`; anything
    else is solved as a transport LP with HiGHS.
    """
    X, Y = _pair(X, Y)
    n, m = X.shape[0], Y.shape[0]
    if n == 0 or m == 0:
        raise DomainError("empty point clouds")
    if a is None and b is None and n == m:
        return math.sqrt(solve_assignment(X, Y).cost / n)

    a = np.full(n, 1.0 / n) if a is None else np.asarray(a, dtype=float)
    b = np.full(m, 1.0 / m) if b is None else np.asarray(b, dtype=float)
    if a.shape != (n,) or b.shape != (m,) or np.any(a < 0) or np.any(b < 0):
        raise DomainError("weights must be non-negative vectors matching the clouds")
    a = a / a.sum()
    b = b / b.sum()

    C = cdist(X, Y, metric="sqeuclidean").reshape(-1)
    rows = sparse.kron(sparse.eye(n), np.ones((1, m)))
    cols = sparse.kron(np.ones((1, n)), sparse.eye(m))
    A_eq = sparse.vstack([rows, cols]).tocsr()
    b_eq = np.concatenate([a, b])
    result = linprog(C, A_eq=A_eq[:-1], b_eq=b_eq[:-1], bounds=(0, None), method="highs")
    if not result.success:
        raise NumericalFailure("w2_distance", result.message)
    return math.sqrt(max(float(result.fun), 0.0))
