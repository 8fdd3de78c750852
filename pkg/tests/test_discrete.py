"""
测试离散指派、最近邻插值映射、W₂ 距离与 Sobolev 椭球采样。
"""

import itertools
import math

import numpy as np
import pytest

from otmap.core.errors import DomainError
from otmap.discrete.assignment import (
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


def _brute_force_cost(X, Y):
    n = X.shape[0]
    return min(plan_cost(X, Y, np.array(p)) for p in itertools.permutations(range(n)))


# ══════════════════════════════════════════════
# Assignment
# ══════════════════════════════════════════════


class TestSolveAssignment:
    """线性指派求解测试。"""

    def test_identical_clouds(self, rng):
        X = rng.random((10, 3))
        plan = solve_assignment(X, X)
        assert plan.cost == 0.0
        np.testing.assert_array_equal(plan.assignment, np.arange(10))

    def test_two_point_swap(self):
        X = np.array([[0.0], [1.0]])
        Y = np.array([[0.9], [0.1]])
        plan = solve_assignment(X, Y)
        np.testing.assert_array_equal(plan.assignment, [1, 0])
        assert plan.cost == pytest.approx(0.02)

    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_matches_brute_force(self, n):
        gen = np.random.default_rng(n)
        X, Y = gen.random((n, 2)), gen.random((n, 2))
        plan = solve_assignment(X, Y)
        assert plan.is_permutation()
        assert plan.cost == pytest.approx(_brute_force_cost(X, Y), abs=1e-12)

    def test_size_mismatch(self):
        with pytest.raises(DomainError):
            solve_assignment(np.zeros((3, 2)), np.zeros((4, 2)))

    def test_empty(self):
        with pytest.raises(DomainError):
            solve_assignment(np.zeros((0, 2)), np.zeros((0, 2)))

    def test_size_limit(self):
        with pytest.raises(DomainError):
            solve_assignment(np.zeros((5001, 1)), np.zeros((5001, 1)))

    def test_plan_round_trip(self, rng):
        X, Y = rng.random((6, 2)), rng.random((6, 2))
        plan = solve_assignment(X, Y)
        back = TransportPlan.from_dict(plan.to_dict())
        np.testing.assert_array_equal(back.assignment, plan.assignment)
        assert back.cost == plan.cost

    def test_stored_plan_must_be_permutation(self):
        with pytest.raises(DomainError):
            TransportPlan.from_dict({"n": 3, "assignment": [0, 0, 2], "cost": 0.0})


# ══════════════════════════════════════════════
# Nearest-neighbour map
# ══════════════════════════════════════════════


class TestNearestNeighborMap:
    """T̂^NN 插值映射测试。"""

    def test_training_points_map_to_their_partner(self):
        X = np.array([[0.0], [1.0]])
        Y = np.array([[0.9], [0.1]])
        plan = solve_assignment(X, Y)
        np.testing.assert_array_equal(nn_transport(plan, X, Y, [0.0]), [0.1])
        np.testing.assert_array_equal(nn_transport(plan, X, Y, [1.0]), [0.9])

    def test_query_uses_nearest_source(self):
        X = np.array([[0.0], [1.0]])
        Y = np.array([[0.9], [0.1]])
        fitted = NearestNeighborMap.fit(X, Y)
        np.testing.assert_array_equal(fitted.transport_batch([[0.3], [0.8]]), [[0.1], [0.9]])

    def test_tie_goes_to_lowest_index(self):
        X = np.array([[0.0], [1.0]])
        assert nearest_index(X, np.array([[0.5]]))[0] == 0

    def test_output_is_a_target_point(self, rng):
        X, Y = rng.random((20, 3)), rng.random((20, 3))
        fitted = NearestNeighborMap.fit(X, Y)
        out = fitted.transport_batch(rng.random((15, 3)))
        assert all(any(np.array_equal(row, y) for y in Y) for row in out)

    def test_plan_size_checked(self, rng):
        X, Y = rng.random((4, 2)), rng.random((4, 2))
        plan = solve_assignment(X[:3], Y[:3])
        with pytest.raises(DomainError):
            NearestNeighborMap(X, Y, plan)

    def test_round_trip(self, rng):
        X, Y = rng.random((8, 2)), rng.random((8, 2))
        fitted = NearestNeighborMap.fit(X, Y)
        back = NearestNeighborMap.from_dict(fitted.to_dict())
        Q = rng.random((5, 2))
        np.testing.assert_array_equal(back.transport_batch(Q), fitted.transport_batch(Q))


# ══════════════════════════════════════════════
# W₂
# ══════════════════════════════════════════════


class TestW2Distance:
    """W₂ 距离测试。"""

    def test_identical_clouds(self, rng):
        X = rng.random((12, 4))
        assert w2_distance(X, X) == 0.0

    def test_singletons(self):
        assert w2_distance([[0.0, 0.0]], [[0.3, 0.4]]) == pytest.approx(0.5)

    def test_equal_size_matches_brute_force(self):
        gen = np.random.default_rng(21)
        X, Y = gen.random((6, 2)), gen.random((6, 2))
        assert w2_distance(X, Y) == pytest.approx(math.sqrt(_brute_force_cost(X, Y) / 6))

    def test_unequal_sizes_use_the_lp(self):
        X = np.array([[0.0], [1.0]])
        Y = np.array([[0.5]])
        assert w2_distance(X, Y) == pytest.approx(0.5, abs=1e-9)

    def test_weighted_lp(self):
        X = np.array([[0.0], [1.0]])
        assert w2_distance(X, X, a=[0.5, 0.5], b=[0.25, 0.75]) == pytest.approx(0.5, abs=1e-9)

    def test_lp_agrees_with_assignment(self, rng):
        X, Y = rng.random((7, 2)), rng.random((7, 2))
        uniform = np.full(7, 1.0 / 7)
        assert w2_distance(X, Y, a=uniform, b=uniform) == pytest.approx(w2_distance(X, Y), abs=1e-7)

    def test_bad_weights(self):
        with pytest.raises(DomainError):
            w2_distance([[0.0], [1.0]], [[0.5]], a=[-1.0, 2.0])

    def test_empty(self):
        with pytest.raises(DomainError):
            w2_distance(np.zeros((0, 1)), np.zeros((2, 1)))


# ══════════════════════════════════════════════
# Sobolev ellipsoid
# ══════════════════════════════════════════════


class TestSobolevEllipsoid:
    """椭球采样与任务映射测试。"""

    def test_points_inside_ellipsoid(self):
        theta = sample_sobolev_ellipsoid(1.0, 20, 500, 0)
        assert theta.shape == (500, 20)
        assert np.all(ellipsoid_norm(theta, 1.0) < 1.0)
        assert np.all(theta >= 0.0) and np.all(theta <= 1.0)

    def test_coordinate_ranges(self):
        b = 1.5
        theta = sample_sobolev_ellipsoid(b, 10, 300, 1)
        j = np.arange(1, 11, dtype=float)
        assert np.all(theta <= j ** (-b) + 1e-15)

    def test_large_b_rarely_rescales(self):
        theta = draw_sobolev_ellipsoid(np.random.default_rng(0), 5.0, 8, 200)
        assert np.all(ellipsoid_norm(theta, 5.0) < 1.0)

    def test_same_stream_same_draw(self):
        a = sample_sobolev_ellipsoid(2.0, 5, 10, 3, 7)
        b = sample_sobolev_ellipsoid(2.0, 5, 10, 3, 7)
        np.testing.assert_array_equal(a, b)

    def test_invalid_request(self):
        with pytest.raises(DomainError):
            draw_sobolev_ellipsoid(np.random.default_rng(0), 0.0, 3, 5)

    def test_task_map_is_monotone_and_inside(self):
        T = EllipsoidTaskMap(1.0, 6)
        theta = sample_sobolev_ellipsoid(1.0, 6, 100, 2)
        out = T(theta)
        assert np.all(out >= 0.0) and np.all(out <= theta)
        lo, hi = np.full((1, 6), 0.01), np.full((1, 6), 0.02)
        assert np.all(T(hi) > T(lo))
