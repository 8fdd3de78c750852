"""
测试 Legendre–Fenchel 共轭求解器。
"""

import numpy as np
import pytest

from otmap.conjugate.solver import BrenierPotential, conjugate, conjugate_batch, solve_batch
from otmap.core.config import ConjugateConfig
from otmap.core.errors import NumericalFailure
from otmap.fourier.potential import FourierPotential


class _Linear:
    """φ ≡ 0 on the box, so φ*(y) is a linear program."""

    def value_and_grad(self, X):
        X = np.asarray(X, dtype=float)
        return np.zeros(X.shape[0]), np.zeros_like(X)


class _Broken:
    def value_and_grad(self, X):
        X = np.asarray(X, dtype=float)
        return np.full(X.shape[0], np.nan), np.zeros_like(X)


@pytest.fixture
def small_potential(mixed_linear):
    """Random Fourier φ̃ on d=2 scaled to ‖φ̃‖_{H^{γ+2}} = 0.5."""
    phi = FourierPotential.zero(mixed_linear, 9.0, 2)
    coeffs = np.random.default_rng(11).normal(size=len(phi))
    phi = phi.with_coeffs(coeffs)
    return phi.with_coeffs(coeffs * 0.5 / phi.h_norm("gamma_plus_2"))


def _grid_conjugate(potential, y, points=201):
    t = np.linspace(0.0, 1.0, points)
    G = np.stack(np.meshgrid(t, t, indexing="ij"), axis=-1).reshape(-1, 2)
    values, _ = potential.value_and_grad(G)
    return float(np.max(G @ y - values))


# ══════════════════════════════════════════════
# Single point
# ══════════════════════════════════════════════


class TestConjugate:
    """单点共轭测试。"""

    def test_quadratic_interior(self, mixed_linear, fast_conj):
        brenier = BrenierPotential(FourierPotential.zero(mixed_linear, 2.0, 3))
        y = np.array([0.2, 0.5, 0.9])
        res = conjugate(brenier, y, fast_conj)
        assert res.value == pytest.approx(0.5 * float(y @ y), abs=1e-12)
        np.testing.assert_allclose(res.argmax, y, atol=1e-12)
        assert res.converged

    def test_linear_program_on_box(self, fast_conj):
        res = conjugate(_Linear(), [0.5, -0.3], fast_conj)
        assert res.value == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(res.argmax, [1.0, 0.0], atol=1e-12)

    def test_matches_grid_search(self, small_potential, rng):
        brenier = BrenierPotential(small_potential)
        cfg = ConjugateConfig(tol=1e-10, max_iter=500, n_starts=8)
        for y in rng.uniform(-0.2, 1.2, size=(5, 2)):
            res = conjugate(brenier, y, cfg)
            assert res.value == pytest.approx(_grid_conjugate(brenier, y), abs=1e-4)

    def test_argmax_inside_box(self, small_potential):
        res = conjugate(BrenierPotential(small_potential), [2.0, -1.0])
        assert np.all(res.argmax >= 0.0) and np.all(res.argmax <= 1.0)

    def test_warm_start_and_candidates(self, small_potential, rng, fast_conj):
        brenier = BrenierPotential(small_potential)
        y = np.array([0.4, 0.7])
        cold = conjugate(brenier, y, fast_conj)
        warm = conjugate(brenier, y, fast_conj, warm_start=cold.argmax, candidates=rng.random((20, 2)))
        assert warm.value >= cold.value - 1e-12

    def test_non_finite_potential(self, fast_conj):
        with pytest.raises(NumericalFailure):
            conjugate(_Broken(), [0.5, 0.5], fast_conj)


# ══════════════════════════════════════════════
# Batch
# ══════════════════════════════════════════════


class TestConjugateBatch:
    """批量共轭与确定性测试。"""

    def test_empty(self, small_potential):
        assert conjugate_batch(BrenierPotential(small_potential), np.zeros((0, 2))) == []

    def test_repeated_point_is_deterministic(self, small_potential, fast_conj):
        brenier = BrenierPotential(small_potential)
        a = conjugate(brenier, [0.3, 0.6], fast_conj, index=4)
        b = conjugate(brenier, [0.3, 0.6], fast_conj, index=4)
        assert a.value == b.value
        np.testing.assert_array_equal(a.argmax, b.argmax)

    def test_batch_matches_single_calls(self, small_potential, rng, fast_conj):
        brenier = BrenierPotential(small_potential)
        ys = rng.random((6, 2))
        batch = conjugate_batch(brenier, ys, cfg=fast_conj)
        for i, y in enumerate(ys):
            single = conjugate(brenier, y, fast_conj, index=i)
            assert batch[i].value == pytest.approx(single.value, abs=1e-12)

    def test_thread_count_does_not_change_results(self, small_potential, rng):
        brenier = BrenierPotential(small_potential)
        ys = rng.random((40, 2))
        serial = solve_batch(brenier, ys, ConjugateConfig(n_starts=2, chunk_size=8, threads=1))
        parallel = solve_batch(brenier, ys, ConjugateConfig(n_starts=2, chunk_size=8, threads=4))
        np.testing.assert_array_equal(serial.values, parallel.values)
        np.testing.assert_array_equal(serial.argmax, parallel.argmax)

    def test_offset_shifts_value(self, small_potential, fast_conj):
        y = [0.25, 0.75]
        base = conjugate(BrenierPotential(small_potential), y, fast_conj)
        shifted = conjugate(BrenierPotential(small_potential, offset=0.3), y, fast_conj)
        assert shifted.value == pytest.approx(base.value - 0.3, abs=1e-9)
