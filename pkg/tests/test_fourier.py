"""
测试三角基、Fourier 势的取值/梯度/范数与截断。
"""

import math

import numpy as np
import pytest

from otmap.core.errors import DomainError
from otmap.fourier.basis import FourierBasis, basis_eval
from otmap.fourier.potential import (
    FourierPotential,
    brenier_grad,
    h_norm,
    potential_eval,
    potential_grad,
    truncate_reference,
)
from otmap.gamma.space import DyadicScale, FrequencyIndex, admissible

SQRT2 = math.sqrt(2.0)


def _random_potential(smoothness, J, d, seed=0):
    phi = FourierPotential.zero(smoothness, J, d)
    coeffs = np.random.default_rng(seed).normal(size=len(phi)) / np.arange(1, len(phi) + 1)
    return phi.with_coeffs(coeffs)


def _naive_value(phi, x):
    return sum(w * basis_eval(l, x) for l, w in zip(phi.basis.freqs, phi.coeffs))


# ══════════════════════════════════════════════
# Basis
# ══════════════════════════════════════════════


class TestBasisEval:
    """ψ_l 单点取值测试。"""

    def test_empty_frequency_is_one(self):
        assert basis_eval(FrequencyIndex(()), [0.3, 0.7]) == 1.0

    def test_cosine_at_zero(self):
        assert basis_eval(FrequencyIndex.of({1: -1}), [0.0, 0.4]) == pytest.approx(SQRT2)

    def test_sine_at_quarter(self):
        assert basis_eval(FrequencyIndex.of({1: 1}), [0.25]) == pytest.approx(SQRT2)

    def test_product_over_axes(self):
        l = FrequencyIndex.of({1: -2, 3: 1})
        x = [0.1, 0.9, 0.3]
        expected = SQRT2 * math.cos(2 * math.pi * 2 * 0.1) * SQRT2 * math.sin(2 * math.pi * 0.3)
        assert basis_eval(l, x) == pytest.approx(expected, abs=1e-14)

    def test_axis_beyond_point(self):
        with pytest.raises(DomainError):
            basis_eval(FrequencyIndex.of({3: 1}), [0.1, 0.2])

    def test_design_matches_pointwise(self, mixed_linear, rng):
        basis = FourierBasis.truncated(mixed_linear, 12.0, max_axis=3)
        X = rng.random((7, 3))
        Psi = basis.design(X)
        for i in range(7):
            for j, l in enumerate(basis.freqs):
                assert Psi[i, j] == pytest.approx(basis_eval(l, X[i]), abs=1e-12)

    def test_truncated_basis_is_admissible(self, mixed_linear):
        basis = FourierBasis.truncated(mixed_linear, 12.0)
        assert len(basis) > 0
        assert all(admissible(mixed_linear, s, 12.0) for s in basis.scales)

    def test_duplicate_frequencies_rejected(self, mixed_linear):
        l = FrequencyIndex.of({1: 1})
        with pytest.raises(DomainError):
            FourierBasis(mixed_linear, [(l.scale(), l), (l.scale(), l)])


# ══════════════════════════════════════════════
# Values and gradients
# ══════════════════════════════════════════════


class TestPotentialEval:
    """φ(x) 取值测试。"""

    def test_zero_potential(self, mixed_linear):
        phi = FourierPotential.zero(mixed_linear, 9.0, 2)
        assert potential_eval(phi, [0.2, 0.8]) == 0.0

    def test_single_coefficient(self, mixed_linear):
        phi = FourierPotential.from_terms(mixed_linear, {FrequencyIndex.of({1: -1}): 2.0}, 2)
        assert potential_eval(phi, [0.0, 0.5]) == pytest.approx(2 * SQRT2)

    def test_matches_naive_summation(self, mixed_linear, rng):
        phi = _random_potential(mixed_linear, 12.0, 4)
        for x in rng.random((10, 4)):
            assert potential_eval(phi, x) == pytest.approx(_naive_value(phi, x), abs=1e-12)

    def test_coefficient_lookup(self, mixed_linear):
        l = FrequencyIndex.of({1: 1})
        phi = FourierPotential.from_terms(mixed_linear, {l: 0.7}, 1)
        assert phi.coefficient(l) == 0.7
        assert phi.coefficient(FrequencyIndex.of({1: 2})) == 0.0


class TestPotentialGrad:
    """∇φ 精确梯度测试。"""

    def test_zero_potential(self, mixed_linear):
        phi = FourierPotential.zero(mixed_linear, 9.0, 3)
        np.testing.assert_array_equal(potential_grad(phi, [0.1, 0.2, 0.3]), np.zeros(3))

    def test_sine_derivative_at_zero(self, mixed_linear):
        phi = FourierPotential.from_terms(mixed_linear, {FrequencyIndex.of({1: 1}): 1.0}, 3)
        g = potential_grad(phi, [0.0, 0.4, 0.6])
        np.testing.assert_allclose(g, [2 * math.pi * SQRT2, 0.0, 0.0], atol=1e-12)

    def test_finite_differences(self, mixed_linear, rng):
        phi = _random_potential(mixed_linear, 12.0, 4, seed=3)
        h = 1e-5
        for x in rng.random((5, 4)):
            g = potential_grad(phi, x)
            fd = np.array(
                [(potential_eval(phi, x + h * e) - potential_eval(phi, x - h * e)) / (2 * h) for e in np.eye(4)]
            )
            assert np.linalg.norm(g - fd) <= 1e-5 * max(np.linalg.norm(fd), 1.0)

    def test_batch_matches_single(self, mixed_linear, rng):
        phi = _random_potential(mixed_linear, 12.0, 3)
        X = rng.random((6, 3))
        values, grads = phi.value_and_grad(X)
        for i in range(6):
            assert values[i] == pytest.approx(phi.value(X[i]), abs=1e-13)
            np.testing.assert_allclose(grads[i], phi.grad(X[i]), atol=1e-13)


class TestBrenierGrad:
    """T(x) = x − ∇φ(x) 测试。"""

    def test_zero_potential_is_identity(self, mixed_linear):
        phi = FourierPotential.zero(mixed_linear, 9.0, 2)
        np.testing.assert_array_equal(brenier_grad(phi, [0.3, 0.6]), [0.3, 0.6])

    def test_origin_with_flat_potential(self, mixed_linear):
        # cosine terms have zero derivative at 0
        phi = FourierPotential.from_terms(mixed_linear, {FrequencyIndex.of({1: -1}): 0.5}, 2)
        np.testing.assert_allclose(brenier_grad(phi, [0.0, 0.0]), [0.0, 0.0], atol=1e-14)

    def test_composition(self, mixed_linear, rng):
        phi = _random_potential(mixed_linear, 12.0, 3, seed=5)
        x = rng.random(3)
        np.testing.assert_allclose(brenier_grad(phi, x), x - potential_grad(phi, x), atol=1e-15)
        np.testing.assert_allclose(phi.brenier_grads(x[None, :])[0], brenier_grad(phi, x), atol=1e-15)


# ══════════════════════════════════════════════
# Norms
# ══════════════════════════════════════════════


class TestHNorm:
    """H^γ / H^{γ+2} 范数测试。"""

    def test_zero(self, mixed_linear):
        assert h_norm(FourierPotential.zero(mixed_linear, 9.0, 2)) == 0.0

    def test_unit_coefficient_gamma(self, mixed_linear):
        phi = FourierPotential.from_terms(mixed_linear, {FrequencyIndex.of({1: 1}): 1.0}, 1)
        assert h_norm(phi, "gamma") == pytest.approx(2.0)

    def test_unit_coefficient_gamma_plus_2(self, mixed_linear):
        phi = FourierPotential.from_terms(mixed_linear, {FrequencyIndex.of({1: 1}): 1.0}, 1)
        assert h_norm(phi, "gamma_plus_2") == pytest.approx(8.0)

    def test_unknown_order(self, mixed_linear):
        phi = FourierPotential.from_terms(mixed_linear, {FrequencyIndex.of({1: 1}): 1.0}, 1)
        with pytest.raises(DomainError):
            h_norm(phi, "gamma_plus_1")

    def test_l2_norm_is_coefficient_norm(self, mixed_linear):
        phi = _random_potential(mixed_linear, 12.0, 3)
        assert phi.l2_norm() == pytest.approx(float(np.linalg.norm(phi.coeffs)))


# ══════════════════════════════════════════════
# Truncation
# ══════════════════════════════════════════════


class TestTruncateReference:
    """φ̄_J 截断测试。"""

    def test_budget_below_first_scale(self, mixed_linear):
        phi0 = _random_potential(mixed_linear, 12.0, 3)
        phi = truncate_reference(phi0, mixed_linear, 2.0)
        assert len(phi) == 0
        assert phi.value([0.1, 0.2, 0.3]) == 0.0

    def test_full_budget_keeps_everything(self, mixed_linear, rng):
        phi0 = _random_potential(mixed_linear, 12.0, 3)
        phi = truncate_reference(phi0, mixed_linear, 12.0)
        np.testing.assert_array_equal(phi.coeffs, phi0.coeffs)
        X = rng.random((4, 3))
        np.testing.assert_allclose(phi.values(X), phi0.values(X), atol=1e-15)

    def test_kept_mass_matches_filter(self, mixed_linear):
        phi0 = _random_potential(mixed_linear, 15.0, 3, seed=7)
        phi = truncate_reference(phi0, mixed_linear, 9.0)
        kept = sum(
            w**2 for s, w in zip(phi0.basis.scales, phi0.coeffs) if 3.0 * sum(a * v for a, v in s.entries) <= 9.0
        )
        assert float(np.sum(phi.coeffs**2)) == pytest.approx(kept, rel=1e-12)

    def test_closed_form_rule(self, mixed_linear):
        phi = truncate_reference(lambda s, l: 2.0 ** -s.total, mixed_linear, 9.0, ambient_dim=2)
        for s, w in zip(phi.basis.scales, phi.coeffs):
            assert w == 2.0 ** -s.total

    def test_rule_needs_dimension(self, mixed_linear):
        with pytest.raises(DomainError):
            truncate_reference(lambda s, l: 1.0, mixed_linear, 9.0)


class TestPotentialSerialization:
    """FourierPotential JSON 往返测试。"""

    def test_round_trip_is_exact(self, mixed_linear, rng):
        phi = _random_potential(mixed_linear, 12.0, 3)
        back = FourierPotential.from_dict(phi.to_dict())
        np.testing.assert_array_equal(back.coeffs, phi.coeffs)
        X = rng.random((5, 3))
        np.testing.assert_array_equal(back.values(X), phi.values(X))

    def test_inadmissible_scale_rejected(self, mixed_linear):
        data = FourierPotential.zero(mixed_linear, 9.0, 2).to_dict()
        data["entries"].append({"scale": [[1, 5]], "freq": [[1, 16]], "omega": 0.1})
        with pytest.raises(DomainError):
            FourierPotential.from_dict(data)

    def test_ambient_dimension_checked(self, mixed_linear):
        basis = FourierBasis.from_frequencies(mixed_linear, [FrequencyIndex.of({3: 1})])
        with pytest.raises(DomainError):
            FourierPotential(basis, np.ones(1), 2)

    def test_scale_of_frequency_block(self):
        assert FrequencyIndex.of({1: 16}).scale() == DyadicScale.of({1: 5})
