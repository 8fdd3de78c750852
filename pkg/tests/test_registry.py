"""
测试 @estimator 装饰器、EstimatorRegistry 注册表与 TransportEstimate 包装。
"""

import numpy as np
import pytest

from otmap.core.errors import UsageError
from otmap.estimators.base import FitContext, TransportEstimate
from otmap.estimators.linear import LinearMap
from otmap.estimators.registry import EstimatorDef, EstimatorRegistry, default_registry, estimator


@estimator(model_type=LinearMap, needs_smoothness=False)
def shift(X, Y, smoothness, ctx):
    """Translate by the difference of means.

    Second paragraph is not part of the description.
    """
    d = X.shape[1]
    return TransportEstimate("shift", LinearMap(X.mean(axis=0), Y.mean(axis=0), np.eye(d)))


# ══════════════════════════════════════════════
# @estimator decorator
# ══════════════════════════════════════════════


class TestEstimatorDecorator:
    """@estimator 装饰器测试。"""

    def test_bare_decorator(self):
        @estimator
        def plain(X, Y, smoothness, ctx):
            """One line."""

        assert isinstance(plain, EstimatorDef)
        assert plain.name == "plain"
        assert plain.description == "One line."
        assert plain.needs_smoothness

    def test_with_arguments(self):
        assert shift.name == "shift"
        assert shift.description == "Translate by the difference of means."
        assert not shift.needs_smoothness
        assert shift.model_type is LinearMap

    def test_custom_name(self):
        @estimator(name="renamed")
        def whatever(X, Y, smoothness, ctx):
            pass

        assert whatever.name == "renamed"
        assert whatever.description == ""


# ══════════════════════════════════════════════
# EstimatorRegistry
# ══════════════════════════════════════════════


class TestEstimatorRegistry:
    """EstimatorRegistry 注册表测试。"""

    @pytest.fixture
    def registry(self):
        reg = EstimatorRegistry()
        reg.register(shift)
        return reg

    def test_register_and_contains(self, registry):
        assert "shift" in registry
        assert len(registry) == 1
        assert registry.names() == ["shift"]

    def test_register_plain_function(self, registry):
        def other(X, Y, smoothness, ctx):
            """Other."""

        registry.register(other)
        assert "other" in registry

    def test_unknown_name(self, registry):
        with pytest.raises(UsageError) as exc:
            registry.get("kernel")
        assert "shift" in str(exc.value)

    def test_fit_dispatch(self, registry, rng):
        X = rng.random((20, 2))
        est = registry.fit("shift", X, X + 0.1, None)
        np.testing.assert_allclose(est.transport([0.2, 0.3]), [0.3, 0.4])

    def test_smoothness_required(self, registry, rng):
        @estimator
        def smooth(X, Y, smoothness, ctx):
            """Needs a map."""

        registry.register(smooth)
        with pytest.raises(UsageError):
            registry.fit("smooth", rng.random((3, 2)), rng.random((3, 2)), None)

    def test_load_round_trip(self, registry, rng):
        X = rng.random((10, 3))
        est = registry.fit("shift", X, X + 0.2, None, FitContext())
        back = registry.load(est.to_dict())
        np.testing.assert_array_equal(back.transport_batch(X), est.transport_batch(X))

    def test_builtins(self):
        assert default_registry.names() == ["fourier", "nn", "nnplan", "linear"]
        assert not default_registry.get("nnplan").needs_smoothness
        assert default_registry.get("fourier").needs_smoothness
