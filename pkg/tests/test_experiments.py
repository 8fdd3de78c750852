"""
测试 hockey-stick 任务、误差度量、线性基线、下界构造与模拟研究。
"""

import math

import numpy as np
import pytest

from otmap.core.config import RunConfig
from otmap.core.errors import CodeGenerationError, DomainError, UsageError
from otmap.estimators.base import TransportEstimate
from otmap.estimators.linear import LinearMap, linear_ot_baseline, sym_sqrt
from otmap.estimators.registry import EstimatorRegistry, estimator
from otmap.experiments.hockey import (
    HockeyStickMap,
    gen_pushforward_data,
    hockey_eval,
    hockey_smoothness,
    kappa,
)
from otmap.experiments.lower_bound import (
    generate_codes,
    hamming_matrix,
    lower_bound_fixture,
    packing_frequencies,
)
from otmap.experiments.metrics import (
    fit_loglog,
    group_mean,
    l2_error,
    rate_exponent,
    theoretical_rates,
)
from otmap.experiments.study import (
    ErrorRecord,
    ExperimentReport,
    convergence_study,
    dimension_study,
    make_task,
)


@pytest.fixture
def tiny_cfg():
    cfg = RunConfig()
    cfg.study.eval_m = 200
    return cfg


def _records(ns, errors, estimator="linear"):
    return [
        ErrorRecord(estimator=estimator, q=1.0, d=2, n=n, seed=0, error=e, se=0.0) for n, e in zip(ns, errors)
    ]


# ══════════════════════════════════════════════
# Hockey-stick task
# ══════════════════════════════════════════════


class TestHockeyStick:
    """Hockey-stick 真实映射测试。"""

    def test_center_is_fixed(self):
        T0 = HockeyStickMap(3, 1.0)
        np.testing.assert_allclose(hockey_eval(T0, [0.5, 0.5, 0.5]), [0.5, 0.5, 0.5])

    def test_right_end(self):
        T0 = HockeyStickMap(1, 1.0)
        assert hockey_eval(T0, [1.0])[0] == pytest.approx(1.0 - 0.5**2.6 / 2.6)

    def test_kappa_grows_with_axis(self):
        k = kappa(np.arange(1, 6), 2.0)
        assert k[0] == pytest.approx(3.6)
        assert np.all(np.diff(k) > 0)

    def test_clipped_at_zero(self):
        T0 = HockeyStickMap(1, 1.0)
        assert T0.raw(np.array([[0.0]]))[0, 0] < 0.0
        assert T0(np.array([[0.0]]))[0, 0] == 0.0

    def test_monotone_per_axis(self):
        T0 = HockeyStickMap(2, 1.3)
        t = np.linspace(0.0, 1.0, 101)
        out = T0(np.stack([t, t], axis=1))
        assert np.all(np.diff(out, axis=0) >= 0.0)

    def test_smoothness_weights(self):
        smoothness = hockey_smoothness(1.0)
        assert smoothness.weight(1) == pytest.approx(1.0 + 1.0 + 1.1)
        assert smoothness.weight(4) == pytest.approx(4**0.1 + 2.1)

    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            HockeyStickMap(0, 1.0)
        with pytest.raises(DomainError):
            HockeyStickMap(2, 0.0)

    def test_data_is_deterministic(self):
        T0 = HockeyStickMap(4, 1.0)
        X1, Y1 = gen_pushforward_data(T0, 30, 4, 9, 1)
        X2, Y2 = gen_pushforward_data(T0, 30, 4, 9, 1)
        np.testing.assert_array_equal(X1, X2)
        np.testing.assert_array_equal(Y1, Y2)
        X3, _ = gen_pushforward_data(T0, 30, 4, 9, 2)
        assert not np.array_equal(X1, X3)

    def test_target_is_not_the_source_image(self):
        T0 = HockeyStickMap(2, 1.0)
        X, Y = gen_pushforward_data(T0, 20, 2, 0)
        assert not np.allclose(Y, T0(X))
        assert np.all((Y >= 0.0) & (Y <= 1.0))


# ══════════════════════════════════════════════
# Metrics
# ══════════════════════════════════════════════


class TestMetrics:
    """L² 误差与对数回归测试。"""

    def test_l2_error_matches_integral(self):
        est = l2_error(lambda U: U, lambda U: 0.5 * U, 2, m=4000, seed=1)
        assert abs(est.value - 1.0 / 6.0) <= 3 * est.se
        assert est.m == 4000

    def test_l2_error_zero_for_identical_maps(self):
        est = l2_error(lambda U: U, lambda U: U, 3, m=100)
        assert est.value == 0.0 and est.se == 0.0

    def test_l2_error_needs_two_draws(self):
        with pytest.raises(DomainError):
            l2_error(lambda U: U, lambda U: U, 2, m=1)

    def test_loglog_recovers_slope(self):
        ns = [50, 100, 200, 500, 1000]
        slope, intercept = fit_loglog(ns, [2.0 * n**-0.8 for n in ns])
        assert slope == pytest.approx(-0.8)
        assert intercept == pytest.approx(math.log(2.0))

    def test_loglog_rejects_non_positive(self):
        with pytest.raises(DomainError):
            fit_loglog([10, 20], [0.1, 0.0])

    def test_rate_exponent(self):
        assert rate_exponent(0.6) == pytest.approx(-1.2 / 2.2)

    def test_theoretical_rates_carry_both_readings(self):
        rates = theoretical_rates(1.0)
        assert rates["a1_stated"] == pytest.approx(0.6)
        assert rates["a1_from_kappa"] == pytest.approx(3.1)
        assert rates["reported_bounds_derived"] == [-0.76, -0.79, -0.84]
        assert rates["reported_bounds_listed"] == [-0.81, -0.86, -0.91]

    def test_group_mean(self):
        keys, means = group_mean([2, 1, 2], [1.0, 5.0, 3.0])
        assert keys == [1, 2]
        assert means == [5.0, 2.0]


# ══════════════════════════════════════════════
# Linear baseline
# ══════════════════════════════════════════════


class TestLinearBaseline:
    """Gaussian 仿射基线测试。"""

    def test_identical_samples_give_identity(self, rng):
        X = rng.random((200, 3))
        fitted = linear_ot_baseline(X, X)
        np.testing.assert_allclose(fitted.A, np.eye(3), atol=1e-8)
        np.testing.assert_allclose(fitted.transport_batch(X), X, atol=1e-8)

    def test_one_dimensional_formula(self, rng):
        X = rng.random((500, 1))
        Y = 0.3 + 0.5 * rng.random((500, 1))
        fitted = linear_ot_baseline(X, Y, ridge=0.0)
        assert fitted.A[0, 0] == pytest.approx(math.sqrt(np.var(Y) / np.var(X)))

    def test_slope_pushes_covariance(self, rng):
        X = rng.random((400, 3))
        Y = rng.random((400, 3)) @ np.array([[1.0, 0.3, 0.0], [0.0, 0.5, 0.2], [0.0, 0.0, 0.8]])
        fitted = linear_ot_baseline(X, Y, ridge=0.0)
        Sx = np.cov(X, rowvar=False, bias=True)
        Sy = np.cov(Y, rowvar=False, bias=True)
        np.testing.assert_allclose(fitted.A @ Sx @ fitted.A, Sy, atol=1e-10)
        np.testing.assert_allclose(fitted.A, fitted.A.T, atol=1e-12)
        assert np.all(np.linalg.eigvalsh(fitted.A) > 0)

    def test_sym_sqrt(self):
        S = np.array([[4.0, 1.0], [1.0, 3.0]])
        R = sym_sqrt(S)
        np.testing.assert_allclose(R @ R, S, atol=1e-12)
        np.testing.assert_allclose(sym_sqrt(S, inverse=True) @ R, np.eye(2), atol=1e-12)

    def test_round_trip(self, rng):
        fitted = linear_ot_baseline(rng.random((50, 2)), rng.random((50, 2)))
        back = LinearMap.from_dict(fitted.to_dict())
        X = rng.random((5, 2))
        np.testing.assert_array_equal(back.transport_batch(X), fitted.transport_batch(X))

    def test_empty_sample(self):
        with pytest.raises(DomainError):
            linear_ot_baseline(np.zeros((0, 2)), np.zeros((0, 2)))


# ══════════════════════════════════════════════
# Lower-bound fixture
# ══════════════════════════════════════════════


class TestLowerBoundFixture:
    """下界码族构造测试。"""

    def test_packing_frequencies(self):
        freqs = packing_frequencies(2, 1)
        assert len(freqs) == 3
        assert all(all(v < 0 for _, v in l.entries) for l in freqs)

    def test_codes_respect_distance(self):
        codes = generate_codes(6, 31, 4, seed=2)
        H = hamming_matrix(codes)
        iu = np.triu_indices(6, k=1)
        assert np.all(H[iu] >= 4)

    def test_impossible_codes(self):
        with pytest.raises(CodeGenerationError):
            generate_codes(3, 1, 1)

    @pytest.mark.parametrize("S", [1, 2])
    def test_separation_scales_with_gamma(self, S):
        report = lower_bound_fixture(2, S, K=8, seed=0, m=20_000)
        target = 2.0 ** (-2.0 * report.gamma) / (16.0 * math.pi**2)
        assert report.M == 4**S
        assert report.coefficient_sum <= 1.0 + 1e-9
        assert report.min_hamming >= report.M / 8
        iu = np.triu_indices(8, k=1)
        H = hamming_matrix(report.codes)
        np.testing.assert_allclose(report.separation_exact[iu] * report.M / H[iu], target, rtol=1e-12)
        assert 0.5 * target <= report.normalized_separation <= 2.0 * target

    def test_report_serializes(self):
        data = lower_bound_fixture(2, 1, K=4, m=2000).to_dict()
        assert data["hamming_target"] == 0.5
        assert len(data["codes"]) == 4


# ══════════════════════════════════════════════
# Studies
# ══════════════════════════════════════════════


class TestExperimentReport:
    """报告聚合与输出测试。"""

    def test_slope_from_three_sizes(self):
        ns = [100, 200, 400]
        report = ExperimentReport.build("linear", "hockey", {}, _records(ns, [n**-0.8 for n in ns]))
        assert report.slope == pytest.approx(-0.8)
        assert "slope" in report.to_dict()

    def test_no_slope_for_one_size(self):
        report = ExperimentReport.build("linear", "hockey", {}, _records([100], [0.01]))
        assert report.slope is None
        assert "slope" not in report.to_dict()

    def test_negative_error_rejected(self):
        with pytest.raises(DomainError):
            ExperimentReport.build("linear", "hockey", {}, _records([10], [-1.0]))

    def test_records_sorted(self):
        report = ExperimentReport.build("linear", "hockey", {}, _records([400, 100, 200], [0.1, 0.3, 0.2]))
        assert [r.n for r in report.records] == [100, 200, 400]

    def test_csv_outputs(self, tmp_path):
        ns = [100, 200, 400]
        report = ExperimentReport.build("linear", "hockey", {}, _records(ns, [0.3, 0.2, 0.1]))
        errors = report.write_errors_csv(tmp_path / "errors.csv").read_text().splitlines()
        assert errors[0] == "estimator,q,d,n,seed,error,se"
        assert len(errors) == 4
        curve = report.curve_frame()
        assert list(curve["n"]) == ns
        assert curve["fitted"].notna().all()


class TestStudies:
    """convergence_study / dimension_study 测试。"""

    def test_unknown_task(self):
        with pytest.raises(UsageError):
            make_task("swiss-roll", 2)

    def test_convergence_smoke(self, tiny_cfg):
        report = convergence_study("linear", 1.0, 2, [40, 20, 80], 2, tiny_cfg)
        assert len(report.records) == 6
        assert [r.n for r in report.records] == [20, 20, 40, 40, 80, 80]
        assert report.slope is not None
        assert len(report.runtime) == 6
        assert report.config["study"]["ns"] == [20, 40, 80]

    def test_thread_count_does_not_change_errors(self, tiny_cfg):
        serial = convergence_study("nnplan", 1.0, 2, [20, 30], 2, tiny_cfg)
        tiny_cfg.study.threads = 3
        parallel = convergence_study("nnplan", 1.0, 2, [20, 30], 2, tiny_cfg)
        assert [r.error for r in serial.records] == [r.error for r in parallel.records]

    def test_ellipsoid_task(self, tiny_cfg):
        tiny_cfg.study.task = "ellipsoid"
        report = convergence_study("nnplan", 1.0, 3, [20], 1, tiny_cfg)
        assert report.task == "ellipsoid"
        assert report.records[0].error >= 0.0

    def test_dimension_smoke(self, tiny_cfg):
        report = dimension_study("linear", 1.0, [4, 2], 30, 1, tiny_cfg)
        assert sorted(report.by_dimension) == [2, 4]
        assert report.ratio >= 1.0

    def test_large_dimension_needs_flag(self, tiny_cfg):
        with pytest.raises(UsageError):
            dimension_study("linear", 1.0, [1000], 10, 1, tiny_cfg)

    def test_unknown_estimator(self, tiny_cfg):
        with pytest.raises(UsageError):
            convergence_study("kernel", 1.0, 2, [10], 1, tiny_cfg)

    def test_zero_seeds(self, tiny_cfg):
        with pytest.raises(UsageError):
            convergence_study("linear", 1.0, 2, [10], 0, tiny_cfg)

    def test_replicates_get_distinct_streams(self, tiny_cfg):
        seen = []

        @estimator(needs_smoothness=False)
        def recorder(X, Y, smoothness, ctx):
            """Linear fit that records the seeds it was handed."""
            seen.append((X.shape[0], ctx.neural.seed, ctx.conjugate.seed))
            return TransportEstimate("linear", linear_ot_baseline(X, Y))

        registry = EstimatorRegistry()
        registry.register(recorder)
        convergence_study("recorder", 1.0, 2, [20, 30], 3, tiny_cfg, registry=registry)
        first = list(seen)
        assert len(first) == 6
        assert len({s[1] for s in first}) == 6
        assert len({s[2] for s in first}) == 6
        seen.clear()
        convergence_study("recorder", 1.0, 2, [20, 30], 3, tiny_cfg, registry=registry)
        assert sorted(seen) == sorted(first)

    def test_trace_logs_cells(self, tiny_cfg, caplog):
        tiny_cfg.trace = True
        with caplog.at_level("INFO", logger="otmap.tracing"):
            report = convergence_study("linear", 1.0, 2, [20], 2, tiny_cfg)
        assert caplog.text.count("RUN cell") == 2
        assert len(report.runtime) == 2
