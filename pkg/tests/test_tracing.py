"""
测试 Span 计时树与导出器。
"""

import pytest

from otmap.conjugate.solver import BrenierPotential, solve_batch
from otmap.estimators.semidual import fit_fourier
from otmap.fourier.potential import FourierPotential
from otmap.tracing import CallbackExporter, ConsoleExporter, Span, SpanKind, Tracer


@pytest.fixture
def exported():
    return []


@pytest.fixture
def tracer(exported):
    return Tracer(exporter=CallbackExporter(exported.append))


class TestSpan:
    """Span 数据结构测试。"""

    def test_defaults(self):
        s = Span(name="x")
        assert s.span_id
        assert s.status == "running"
        assert s.duration_ms >= 0.0

    def test_end(self):
        s = Span(name="x")
        s.end(status="error", error="boom")
        assert s.status == "error"
        assert s.to_dict()["error"] == "boom"

    def test_find(self):
        root = Span(name="root", kind=SpanKind.RUN)
        fit = Span(name="fit:nn", kind=SpanKind.FIT)
        root.children.append(fit)
        assert root.find(SpanKind.FIT) is fit
        assert root.find(SpanKind.EVALUATE) is None


class TestTracer:
    """Tracer 嵌套与导出测试。"""

    def test_only_root_exported(self, tracer, exported):
        with tracer.run_span("cell", n=10):
            with tracer.fit_span("nnplan", n=10):
                pass
            with tracer.evaluate_span("l2", m=100):
                pass
        assert len(exported) == 1
        root = exported[0]
        assert [c.name for c in root.children] == ["fit:nnplan", "evaluate:l2"]
        assert root.attributes == {"n": 10}
        assert root.children[0].parent_id == root.span_id
        assert root.children[0].trace_id == root.trace_id

    def test_error_status(self, tracer, exported):
        with pytest.raises(ValueError):
            with tracer.run_span("cell"):
                raise ValueError("bad")
        assert exported[0].status == "error"
        assert exported[0].error == "bad"

    def test_disabled(self, exported):
        tracer = Tracer(exporter=CallbackExporter(exported.append), enabled=False)
        with tracer.run_span("cell") as s:
            s.set_attribute("k", 1)
        assert exported == []

    def test_to_dict_nests(self, tracer, exported):
        with tracer.run_span("cell"):
            with tracer.conjugate_span(points=5):
                pass
        data = exported[0].to_dict()
        assert data["kind"] == "run"
        assert data["children"][0]["kind"] == "conjugate"

    def test_console_exporter_logs(self, caplog):
        tracer = Tracer(exporter=ConsoleExporter())
        with caplog.at_level("INFO", logger="otmap.tracing"):
            with tracer.run_span("study"):
                pass
        assert "RUN study" in caplog.text

    def test_fit_records_span(self, tracer, exported, mixed_linear, rng, fast_conj):
        X = rng.random((20, 2))
        fit_fourier(X, X, mixed_linear, J=6.0, conj=fast_conj, tracer=tracer)
        assert exported[0].kind == SpanKind.FIT
        assert exported[0].name == "fit:fourier"

    def test_fit_nests_conjugate_spans(self, tracer, exported, mixed_linear, rng, fast_conj):
        X = rng.random((20, 2))
        fit_fourier(X, X, mixed_linear, J=6.0, conj=fast_conj, tracer=tracer)
        fit = exported[0]
        conj = fit.find(SpanKind.CONJUGATE)
        assert conj is not None
        assert conj.parent_id == fit.span_id
        assert conj.attributes["points"] == 20

    def test_solve_batch_span(self, tracer, exported, mixed_linear, rng, fast_conj):
        phi = FourierPotential.zero(mixed_linear, 6.0, 2)
        batch = solve_batch(BrenierPotential(phi), rng.random((7, 2)), fast_conj, tracer=tracer)
        assert len(batch) == 7
        assert exported[0].kind == SpanKind.CONJUGATE
        assert exported[0].attributes["points"] == 7
        assert "unconverged" in exported[0].attributes
