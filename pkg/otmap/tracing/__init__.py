"""
Tracing — 结构化计时框架。

基于 Span 的层级追踪，记录一次运行的链路：
run_span → fit_span → conjugate_span / evaluate_span

Quick Start::

    from otmap.tracing import Tracer, ConsoleExporter

    tracer = Tracer(exporter=ConsoleExporter())

    with tracer.run_span("study"):
        with tracer.fit_span("fourier", n=200):
            pass
"""

from otmap.tracing.engine import (
    Tracer,
    Span,
    SpanKind,
    SpanExporter,
    ConsoleExporter,
    CallbackExporter,
    NullExporter,
)

__all__ = [
    "Tracer",
    "Span",
    "SpanKind",
    "SpanExporter",
    "ConsoleExporter",
    "CallbackExporter",
    "NullExporter",
]
