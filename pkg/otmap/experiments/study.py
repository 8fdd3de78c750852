"""
模拟研究 — 样本量扫描 (convergence_study) 与维度扫描 (dimension_study)。

每个 (n, seed) 单元相互独立：生成数据 → 按名称拟合估计器 → Monte Carlo L² 误差。
单元可并行执行，结果按 (d, n, seed) 排序后聚合，与线程数无关。
"""

from __future__ import annotations

import json
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from otmap.core.config import RunConfig, TASK_NAMES
from otmap.core.errors import DomainError, UsageError
from otmap.discrete.ellipsoid import EllipsoidTaskMap, draw_sobolev_ellipsoid
from otmap.estimators.base import FitContext
from otmap.estimators.registry import EstimatorRegistry, default_registry
from otmap.experiments.hockey import (
    HockeyStickMap,
    ellipsoid_smoothness,
    gen_ellipsoid_data,
    gen_pushforward_data,
    hockey_smoothness,
)
from otmap.experiments.metrics import (
    Sampler,
    fit_loglog,
    group_mean,
    l2_error,
    theoretical_rates,
)
from otmap.gamma.space import SmoothnessMap
from otmap.tracing import CallbackExporter, ConsoleExporter, Span, SpanKind, Tracer
from otmap.utils.rng import STREAM_REPLICATE, derive_seed

logger = logging.getLogger("otmap.experiments")

# Sweeps at or above this dimension need StudyConfig.large.
LARGE_DIMENSION = 1000
MIN_SLOPE_POINTS = 3


# ──────────────────────────────────────────────
# Records
# ──────────────────────────────────────────────


@dataclass(frozen=True)
class ErrorRecord:
    """One experiment cell: the Monte Carlo error of one fitted map."""

    estimator: str
    q: float
    d: int
    n: int
    seed: int
    error: float
    se: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


ERROR_COLUMNS = ["estimator", "q", "d", "n", "seed", "error", "se"]
CURVE_COLUMNS = ["n", "mean_error", "log_n", "log_error", "fitted"]


@dataclass
class ExperimentReport:
    """Aggregated output of a study.

    Attributes:
        estimator: Estimator name.
        task: ``"hockey"`` or ``"ellipsoid"``.
        config: Full resolved run config, enough to replay the study.
        records: One :class:`ErrorRecord` per cell, sorted by (d, n, seed).
        slope: Least-squares slope of log mean error on log n (``None``
            below three distinct sample sizes).
        intercept: Matching intercept.
        theory: Theoretical exponents and the quoted bound lists.
        runtime: Per-cell wall times in milliseconds.
        by_dimension: Mean error per dimension (dimension sweeps only).
        ratio: max/min of ``by_dimension``.
    """

    estimator: str
    task: str
    config: Dict[str, Any]
    records: List[ErrorRecord] = field(default_factory=list)
    slope: Optional[float] = None
    intercept: Optional[float] = None
    theory: Dict[str, Any] = field(default_factory=dict)
    runtime: List[Dict[str, Any]] = field(default_factory=list)
    by_dimension: Dict[int, float] = field(default_factory=dict)
    ratio: Optional[float] = None

    @classmethod
    def build(
        cls,
        estimator: str,
        task: str,
        config: Dict[str, Any],
        records: Sequence[ErrorRecord],
        theory: Optional[Dict[str, Any]] = None,
        runtime: Optional[List[Dict[str, Any]]] = None,
    ) -> "ExperimentReport":
        """Sort *records* and fit the log-log line when enough sizes are present."""
        ordered = sorted(records, key=lambda r: (r.d, r.n, r.seed))
        for r in ordered:
            if not r.error >= 0.0:
                raise DomainError(f"negative or undefined error in cell n={r.n} seed={r.seed}")
        report = cls(
            estimator=estimator,
            task=task,
            config=config,
            records=list(ordered),
            theory=dict(theory or {}),
            runtime=list(runtime or []),
        )
        ns, means = report.mean_errors()
        if len(ns) >= MIN_SLOPE_POINTS and all(v > 0 for v in means):
            report.slope, report.intercept = fit_loglog(ns, means)
        elif len(ns) >= MIN_SLOPE_POINTS:
            logger.warning("study: zero mean error, slope omitted")
        return report

    def mean_errors(self, by: str = "n") -> Tuple[List[float], List[float]]:
        """Seed-averaged errors grouped by ``"n"`` or ``"d"``."""
        if by not in ("n", "d"):
            raise DomainError(f"cannot group by {by!r}")
        return group_mean([getattr(r, by) for r in self.records], [r.error for r in self.records])

    # ── 输出 ──

    def errors_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.to_dict() for r in self.records], columns=ERROR_COLUMNS)

    def curve_frame(self) -> pd.DataFrame:
        ns, means = self.mean_errors()
        rows = []
        for n, err in zip(ns, means):
            log_n = math.log(n)
            log_err = math.log(err) if err > 0 else float("nan")
            fitted = (
                math.exp(self.intercept + self.slope * log_n) if self.slope is not None else float("nan")
            )
            rows.append({"n": n, "mean_error": err, "log_n": log_n, "log_error": log_err, "fitted": fitted})
        return pd.DataFrame(rows, columns=CURVE_COLUMNS)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "estimator": self.estimator,
            "task": self.task,
            "config": self.config,
            "records": [r.to_dict() for r in self.records],
            "theory": self.theory,
            "runtime": self.runtime,
        }
        if self.slope is not None:
            data["slope"] = self.slope
            data["intercept"] = self.intercept
        if self.by_dimension:
            data["by_dimension"] = {str(k): v for k, v in self.by_dimension.items()}
            data["ratio"] = self.ratio
        return data

    def write_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        return path

    def write_errors_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.errors_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    def write_curve_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.curve_frame().to_csv(path, index=False, float_format="%.17g")
        return path


# ──────────────────────────────────────────────
# Tasks
# ──────────────────────────────────────────────


@dataclass
class StudyTask:
    """Ground truth, sampler and smoothness map of one synthetic task."""

    name: str
    d: int
    truth: Callable[[np.ndarray], np.ndarray]
    smoothness: SmoothnessMap
    sample: Callable[..., Tuple[np.ndarray, np.ndarray]]
    eval_sampler: Optional[Sampler] = None
    theory: Dict[str, Any] = field(default_factory=dict)


def make_task(name: str, d: int, q: float = 1.0, b: float = 2.0) -> StudyTask:
    """Build the hockey-stick or Sobolev-ellipsoid task in dimension *d*."""
    if name == "hockey":
        T0 = HockeyStickMap(d, q)
        return StudyTask(
            name=name,
            d=d,
            truth=T0,
            smoothness=hockey_smoothness(q),
            sample=lambda n, seed, *keys: gen_pushforward_data(T0, n, d, seed, *keys),
            theory=theoretical_rates(q),
        )
    if name == "ellipsoid":
        task = EllipsoidTaskMap(b, d)
        return StudyTask(
            name=name,
            d=d,
            truth=task,
            smoothness=ellipsoid_smoothness(b),
            sample=lambda n, seed, *keys: gen_ellipsoid_data(task, n, seed, *keys),
            eval_sampler=lambda rng, m: draw_sobolev_ellipsoid(rng, b, d, m),
            theory={"b": b},
        )
    raise UsageError(f"unknown task {name!r}; choose from {', '.join(TASK_NAMES)}")


# ──────────────────────────────────────────────
# Cells
# ──────────────────────────────────────────────


class _RuntimeCollector:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.entries: List[Dict[str, Any]] = []

    def __call__(self, span: Span) -> None:
        fit = span.find(SpanKind.FIT)
        ev = span.find(SpanKind.EVALUATE)
        entry = {
            "d": span.attributes.get("d"),
            "n": span.attributes.get("n"),
            "seed": span.attributes.get("seed"),
            "status": span.status,
            "fit_ms": fit.duration_ms if fit else None,
            "eval_ms": ev.duration_ms if ev else None,
            "total_ms": span.duration_ms,
        }
        with self._lock:
            self.entries.append(entry)

    def sorted(self) -> List[Dict[str, Any]]:
        return sorted(self.entries, key=lambda e: (e["d"], e["n"], e["seed"]))


def _cell_exporter(collector: _RuntimeCollector, console: bool) -> CallbackExporter:
    if not console:
        return CallbackExporter(collector)
    echo = ConsoleExporter()

    def both(span: Span) -> None:
        collector(span)
        echo.export(span)

    return CallbackExporter(both)


def _run_cell(
    registry: EstimatorRegistry,
    estimator: str,
    task: StudyTask,
    q: float,
    n: int,
    seed_index: int,
    cfg: RunConfig,
    collector: _RuntimeCollector,
) -> ErrorRecord:
    tracer = Tracer(exporter=_cell_exporter(collector, cfg.trace))
    # Each replicate gets its own initialisation and solver streams.
    keys = (STREAM_REPLICATE, task.d, n, seed_index)
    ctx = FitContext(
        semidual=cfg.semidual,
        neural=replace(cfg.neural, seed=derive_seed(cfg.neural.seed, *keys)),
        conjugate=replace(cfg.conjugate, seed=derive_seed(cfg.conjugate.seed, *keys)),
        q=q,
        tracer=tracer,
    )
    spec = registry.get(estimator)
    with tracer.run_span("cell", estimator=estimator, d=task.d, n=n, seed=seed_index):
        X, Y = task.sample(n, cfg.seed, task.d, n, seed_index)
        est = registry.fit(estimator, X, Y, task.smoothness if spec.needs_smoothness else None, ctx)
        with tracer.evaluate_span("l2", m=cfg.study.eval_m):
            err = l2_error(
                est.transport_batch,
                task.truth,
                task.d,
                cfg.study.eval_m,
                cfg.seed,
                task.d,
                n,
                seed_index,
                sampler=task.eval_sampler,
            )
    logger.info(
        "study: %s d=%d n=%d seed=%d error=%.6g (se %.2g)", estimator, task.d, n, seed_index, err.value, err.se
    )
    return ErrorRecord(estimator=estimator, q=q, d=task.d, n=n, seed=seed_index, error=err.value, se=err.se)


def _run_cells(
    registry: EstimatorRegistry,
    estimator: str,
    tasks: Dict[int, StudyTask],
    q: float,
    cells: List[Tuple[int, int, int]],
    cfg: RunConfig,
) -> Tuple[List[ErrorRecord], List[Dict[str, Any]]]:
    collector = _RuntimeCollector()

    def work(cell: Tuple[int, int, int]) -> ErrorRecord:
        d, n, s = cell
        return _run_cell(registry, estimator, tasks[d], q, n, s, cfg, collector)

    threads = max(1, cfg.study.threads)
    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(work, cells))
    else:
        records = [work(c) for c in cells]
    return records, collector.sorted()


def _check_request(
    estimator: str,
    ds: Sequence[int],
    ns: Sequence[int],
    seeds: int,
    cfg: RunConfig,
    registry: EstimatorRegistry,
) -> None:
    registry.get(estimator)
    if seeds < 1:
        raise UsageError(f"need at least one seed, got {seeds}")
    if not ns or any(n < 1 for n in ns):
        raise UsageError("sample sizes must be positive")
    if not ds or any(d < 1 for d in ds):
        raise UsageError("dimensions must be positive")
    big = [d for d in ds if d >= LARGE_DIMENSION]
    if big and not cfg.study.large:
        raise UsageError(f"d={big[0]} needs the large-scale flag (--large)")


# ──────────────────────────────────────────────
# Public API
# ──────────────────────────────────────────────


def convergence_study(
    estimator: str,
    q: float,
    d: int,
    ns: Sequence[int],
    seeds: int,
    cfg: Optional[RunConfig] = None,
    registry: Optional[EstimatorRegistry] = None,
) -> ExperimentReport:
    """Error against sample size for one estimator.

    Runs every (n, seed) cell, averages over seeds, and fits a line to
    (log n, log mean error) when at least three sizes are given.

    Parameters:
        estimator: Registered estimator name.
        q: Hockey-stick parameter (also selects the embedded-preset learning rate).
        d: Dimension.
        ns: Sample sizes.
        seeds: Seeds per sample size; seed indices are 0..seeds-1.
        cfg: Run config; ``cfg.study`` supplies task, b, eval_m, threads and
            the large-scale flag.
        registry: Estimator registry (default: built-ins).

    Raises:
        UsageError: Unknown estimator or task, empty sweep, or a large d
            without ``cfg.study.large``.
    """
    cfg = cfg or RunConfig()
    registry = registry or default_registry
    ns = sorted(int(n) for n in ns)
    _check_request(estimator, [d], ns, seeds, cfg, registry)

    study = replace(cfg.study, estimator=estimator, q=float(q), d=int(d), ns=tuple(ns), seeds=int(seeds))
    cfg = replace(cfg, study=study)
    task = make_task(study.task, d, q=q, b=study.b)
    cells = [(d, n, s) for n in ns for s in range(seeds)]
    logger.info("convergence study: %s on %s, d=%d, ns=%s, seeds=%d", estimator, task.name, d, ns, seeds)

    records, runtime = _run_cells(registry, estimator, {d: task}, q, cells, cfg)
    report = ExperimentReport.build(estimator, task.name, cfg.to_dict(), records, task.theory, runtime)
    if report.slope is not None:
        logger.info("convergence study: slope %.4f", report.slope)
    return report


def dimension_study(
    estimator: str,
    q: float,
    ds: Sequence[int],
    n: int,
    seeds: int,
    cfg: Optional[RunConfig] = None,
    registry: Optional[EstimatorRegistry] = None,
) -> ExperimentReport:
    """Error against dimension at a fixed sample size.

    The report carries the seed-averaged error per d and the max/min ratio.
    """
    cfg = cfg or RunConfig()
    registry = registry or default_registry
    ds = sorted(int(d) for d in ds)
    _check_request(estimator, ds, [n], seeds, cfg, registry)

    study = replace(cfg.study, estimator=estimator, q=float(q), d=ds[-1], ns=(int(n),), seeds=int(seeds))
    cfg = replace(cfg, study=study)
    tasks = {d: make_task(study.task, d, q=q, b=study.b) for d in ds}
    cells = [(d, n, s) for d in ds for s in range(seeds)]
    logger.info("dimension study: %s, ds=%s, n=%d, seeds=%d", estimator, ds, n, seeds)

    records, runtime = _run_cells(registry, estimator, tasks, q, cells, cfg)
    report = ExperimentReport.build(estimator, study.task, cfg.to_dict(), records, tasks[ds[0]].theory, runtime)
    keys, means = report.mean_errors(by="d")
    report.by_dimension = {int(k): v for k, v in zip(keys, means)}
    lo = min(means)
    report.ratio = max(means) / lo if lo > 0 else float("inf")
    logger.info("dimension study: max/min error ratio %.3f", report.ratio)
    return report
