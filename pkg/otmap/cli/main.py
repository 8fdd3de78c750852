"""
otmap 命令行 — 数据生成、拟合、传输、模拟研究、下界构造、FDA 与评估。

退出码: 0 成功；1 用法/配置错误；2 数值失败或模型文件错误。
每次运行都会在输出目录写出 config.resolved.json（配置、种子、版本、输入校验和），
``--config`` 回放该文件即可逐位复现单线程结果。
模拟研究子命令为 ``sim7``（别名 ``study``）；``--preset sim7`` 等同于 ``embedded``。
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from otmap import __version__
from otmap.core.config import (
    ESTIMATOR_NAMES,
    PRESET_ALIASES,
    PRESET_NAMES,
    TASK_NAMES,
    RunConfig,
    canonical_preset,
)
from otmap.core.errors import DomainError, OTMapError, UsageError
from otmap.discrete.assignment import w2_distance
from otmap.estimators.base import FitContext, TransportEstimate
from otmap.estimators.registry import default_registry
from otmap.experiments.hockey import hockey_smoothness
from otmap.experiments.lower_bound import MC_SIZE, lower_bound_fixture
from otmap.experiments.metrics import l2_error
from otmap.experiments.study import convergence_study, dimension_study, make_task
from otmap.fda.coeffs import calibrate
from otmap.fda.pipeline import fit_function_map
from otmap.fda.sample import read_functions, write_functions
from otmap.gamma.space import SmoothnessMap
from otmap.io.models import load_model, save_model
from otmap.io.tables import checksums, read_matrix, write_json, write_matrix
from otmap.tracing import ConsoleExporter, Tracer
from otmap.utils.logger import setup_logging

logger = logging.getLogger("otmap.cli")

RESOLVED_CONFIG = "config.resolved.json"
STUDY_COMMANDS = ("sim7", "study")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises :class:`UsageError` instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> List[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


# ──────────────────────────────────────────────
# Parser
# ──────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("run")
    g.add_argument("--seed", type=int, default=None, help="global seed (fallback: OTMAP_SEED)")
    g.add_argument("--threads", type=int, default=None, help="worker threads (default 1)")
    g.add_argument("--config", default=None, help="replay a config.resolved.json")
    g.add_argument("--out", default=None, help="output directory, or a file path inside it")
    g.add_argument("--log-level", default=None)
    g.add_argument("--log-file", default=None)
    g.add_argument("--debug", action="store_true")
    g.add_argument("--trace", action="store_true", help="log span timings (fallback: OTMAP_TRACE)")
    c = common.add_argument_group("conjugate solver")
    c.add_argument("--conj-tol", type=float, default=None)
    c.add_argument("--conj-max-iter", type=int, default=None)
    c.add_argument("--conj-starts", type=int, default=None)

    parser = _Parser(prog="otmap", description="Optimal transport map estimation on [0,1]^d.")
    parser.add_argument("--version", action="version", version=f"otmap {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("gen-data", parents=[common], help="write x.csv / y.csv for a synthetic task")
    p.add_argument("--task", choices=TASK_NAMES, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--b", type=float, default=None)

    for name, helptext in (
        ("fit-fourier", "fit the truncated Fourier semi-dual estimator"),
        ("fit-nn", "train the neural semi-dual estimator"),
        ("fit-nnplan", "fit the nearest-neighbour plug-in map"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--x", required=True, help="source sample CSV")
        p.add_argument("--y", required=True, help="target sample CSV")
        if name != "fit-nnplan":
            p.add_argument(
                "--map", "--smoothness", dest="smoothness", default=None, help="smoothness map JSON {family, ...}"
            )
            p.add_argument("--q", type=float, default=None, help="hockey-stick map when no --map")
        else:
            p.add_argument("--dim", type=int, default=None, help="expected dimension of both samples")
        if name == "fit-fourier":
            p.add_argument("--J", type=float, default=None)
            p.add_argument("--max-iter", type=int, default=None)
            p.add_argument("--tol", type=float, default=None)
            p.add_argument("--radius", type=float, default=None)
        if name == "fit-nn":
            _add_neural_flags(p)

    p = sub.add_parser("transport", parents=[common], help="apply a saved model to a CSV of points")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True)

    p = sub.add_parser(
        "sim7", aliases=["study"], parents=[common], help="simulation study: convergence or dimension sweep"
    )
    p.add_argument("--estimator", choices=ESTIMATOR_NAMES, default=None)
    p.add_argument("--task", choices=TASK_NAMES, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--ns", type=_int_list, default=None, help="sample sizes, e.g. 50,100,200")
    p.add_argument("--ds", type=_int_list, default=None, help="dimension sweep at n = first --ns")
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--eval-m", type=int, default=None)
    p.add_argument("--large", action="store_true", help="allow d >= 1000")
    _add_neural_flags(p)

    p = sub.add_parser("fixture-lb", parents=[common], help="lower-bound packing construction")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--S", type=int, default=1)
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--mc", type=int, default=MC_SIZE)
    p.add_argument("--smoothness", default=None)

    p = sub.add_parser("fda", parents=[common], help="transport functional data through cosine coefficients")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--estimator", choices=ESTIMATOR_NAMES, default="nnplan")
    p.add_argument("--smoothness", default=None)
    p.add_argument("--n-coeffs", type=int, default=None)
    p.add_argument("--mode", choices=("1d", "2d"), default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--c1", type=float, default=None, help="fixed scale; calibrates when omitted")
    p.add_argument("--c2", type=float, default=None)

    p = sub.add_parser("eval", parents=[common], help="score a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--task", choices=TASK_NAMES, default=None, help="Monte Carlo L² error against a ground truth")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--x", default=None, help="with --y: W₂ between T̂(x) and y")
    p.add_argument("--y", default=None)
    return parser


def _add_neural_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("neural")
    g.add_argument("--preset", choices=PRESET_NAMES + tuple(PRESET_ALIASES), default=None)
    g.add_argument("--width", type=int, default=None)
    g.add_argument("--depth", type=int, default=None)
    g.add_argument("--d-max", type=int, default=None)
    g.add_argument("--embedding-dim", type=int, default=None)
    g.add_argument("--iterations", type=int, default=None)
    g.add_argument("--lr", type=float, default=None)
    g.add_argument("--batch-size", type=int, default=None)


# ──────────────────────────────────────────────
# Config resolution
# ──────────────────────────────────────────────


def _set(record: Any, **values: Any) -> Any:
    """Replace the fields whose value is not ``None``."""
    updates = {k: v for k, v in values.items() if v is not None}
    return replace(record, **updates) if updates else record


def resolve_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        path = Path(args.config)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {path}: {e}") from None
        cfg = RunConfig.from_dict(data.get("config", data) if isinstance(data, dict) else data)
    else:
        cfg = RunConfig.from_env()

    cfg = _set(cfg, seed=args.seed, threads=args.threads, log_level=args.log_level, log_file=args.log_file)
    if args.debug:
        cfg.debug = True
    if args.trace:
        cfg.trace = True
    cfg.conjugate = _set(cfg.conjugate, tol=args.conj_tol, max_iter=args.conj_max_iter, n_starts=args.conj_starts)
    a = vars(args)
    if "preset" in a:
        cfg.neural = _set(
            cfg.neural,
            preset=canonical_preset(a["preset"]) if a["preset"] else None,
            width=a["width"],
            depth=a["depth"],
            d_max=a["d_max"],
            embedding_dim=a["embedding_dim"],
            iterations=a["iterations"],
            learning_rate=a["lr"],
            batch_size=a["batch_size"],
        )
    if args.command == "fit-fourier":
        cfg.semidual = _set(cfg.semidual, J=args.J, max_iter=args.max_iter, tol=args.tol, radius=args.radius)
    if args.command in STUDY_COMMANDS + ("gen-data",):
        cfg.study = _set(
            cfg.study,
            estimator=a.get("estimator"),
            task=a.get("task"),
            q=a.get("q"),
            b=a.get("b"),
            d=a.get("d"),
            ns=tuple(a["ns"]) if a.get("ns") else None,
            seeds=a.get("seeds"),
            eval_m=a.get("eval_m"),
        )
        if a.get("large"):
            cfg.study.large = True
    if args.command == "fda":
        cfg.coeffs = _set(cfg.coeffs, n_coeffs=args.n_coeffs, mode=args.mode, k=args.k, c1=args.c1, c2=args.c2)
    return cfg.propagate()


def _output(args: argparse.Namespace, cfg: RunConfig, default_name: str) -> Tuple[Path, Path]:
    """(directory, primary file) from ``--out`` or ``cfg.output_dir``."""
    out = Path(args.out) if args.out else Path(cfg.output_dir)
    if out.suffix:
        directory, target = out.parent, out
    else:
        directory, target = out, out / default_name
    directory.mkdir(parents=True, exist_ok=True)
    cfg.output_dir = str(directory)
    return directory, target


def _write_resolved(directory: Path, cfg: RunConfig, command: str, inputs: Sequence[Optional[str]]) -> Path:
    return write_json(
        directory / RESOLVED_CONFIG,
        {
            "command": command,
            "version": __version__,
            "seed": cfg.seed,
            "config": cfg.to_dict(),
            "inputs": checksums(p for p in inputs if p),
        },
    )


def _load_smoothness(path: Optional[str], q: Optional[float], default_q: float) -> SmoothnessMap:
    if path:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read smoothness map {path}: {e}") from None
        return SmoothnessMap.from_dict(data)
    return hockey_smoothness(default_q if q is None else q)


def fit_context(cfg: RunConfig, q: Optional[float] = None) -> FitContext:
    tracer = Tracer(exporter=ConsoleExporter(), enabled=cfg.trace)
    return FitContext(semidual=cfg.semidual, neural=cfg.neural, conjugate=cfg.conjugate, q=q, tracer=tracer)


# ──────────────────────────────────────────────
# Commands
# ──────────────────────────────────────────────


def cmd_gen_data(args: argparse.Namespace, cfg: RunConfig) -> int:
    study = cfg.study
    directory, _ = _output(args, cfg, "x.csv")
    task = make_task(study.task, study.d, q=study.q, b=study.b)
    X, Y = task.sample(args.n, cfg.seed, study.d, args.n, 0)
    write_matrix(directory / "x.csv", X)
    write_matrix(directory / "y.csv", Y)
    _write_resolved(directory, cfg, args.command, [])
    logger.info("gen-data: %s task, n=%d d=%d → %s", task.name, args.n, study.d, directory)
    return 0


def _fit(args: argparse.Namespace, cfg: RunConfig, estimator: str) -> int:
    directory, target = _output(args, cfg, "model.json")
    X, Y = read_matrix(args.x), read_matrix(args.y)
    dim = getattr(args, "dim", None)
    if dim is not None and (X.shape[1] != dim or Y.shape[1] != dim):
        raise DomainError(f"--dim {dim} does not match the sample widths {X.shape[1]} and {Y.shape[1]}")
    spec = default_registry.get(estimator)
    smoothness = None
    q = getattr(args, "q", None)
    if spec.needs_smoothness:
        smoothness = _load_smoothness(args.smoothness, q, cfg.study.q)
    ctx = fit_context(cfg, q if q is not None else cfg.study.q)
    est = default_registry.fit(estimator, X, Y, smoothness, ctx)
    save_model(est, target)
    _write_resolved(directory, cfg, args.command, [args.x, args.y, getattr(args, "smoothness", None)])
    return 0


def cmd_transport(args: argparse.Namespace, cfg: RunConfig) -> int:
    directory, target = _output(args, cfg, "transported.csv")
    est = load_model(args.model)
    write_matrix(target, est.transport_batch(read_matrix(args.x)))
    _write_resolved(directory, cfg, args.command, [args.model, args.x])
    return 0


def cmd_study(args: argparse.Namespace, cfg: RunConfig) -> int:
    directory, target = _output(args, cfg, "report.json")
    s = cfg.study
    if args.ds:
        report = dimension_study(s.estimator, s.q, args.ds, s.ns[0], s.seeds, cfg)
    else:
        report = convergence_study(s.estimator, s.q, s.d, s.ns, s.seeds, cfg)
    report.write_json(target)
    report.write_errors_csv(directory / "errors.csv")
    report.write_curve_csv(directory / "curve.csv")
    _write_resolved(directory, cfg, args.command, [])
    if report.slope is not None:
        stated = report.theory.get("exponent_stated", float("nan"))
        print(f"slope {report.slope:.4f}  (stated-rate exponent {stated:.4f})")
    return 0


def cmd_fixture_lb(args: argparse.Namespace, cfg: RunConfig) -> int:
    directory, target = _output(args, cfg, "fixture.json")
    smoothness = None
    if args.smoothness:
        smoothness = _load_smoothness(args.smoothness, None, 1.0)
    report = lower_bound_fixture(args.d, args.S, smoothness, K=args.K, seed=cfg.seed, m=args.mc)
    write_json(target, report.to_dict())
    _write_resolved(directory, cfg, args.command, [args.smoothness])
    return 0


def cmd_fda(args: argparse.Namespace, cfg: RunConfig) -> int:
    directory, target = _output(args, cfg, "transported.csv")
    source, tgt = read_functions(args.source), read_functions(args.target)
    coeffs = cfg.coeffs
    if args.c1 is None:
        coeffs = calibrate([source, tgt], coeffs.n_coeffs, mode=coeffs.mode, k=coeffs.k)
    smoothness = _load_smoothness(args.smoothness, None, 1.0) if args.smoothness else None
    result = fit_function_map(source, tgt, args.estimator, coeffs, smoothness, fit_context(cfg))
    cfg.coeffs = result.coeffs
    write_functions(target, result.transported)
    write_json(directory / "fda.json", result.to_dict())
    _write_resolved(directory, cfg, args.command, [args.source, args.target, args.smoothness])
    print(f"Avg-DTW {result.dtw_before:.6g} → {result.dtw_after:.6g}")
    return 0


def cmd_eval(args: argparse.Namespace, cfg: RunConfig) -> int:
    directory, target = _output(args, cfg, "eval.json")
    est: TransportEstimate = load_model(args.model)
    result: Dict[str, Any] = {"model": args.model, "kind": est.family}
    if args.task:
        d = args.d if args.d is not None else cfg.study.d
        q = args.q if args.q is not None else cfg.study.q
        b = args.b if args.b is not None else cfg.study.b
        task = make_task(args.task, d, q=q, b=b)
        m = args.m if args.m is not None else cfg.study.eval_m
        err = l2_error(est.transport_batch, task.truth, d, m, cfg.seed, sampler=task.eval_sampler)
        result.update({"task": args.task, "d": d, "l2_error": err.value, "se": err.se, "m": err.m})
    if args.x or args.y:
        if not (args.x and args.y):
            raise UsageError("eval: --x and --y go together")
        moved = est.transport_batch(read_matrix(args.x))
        result["w2"] = w2_distance(moved, read_matrix(args.y))
    if len(result) == 2:
        raise UsageError("eval: give --task or --x/--y")
    write_json(target, result)
    _write_resolved(directory, cfg, args.command, [args.model, args.x, args.y])
    print(json.dumps(result))
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "gen-data": cmd_gen_data,
    "fit-fourier": lambda a, c: _fit(a, c, "fourier"),
    "fit-nn": lambda a, c: _fit(a, c, "nn"),
    "fit-nnplan": lambda a, c: _fit(a, c, "nnplan"),
    "transport": cmd_transport,
    "sim7": cmd_study,
    "study": cmd_study,
    "fixture-lb": cmd_fixture_lb,
    "fda": cmd_fda,
    "eval": cmd_eval,
}


# ──────────────────────────────────────────────
# Entry points
# ──────────────────────────────────────────────


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse *argv*, run the subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
        setup_logging(cfg.log_level, cfg.log_file, cfg.debug)
        logger.debug("resolved config:\n%s", cfg.summary())
        return COMMANDS[args.command](args, cfg)
    except SystemExit as e:
        # --help / --version
        return int(e.code or 0)
    except OTMapError as e:
        print(f"otmap: error: {e}", file=sys.stderr)
        return e.exit_code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
