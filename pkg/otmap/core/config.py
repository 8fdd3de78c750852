"""
运行配置管理。

支持从环境变量 (.env)、JSON 字典（config.resolved.json 回放）或代码直接构造。
每个模块的参数记录都在这里定义；未知键在任意嵌套层级都会被拒绝。
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from dotenv import load_dotenv

from otmap.core.errors import ConfigError

ESTIMATOR_NAMES = ("fourier", "nn", "nnplan", "linear")
TASK_NAMES = ("hockey", "ellipsoid")
PRESET_NAMES = ("theory", "embedded")
# Command-line spelling of the simulation preset.
PRESET_ALIASES = {"sim7": "embedded"}


def _to_bool(value: Optional[str], default: bool = False) -> bool:
    if value is None:
        return default
    return value.strip().lower() in {"1", "true", "yes", "on"}


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw.strip())
    except ValueError:
        raise ConfigError(name, f"expected an integer, got {raw!r}") from None


def canonical_preset(name: str) -> str:
    """Map a preset alias to its canonical name; unknown names pass through."""
    return PRESET_ALIASES.get(name, name)


# ──────────────────────────────────────────────
# Per-module records
# ──────────────────────────────────────────────


@dataclass
class ConjugateConfig:
    """Conjugate solver settings (CLI: ``--conj-tol``, ``--conj-max-iter``, ``--conj-starts``).

    Attributes:
        tol: Gradient-mapping norm below which a start counts as converged.
        max_iter: Accepted ascent steps per start.
        n_starts: Random uniform starts per point, on top of clip(y), the
            warm start and the best training sample.
        seed: Global seed; the random starts of point i come from ``(seed, i)``.
        initial_step: First trial step of the backtracking search.
        chunk_size: Points per work unit. Fixed so results do not depend on
            the worker count.
        threads: Worker threads for chunk-level parallelism.
    """

    tol: float = 1e-8
    max_iter: int = 500
    n_starts: int = 8
    seed: int = 0
    initial_step: float = 1.0
    chunk_size: int = 256
    threads: int = 1


@dataclass
class SemidualConfig:
    """Fourier semi-dual fit settings.

    Attributes:
        J: Truncation budget; ``None`` picks ``select_J(map, n)``.
        tol: Relative objective change that stops the outer loop.
        max_iter: Outer iterations.
        radius: Radius of the H^{γ+2} ball.
        initial_lipschitz: Starting guess for the ω-gradient Lipschitz estimate.
        max_backtracks: Step halvings per outer iteration.
        warm_random_starts: Random conjugate starts on warm-started iterations.
        cap: Basis enumeration cap.
    """

    J: Optional[float] = None
    tol: float = 1e-7
    max_iter: int = 300
    radius: float = 1.0
    initial_lipschitz: float = 1.0
    max_backtracks: int = 20
    warm_random_starts: int = 0
    cap: int = 10**6


@dataclass
class NeuralConfig:
    """Neural semi-dual training settings; ``None`` fields are filled by ``default_config``.

    Attributes:
        preset: ``"theory"`` (network sizes from the rate theory) or ``"embedded"``.
        d_max: Input truncation dimension.
        width: Hidden width W.
        depth: Number of hidden layers L.
        bound: Parameter clamp B.
        nonzero_budget: Reported sparsity budget R (not enforced).
        J: Truncation budget the sizes were derived from.
        embedding_dim: Directions d′ of the per-axis embedding; 0 disables it.
        learning_rate: Initial SGD step.
        iterations: SGD steps.
        batch_size: Samples per step; ``None`` means full batch.
        center_momentum: EMA factor of the running mean of φ̃(X).
        divergence_factor: Abort when |S| exceeds this multiple of |S₀|.
        warm_random_starts: Random conjugate starts once argmaxes are warm.
        seed: Seed for initialization and batch order.
    """

    preset: str = "theory"
    d_max: Optional[int] = None
    width: Optional[int] = None
    depth: Optional[int] = None
    bound: Optional[float] = None
    nonzero_budget: Optional[int] = None
    J: Optional[float] = None
    embedding_dim: int = 0
    learning_rate: float = 1e-2
    iterations: int = 175
    batch_size: Optional[int] = None
    center_momentum: float = 0.9
    divergence_factor: float = 10.0
    warm_random_starts: int = 0
    seed: int = 0


@dataclass
class StudyConfig:
    """Simulation study settings.

    Attributes:
        estimator: Registered estimator name.
        task: ``"hockey"`` or ``"ellipsoid"``.
        q: Hockey-stick smoothness parameter.
        b: Ellipsoid smoothness.
        d: Ambient dimension.
        ns: Sample sizes.
        seeds: Number of seeds per sample size.
        eval_m: Monte Carlo size of the L² error.
        threads: Cells run in parallel.
        large: Allow d >= 1000 sweeps.
    """

    estimator: str = "nn"
    task: str = "hockey"
    q: float = 1.0
    b: float = 2.0
    d: int = 50
    ns: Tuple[int, ...] = (50, 100, 200, 500, 1000)
    seeds: int = 3
    eval_m: int = 2000
    threads: int = 1
    large: bool = False


@dataclass
class CoeffConfig:
    """Cosine-coefficient map w = c1·⟨f, u_j⟩ + c2 for functional data.

    Attributes:
        n_coeffs: Coefficients kept (1-D mode) or k×k for ``mode="2d"``.
        c1: Scale, > 0.
        c2: Shift.
        mode: ``"1d"`` or ``"2d"`` (tensor cosine on a rows×cols grid).
        k: Per-axis count in the 2-D mode.
    """

    n_coeffs: int = 16
    c1: float = 1.0
    c2: float = 0.5
    mode: str = "1d"
    k: int = 0


# ──────────────────────────────────────────────
# RunConfig
# ──────────────────────────────────────────────


@dataclass
class RunConfig:
    """otmap 运行配置。"""

    # ── 全局 ──
    seed: int = 0
    output_dir: str = "."
    threads: int = 1

    # ── 日志 ──
    log_level: str = "INFO"
    log_file: str = ""
    debug: bool = False
    trace: bool = False

    # ── 模块参数 ──
    conjugate: ConjugateConfig = field(default_factory=ConjugateConfig)
    semidual: SemidualConfig = field(default_factory=SemidualConfig)
    neural: NeuralConfig = field(default_factory=NeuralConfig)
    study: StudyConfig = field(default_factory=StudyConfig)
    coeffs: CoeffConfig = field(default_factory=CoeffConfig)

    @classmethod
    def from_env(cls, env_file: str = ".env") -> RunConfig:
        """
        从 .env 文件和环境变量中加载配置。

        环境变量优先级高于 .env 文件。
        """
        load_dotenv(env_file, override=False)
        cfg = cls(
            seed=_env_int("OTMAP_SEED", 0),
            output_dir=os.getenv("OTMAP_OUTPUT_DIR", ".").strip() or ".",
            threads=max(1, _env_int("OTMAP_THREADS", 1)),
            log_level=os.getenv("OTMAP_LOG_LEVEL", "INFO").strip().upper() or "INFO",
            log_file=os.getenv("OTMAP_LOG_FILE", "").strip(),
            debug=_to_bool(os.getenv("OTMAP_DEBUG")),
            trace=_to_bool(os.getenv("OTMAP_TRACE")),
        )
        return cfg.propagate()

    def propagate(self) -> RunConfig:
        """Push the global seed and thread count into the module records."""
        self.conjugate.seed = self.seed
        self.conjugate.threads = self.threads
        self.neural.seed = self.seed
        self.study.threads = self.threads
        return self

    # ── 序列化 ──

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["study"]["ns"] = list(self.study.ns)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RunConfig:
        """Strict inverse of :meth:`to_dict`.

        Raises:
            ConfigError: On an unknown key at any level, or a wrong value type.
        """
        return _build(cls, data, "")

    def summary(self) -> str:
        """返回配置摘要。"""
        return (
            f"Seed: {self.seed}\n"
            f"Output: {self.output_dir}\n"
            f"Threads: {self.threads}\n"
            f"Log: {self.log_level}{' → ' + self.log_file if self.log_file else ''}\n"
            f"Conjugate: tol={self.conjugate.tol:g}, max_iter={self.conjugate.max_iter}, "
            f"starts={self.conjugate.n_starts}\n"
            f"Debug: {self.debug}  Trace: {self.trace}"
        )


def _build(cls: type, data: Mapping[str, Any], prefix: str) -> Any:
    if not isinstance(data, Mapping):
        raise ConfigError(prefix or cls.__name__, "expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs: Dict[str, Any] = {}
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in fields:
            raise ConfigError(path)
        f = fields[key]
        factory = f.default_factory
        if dataclasses.is_dataclass(factory):
            kwargs[key] = _build(factory, value, path)
        elif key == "ns":
            kwargs[key] = _int_tuple(value, path)
        else:
            kwargs[key] = _check_scalar(f.default, value, path)
    return cls(**kwargs)


def _int_tuple(value: Any, path: str) -> Tuple[int, ...]:
    if not isinstance(value, (list, tuple)) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(path, "expected a list of integers")
    return tuple(value)


def _check_scalar(default: Any, value: Any, path: str) -> Any:
    if default is None or value is None:
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, "expected a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, "expected an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, "expected a number")
        return float(value)
    if isinstance(default, str) and not isinstance(value, str):
        raise ConfigError(path, "expected a string")
    return value

