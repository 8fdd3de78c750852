"""
神经 Kantorovich 势 — [0,1]^{d_max} 上的 ReLU 前馈网络及其半对偶训练。

    φ̃(x) = (W_L σ(·) + b_L) ∘ ⋯ ∘ (W_1 x′ + b_1),   x′_{ij} = θ_{ij} x_i（可选嵌入）
    T̂(x) = cl(ι(x) − ∇φ̃(ι(x)))，d_max 之后的坐标原样保留

训练: 余弦衰减 SGD；每步用共轭求解器得到 x*_{Y_j}，
参数梯度按 Danskin 规则流经 φ̃(X_i) 与 φ̃(x*_j) 两项；每步后裁剪到 ±B。
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from otmap.conjugate.solver import BrenierPotential, solve_batch
from otmap.core.config import ConjugateConfig, NeuralConfig, canonical_preset
from otmap.core.errors import DomainError, NumericalFailure
from otmap.gamma.space import SmoothnessMap, alpha, d_max as gamma_d_max, select_J
from otmap.tracing import Tracer
from otmap.utils.rng import STREAM_INIT, STREAM_TRAIN, make_rng

logger = logging.getLogger("otmap.estimators.neural")

# Desk-scale clamps on the theory-driven network sizes.
WIDTH_RANGE = (8, 512)
DEPTH_RANGE = (2, 8)
BOUND_LOG2_CAP = 10.0


# ──────────────────────────────────────────────
# Truncation ι
# ──────────────────────────────────────────────


@dataclass(frozen=True)
class Truncation:
    """ι keeps the first ``d_max`` coordinates; its pseudo-inverse zero-pads."""

    d_max: int

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] < self.d_max:
            raise DomainError(f"points have dimension {X.shape[-1]} < d_max={self.d_max}")
        return X[..., : self.d_max]

    def inverse(self, Z: np.ndarray, d: int) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        if d < self.d_max:
            raise DomainError(f"cannot pad to d={d} < d_max={self.d_max}")
        out = np.zeros(Z.shape[:-1] + (d,))
        out[..., : self.d_max] = Z
        return out


def clip_unit(X: np.ndarray) -> np.ndarray:
    """Componentwise clipping operator onto [0,1]."""
    return np.clip(np.asarray(X, dtype=float), 0.0, 1.0)


# ──────────────────────────────────────────────
# MlpPotential
# ──────────────────────────────────────────────


class MlpPotential:
    """ReLU network φ̃ : [0,1]^{d_max} → R with exact input and parameter gradients.

    Parameters:
        weights: Layer matrices, shape ``(out, in)``; the last has one row.
        biases: Layer offsets aligned with ``weights``.
        embedding: Optional ``(d_max, d′)`` scaling matrix θ.
        bound: Parameter clamp B (``inf`` disables clamping).
        center: Empirical mean of φ̃ over the training X.

    The ReLU derivative at exactly 0 is taken as 1.
    """

    def __init__(
        self,
        weights: Sequence[np.ndarray],
        biases: Sequence[np.ndarray],
        embedding: Optional[np.ndarray] = None,
        bound: float = math.inf,
        center: float = 0.0,
    ) -> None:
        if len(weights) != len(biases) or not weights:
            raise DomainError("weights and biases must be non-empty and of equal length")
        self.weights: List[np.ndarray] = [np.array(w, dtype=float, ndmin=2) for w in weights]
        self.biases: List[np.ndarray] = [np.array(b, dtype=float).reshape(-1) for b in biases]
        self.embedding = None if embedding is None else np.array(embedding, dtype=float, ndmin=2)
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape[0] != b.shape[0]:
                raise DomainError(f"layer {k}: weight rows {w.shape[0]} != bias size {b.shape[0]}")
            if k and w.shape[1] != self.weights[k - 1].shape[0]:
                raise DomainError(f"layer {k}: input size {w.shape[1]} does not chain")
        if self.weights[-1].shape[0] != 1:
            raise DomainError("the output layer must have a single unit")
        if self.embedding is not None:
            dm, dp = self.embedding.shape
            if self.weights[0].shape[1] != dm * dp:
                raise DomainError("first layer does not match the embedding size")
            self.d_max = dm
        else:
            self.d_max = self.weights[0].shape[1]
        self.bound = float(bound)
        self.center = float(center)

    # ─── Construction ───

    @classmethod
    def init(
        cls,
        d_max: int,
        width: int,
        depth: int,
        embedding_dim: int = 0,
        bound: float = math.inf,
        seed: int = 0,
    ) -> "MlpPotential":
        """He-initialized hidden layers and a zero output layer (identity map at start)."""
        rng = make_rng(seed, STREAM_INIT)
        embedding = None
        fan_in = d_max
        if embedding_dim > 0:
            embedding = rng.uniform(0.5, 1.5, size=(d_max, embedding_dim))
            fan_in = d_max * embedding_dim
        weights, biases = [], []
        for _ in range(depth):
            weights.append(rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(width, fan_in)))
            biases.append(np.zeros(width))
            fan_in = width
        weights.append(np.zeros((1, fan_in)))
        biases.append(np.zeros(1))
        net = cls(weights, biases, embedding=embedding, bound=bound)
        net.clamp()
        return net

    # ─── Properties ───

    @property
    def depth(self) -> int:
        return len(self.weights) - 1

    @property
    def layer_sizes(self) -> List[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def parameters(self) -> List[np.ndarray]:
        params = list(self.weights) + list(self.biases)
        if self.embedding is not None:
            params.append(self.embedding)
        return params

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    def nonzero_count(self) -> int:
        return int(sum(np.count_nonzero(p) for p in self.parameters()))

    def clamp(self) -> None:
        """Clip every parameter to [−B, B] in place."""
        if not math.isfinite(self.bound):
            return
        for p in self.parameters():
            np.clip(p, -self.bound, self.bound, out=p)

    # ─── Forward / backward ───

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.d_max:
            raise DomainError(f"expected an n×{self.d_max} array, got shape {X.shape}")
        return X

    def _embed(self, X: np.ndarray) -> np.ndarray:
        if self.embedding is None:
            return X
        return (X[:, :, None] * self.embedding[None, :, :]).reshape(X.shape[0], -1)

    def _forward(self, X: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
        h = self._embed(X)
        inputs, pre = [h], []
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            z = h @ w.T + b
            pre.append(z)
            h = np.maximum(z, 0.0)
            inputs.append(h)
        out = (h @ self.weights[-1].T + self.biases[-1])[:, 0]
        return out, inputs, pre

    def _backward(
        self, upstream: np.ndarray, inputs: List[np.ndarray], pre: List[np.ndarray]
    ) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
        g = upstream[:, None]
        dW: List[np.ndarray] = [np.empty(0)] * len(self.weights)
        db: List[np.ndarray] = [np.empty(0)] * len(self.biases)
        for k in range(len(self.weights) - 1, -1, -1):
            dW[k] = g.T @ inputs[k]
            db[k] = g.sum(axis=0)
            g = g @ self.weights[k]
            if k:
                g = g * (pre[k - 1] >= 0.0)
        return g, dW, db

    def values(self, X: np.ndarray) -> np.ndarray:
        return self._forward(self._check(X))[0]

    def value_and_grad(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Batched φ̃(X_i) and exact ∇φ̃(X_i)."""
        X = self._check(X)
        out, inputs, pre = self._forward(X)
        g, _, _ = self._backward(np.ones(X.shape[0]), inputs, pre)
        if self.embedding is not None:
            g = np.sum(g.reshape(X.shape[0], self.d_max, -1) * self.embedding[None], axis=2)
        return out, g

    def forward(self, x: Sequence[float]) -> float:
        return float(self.values(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def input_grad(self, x: Sequence[float]) -> np.ndarray:
        return self.value_and_grad(np.atleast_2d(np.asarray(x, dtype=float)))[1][0]

    def param_grads(self, X: np.ndarray, upstream: np.ndarray) -> Dict[str, Any]:
        """Σ_i upstream_i · ∂φ̃(X_i)/∂params."""
        X = self._check(X)
        upstream = np.asarray(upstream, dtype=float).reshape(-1)
        if upstream.shape[0] != X.shape[0]:
            raise DomainError("upstream must have one entry per row")
        _, inputs, pre = self._forward(X)
        g, dW, db = self._backward(upstream, inputs, pre)
        grads: Dict[str, Any] = {"weights": dW, "biases": db, "embedding": None}
        if self.embedding is not None:
            gz = g.reshape(X.shape[0], self.d_max, -1)
            grads["embedding"] = np.einsum("nij,ni->ij", gz, X)
        return grads

    def apply_update(self, grads: Mapping[str, Any], lr: float) -> None:
        """Plain SGD step followed by the ±B clamp."""
        for w, gw in zip(self.weights, grads["weights"]):
            w -= lr * gw
        for b, gb in zip(self.biases, grads["biases"]):
            b -= lr * gb
        if self.embedding is not None and grads.get("embedding") is not None:
            self.embedding -= lr * grads["embedding"]
        self.clamp()

    # ─── Transport ───

    def transport_batch(self, X: np.ndarray) -> np.ndarray:
        """cl(ι(X) − ∇φ̃(ι(X))) on the first d_max coordinates; the rest pass through."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise DomainError(f"expected a 2-D point array, got shape {X.shape}")
        trunc = Truncation(self.d_max)
        Z = trunc.apply(X)
        out = X.copy()
        out[:, : self.d_max] = clip_unit(Z - self.value_and_grad(Z)[1])
        return out

    def transport(self, x: Sequence[float]) -> np.ndarray:
        return self.transport_batch(np.atleast_2d(np.asarray(x, dtype=float)))[0]

    # ─── Serialization ───

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer_sizes": self.layer_sizes,
            "layers": [
                {"weight": w.tolist(), "bias": b.tolist()} for w, b in zip(self.weights, self.biases)
            ],
            "embedding": None if self.embedding is None else self.embedding.tolist(),
            "bound": self.bound if math.isfinite(self.bound) else None,
            "center": self.center,
            "d_max": self.d_max,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "MlpPotential":
        bound = d.get("bound")
        return cls(
            weights=[np.array(layer["weight"], dtype=float) for layer in d["layers"]],
            biases=[np.array(layer["bias"], dtype=float) for layer in d["layers"]],
            embedding=None if d.get("embedding") is None else np.array(d["embedding"], dtype=float),
            bound=math.inf if bound is None else float(bound),
            center=float(d.get("center", 0.0)),
        )


def forward(net: MlpPotential, x: Sequence[float]) -> float:
    return net.forward(x)


def input_grad(net: MlpPotential, x: Sequence[float]) -> np.ndarray:
    return net.input_grad(x)


def transport_nn(net: MlpPotential, x_full: Sequence[float]) -> np.ndarray:
    """T̂_nn at one full-dimensional point."""
    return net.transport(x_full)


# ──────────────────────────────────────────────
# Configuration
# ──────────────────────────────────────────────


def study_learning_rate(q: float, d: int) -> float:
    """Learning-rate table of the simulation preset."""
    if d >= 1000:
        return 6e-3
    if d == 200 and q == 1:
        return 9e-3
    return 1e-2


def default_config(
    smoothness: SmoothnessMap,
    n: int,
    preset: str = "theory",
    d: Optional[int] = None,
    q: Optional[float] = None,
) -> NeuralConfig:
    """Network sizes from the rate theory, clamped to desk scale.

        W = clamp(4 · J^{1/p} · 2^{αJ/(1+2α)}, 8, 512)
        L = clamp(⌈0.05 · J^{2+2/p}⌉, 2, 8)
        B = 2^{J^{1/p}/2}

    with p the weight-growth exponent of *smoothness* (∞ for Sobolev maps).

    Parameters:
        smoothness: Smoothness map of the target class.
        n: Sample size.
        preset: ``"theory"`` or ``"embedded"`` (embedding network of the simulations;
            ``"sim7"`` is accepted as an alias).
        d: Data dimension; caps d_max (and sets it under ``embedded``).
        q: Hockey-stick parameter, used by the ``embedded`` learning-rate table.
    """
    preset = canonical_preset(preset)
    if preset not in ("theory", "embedded"):
        raise DomainError(f"unknown preset {preset!r}")
    a = alpha(smoothness)
    if not math.isfinite(a):
        raise DomainError("the neural estimator needs a smoothness map with finite α(γ)")
    J = select_J(smoothness, n)
    p = smoothness.growth_exponent
    inv_p = 1.0 / p if math.isfinite(p) and p > 0 else 0.0
    # Sizes are computed in log2 so steep weight rules cannot overflow.
    log_j = math.log2(J)
    log_jp = log_j * inv_p
    log_poly = (2.0 + 2.0 * inv_p) * log_j
    log_expo = a * J / (1.0 + 2.0 * a)

    width = int(min(max(round(4.0 * 2.0 ** min(log_jp + log_expo, 10.0)), WIDTH_RANGE[0]), WIDTH_RANGE[1]))
    depth = int(min(max(math.ceil(0.05 * 2.0 ** min(log_poly, 10.0)), DEPTH_RANGE[0]), DEPTH_RANGE[1]))
    bound = float(2.0 ** min(2.0 ** min(log_jp, 8.0) / 2.0, BOUND_LOG2_CAP))
    budget = int(2.0 ** min(log_poly + log_expo, 62.0))
    dm = gamma_d_max(smoothness, J)
    if d is not None:
        dm = min(dm, d)

    cfg = NeuralConfig(
        preset=preset,
        d_max=dm,
        width=width,
        depth=depth,
        bound=bound,
        nonzero_budget=budget,
        J=float(J),
        learning_rate=1e-2,
    )
    if preset == "embedded":
        dim = d if d is not None else dm
        cfg = dataclasses.replace(
            cfg,
            d_max=dim,
            width=64,
            depth=3,
            embedding_dim=20,
            learning_rate=study_learning_rate(q if q is not None else 1.0, dim),
            iterations=175,
            batch_size=n,
        )
    logger.debug("default_config(%s, n=%d): %s", preset, n, cfg)
    return cfg


def resolve_config(
    smoothness: SmoothnessMap, n: int, d: int, cfg: Optional[NeuralConfig]
) -> NeuralConfig:
    """Fill ``None`` sizes of *cfg* from :func:`default_config`."""
    cfg = cfg or NeuralConfig()
    base = default_config(smoothness, n, preset=cfg.preset, d=d)
    updates = {
        f.name: getattr(base, f.name)
        for f in dataclasses.fields(cfg)
        if getattr(cfg, f.name) is None and getattr(base, f.name) is not None
    }
    resolved = dataclasses.replace(cfg, **updates)
    if resolved.d_max > d:
        raise DomainError(f"d_max={resolved.d_max} exceeds the data dimension {d}")
    return resolved


# ──────────────────────────────────────────────
# Training
# ──────────────────────────────────────────────


def train_nn(
    X: np.ndarray,
    Y: np.ndarray,
    smoothness: SmoothnessMap,
    cfg: Optional[NeuralConfig] = None,
    conj: Optional[ConjugateConfig] = None,
    tracer: Optional[Tracer] = None,
) -> MlpPotential:
    """Empirical semi-dual minimization over the ReLU network class.

    Parameters:
        X: Source sample, n×d.
        Y: Target sample, m×d.
        smoothness: Smoothness map; fixes d_max and the theory sizes.
        cfg: Training settings; ``None`` sizes are derived from ``default_config``.
        conj: Conjugate solver settings.
        tracer: Optional tracer receiving a ``fit:nn`` span.

    Raises:
        DomainError: On bad samples or an infinite α(γ).
        NumericalFailure: If the objective diverges or turns non-finite.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] == 0 or Y.shape[0] == 0:
        raise DomainError("X and Y must be non-empty n×d matrices")
    if X.shape[1] != Y.shape[1]:
        raise DomainError(f"dimension mismatch: X has d={X.shape[1]}, Y has d={Y.shape[1]}")
    n, d = X.shape
    m = Y.shape[0]
    cfg = resolve_config(smoothness, n, d, cfg)
    conj = conj or ConjugateConfig()
    tracer = tracer or Tracer(enabled=False)

    trunc = Truncation(cfg.d_max)
    Xt, Yt = trunc.apply(X), trunc.apply(Y)
    net = MlpPotential.init(
        cfg.d_max,
        cfg.width,
        cfg.depth,
        embedding_dim=cfg.embedding_dim,
        bound=cfg.bound,
        seed=cfg.seed,
    )
    logger.info(
        "fit-nn: n=%d d=%d d_max=%d W=%d L=%d B=%.4g R=%s params=%d",
        n,
        d,
        cfg.d_max,
        cfg.width,
        cfg.depth,
        cfg.bound,
        cfg.nonzero_budget,
        net.parameter_count(),
    )
    if cfg.iterations <= 0:
        return net

    rng = make_rng(cfg.seed, STREAM_TRAIN)
    bx = n if cfg.batch_size is None else min(cfg.batch_size, n)
    by = m if cfg.batch_size is None else min(cfg.batch_size, m)
    warm = clip_unit(Yt)
    center: Optional[float] = None
    initial = None

    with tracer.fit_span("nn", n=n, d=d, d_max=cfg.d_max) as span:
        for t in range(cfg.iterations):
            lr = cfg.learning_rate * 0.5 * (1.0 + math.cos(math.pi * t / cfg.iterations))
            ix = np.arange(n) if bx == n else rng.choice(n, size=bx, replace=False)
            iy = np.arange(m) if by == m else rng.choice(m, size=by, replace=False)
            xb, yb = Xt[ix], Yt[iy]

            fx = net.values(xb)
            batch_mean = float(np.mean(fx))
            if center is None:
                center = batch_mean
            else:
                center = cfg.center_momentum * center + (1.0 - cfg.center_momentum) * batch_mean

            brenier = BrenierPotential(net, offset=center)
            starts = conj.n_starts if t == 0 else cfg.warm_random_starts
            cb = solve_batch(
                brenier,
                yb,
                conj,
                warm_starts=warm[iy],
                candidates=xb,
                indices=iy,
                n_random=starts,
                tracer=tracer,
            )
            warm[iy] = cb.argmax
            objective = (
                float(np.mean(0.5 * np.sum(xb * xb, axis=1)))
                - float(np.mean(fx - center))
                + float(np.mean(cb.values))
            )
            if not math.isfinite(objective):
                raise NumericalFailure("train_nn", "non-finite objective", iteration=t)
            if initial is None:
                initial = objective
            elif abs(objective) > cfg.divergence_factor * max(abs(initial), 1e-12):
                raise NumericalFailure(
                    "train_nn",
                    "objective diverged",
                    iteration=t,
                    objective=objective,
                    initial=initial,
                    learning_rate=lr,
                )

            points = np.concatenate([xb, cb.argmax])
            upstream = np.concatenate([np.full(bx, -1.0 / bx), np.full(by, 1.0 / by)])
            net.apply_update(net.param_grads(points, upstream), lr)
            if t % 25 == 0 or t == cfg.iterations - 1:
                logger.debug("fit-nn: iter %d Ŝ=%.8g lr=%.3g", t, objective, lr)

        net.center = float(np.mean(net.values(Xt)))
        span.set_attribute("iterations", cfg.iterations)
        span.set_attribute("initial_objective", initial)

    logger.info("fit-nn: done, nonzero=%d/%d", net.nonzero_count(), net.parameter_count())
    return net
