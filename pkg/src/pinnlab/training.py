"""Residual-loss training loop.

One epoch samples a fresh batch, evaluates the mean squared residual and
its parameter gradient, then takes one optimizer step.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
import enum
import io
import json
import time

import numpy as np

from .autodiff import activation_derivs
from .network import ConfigError, LayerSpec, Params, init_params, param_count, unflatten
from .problem import (
    PI,
    neumann_mismatch,
    residual,
    source_f,
    validate_mae,
)


@dataclass(frozen=True)
class SGD:
    name = "sgd"

    def to_dict(self):
        return {"name": "sgd"}


@dataclass(frozen=True)
class Adam:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    name = "adam"

    def to_dict(self):
        return {"name": "adam", "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps}


def optimizer_from_dict(d):
    d = dict(d)
    name = d.pop("name", "adam")
    if name == "sgd":
        if d:
            raise ConfigError(f"optimizer: unknown fields for sgd: {sorted(d)}")
        return SGD()
    if name == "adam":
        unknown = set(d) - {"beta1", "beta2", "eps"}
        if unknown:
            raise ConfigError(f"optimizer: unknown fields for adam: {sorted(unknown)}")
        return Adam(**{k: float(v) for k, v in d.items()})
    raise ConfigError(f"optimizer.name: expected 'adam' or 'sgd', got {name!r}")


DEFAULT_CHECKPOINTS = (10000, 20000, 50000)


@dataclass(frozen=True)
class TrainConfig:
    spec: LayerSpec = field(default_factory=LayerSpec)
    seed: int = 0
    optimizer: object = field(default_factory=Adam)
    learning_rate: float = 1e-3
    epochs_max: int = 50000
    batch_size: int = 50
    noise: float = 0.0
    stddev: float = 0.0
    tolerance: float = 0.0
    mae_checkpoints: tuple = DEFAULT_CHECKPOINTS
    validation_grid: int = 100

    def __post_init__(self):
        object.__setattr__(self, "mae_checkpoints", tuple(int(c) for c in self.mae_checkpoints))
        if self.batch_size < 1:
            raise ConfigError("batch_size: must be >= 1")
        if self.epochs_max < 1:
            raise ConfigError("epochs_max: must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate: must be > 0")
        if not 0.0 <= self.noise <= 1.0:
            raise ConfigError("noise: must lie in [0, 1]")
        if self.stddev < 0:
            raise ConfigError("stddev: must be >= 0")
        if self.tolerance < 0:
            raise ConfigError("tolerance: must be >= 0")
        if self.validation_grid < 2:
            raise ConfigError("validation_grid: must be >= 2")
        cps = self.mae_checkpoints
        if list(cps) != sorted(cps) or len(set(cps)) != len(cps):
            raise ConfigError("mae_checkpoints: must be strictly increasing")
        if cps and (cps[0] < 1 or cps[-1] > self.epochs_max):
            raise ConfigError(f"mae_checkpoints: must lie in [1, epochs_max={self.epochs_max}]")
        if not isinstance(self.optimizer, (SGD, Adam)):
            raise ConfigError("optimizer: expected SGD or Adam")

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "seed": self.seed,
            "optimizer": self.optimizer.to_dict(),
            "learning_rate": self.learning_rate,
            "epochs_max": self.epochs_max,
            "batch_size": self.batch_size,
            "noise": self.noise,
            "stddev": self.stddev,
            "tolerance": self.tolerance,
            "mae_checkpoints": list(self.mae_checkpoints),
            "validation_grid": self.validation_grid,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["spec"] = LayerSpec.from_dict(d["spec"])
        d["optimizer"] = optimizer_from_dict(d.get("optimizer", {}))
        d["mae_checkpoints"] = tuple(d.get("mae_checkpoints", DEFAULT_CHECKPOINTS))
        return cls(**d)


class StopReason(str, enum.Enum):
    MAX_EPOCHS = "MaxEpochs"
    TOLERANCE_REACHED = "ToleranceReached"


@dataclass
class TrainReport:
    config: TrainConfig
    loss_history: list
    mae_at: dict
    final_params: Params
    stop_reason: StopReason
    final_mae: float = float("nan")
    neumann_mismatch: float = float("nan")
    wall_seconds: float = 0.0

    @property
    def epochs_run(self):
        return len(self.loss_history)

    def to_dict(self):
        # wall_seconds is left out so reports of identical runs are identical
        return {
            "config": self.config.to_dict(),
            "stop_reason": self.stop_reason.value,
            "epochs_run": self.epochs_run,
            "final_loss": self.loss_history[-1] if self.loss_history else None,
            "final_mae": self.final_mae,
            "neumann_mismatch": self.neumann_mismatch,
            "mae_at": {str(k): v for k, v in self.mae_at.items()},
            "loss_history": list(self.loss_history),
            "final_params": [float(v) for v in self.final_params.flatten()],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d):
        cfg = TrainConfig.from_dict(d["config"])
        return cls(
            config=cfg,
            loss_history=[float(v) for v in d["loss_history"]],
            mae_at={int(k): float(v) for k, v in d["mae_at"].items()},
            final_params=unflatten(cfg.spec, d["final_params"]),
            stop_reason=StopReason(d["stop_reason"]),
            final_mae=float(d.get("final_mae", "nan")),
            neumann_mismatch=float(d.get("neumann_mismatch", "nan")),
        )

    def loss_csv(self):
        return _csv(["epoch", "loss"], ((e, v) for e, v in enumerate(self.loss_history, 1)))

    def mae_csv(self):
        return _csv(["epoch", "mae"], sorted(self.mae_at.items()))


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


class TrainingDiverged(FloatingPointError):
    def __init__(self, epoch, last_finite_loss, report):
        super().__init__(f"non-finite loss at epoch {epoch} "
                         f"(last finite loss {last_finite_loss!r})")
        self.epoch = epoch
        self.last_finite_loss = last_finite_loss
        self.report = report

    def diagnostic(self):
        return {
            "error": "non-finite loss",
            "epoch": self.epoch,
            "last_finite_loss": self.last_finite_loss,
            "config": self.report.config.to_dict(),
        }


def sample_batch(rng, batch_size, noise=0.0, stddev=0.0):
    """``batch_size`` points uniform in the unit square, shape (batch_size, 2).

    Each point is jittered by N(0, stddev) with probability ``noise`` and
    clamped back into the square. The draws consumed from ``rng`` do not
    depend on ``noise`` or ``stddev``.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    pts = rng.random((batch_size, 2))
    hit = rng.random(batch_size) < noise
    jitter = rng.standard_normal((batch_size, 2)) * stddev
    return np.where(hit[:, None], np.clip(pts + jitter, 0.0, 1.0), pts)


def loss(spec: LayerSpec, p: Params, batch):
    """Mean squared PDE residual over the batch.

    Works with tape-valued parameters too, so it can be handed to
    :func:`~pinnlab.autodiff.grad_params`.
    """
    batch = np.asarray(batch, dtype=float)
    r = residual(spec, p, (batch[:, 0], batch[:, 1])).residual
    return (r * r).mean()


def _lift_and_gate(x, y):
    """Slots (v, dx, dy, dxx, dyy) of A and F, written out in closed form."""
    sx, cx = np.sin(PI * x), np.cos(PI * x)
    zero = np.zeros_like(x)
    A = (y * sx, PI * y * cx, sx, -PI * PI * y * sx, zero)

    def factor(t):
        # g(t) = sin(t - 1) sin(t) = (cos(1) - cos(2t - 1)) / 2
        a, b = np.sin(t - 1.0), np.sin(t)
        return a * b, np.sin(2.0 * t - 1.0), 2.0 * np.cos(2.0 * t - 1.0)

    gx, gx1, gx2 = factor(x)
    gy, gy1, gy2 = factor(y)
    F = (gx * gy, gx1 * gy, gx * gy1, gx2 * gy, gx * gy2)
    return A, F


def loss_and_grad(spec: LayerSpec, p: Params, batch):
    """Mean squared residual and its flat parameter gradient.

    Forward pass propagates value, first and pure second input-partials
    through every layer; the backward pass is the adjoint of that
    propagation, so it needs activation derivatives up to third order.
    """
    batch = np.asarray(batch, dtype=float)
    x, y = batch[:, 0], batch[:, 1]
    n = x.size
    hv = batch
    hdx = np.broadcast_to(np.array([1.0, 0.0]), hv.shape)
    hdy = np.broadcast_to(np.array([0.0, 1.0]), hv.shape)
    hdxx = hdyy = None
    caches = []
    last = len(spec.activations) - 1
    for i, ((w, b), act) in enumerate(zip(p.layers(), spec.activations)):
        wt = w.T
        zv = hv @ wt + b
        zdx, zdy = hdx @ wt, hdy @ wt
        if hdxx is None:
            zdxx = zdyy = np.zeros_like(zv)
        else:
            zdxx, zdyy = hdxx @ wt, hdyy @ wt
        inputs = (hv, hdx, hdy, hdxx, hdyy)
        if i == last and spec.linear_output:
            caches.append((inputs, None))
            hv, hdx, hdy, hdxx, hdyy = zv, zdx, zdy, zdxx, zdyy
            continue
        f0, f1, f2, f3 = activation_derivs(act, zv, 3)
        caches.append((inputs, (zdx, zdy, zdxx, zdyy, f1, f2, f3)))
        hv = f0
        hdx, hdy = f1 * zdx, f1 * zdy
        hdxx = f2 * zdx * zdx + f1 * zdxx
        hdyy = f2 * zdy * zdy + f1 * zdyy

    Nv, Ndx, Ndy, Ndxx, Ndyy = hv[:, 0], hdx[:, 0], hdy[:, 0], hdxx[:, 0], hdyy[:, 0]
    A, F = _lift_and_gate(x, y)
    psi = A[0] + F[0] * Nv
    psi_y = A[2] + F[2] * Nv + F[0] * Ndy
    psi_xx = A[3] + F[3] * Nv + 2.0 * F[1] * Ndx + F[0] * Ndxx
    psi_yy = A[4] + F[4] * Nv + 2.0 * F[2] * Ndy + F[0] * Ndyy
    r = psi_xx + psi_yy + psi * psi_y - source_f((x, y))
    value = float(np.mean(r * r))

    g = 2.0 * r / n
    gp, gpy = g * psi_y, g * psi
    # adjoints of the network output slots
    Av = (gp * F[0] + gpy * F[2] + g * F[3] + g * F[4])[:, None]
    Adx = (2.0 * g * F[1])[:, None]
    Ady = (gpy * F[0] + 2.0 * g * F[2])[:, None]
    Adxx = Adyy = (g * F[0])[:, None]

    gw, gb = [None] * len(caches), [None] * len(caches)
    weights = [w for w, _ in p.layers()]
    for i in range(len(caches) - 1, -1, -1):
        (hv, hdx, hdy, hdxx, hdyy), local = caches[i]
        if local is None:
            Zv, Zdx, Zdy, Zdxx, Zdyy = Av, Adx, Ady, Adxx, Adyy
        else:
            zdx, zdy, zdxx, zdyy, f1, f2, f3 = local
            Zv = (Av * f1 + Adx * f2 * zdx + Ady * f2 * zdy
                  + Adxx * (f3 * zdx * zdx + f2 * zdxx)
                  + Adyy * (f3 * zdy * zdy + f2 * zdyy))
            Zdx = Adx * f1 + 2.0 * Adxx * f2 * zdx
            Zdy = Ady * f1 + 2.0 * Adyy * f2 * zdy
            Zdxx, Zdyy = Adxx * f1, Adyy * f1
        gwi = Zv.T @ hv + Zdx.T @ hdx + Zdy.T @ hdy
        if hdxx is not None:
            gwi = gwi + Zdxx.T @ hdxx + Zdyy.T @ hdyy
        gw[i], gb[i] = gwi, Zv.sum(axis=0)
        if i > 0:
            w = weights[i]
            Av, Adx, Ady, Adxx, Adyy = Zv @ w, Zdx @ w, Zdy @ w, Zdxx @ w, Zdyy @ w
    return value, Params(gw, gb).flatten()


def sgd_step(p, grad, lr):
    if isinstance(p, Params):
        return _like(p, p.flatten() - lr * np.asarray(grad))
    return np.asarray(p) - lr * np.asarray(grad)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size):
        return cls(np.zeros(size), np.zeros(size), 0)


def adam_step(state: AdamState, p, grad, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update; returns ``(new_state, new_p)``."""
    grad = np.asarray(grad, dtype=float)
    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * grad
    v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    update = lr * m_hat / (np.sqrt(v_hat) + eps)
    new_state = AdamState(m, v, t)
    if isinstance(p, Params):
        return new_state, _like(p, p.flatten() - update)
    return new_state, np.asarray(p) - update


def _like(p, flat):
    shapes = [(w.shape, b.shape) for w, b in p.layers()]
    weights, biases, k = [], [], 0
    for ws, bs in shapes:
        nw, nb = int(np.prod(ws)), int(np.prod(bs))
        weights.append(flat[k:k + nw].reshape(ws))
        k += nw
        biases.append(flat[k:k + nb].reshape(bs))
        k += nb
    return Params(weights, biases)


def batch_rng(seed):
    # init_params draws from default_rng(seed); keep the batch stream separate
    return np.random.default_rng([int(seed), 1])


def train(cfg: TrainConfig, gradient=loss_and_grad) -> TrainReport:
    """Run the epoch loop described by ``cfg``.

    Raises :class:`TrainingDiverged` when the loss stops being finite; the
    exception carries the partial report.
    """
    start = time.perf_counter()
    spec = cfg.spec
    theta = init_params(spec, cfg.seed).flatten()
    rng = batch_rng(cfg.seed)
    opt = cfg.optimizer
    state = AdamState.zeros(param_count(spec))
    checkpoints = set(cfg.mae_checkpoints)
    history, mae_at = [], {}
    stop = StopReason.MAX_EPOCHS
    last_finite = None

    for epoch in range(1, cfg.epochs_max + 1):
        batch = sample_batch(rng, cfg.batch_size, cfg.noise, cfg.stddev)
        # overflow shows up as a non-finite loss, reported below
        with np.errstate(over="ignore", invalid="ignore"):
            value, grad = gradient(spec, unflatten(spec, theta), batch)
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            report = TrainReport(cfg, history, mae_at, unflatten(spec, theta), stop,
                                 wall_seconds=time.perf_counter() - start)
            raise TrainingDiverged(epoch, last_finite, report)
        history.append(value)
        last_finite = value
        if value < cfg.tolerance:
            stop = StopReason.TOLERANCE_REACHED
            break
        if isinstance(opt, Adam):
            state, theta = adam_step(state, theta, grad, cfg.learning_rate,
                                     opt.beta1, opt.beta2, opt.eps)
        else:
            theta = sgd_step(theta, grad, cfg.learning_rate)
        if epoch in checkpoints:
            mae_at[epoch] = validate_mae(spec, unflatten(spec, theta), cfg.validation_grid)

    final = unflatten(spec, theta)
    return TrainReport(
        config=cfg,
        loss_history=history,
        mae_at=mae_at,
        final_params=final,
        stop_reason=stop,
        final_mae=validate_mae(spec, final, cfg.validation_grid),
        neumann_mismatch=neumann_mismatch(spec, final),
        wall_seconds=time.perf_counter() - start,
    )
