"""Mini-batch training of the linear forecasters.

Gradients are analytic: the forecast is linear in the parameters and the
loss is mean squared error, so for residual R = prediction - target and
n = batch * T * C elements,

    dL/dW = (2/n) * sum_b R_b x_b^T        (per branch, per channel map)
    dL/db = (2/n) * row sums of R

with the decomposition acting as a fixed preprocessing that no gradient
flows through. The optimizers (Adam, SGD) are implemented here directly so
every update is reproducible bit-for-bit from the seed.

A fit owns its model exclusively; losses and gradients are reduced in a
fixed order (window-major, then row, then column) so reruns with the same
seed, data, and config produce identical loss curves.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import WindowPair, windows_to_arrays
from .decompose import decompose_batch
from .models import DLinearModel, LinearMap, model_to_dict

EVAL_CHUNK = 128  # fixed so the reduction order is part of the contract


class TrainingDivergedError(Exception):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.005
    batch_size: int = 32
    max_epochs: int = 20
    patience: int = 5
    seed: int = 0
    optimizer: str = "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("batch_size and max_epochs must be positive")
        if self.patience < 0 or self.patience > self.max_epochs:
            raise ValueError("patience must be in [0, max_epochs]")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")


@dataclass
class TrainReport:
    epoch_train_losses: list[float]
    epoch_val_losses: list[float]
    best_epoch: int
    final_params_snapshot_id: str

    def to_dict(self) -> dict:
        return {
            "epoch_train_losses": self.epoch_train_losses,
            "epoch_val_losses": self.epoch_val_losses,
            "best_epoch": self.best_epoch,
            "final_params_snapshot_id": self.final_params_snapshot_id,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean of squared elementwise differences over every element."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff))


def _shared_grads(residual: np.ndarray, blocks: np.ndarray, scale: float):
    gw = scale * np.einsum("btc,blc->tl", residual, blocks)
    gb = scale * residual.sum(axis=(0, 2))
    return gw[None], gb[None]


def _individual_grads(residual: np.ndarray, blocks: np.ndarray, scale: float):
    gw = scale * np.einsum("btc,blc->ctl", residual, blocks)
    gb = scale * residual.sum(axis=0).T
    return gw, gb


def grad_arrays(model, inputs: np.ndarray, targets: np.ndarray):
    """Loss and analytic gradients for one stacked batch.

    Returns (loss, grads) where grads maps each entry of
    ``model.param_arrays()`` to an array of the same shape.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if inputs.ndim != 3 or targets.ndim != 3 or inputs.shape[0] != targets.shape[0]:
        raise ValueError(
            f"expected stacked (B, L, C) and (B, T, C) batches, got "
            f"{inputs.shape} and {targets.shape}"
        )
    n = targets.size
    scale = 2.0 / n
    if isinstance(model, DLinearModel):
        trend, remainder = decompose_batch(inputs, model.kernel_size)
        pred = (model._branch(model.trend_weight, model.trend_bias, trend)
                + model._branch(model.remainder_weight, model.remainder_bias, remainder))
        residual = pred - targets
        per_mode = _shared_grads if model.mode == "shared" else _individual_grads
        tw, tb = per_mode(residual, trend, scale)
        rw, rb = per_mode(residual, remainder, scale)
        grads = {"trend_weight": tw, "trend_bias": tb,
                 "remainder_weight": rw, "remainder_bias": rb}
    elif isinstance(model, LinearMap):
        pred = model.forward_batch(inputs)
        residual = pred - targets
        gw = scale * np.einsum("btc,blc->tl", residual, inputs)
        gb = scale * residual.sum(axis=(0, 2))
        grads = {"weight": gw, "bias": gb}
    else:
        raise TypeError(f"cannot differentiate {type(model).__name__}")
    loss = float(np.mean(residual * residual))
    return loss, grads


def grad(model, batch: Sequence[WindowPair]):
    """Analytic gradient of the batch MSE with respect to every parameter."""
    if not batch:
        raise ValueError("empty batch")
    x, y = windows_to_arrays(batch)
    _, grads = grad_arrays(model, x, y)
    return grads


class Sgd:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name, p in params.items():
            p -= self.learning_rate * grads[name]


class Adam:
    """Adaptive moment estimation with bias correction.

    update: p -= lr * m_hat / (sqrt(v_hat) + eps)
    """

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name, p in params.items():
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(p)
                self.v[name] = np.zeros_like(p)
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def make_optimizer(config: TrainConfig):
    if config.optimizer == "adam":
        return Adam(config.learning_rate, config.adam_beta1, config.adam_beta2,
                    config.adam_eps)
    return Sgd(config.learning_rate)


def batched_mse(forward_batch, windows: Sequence[WindowPair],
                chunk: int = EVAL_CHUNK) -> float:
    """MSE over all window elements, accumulated chunk by chunk in order."""
    if not windows:
        raise ValueError("empty window sequence")
    total_sq = 0.0
    total_n = 0
    for start in range(0, len(windows), chunk):
        x, y = windows_to_arrays(windows[start:start + chunk])
        diff = forward_batch(x) - y
        total_sq += float(np.sum(diff * diff))
        total_n += diff.size
    return total_sq / total_n


def snapshot_id(model) -> str:
    """Content hash identifying a parameter snapshot."""
    doc = json.dumps(model_to_dict(model), sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


def fit(model, train_windows: Sequence[WindowPair], val_windows: Sequence[WindowPair],
        config: TrainConfig) -> TrainReport:
    """Train in place and restore the best-validation parameter snapshot.

    Each epoch shuffles the training windows with a generator seeded from
    ``config.seed``, applies one optimizer step per mini-batch, and records
    the train loss (element-weighted over the epoch's batches) and the val
    MSE. Stops early after ``patience`` consecutive epochs without a val
    improvement. With no val windows, the train loss doubles as the
    stopping signal.
    """
    if not train_windows:
        raise ValueError("empty training set")
    params = model.param_arrays()
    optimizer = make_optimizer(config)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = len(train_windows)

    train_losses: list[float] = []
    val_losses: list[float] = []
    best_val = np.inf
    best_epoch = 0
    best_params = {k: v.copy() for k, v in params.items()}
    bad_epochs = 0

    for epoch in range(config.max_epochs):
        perm = rng.permutation(n)
        epoch_sq = 0.0
        epoch_n = 0
        for batch_no, start in enumerate(range(0, n, config.batch_size)):
            idx = perm[start:start + config.batch_size]
            x = np.stack([train_windows[i].input for i in idx])
            y = np.stack([train_windows[i].target for i in idx])
            loss, grads = grad_arrays(model, x, y)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite training loss at epoch {epoch}, batch {batch_no}"
                )
            optimizer.step(params, grads)
            epoch_sq += loss * y.size
            epoch_n += y.size
        train_losses.append(epoch_sq / epoch_n)

        if val_windows:
            val_loss = batched_mse(_forward_of(model), val_windows)
        else:
            val_loss = train_losses[-1]
        if not np.isfinite(val_loss):
            raise TrainingDivergedError(f"non-finite validation loss at epoch {epoch}")
        val_losses.append(val_loss)

        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_params = {k: v.copy() for k, v in params.items()}
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience and bad_epochs > 0:
                break

    for name, p in params.items():
        p[...] = best_params[name]
    return TrainReport(epoch_train_losses=train_losses, epoch_val_losses=val_losses,
                       best_epoch=best_epoch, final_params_snapshot_id=snapshot_id(model))


def _forward_of(model):
    if isinstance(model, (DLinearModel, LinearMap)):
        return model.forward_batch
    raise TypeError(f"cannot evaluate {type(model).__name__}")
