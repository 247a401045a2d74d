"""Surrogate-gradient trainer: MSE on standardized targets, Adam or
momentum SGD, early stopping on validation R^2, JSON-lines logging."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset, iter_batches
from .metrics import compute_r2
from .models import ForecastModel
from .tensor import Tensor


@dataclass
class TrainConfig:
    lr: float = 1e-3
    epochs: int = 20
    batch_size: int = 32
    seed: int = 0
    optimizer: str = "adam"  # adam | sgd
    momentum: float = 0.9
    patience: int = 30  # early-stopping tolerance, in epochs
    min_epochs: int = 1


class DivergenceError(RuntimeError):
    pass


class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p.data) for _, p in params]
        self.v = [np.zeros_like(p.data) for _, p in params]
        self.t = 0

    def step(self):
        self.t += 1
        for i, (_, p) in enumerate(self.params):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            mhat = self.m[i] / (1 - self.beta1**self.t)
            vhat = self.v[i] / (1 - self.beta2**self.t)
            p.data = p.data - self.lr * mhat / (np.sqrt(vhat) + self.eps)


class MomentumSGD:
    def __init__(self, params, lr, momentum=0.9):
        self.params = params
        self.lr = lr
        self.momentum = momentum
        self.buf = [np.zeros_like(p.data) for _, p in params]

    def step(self):
        for i, (_, p) in enumerate(self.params):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            self.buf[i] = self.momentum * self.buf[i] + g
            p.data = p.data - self.lr * self.buf[i]


def mse_loss(pred: Tensor, target: np.ndarray) -> Tensor:
    diff = pred - Tensor(target)
    return (diff * diff).mean()


def standardize_target(model: ForecastModel, target: np.ndarray) -> np.ndarray:
    enc = model.encoder
    return (target - enc.channel_mean) / enc.channel_std


def destandardize(model: ForecastModel, values: np.ndarray) -> np.ndarray:
    enc = model.encoder
    return values * enc.channel_std + enc.channel_mean


def predict(model: ForecastModel, history: np.ndarray,
            offsets: np.ndarray | None = None,
            batch_size: int = 256) -> np.ndarray:
    """De-standardized predictions for a full split, eval mode."""
    model.set_training(False)
    outs = []
    for lo in range(0, history.shape[0], batch_size):
        off = None if offsets is None else offsets[lo:lo + batch_size]
        pred = model(history[lo:lo + batch_size], off)
        outs.append(pred.data)
    model.set_training(True)
    return destandardize(model, np.concatenate(outs, axis=0))


def train(model: ForecastModel, dataset: Dataset,
          config: TrainConfig, log_path: str | Path | None = None) -> dict:
    """Fit the model; returns the training log (also written as JSONL)."""
    model.encoder.fit_normalization(dataset.train.history)
    params = model.parameters()
    if config.optimizer == "adam":
        opt = Adam(params, config.lr)
    elif config.optimizer == "sgd":
        opt = MomentumSGD(params, config.lr, config.momentum)
    else:
        raise ValueError(f"unknown optimizer {config.optimizer!r}")
    rng = np.random.default_rng(config.seed)
    log: list[dict] = []
    best_r2 = -np.inf
    best_state = None
    since_best = 0
    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        model.set_training(True)
        losses = []
        for hist, targ, offs in iter_batches(dataset.train, config.batch_size,
                                             rng):
            if hist.shape[0] < 2:
                continue  # batch-norm needs a real batch
            model.zero_grad()
            pred = model(hist, offs)
            loss = mse_loss(pred, standardize_target(model, targ))
            if not np.isfinite(loss.data):
                raise DivergenceError(
                    f"loss became non-finite at epoch {epoch}"
                )
            loss.backward()
            opt.step()
            losses.append(float(loss.data))
        valid_pred = predict(model, dataset.valid.history,
                             dataset.valid.offsets)
        valid_r2 = compute_r2(valid_pred, dataset.valid.target)
        entry = {
            "epoch": epoch,
            "train_loss": float(np.mean(losses)) if losses else float("nan"),
            "valid_r2": float(valid_r2),
            "wall_ms": int(1000 * (time.perf_counter() - t0)),
        }
        log.append(entry)
        if valid_r2 > best_r2:
            best_r2 = valid_r2
            best_state = (
                [(name, p.data.copy()) for name, p in params],
                [(name, b.copy()) for name, b in model.buffers()],
            )
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience and epoch + 1 >= config.min_epochs:
                break
    if best_state is not None:
        lookup = dict(params)
        for name, data in best_state[0]:
            lookup[name].data = data
        buf_lookup = dict(model.buffers())
        for name, data in best_state[1]:
            buf_lookup[name][...] = data
    if log_path is not None:
        with open(log_path, "w") as fh:
            for entry in log:
                fh.write(json.dumps(entry) + "\n")
    return {"log": log, "best_valid_r2": float(best_r2)}
