"""Two-class toy problems for comparing ReLU and SwiGLU hidden layers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from crowdsafe.errors import DomainError, InputError
from crowdsafe.nn.mlp import MLPNet, TrainConfig, backward_pass, evaluate_loss, forward, random_layer, sgd_step

HIDDEN_WIDTH = 16
GRID_RESOLUTION = 60


def make_moons(n_samples=200, noise=0.1, seed=0):
    """Two interleaved half circles; labels 0 (upper) and 1 (lower)."""
    rng = np.random.default_rng(seed)
    n_upper = n_samples // 2
    n_lower = n_samples - n_upper
    t_up = np.linspace(0.0, math.pi, n_upper)
    t_low = np.linspace(0.0, math.pi, n_lower)
    upper = np.column_stack([np.cos(t_up), np.sin(t_up)])
    lower = np.column_stack([1.0 - np.cos(t_low), 0.5 - np.sin(t_low)])
    X = np.vstack([upper, lower]) + rng.normal(0.0, noise, (n_samples, 2))
    y = np.concatenate([np.zeros(n_upper), np.ones(n_lower)])
    return X, y


def make_blobs(n_samples=100, separation=3.0, spread=0.3, seed=0):
    """Two well separated Gaussian blobs on the x axis."""
    rng = np.random.default_rng(seed)
    half = n_samples // 2
    a = rng.normal(0.0, spread, (half, 2)) + [-separation / 2, 0.0]
    b = rng.normal(0.0, spread, (n_samples - half, 2)) + [separation / 2, 0.0]
    return np.vstack([a, b]), np.concatenate([np.zeros(half), np.ones(n_samples - half)])


def build_classifier(variant, rng, hidden=HIDDEN_WIDTH):
    if variant not in ("relu", "swiglu"):
        raise ValueError(f"unknown variant {variant!r}")
    return MLPNet([random_layer(2, hidden, variant, rng), random_layer(hidden, 1, "identity", rng)])


@dataclass
class ToyTrace:
    variant: str
    losses: list
    final_loss: float
    accuracy: float
    failed: bool = False
    grid_x: np.ndarray = field(default=None, repr=False)
    grid_y: np.ndarray = field(default=None, repr=False)
    grid_values: np.ndarray = field(default=None, repr=False)

    def epochs_to_reach(self, level):
        """First 1-based epoch whose recorded loss is <= ``level``, else None."""
        for i, value in enumerate(self.losses):
            if value <= level:
                return i + 1
        return None


def decision_grid(net, X, resolution=GRID_RESOLUTION, margin=0.5):
    x_lo, y_lo = X.min(axis=0) - margin
    x_hi, y_hi = X.max(axis=0) + margin
    gx = np.linspace(x_lo, x_hi, resolution)
    gy = np.linspace(y_lo, y_hi, resolution)
    xx, yy = np.meshgrid(gx, gy)
    out, _ = forward(net, np.column_stack([xx.ravel(), yy.ravel()]))
    return gx, gy, out.reshape(resolution, resolution)


def train_toy_classifier(variant, X, y, cfg: TrainConfig = TrainConfig()):
    """Full-batch gradient descent on a two-layer net.

    ``losses[e]`` is the training loss after epoch ``e + 1``. A
    non-finite loss stops training and marks the trace failed.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1, 1)
    if X.shape[0] == 0:
        raise InputError("dataset is empty")
    if len(np.unique(y)) != 2:
        raise InputError("dataset must contain exactly two classes")
    rng = np.random.default_rng(cfg.seed)
    net = build_classifier(variant, rng)
    losses = []
    failed = False
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(cfg.epochs):
            try:
                _, grads = backward_pass(net, X, y, cfg.loss)
                net = sgd_step(net, grads, cfg)
                loss = evaluate_loss(net, X, y, cfg.loss)
            except DomainError:
                loss = float("nan")
            if not math.isfinite(loss):
                failed = True
                losses.append(float("nan"))
                break
            losses.append(loss)
    if failed:
        return ToyTrace(variant, losses, float("nan"), float("nan"), failed=True)
    out, _ = forward(net, X)
    threshold = 0.5 if cfg.loss == "mse" else 0.0
    accuracy = float(np.mean((out[:, 0] > threshold) == (y[:, 0] > 0.5)))
    gx, gy, values = decision_grid(net, X)
    return ToyTrace(variant, losses, losses[-1], accuracy, False, gx, gy, values)


def loss_table(relu: ToyTrace, swiglu: ToyTrace):
    """Rows ``(epoch, loss_relu, loss_swiglu)``; a missing entry is NaN."""
    n = max(len(relu.losses), len(swiglu.losses))
    rows = []
    for e in range(n):
        lr = relu.losses[e] if e < len(relu.losses) else float("nan")
        ls = swiglu.losses[e] if e < len(swiglu.losses) else float("nan")
        rows.append((e + 1, lr, ls))
    return rows
