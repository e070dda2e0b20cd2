"""A small multilayer perceptron with hand-written backpropagation.

Row-vector convention: a batch ``a`` of shape (n, in) feeds a layer as
``z = a W^T + b`` with ``W`` of shape (out, in), so the per-sample weight
gradient is ``dL/dz a^T``.

A layer with ``activation="swiglu"`` is gated: it owns a second matrix
``V`` and computes ``swish_c(a W^T + b) * (a V^T + b)`` with the bias
shared by both branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from crowdsafe.errors import ConfigurationError, DomainError, ShapeError
from crowdsafe.nn.functional import activation, activation_grad, softmax
from crowdsafe.nn.tensor import as_matrix, as_tensor

ACTIVATIONS = ("identity", "relu", "gelu", "swish", "swiglu")
LOSSES = ("mse", "cross_entropy")


@dataclass
class Layer:
    W: np.ndarray
    b: np.ndarray
    activation: str = "identity"
    V: Optional[np.ndarray] = None
    c: float = 1.0

    def __post_init__(self):
        self.W = as_tensor(self.W, "W", ndim=2)
        self.b = as_tensor(self.b, "b", ndim=1)
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {self.activation!r}")
        if self.b.shape != (self.W.shape[0],):
            raise ShapeError(f"bias {self.b.shape} does not match W {self.W.shape}")
        if self.activation == "swiglu":
            if self.V is None:
                raise ConfigurationError("swiglu layer needs V")
            self.V = as_tensor(self.V, "V", ndim=2)
            if self.V.shape != self.W.shape:
                raise ShapeError(f"V {self.V.shape} must match W {self.W.shape}")
        elif self.V is not None:
            raise ConfigurationError("V is only used by swiglu layers")

    def params(self):
        out = {"W": self.W, "b": self.b}
        if self.V is not None:
            out["V"] = self.V
        return out


@dataclass
class MLPNet:
    layers: list

    def __post_init__(self):
        if not self.layers:
            raise ShapeError("network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.W.shape[1] != prev.W.shape[0]:
                raise ShapeError(
                    f"layer widths do not chain: {prev.W.shape} -> {nxt.W.shape}"
                )

    @property
    def input_width(self):
        return self.layers[0].W.shape[1]

    def params(self):
        return [layer.params() for layer in self.layers]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    seed: int = 0
    loss: str = "mse"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate must be positive")
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.loss not in LOSSES:
            raise ConfigurationError(f"unknown loss {self.loss!r}")


def random_layer(n_in, n_out, act, rng, c=1.0):
    scale = math.sqrt(2.0 / n_in) if act == "relu" else math.sqrt(1.0 / n_in)
    W = rng.normal(0.0, scale, (n_out, n_in))
    V = rng.normal(0.0, scale, (n_out, n_in)) if act == "swiglu" else None
    return Layer(W, np.zeros(n_out), act, V, c)


def forward(net: MLPNet, x):
    """Return the network output and per-layer caches for backprop."""
    a = as_matrix(x)
    if a.shape[1] != net.input_width:
        raise ShapeError(f"input width {a.shape[1]} != {net.input_width}")
    caches = []
    for layer in net.layers:
        z = a @ layer.W.T + layer.b
        if layer.activation == "swiglu":
            u = a @ layer.V.T + layer.b
            out = activation("swish", z, layer.c) * u
            caches.append((a, z, u))
        else:
            out = activation(layer.activation, z, layer.c)
            caches.append((a, z, None))
        a = out
    return a, caches


def loss_value(kind, output, target):
    target = np.asarray(target, dtype=np.float64).reshape(output.shape)
    n = output.shape[0]
    if kind == "mse":
        return float(np.mean((output - target) ** 2))
    if kind == "cross_entropy":
        if output.shape[1] == 1:
            # binary logistic loss on a single logit
            z = output[:, 0]
            t = target[:, 0]
            return float(np.mean(np.logaddexp(0.0, z) - t * z))
        shifted = output - output.max(axis=1, keepdims=True)
        log_p = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        return float(-(target * log_p).sum() / n)
    raise ConfigurationError(f"unknown loss {kind!r}")


def loss_grad(kind, output, target):
    """dL/da for the final activation ``a``."""
    target = np.asarray(target, dtype=np.float64).reshape(output.shape)
    n = output.shape[0]
    if kind == "mse":
        return 2.0 * (output - target) / output.size
    if kind == "cross_entropy":
        if output.shape[1] == 1:
            return (1.0 / (1.0 + np.exp(-output)) - target) / n
        return (softmax(output) - target) / n
    raise ConfigurationError(f"unknown loss {kind!r}")


def evaluate_loss(net, x, target, kind="mse"):
    out, _ = forward(net, x)
    return loss_value(kind, out, target)


def backward_pass(net: MLPNet, x, target, kind="mse"):
    """Gradients of the loss w.r.t. every layer parameter.

    Returns ``(loss, grads)`` where ``grads[l]`` mirrors ``net.layers[l].params()``.
    """
    out, caches = forward(net, x)
    loss = loss_value(kind, out, target)
    grad_a = loss_grad(kind, out, target)
    grads = [None] * len(net.layers)
    for l in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[l]
        a_prev, z, u = caches[l]
        if layer.activation == "swiglu":
            s = activation("swish", z, layer.c)
            grad_z = grad_a * u * activation_grad("swish", z, layer.c)
            grad_u = grad_a * s
            grads[l] = {
                "W": grad_z.T @ a_prev,
                "b": grad_z.sum(axis=0) + grad_u.sum(axis=0),
                "V": grad_u.T @ a_prev,
            }
            grad_a = grad_z @ layer.W + grad_u @ layer.V
        else:
            grad_z = grad_a * activation_grad(layer.activation, z, layer.c)
            grads[l] = {"W": grad_z.T @ a_prev, "b": grad_z.sum(axis=0)}
            grad_a = grad_z @ layer.W
    return loss, grads


def sgd_step(net: MLPNet, grads, cfg: TrainConfig):
    """Return a new network with every parameter moved by ``-lr * grad``."""
    if len(grads) != len(net.layers):
        raise ShapeError("one gradient set per layer is required")
    new_layers = []
    for layer, g in zip(net.layers, grads):
        params = layer.params()
        if set(g) != set(params):
            raise ShapeError(f"gradient keys {sorted(g)} != parameter keys {sorted(params)}")
        updated = {}
        for key, value in params.items():
            gk = np.asarray(g[key], dtype=np.float64)
            if gk.shape != value.shape:
                raise ShapeError(f"gradient for {key} has shape {gk.shape}, expected {value.shape}")
            updated[key] = value - cfg.learning_rate * gk
        new_layers.append(replace(layer, **updated))
    return MLPNet(new_layers)


def central_difference(fn, theta, step=1e-5):
    """Central-difference gradient of scalar ``fn`` at array ``theta``."""
    if not step > 0:
        raise DomainError("step must be positive")
    theta = np.array(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    flat = theta.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = fn(theta)
        flat[i] = orig - step
        down = fn(theta)
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * step)
    return grad


def finite_diff_grad(net: MLPNet, x, target, kind="mse", step=1e-5):
    """Numerical counterpart of :func:`backward_pass` (gradients only)."""
    grads = []
    for l, layer in enumerate(net.layers):
        layer_grads = {}
        for key, value in layer.params().items():
            def fn(theta, l=l, key=key):
                layers = list(net.layers)
                layers[l] = replace(layers[l], **{key: theta})
                return evaluate_loss(MLPNet(layers), x, target, kind)

            layer_grads[key] = central_difference(fn, value, step)
        grads.append(layer_grads)
    return grads


def max_relative_error(analytic, numeric, floor=1e-8):
    """Largest per-coordinate relative error where ``|numeric| > floor``."""
    worst = 0.0
    for ga, gn in zip(analytic, numeric):
        for key in gn:
            a = np.asarray(ga[key]).reshape(-1)
            f = np.asarray(gn[key]).reshape(-1)
            mask = np.abs(f) > floor
            if not mask.any():
                continue
            rel = np.abs(a[mask] - f[mask]) / np.maximum(np.abs(a[mask]), np.abs(f[mask]))
            worst = max(worst, float(rel.max()))
    return worst


@dataclass
class GradCheckResult:
    max_rel_error: float
    per_net: list = field(default_factory=list)

    def passed(self, tol=1e-4):
        return self.max_rel_error <= tol


def gradient_check_suite(n_nets=20, seed=0, step=1e-5):
    """Compare analytic and numerical gradients on random two-layer nets."""
    rng = np.random.default_rng(seed)
    hidden_acts = ("relu", "gelu", "swish", "swiglu", "identity")
    errors = []
    for i in range(n_nets):
        n_in = int(rng.integers(1, 5))
        n_hidden = int(rng.integers(2, 7))
        n_out = int(rng.integers(1, 4))
        act = hidden_acts[i % len(hidden_acts)]
        kind = LOSSES[i % 2]
        net = MLPNet([
            random_layer(n_in, n_hidden, act, rng, c=float(rng.uniform(0.5, 2.0))),
            random_layer(n_hidden, n_out, "identity", rng),
        ])
        for layer in net.layers:
            layer.b = rng.normal(0.0, 0.3, layer.b.shape)
        x = rng.normal(size=(int(rng.integers(1, 6)), n_in))
        if kind == "mse":
            target = rng.normal(size=(x.shape[0], n_out))
        else:
            target = np.eye(n_out)[rng.integers(0, n_out, x.shape[0])]
            if n_out == 1:
                target = rng.integers(0, 2, (x.shape[0], 1)).astype(float)
        _, analytic = backward_pass(net, x, target, kind)
        numeric = finite_diff_grad(net, x, target, kind, step)
        errors.append(max_relative_error(analytic, numeric))
    return GradCheckResult(max(errors), errors)
