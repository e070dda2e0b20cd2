"""Activations, softmax, layer norm and the position-wise FFN variants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from crowdsafe.errors import ConfigurationError, DomainError, ShapeError
from crowdsafe.nn.tensor import as_matrix, as_tensor

LAYER_NORM_EPS = 1e-5

_erf = np.vectorize(math.erf, otypes=[np.float64])


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def normal_cdf(x):
    """Standard normal CDF, 0.5 * (1 + erf(x / sqrt 2))."""
    return 0.5 * (1.0 + _erf(np.asarray(x, dtype=np.float64) / math.sqrt(2.0)))


def normal_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def activation(kind, x, c=1.0):
    """Elementwise activation.

    ``kind`` is one of ``"relu"``, ``"gelu"``, ``"swish"`` (shape
    parameter ``c``) or ``"identity"``.
    """
    x = as_tensor(x)
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "gelu":
        return x * normal_cdf(x)
    if kind == "swish":
        if c <= 0:
            raise DomainError("swish shape parameter must be positive")
        return x * sigmoid(c * x)
    if kind == "identity":
        return x.copy()
    raise ValueError(f"unknown activation {kind!r}")


def activation_grad(kind, x, c=1.0):
    """Derivative of :func:`activation` w.r.t. its input.

    ReLU uses the subgradient 0 at the origin.
    """
    x = np.asarray(x, dtype=np.float64)
    if kind == "relu":
        return (x > 0).astype(np.float64)
    if kind == "gelu":
        return normal_cdf(x) + x * normal_pdf(x)
    if kind == "swish":
        s = sigmoid(c * x)
        return s + c * x * s * (1.0 - s)
    if kind == "identity":
        return np.ones_like(x)
    raise ValueError(f"unknown activation {kind!r}")


def softmax(rows):
    """Row-wise softmax over the last axis with max subtraction."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 0 or rows.shape[-1] == 0:
        raise DomainError("softmax needs at least one entry per row")
    if not np.all(np.isfinite(rows)):
        raise DomainError("softmax input contains non-finite values")
    shifted = rows - rows.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def layer_norm(x, gain, bias, eps=LAYER_NORM_EPS):
    x = as_tensor(x)
    gain = np.asarray(gain, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if gain.shape != (x.shape[-1],) or bias.shape != (x.shape[-1],):
        raise ShapeError("gain/bias width must match the last dimension")
    mean = x.mean(axis=-1, keepdims=True)
    var = ((x - mean) ** 2).mean(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps) * gain + bias


@dataclass
class FFNParams:
    """Weights of one feed-forward sublayer.

    ``W1``/``V`` map d_model -> d_ff, ``W2`` maps d_ff -> d_model. ``V`` is
    only needed by the SwiGLU variant; ``c`` is the Swish shape parameter.
    """

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    V: Optional[np.ndarray] = None
    c: float = 1.0

    def __post_init__(self):
        self.W1 = as_tensor(self.W1, "W1", ndim=2)
        self.b1 = as_tensor(self.b1, "b1", ndim=1)
        self.W2 = as_tensor(self.W2, "W2", ndim=2)
        self.b2 = as_tensor(self.b2, "b2", ndim=1)
        d_model, d_ff = self.W1.shape
        if self.b1.shape != (d_ff,) or self.W2.shape != (d_ff, d_model) or self.b2.shape != (d_model,):
            raise ShapeError(
                f"inconsistent FFN shapes W1{self.W1.shape} b1{self.b1.shape} "
                f"W2{self.W2.shape} b2{self.b2.shape}"
            )
        if self.V is not None:
            self.V = as_tensor(self.V, "V", ndim=2)
            if self.V.shape != self.W1.shape:
                raise ShapeError(f"V{self.V.shape} must match W1{self.W1.shape}")
        if not self.c > 0:
            raise ConfigurationError("Swish shape parameter c must be positive")

    @property
    def d_model(self):
        return self.W1.shape[0]

    @property
    def d_ff(self):
        return self.W1.shape[1]

    @classmethod
    def random(cls, d_model, d_ff, rng, gated=True, scale=None, c=1.0):
        scale = 1.0 / math.sqrt(d_model) if scale is None else scale
        return cls(
            W1=rng.normal(0, scale, (d_model, d_ff)),
            b1=rng.normal(0, 0.1, d_ff),
            W2=rng.normal(0, 1.0 / math.sqrt(d_ff), (d_ff, d_model)),
            b2=rng.normal(0, 0.1, d_model),
            V=rng.normal(0, scale, (d_model, d_ff)) if gated else None,
            c=c,
        )


def _check_width(x, params):
    if x.shape[-1] != params.d_model:
        raise ShapeError(f"input width {x.shape[-1]} != d_model {params.d_model}")


def swiglu(x, params: FFNParams):
    """Swish_c(x W1 + b1) * (x V + b1); the bias is shared by both branches."""
    if params.V is None:
        raise ConfigurationError("SwiGLU needs the gate matrix V")
    x = as_matrix(x)
    _check_width(x, params)
    gate = x @ params.W1 + params.b1
    linear = x @ params.V + params.b1
    return activation("swish", gate, params.c) * linear


def ffn_forward(variant, x, params: FFNParams):
    x = as_matrix(x)
    _check_width(x, params)
    if variant == "swiglu":
        hidden = swiglu(x, params)
    elif variant in ("relu", "gelu"):
        hidden = activation(variant, x @ params.W1 + params.b1)
    else:
        raise ValueError(f"unknown FFN variant {variant!r}")
    return hidden @ params.W2 + params.b2
