"""Scaled dot-product and multi-head attention."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from crowdsafe.errors import ShapeError
from crowdsafe.nn.functional import softmax
from crowdsafe.nn.tensor import as_tensor


def scaled_dot_attention(Q, K, V):
    """softmax(Q K^T / sqrt(d)) V for Q (n, d), K (m, d), V (m, d_v)."""
    Q = as_tensor(Q, "Q", ndim=2)
    K = as_tensor(K, "K", ndim=2)
    V = as_tensor(V, "V", ndim=2)
    if Q.shape[1] != K.shape[1]:
        raise ShapeError(f"query width {Q.shape[1]} != key width {K.shape[1]}")
    if K.shape[0] != V.shape[0]:
        raise ShapeError(f"{K.shape[0]} keys but {V.shape[0]} values")
    scores = Q @ K.T / math.sqrt(Q.shape[1])
    return softmax(scores) @ V


@dataclass
class MultiHeadParams:
    """Per-head projections ``(W_q, W_k, W_v)`` plus the output matrix ``W_o``."""

    heads: list
    W_o: np.ndarray

    def __post_init__(self):
        if not self.heads:
            raise ShapeError("need at least one head")
        self.heads = [
            tuple(as_tensor(m, name, ndim=2) for m, name in zip(triple, ("W_q", "W_k", "W_v")))
            for triple in self.heads
        ]
        self.W_o = as_tensor(self.W_o, "W_o", ndim=2)
        shape = self.heads[0][0].shape
        for triple in self.heads:
            if any(m.shape != shape for m in triple):
                raise ShapeError("all head projections must share one shape")
        if self.W_o.shape[0] != len(self.heads) * shape[1]:
            raise ShapeError(
                f"W_o has {self.W_o.shape[0]} rows, expected {len(self.heads)} x {shape[1]}"
            )

    @property
    def num_heads(self):
        return len(self.heads)

    @property
    def d_model(self):
        return self.heads[0][0].shape[0]

    @property
    def d_head(self):
        return self.heads[0][0].shape[1]

    @classmethod
    def random(cls, d_model, num_heads, rng, d_head=None):
        d_head = d_model // num_heads if d_head is None else d_head
        s = 1.0 / math.sqrt(d_model)
        heads = [tuple(rng.normal(0, s, (d_model, d_head)) for _ in range(3)) for _ in range(num_heads)]
        W_o = rng.normal(0, 1.0 / math.sqrt(num_heads * d_head), (num_heads * d_head, d_model))
        return cls(heads, W_o)


def multi_head_attention(Q, K, V, params: MultiHeadParams):
    Q = as_tensor(Q, "Q", ndim=2)
    K = as_tensor(K, "K", ndim=2)
    V = as_tensor(V, "V", ndim=2)
    for name, t in (("Q", Q), ("K", K), ("V", V)):
        if t.shape[1] != params.d_model:
            raise ShapeError(f"{name} width {t.shape[1]} != d_model {params.d_model}")
    outputs = [scaled_dot_attention(Q @ wq, K @ wk, V @ wv) for wq, wk, wv in params.heads]
    return np.concatenate(outputs, axis=1) @ params.W_o
