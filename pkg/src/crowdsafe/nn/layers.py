"""Encoder/decoder layers built from attention, deformable attention and a SwiGLU FFN."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from crowdsafe.errors import ConfigurationError, ShapeError
from crowdsafe.nn.attention import MultiHeadParams, multi_head_attention
from crowdsafe.nn.deformable import MSDAParams, ms_deform_attention
from crowdsafe.nn.functional import LAYER_NORM_EPS, FFNParams, ffn_forward, layer_norm


@dataclass
class NormParams:
    gain: np.ndarray
    bias: np.ndarray

    @classmethod
    def unit(cls, d_model):
        return cls(np.ones(d_model), np.zeros(d_model))


@dataclass
class TransformerLayerParams:
    """Sub-layer weights. ``self_attn`` is used only by decoder layers.

    ``norms`` holds one entry per residual block: 2 for an encoder, 3 for a
    decoder.
    """

    msda: MSDAParams
    ffn: FFNParams
    norms: list
    self_attn: Optional[MultiHeadParams] = None
    eps: float = LAYER_NORM_EPS

    @classmethod
    def random(cls, role, d_model, d_ff, rng, num_heads=2, num_levels=2, num_points=2):
        return cls(
            msda=MSDAParams.random(d_model, num_heads, num_levels, num_points, rng),
            ffn=FFNParams.random(d_model, d_ff, rng, gated=True),
            norms=[NormParams.unit(d_model) for _ in range(3 if role == "decoder" else 2)],
            self_attn=MultiHeadParams.random(d_model, num_heads, rng) if role == "decoder" else None,
        )


def _add_norm(x, y, norm, eps):
    return layer_norm(x + y, norm.gain, norm.bias, eps)


def transformer_layer_forward(role, query, ref_points, value_maps, params: TransformerLayerParams):
    """One encoder or decoder layer.

    encoder: MSDA -> add&norm -> SwiGLU FFN -> add&norm
    decoder: self-attention -> add&norm -> MSDA -> add&norm -> SwiGLU FFN -> add&norm
    """
    if params.ffn.V is None:
        raise ConfigurationError("transformer layers use the SwiGLU FFN; V is required")
    x = np.asarray(query, dtype=np.float64)
    if role == "encoder":
        if len(params.norms) != 2:
            raise ShapeError("encoder layer needs 2 norm parameter sets")
        norm_attn, norm_ffn = params.norms
    elif role == "decoder":
        if len(params.norms) != 3 or params.self_attn is None:
            raise ConfigurationError("decoder layer needs self-attention params and 3 norms")
        norm_self, norm_attn, norm_ffn = params.norms
        x = _add_norm(x, multi_head_attention(x, x, x, params.self_attn), norm_self, params.eps)
    else:
        raise ValueError(f"unknown role {role!r}")
    x = _add_norm(x, ms_deform_attention(x, ref_points, value_maps, params.msda), norm_attn, params.eps)
    x = _add_norm(x, ffn_forward("swiglu", x, params.ffn), norm_ffn, params.eps)
    return x
