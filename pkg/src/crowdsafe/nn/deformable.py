"""Multi-scale deformable attention on explicit feature maps.

Reference points are normalized to [0, 1] and mapped onto level ``l`` as
``(x * (W_l - 1), y * (H_l - 1))``. Predicted offsets are in grid units of
that level and are added to the mapped reference. Samples are bilinear;
anything outside the map reads as zero. Per head, the attention logits of
all ``L * K`` points are normalized by one softmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from crowdsafe.errors import ShapeError
from crowdsafe.nn.functional import softmax
from crowdsafe.nn.tensor import as_tensor


def bilinear_sample(feature_map, p):
    """Sample an (H, W, d) map at real grid coordinates ``p = (x, y)``.

    ``x`` indexes columns and ``y`` rows. Corners outside the map
    contribute zero.
    """
    x, y = p
    fmap = np.asarray(feature_map, dtype=np.float64)
    H, W = fmap.shape[:2]
    x0 = math.floor(x)
    y0 = math.floor(y)
    fx = x - x0
    fy = y - y0
    out = np.zeros(fmap.shape[2:], dtype=np.float64)
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        row = y0 + dy
        if wy == 0.0 or not 0 <= row < H:
            continue
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            col = x0 + dx
            if wx == 0.0 or not 0 <= col < W:
                continue
            out = out + (wy * wx) * fmap[row, col]
    return out


@dataclass
class MSDAParams:
    num_heads: int
    num_levels: int
    num_points: int
    value_proj: np.ndarray
    offset_proj: np.ndarray
    offset_bias: np.ndarray
    weight_proj: np.ndarray
    weight_bias: np.ndarray
    output_proj: np.ndarray

    def __post_init__(self):
        h, L, K = self.num_heads, self.num_levels, self.num_points
        if min(h, L, K) < 1:
            raise ShapeError("num_heads, num_levels and num_points must all be >= 1")
        self.value_proj = as_tensor(self.value_proj, "value_proj", ndim=2)
        d = self.value_proj.shape[0]
        if self.value_proj.shape != (d, d):
            raise ShapeError("value_proj must be square (d_model x d_model)")
        if d % h:
            raise ShapeError(f"d_model {d} not divisible by {h} heads")
        expected = {
            "offset_proj": (d, h * L * K * 2),
            "offset_bias": (h * L * K * 2,),
            "weight_proj": (d, h * L * K),
            "weight_bias": (h * L * K,),
            "output_proj": (d, d),
        }
        for name, shape in expected.items():
            arr = as_tensor(getattr(self, name), name)
            if arr.shape != shape:
                raise ShapeError(f"{name} has shape {arr.shape}, expected {shape}")
            setattr(self, name, arr)

    @property
    def d_model(self):
        return self.value_proj.shape[0]

    @classmethod
    def random(cls, d_model, num_heads, num_levels, num_points, rng, offset_scale=0.5):
        hlk = num_heads * num_levels * num_points
        s = 1.0 / math.sqrt(d_model)
        return cls(
            num_heads, num_levels, num_points,
            value_proj=rng.normal(0, s, (d_model, d_model)),
            offset_proj=rng.normal(0, offset_scale * s, (d_model, hlk * 2)),
            offset_bias=rng.normal(0, offset_scale, hlk * 2),
            weight_proj=rng.normal(0, s, (d_model, hlk)),
            weight_bias=rng.normal(0, 0.1, hlk),
            output_proj=rng.normal(0, s, (d_model, d_model)),
        )

    @classmethod
    def identity(cls, d_model, num_heads=1, num_levels=1, num_points=1):
        """Identity value/output projections, zero offsets, uniform weights."""
        hlk = num_heads * num_levels * num_points
        return cls(
            num_heads, num_levels, num_points,
            value_proj=np.eye(d_model),
            offset_proj=np.zeros((d_model, hlk * 2)),
            offset_bias=np.zeros(hlk * 2),
            weight_proj=np.zeros((d_model, hlk)),
            weight_bias=np.zeros(hlk),
            output_proj=np.eye(d_model),
        )


def _normalize_refs(ref_points, n, L):
    refs = as_tensor(ref_points, "ref_points")
    if refs.ndim == 2:
        refs = np.repeat(refs[:, None, :], L, axis=1)
    if refs.shape != (n, L, 2):
        raise ShapeError(f"ref_points shape {refs.shape}, expected ({n}, {L}, 2) or ({n}, 2)")
    return refs


def sampling_plan(query, params: MSDAParams):
    """Offsets (n, h, L, K, 2) and normalized weights (n, h, L, K) per query."""
    n = query.shape[0]
    h, L, K = params.num_heads, params.num_levels, params.num_points
    offsets = (query @ params.offset_proj + params.offset_bias).reshape(n, h, L, K, 2)
    logits = (query @ params.weight_proj + params.weight_bias).reshape(n, h, L * K)
    weights = softmax(logits).reshape(n, h, L, K)
    return offsets, weights


def ms_deform_attention(query, ref_points, value_maps, params: MSDAParams):
    """Deformable attention of ``n`` queries over ``L`` feature maps.

    ``value_maps[l]`` has shape ``(H_l, W_l, d_model)``; ``ref_points`` is
    ``(n, L, 2)`` or ``(n, 2)`` in normalized ``(x, y)``.
    """
    query = as_tensor(query, "query", ndim=2)
    n, d = query.shape
    h, L = params.num_heads, params.num_levels
    if d != params.d_model:
        raise ShapeError(f"query width {d} != d_model {params.d_model}")
    if len(value_maps) != L:
        raise ShapeError(f"{len(value_maps)} value maps for {L} levels")
    refs = _normalize_refs(ref_points, n, L)
    projected = []
    for fmap in value_maps:
        fmap = as_tensor(fmap, "value map", ndim=3)
        if fmap.shape[2] != d:
            raise ShapeError(f"value map depth {fmap.shape[2]} != d_model {d}")
        projected.append(fmap @ params.value_proj)

    offsets, weights = sampling_plan(query, params)
    dh = d // h
    out = np.zeros((n, d))
    for q in range(n):
        for head in range(h):
            cols = slice(head * dh, (head + 1) * dh)
            acc = np.zeros(dh)
            for lvl, fmap in enumerate(projected):
                H_l, W_l = fmap.shape[:2]
                bx = refs[q, lvl, 0] * (W_l - 1)
                by = refs[q, lvl, 1] * (H_l - 1)
                head_map = fmap[:, :, cols]
                for k in range(params.num_points):
                    ox, oy = offsets[q, head, lvl, k]
                    acc += weights[q, head, lvl, k] * bilinear_sample(head_map, (bx + ox, by + oy))
            out[q, cols] = acc
    return out @ params.output_proj
