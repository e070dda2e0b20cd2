"""Numerical kernels: FFN variants, attention, deformable attention and a small MLP."""

from crowdsafe.nn.attention import MultiHeadParams, multi_head_attention, scaled_dot_attention
from crowdsafe.nn.deformable import MSDAParams, bilinear_sample, ms_deform_attention
from crowdsafe.nn.functional import (
    FFNParams,
    activation,
    activation_grad,
    ffn_forward,
    layer_norm,
    softmax,
    swiglu,
)
from crowdsafe.nn.layers import NormParams, TransformerLayerParams, transformer_layer_forward
from crowdsafe.nn.mlp import (
    Layer,
    MLPNet,
    TrainConfig,
    backward_pass,
    finite_diff_grad,
    gradient_check_suite,
    sgd_step,
)
from crowdsafe.nn.tensor import Tensor, as_tensor
from crowdsafe.nn.toy import ToyTrace, make_blobs, make_moons, train_toy_classifier

__all__ = [
    "FFNParams", "Layer", "MLPNet", "MSDAParams", "MultiHeadParams", "NormParams",
    "Tensor", "ToyTrace", "TrainConfig", "TransformerLayerParams", "activation",
    "activation_grad", "as_tensor", "backward_pass", "bilinear_sample", "ffn_forward",
    "finite_diff_grad", "gradient_check_suite", "layer_norm", "make_blobs", "make_moons",
    "ms_deform_attention", "multi_head_attention", "scaled_dot_attention", "sgd_step",
    "softmax", "swiglu", "train_toy_classifier", "transformer_layer_forward",
]
