import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crowdsafe.errors import ConfigurationError, DomainError, ShapeError
from crowdsafe.nn import FFNParams, activation, ffn_forward, layer_norm, softmax, swiglu
from crowdsafe.nn.functional import activation_grad

# 1 / (1 + e^-1), evaluated independently
SIGMOID_1 = 0.7310585786300049


class TestActivation:
    def test_swish_at_zero(self):
        assert activation("swish", [0.0])[0] == 0.0

    def test_relu_values(self):
        np.testing.assert_array_equal(activation("relu", [-3.0, 2.0]), [0.0, 2.0])

    def test_swish_one(self):
        assert activation("swish", [1.0])[0] == pytest.approx(SIGMOID_1, abs=1e-12)
        assert SIGMOID_1 == pytest.approx(1.0 / (1.0 + math.exp(-1.0)), abs=1e-15)

    def test_gelu_matches_erf_form(self):
        xs = np.linspace(-4, 4, 41)
        expected = [t * 0.5 * (1 + math.erf(t / math.sqrt(2))) for t in xs]
        np.testing.assert_allclose(activation("gelu", xs), expected, atol=1e-15)

    def test_swish_shape_parameter(self):
        t = 0.7
        assert activation("swish", [t], c=2.5)[0] == pytest.approx(t / (1 + math.exp(-2.5 * t)))

    def test_shape_preserved(self):
        x = np.arange(12.0).reshape(3, 4) - 6
        for kind in ("relu", "gelu", "swish"):
            assert activation(kind, x).shape == (3, 4)

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(DomainError):
            activation("relu", [1.0, bad])

    def test_swish_non_monotonic_below_zero(self):
        lo, hi = activation("swish", [-4.0, -2.0])
        assert lo > hi

    def test_relu_subgradient_at_zero(self):
        assert activation_grad("relu", [0.0])[0] == 0.0

    @pytest.mark.parametrize("kind", ["gelu", "swish"])
    def test_derivatives_match_central_difference(self, kind):
        xs = np.linspace(-3, 3, 25)
        h = 1e-6
        numeric = (activation(kind, xs + h) - activation(kind, xs - h)) / (2 * h)
        np.testing.assert_allclose(activation_grad(kind, xs), numeric, atol=1e-8)


def _scalar_ffn(x, p, variant):
    """Naive triple-loop FFN."""
    n, d_model = x.shape
    d_ff = p.W1.shape[1]
    out = np.zeros((n, d_model))
    for r in range(n):
        hidden = []
        for j in range(d_ff):
            z = p.b1[j]
            for i in range(d_model):
                z += x[r, i] * p.W1[i, j]
            if variant == "relu":
                hidden.append(max(z, 0.0))
            elif variant == "gelu":
                hidden.append(z * 0.5 * (1 + math.erf(z / math.sqrt(2))))
            else:
                u = p.b1[j]
                for i in range(d_model):
                    u += x[r, i] * p.V[i, j]
                hidden.append(z / (1 + math.exp(-p.c * z)) * u)
        for o in range(d_model):
            acc = p.b2[o]
            for j in range(d_ff):
                acc += hidden[j] * p.W2[j, o]
            out[r, o] = acc
    return out


class TestSwiGLU:
    def test_zero_weights_give_zero(self, rng):
        p = FFNParams(np.zeros((3, 5)), np.zeros(5), np.ones((5, 3)), np.zeros(3), V=np.zeros((3, 5)))
        np.testing.assert_array_equal(swiglu(rng.normal(size=(4, 3)), p), np.zeros((4, 5)))

    def test_scalar_case(self):
        p = FFNParams([[1.0]], [0.0], [[1.0]], [0.0], V=[[1.0]], c=1.0)
        np.testing.assert_allclose(swiglu([[1.0]], p), [[SIGMOID_1]], atol=1e-12)

    def test_zero_input(self, rng):
        p = FFNParams.random(1, 1, rng)
        p.b1 = np.zeros(1)
        assert swiglu([[0.0]], p)[0, 0] == 0.0

    def test_missing_gate(self, rng):
        p = FFNParams.random(2, 3, rng, gated=False)
        with pytest.raises(ConfigurationError):
            swiglu(np.ones((1, 2)), p)

    def test_bias_shared_by_both_branches(self):
        p = FFNParams([[0.0]], [2.0], [[1.0]], [0.0], V=[[0.0]])
        # swish(2) * 2
        assert swiglu([[5.0]], p)[0, 0] == pytest.approx(2.0 / (1 + math.exp(-2.0)) * 2.0)


class TestFFN:
    def test_relu_zero_weights_broadcast_bias(self, rng):
        b2 = np.array([1.0, -2.0, 3.0])
        p = FFNParams(np.zeros((3, 4)), np.zeros(4), np.zeros((4, 3)), b2)
        out = ffn_forward("relu", rng.normal(size=(5, 3)), p)
        np.testing.assert_array_equal(out, np.tile(b2, (5, 1)))

    def test_swiglu_is_composition(self, rng):
        p = FFNParams.random(4, 8, rng, c=1.3)
        x = rng.normal(size=(3, 4))
        np.testing.assert_array_equal(ffn_forward("swiglu", x, p), swiglu(x, p) @ p.W2 + p.b2)

    @pytest.mark.parametrize("variant", ["relu", "gelu", "swiglu"])
    def test_against_scalar_loops(self, rng, variant):
        p = FFNParams.random(4, 8, rng, c=0.8)
        x = rng.normal(size=(2, 4))
        out = ffn_forward(variant, x, p)
        assert out.shape == (2, 4)
        assert np.max(np.abs(out - _scalar_ffn(x, p, variant))) <= 1e-12

    def test_width_mismatch(self, rng):
        p = FFNParams.random(4, 8, rng)
        with pytest.raises(ShapeError):
            ffn_forward("relu", np.ones((2, 3)), p)

    def test_inconsistent_params(self):
        with pytest.raises(ShapeError):
            FFNParams(np.zeros((3, 4)), np.zeros(4), np.zeros((5, 3)), np.zeros(3))

    def test_nonpositive_c(self):
        with pytest.raises(ConfigurationError):
            FFNParams(np.zeros((1, 1)), [0.0], [[0.0]], [0.0], c=0.0)


class TestSoftmax:
    def test_uniform(self):
        np.testing.assert_allclose(softmax([0.0, 0.0, 0.0]), [1 / 3] * 3, atol=1e-15)

    def test_large_logits_stable(self):
        out = softmax([1000.0, 0.0])
        assert np.all(np.isfinite(out))
        np.testing.assert_allclose(out, [1.0, 0.0], atol=1e-12)

    def test_known_values(self):
        # exp(i) / (e + e^2 + e^3) evaluated independently
        expected = [0.09003057317038046, 0.24472847105479767, 0.6652409557748219]
        np.testing.assert_allclose(softmax([1.0, 2.0, 3.0]), expected, atol=1e-8)
        denom = sum(math.exp(i) for i in (1, 2, 3))
        np.testing.assert_allclose(expected, [math.exp(i) / denom for i in (1, 2, 3)], atol=1e-15)

    def test_empty_row(self):
        with pytest.raises(DomainError):
            softmax(np.zeros((2, 0)))

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=12), st.floats(-100, 100))
    def test_shift_invariance(self, row, shift):
        row = np.array(row)
        a = softmax(row)
        assert abs(a.sum() - 1.0) <= 1e-12
        assert np.all(a >= 0)
        np.testing.assert_allclose(softmax(row + shift), a, atol=1e-12)


class TestLayerNorm:
    def test_constant_row(self):
        np.testing.assert_array_equal(layer_norm([[3.0, 3.0, 3.0]], np.ones(3), np.zeros(3)), np.zeros((1, 3)))

    def test_standardized_row(self):
        np.testing.assert_allclose(layer_norm([[1.0, -1.0]], np.ones(2), np.zeros(2), eps=1e-15), [[1.0, -1.0]],
                                   atol=1e-12)

    def test_scalar_oracle(self, rng):
        x = rng.normal(size=7) * 3 + 1
        gain, bias = rng.normal(size=7), rng.normal(size=7)
        mean = sum(x) / len(x)
        var = sum((v - mean) ** 2 for v in x) / len(x)
        expected = [(v - mean) / math.sqrt(var + 1e-5) * g + b for v, g, b in zip(x, gain, bias)]
        assert np.max(np.abs(layer_norm(x, gain, bias) - expected)) <= 1e-12

    def test_unit_gain_mean_equals_bias_mean(self, rng):
        bias = rng.normal(size=5)
        out = layer_norm(rng.normal(size=(3, 5)), np.ones(5), bias)
        np.testing.assert_allclose(out.mean(axis=1), np.full(3, bias.mean()), atol=1e-12)

    def test_width_mismatch(self):
        with pytest.raises(ShapeError):
            layer_norm(np.ones((2, 3)), np.ones(2), np.zeros(2))
