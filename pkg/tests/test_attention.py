import math

import numpy as np
import pytest

from crowdsafe.errors import ShapeError
from crowdsafe.nn import MultiHeadParams, multi_head_attention, scaled_dot_attention


def scalar_attention(Q, K, V):
    """Loop version of softmax(Q K^T / sqrt(d)) V."""
    n, d = len(Q), len(Q[0])
    out = []
    for i in range(n):
        scores = [sum(Q[i][t] * K[j][t] for t in range(d)) / math.sqrt(d) for j in range(len(K))]
        top = max(scores)
        w = [math.exp(s - top) for s in scores]
        total = sum(w)
        out.append([sum(w[j] / total * V[j][c] for j in range(len(V))) for c in range(len(V[0]))])
    return np.array(out)


class TestScaledDotAttention:
    def test_single_key(self, rng):
        V = rng.normal(size=(1, 3))
        out = scaled_dot_attention(rng.normal(size=(4, 2)), rng.normal(size=(1, 2)), V)
        np.testing.assert_allclose(out, np.tile(V, (4, 1)), atol=1e-15)

    def test_zero_query_gives_column_means(self, rng):
        V = rng.normal(size=(6, 3))
        out = scaled_dot_attention(np.zeros((2, 4)), rng.normal(size=(6, 4)), V)
        np.testing.assert_allclose(out, np.tile(V.mean(axis=0), (2, 1)), atol=1e-12)

    def test_hand_case(self):
        Q = [[1.0, 0.0], [0.5, -1.0]]
        K = [[0.0, 1.0], [2.0, 1.0]]
        V = [[1.0, 2.0], [-3.0, 0.5]]
        out = scaled_dot_attention(Q, K, V)
        assert np.max(np.abs(out - scalar_attention(Q, K, V))) <= 1e-12

    def test_convexity(self, rng):
        for _ in range(50):
            V = rng.normal(size=(7, 3)) * 5
            out = scaled_dot_attention(rng.normal(size=(5, 4)) * 3, rng.normal(size=(7, 4)) * 3, V)
            assert np.all(out >= V.min(axis=0) - 1e-12)
            assert np.all(out <= V.max(axis=0) + 1e-12)

    def test_width_mismatch(self):
        with pytest.raises(ShapeError):
            scaled_dot_attention(np.ones((2, 3)), np.ones((2, 4)), np.ones((2, 1)))


class TestMultiHead:
    def test_single_identity_head_reduces(self, rng):
        d = 6
        p = MultiHeadParams([(np.eye(d), np.eye(d), np.eye(d))], np.eye(d))
        Q, K, V = (rng.normal(size=(4, d)) for _ in range(3))
        np.testing.assert_allclose(multi_head_attention(Q, K, V, p), scaled_dot_attention(Q, K, V), atol=1e-12)

    def test_shape_contract(self, rng):
        p = MultiHeadParams.random(8, 2, rng)
        assert p.d_head == 4
        x = rng.normal(size=(5, 8))
        assert multi_head_attention(x, x, x, p).shape == (5, 8)

    def test_against_per_head_oracle(self, rng):
        p = MultiHeadParams.random(6, 2, rng, d_head=3)
        Q, K, V = rng.normal(size=(3, 6)), rng.normal(size=(4, 6)), rng.normal(size=(4, 6))
        heads = [scalar_attention(Q @ wq, K @ wk, V @ wv) for wq, wk, wv in p.heads]
        concat = [[v for h in heads for v in h[r]] for r in range(3)]
        expected = [[sum(row[i] * p.W_o[i, c] for i in range(len(row))) for c in range(6)] for row in concat]
        assert np.max(np.abs(multi_head_attention(Q, K, V, p) - expected)) <= 1e-12

    def test_inconsistent_heads(self, rng):
        with pytest.raises(ShapeError):
            MultiHeadParams([(np.eye(4), np.eye(4), np.eye(4)), (np.eye(4), np.ones((4, 3)), np.eye(4))], np.eye(8, 4))

    def test_output_rows_checked(self):
        with pytest.raises(ShapeError):
            MultiHeadParams([(np.eye(4),) * 3], np.eye(3))
