import numpy as np
import pytest

from crowdsafe.errors import ShapeError
from crowdsafe.nn import MSDAParams, bilinear_sample, ms_deform_attention
from crowdsafe.nn.deformable import sampling_plan


def dense_msda(query, refs, maps, p):
    """Five nested loops (query, head, level, point, grid cell) with a tent kernel."""
    n, d = query.shape
    h, L, K = p.num_heads, p.num_levels, p.num_points
    dh = d // h
    out = np.zeros((n, d))
    for q in range(n):
        off = [sum(query[q, i] * p.offset_proj[i, j] for i in range(d)) + p.offset_bias[j]
               for j in range(h * L * K * 2)]
        logit = [sum(query[q, i] * p.weight_proj[i, j] for i in range(d)) + p.weight_bias[j]
                 for j in range(h * L * K)]
        for head in range(h):
            block = logit[head * L * K:(head + 1) * L * K]
            top = max(block)
            e = [np.exp(v - top) for v in block]
            w = [v / sum(e) for v in e]
            for lvl in range(L):
                fmap = maps[lvl]
                H, W = fmap.shape[:2]
                for k in range(K):
                    idx = (head * L + lvl) * K + k
                    sx = refs[q, lvl, 0] * (W - 1) + off[2 * idx]
                    sy = refs[q, lvl, 1] * (H - 1) + off[2 * idx + 1]
                    for r in range(H):
                        for c in range(W):
                            tent = max(0.0, 1 - abs(sx - c)) * max(0.0, 1 - abs(sy - r))
                            if tent == 0.0:
                                continue
                            val = fmap[r, c] @ p.value_proj
                            out[q, head * dh:(head + 1) * dh] += w[lvl * K + k] * tent * val[head * dh:(head + 1) * dh]
    return out @ p.output_proj


class TestBilinear:
    def test_integer_coordinates(self, rng):
        fmap = rng.normal(size=(5, 4, 3))
        np.testing.assert_array_equal(bilinear_sample(fmap, (2, 3)), fmap[3, 2])

    def test_center_of_2x2(self):
        fmap = np.array([[[1.0], [2.0]], [[4.0], [8.0]]])
        assert bilinear_sample(fmap, (0.5, 0.5))[0] == pytest.approx(15 / 4)

    def test_hand_expanded_weights(self):
        fmap = np.array([[1.0, 4.0, 9.0], [2.0, 7.0, 3.0], [5.0, 8.0, 6.0]])[:, :, None]
        # .1875*4 + .0625*9 + .5625*7 + .1875*3
        assert bilinear_sample(fmap, (1.25, 0.75))[0] == pytest.approx(5.8125, abs=1e-15)

    def test_zero_padding(self):
        fmap = np.ones((2, 2, 1))
        assert bilinear_sample(fmap, (-0.5, 0.0))[0] == pytest.approx(0.5)
        assert bilinear_sample(fmap, (5.0, 5.0))[0] == 0.0
        assert bilinear_sample(fmap, (1.5, 1.5))[0] == pytest.approx(0.25)


class TestMSDA:
    def test_single_point_is_bilinear_sample(self, rng):
        d = 4
        fmap = rng.normal(size=(5, 7, d))
        refs = np.array([[0.3, 0.8], [0.0, 1.0]])
        out = ms_deform_attention(rng.normal(size=(2, d)), refs, [fmap], MSDAParams.identity(d))
        for q, (x, y) in enumerate(refs):
            expected = bilinear_sample(fmap, (x * 6, y * 4))
            assert np.max(np.abs(out[q] - expected)) <= 1e-12

    def test_uniform_weights_average_four_points(self, rng):
        d = 3
        fmap = rng.normal(size=(4, 4, d))
        p = MSDAParams.identity(d, num_points=4)
        # place the 4 points at integer cells around reference (1, 1)
        p.offset_bias = np.array([0, 0, 1, 0, 0, 1, 1, 1], dtype=float)
        out = ms_deform_attention(rng.normal(size=(1, d)), [[1 / 3, 1 / 3]], [fmap], p)
        expected = (fmap[1, 1] + fmap[1, 2] + fmap[2, 1] + fmap[2, 2]) / 4
        np.testing.assert_allclose(out[0], expected, atol=1e-12)

    def test_weights_normalized(self, rng):
        p = MSDAParams.random(8, 2, 3, 4, rng)
        _, weights = sampling_plan(rng.normal(size=(5, 8)) * 4, p)
        np.testing.assert_allclose(weights.sum(axis=(2, 3)), 1.0, atol=1e-9)

    def test_dense_loop_oracle(self, rng):
        p = MSDAParams.random(4, 2, 2, 2, rng)
        maps = [rng.normal(size=(4, 5, 4)), rng.normal(size=(3, 3, 4))]
        query = rng.normal(size=(3, 4))
        refs = rng.uniform(size=(3, 2, 2))
        out = ms_deform_attention(query, refs, maps, p)
        assert np.max(np.abs(out - dense_msda(query, refs, maps, p))) <= 1e-10

    def test_ref_count_mismatch(self, rng):
        p = MSDAParams.identity(2)
        with pytest.raises(ShapeError):
            ms_deform_attention(np.ones((3, 2)), np.zeros((2, 2)), [np.ones((2, 2, 2))], p)

    def test_level_count_mismatch(self, rng):
        p = MSDAParams.identity(2, num_levels=2)
        with pytest.raises(ShapeError):
            ms_deform_attention(np.ones((1, 2)), np.zeros((1, 2)), [np.ones((2, 2, 2))], p)

    def test_bad_projection_shape(self):
        with pytest.raises(ShapeError):
            MSDAParams(1, 1, 1, np.eye(2), np.zeros((2, 3)), np.zeros(2), np.zeros((2, 1)), np.zeros(1), np.eye(2))


def test_bit_identical_reruns(rng):
    p = MSDAParams.random(4, 2, 2, 2, rng)
    maps = [rng.normal(size=(4, 5, 4)), rng.normal(size=(3, 3, 4))]
    query, refs = rng.normal(size=(3, 4)), rng.uniform(size=(3, 2))
    assert np.array_equal(ms_deform_attention(query, refs, maps, p), ms_deform_attention(query, refs, maps, p))
