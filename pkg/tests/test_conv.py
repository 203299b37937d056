import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import spearmanr

from neural_persistence.conv import (ConvFilter, ConvGeometry, compare_methods, conv_diagram_approx,
                                     conv_normalizer, conv_np_approx, conv_np_exact, layer_mean_conv_np,
                                     normalized_conv_np, unroll_filter)
from neural_persistence.errors import InvalidArgument

EXAMPLE = [[4.0, 3.0], [2.0, 1.0]]
EXAMPLE_NP = math.sqrt(2.5625)

filters = st.tuples(st.integers(2, 4), st.integers(2, 4)).flatmap(
    lambda s: arrays(np.float64, s, elements=st.floats(-3, 3, allow_nan=False).filter(lambda x: abs(x) > 1e-3)))


class TestUnroll:
    def test_2x2_on_3x3(self):
        layer = unroll_filter(EXAMPLE, ConvGeometry(3, 3))
        assert layer.shape == (4, 9)
        assert layer.edge_count == 16
        expected = np.array([
            [4, 3, 0, 2, 1, 0, 0, 0, 0],
            [0, 4, 3, 0, 2, 1, 0, 0, 0],
            [0, 0, 0, 4, 3, 0, 2, 1, 0],
            [0, 0, 0, 0, 4, 3, 0, 2, 1],
        ], dtype=float)
        np.testing.assert_array_equal(np.nan_to_num(layer.to_dense()), expected)

    def test_1x1_is_diagonal(self):
        layer = unroll_filter([[1.5]], ConvGeometry(2, 2))
        assert layer.shape == (4, 4)
        np.testing.assert_array_equal(layer.rows, layer.cols)

    def test_single_receptive_field(self):
        layer = unroll_filter(EXAMPLE, ConvGeometry(2, 2))
        assert layer.shape == (1, 4)
        assert layer.edge_count == 4

    def test_padding_counts_dummy_inputs(self):
        geo = ConvGeometry(3, 3, padding=1)
        layer = unroll_filter(np.ones((3, 3)), geo)
        assert layer.shape == (9, 25)
        assert layer.edge_count == 81

    def test_filter_too_large(self):
        with pytest.raises(InvalidArgument):
            unroll_filter(np.ones((4, 4)), ConvGeometry(3, 3))


class TestExact:
    def test_example(self):
        assert conv_np_exact(EXAMPLE, ConvGeometry(3, 3)) == pytest.approx(EXAMPLE_NP, abs=1e-12)

    def test_1x1_filter(self):
        # four disjoint edges: merges at 1, essentials counted at 0
        assert conv_np_exact([[1.0]], ConvGeometry(2, 2)) == 2.0

    def test_constant_filter(self):
        geo = ConvGeometry(3, 3)
        # 13 vertices, one component: 12 zero-persistence merges plus one essential
        assert conv_np_exact(np.full((2, 2), 0.3), geo) == 1.0


class TestApprox:
    def test_example_deaths(self):
        d = conv_diagram_approx(EXAMPLE, ConvGeometry(3, 3))
        assert list(d.deaths) == [0, 1, .75, .5, .25, 1, 1, 1, .75, .75, .75, .5, .5]
        assert conv_np_approx(EXAMPLE, ConvGeometry(3, 3)) == pytest.approx(EXAMPLE_NP, abs=1e-12)

    def test_1x1_filter(self):
        d = conv_diagram_approx([[2.0]], ConvGeometry(2, 2))
        assert d.deaths[0] == 0.0
        assert all(v == 1.0 for v in d.deaths[1:])
        assert len(d) == 8
        assert conv_np_approx([[2.0]], ConvGeometry(2, 2)) == 1.0

    @settings(max_examples=100)
    @given(filters, st.integers(0, 4), st.integers(0, 4), st.integers(0, 1))
    def test_structure(self, w, dh, dw, pad):
        geo = ConvGeometry(w.shape[0] + dh, w.shape[1] + dw, pad)
        d = conv_diagram_approx(w, geo)
        assert len(d) == geo.input_count() + geo.output_count(ConvFilter(w))
        assert d.deaths.count(0.0) >= 1 and d.deaths[0] == 0.0
        assert all(0.0 <= v <= 1.0 for v in d.deaths)
        h = np.abs(w) / np.abs(w).max()
        for i, j in ConvFilter(w).corner_positions():
            assert np.float32(h[i, j]) in np.float32(d.deaths[1:5])

    @settings(max_examples=50)
    @given(filters, st.sampled_from([1e-6, 0.5, 1e6]))
    def test_scale_invariant(self, w, c):
        geo = ConvGeometry(5, 5)
        assert conv_np_approx(c * w, geo) == conv_np_approx(w, geo)
        assert conv_np_exact(c * w, geo) == conv_np_exact(w, geo)

    @given(st.integers(2, 4), st.integers(2, 4), st.floats(0.01, 10), st.integers(0, 3))
    def test_constant_filter_agrees(self, p, q, v, extra):
        geo = ConvGeometry(p + extra, q + extra)
        w = np.full((p, q), v)
        assert conv_np_approx(w, geo) == pytest.approx(conv_np_exact(w, geo), abs=1e-12)


class TestNormalizedAndMean:
    def test_normalizer(self):
        assert conv_normalizer(EXAMPLE, ConvGeometry(3, 3)) == pytest.approx(math.sqrt(12))

    def test_normalized(self):
        v = normalized_conv_np(EXAMPLE, ConvGeometry(3, 3), method="exact")
        assert v == pytest.approx(EXAMPLE_NP / math.sqrt(12))
        with pytest.raises(InvalidArgument):
            normalized_conv_np(EXAMPLE, ConvGeometry(3, 3), method="fast")

    def test_layer_mean(self):
        geo = ConvGeometry(4, 4)
        a, b = np.array(EXAMPLE), np.array([[1.0, -2.0], [0.5, 0.1]])
        assert layer_mean_conv_np([a, a, a], geo) == pytest.approx(normalized_conv_np(a, geo))
        expected = (normalized_conv_np(a, geo) + normalized_conv_np(b, geo)) / 2
        assert layer_mean_conv_np([a, b], geo) == pytest.approx(expected)
        with pytest.raises(InvalidArgument):
            layer_mean_conv_np([], geo)

    def test_bank_means_rank_alike(self):
        rng = np.random.default_rng(3)
        geo = ConvGeometry(8, 8)
        banks = [[rng.normal(size=(3, 3)) * rng.uniform(0.2, 1, size=(3, 3)) ** k for _ in range(32)]
                 for k in range(10)]
        exact = [layer_mean_conv_np(b, geo, method="exact") for b in banks]
        approx = [layer_mean_conv_np(b, geo, method="approx") for b in banks]
        # banks whose exact means lie within a few hundredths may swap places
        assert spearmanr(exact, approx).statistic >= 0.9


def test_compare_methods_reports_both():
    out = compare_methods(EXAMPLE, ConvGeometry(3, 3))
    assert set(out) == {"exact", "approx"}
    assert out["exact"]["value"] == pytest.approx(out["approx"]["value"], abs=1e-12)
