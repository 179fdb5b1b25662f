import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference
from cardionet import ShapeError, ops
from cardionet.layers import Conv2d, Flatten, Linear, MaxPool2d, ReLU

GRAD_TOL = 1e-6
FD_H = 1e-5


def make_conv(rng, in_ch=2, out_ch=3, padding=1):
    layer = Conv2d("conv", in_ch, out_ch, kernel_size=3, stride=1, padding=padding)
    layer.init_params(rng, dtype=np.float64)
    return layer


def make_linear(rng, n_in=6, n_out=4):
    layer = Linear("fc", n_in, n_out)
    layer.init_params(rng, dtype=np.float64)
    return layer


def check_input_gradient(layer, x, upstream):
    """Analytic grad w.r.t. input vs central differences of sum(upstream * y)."""
    out, cache = layer.forward(x, need_cache=True)
    grad_in, _ = layer.backward(cache, upstream)

    def objective(x_probe):
        y, _ = layer.forward(x_probe)
        return float((upstream * y).sum())

    numeric = reference.central_diff(objective, x, h=FD_H)
    assert reference.max_component_rel_err(grad_in, numeric) <= GRAD_TOL


def check_param_gradients(layer, x, upstream):
    out, cache = layer.forward(x, need_cache=True)
    _, param_grads = layer.backward(cache, upstream)
    for name, tensor in layer.params().items():
        def objective(probe, name=name, tensor=tensor):
            saved = tensor.copy()
            tensor[...] = probe
            y, _ = layer.forward(x)
            tensor[...] = saved
            return float((upstream * y).sum())

        numeric = reference.central_diff(objective, tensor, h=FD_H)
        assert reference.max_component_rel_err(param_grads[name], numeric) <= GRAD_TOL, name


class TestForward:
    def test_flatten_preserves_row_major_order(self, rng):
        x = rng.normal(size=(2, 4, 5, 5))
        out, _ = Flatten("flatten").forward(x)
        assert out.shape == (2, 100)
        np.testing.assert_array_equal(out[0], x[0].ravel())
        np.testing.assert_array_equal(out[1], x[1].ravel())

    def test_linear_identity_weight(self, rng):
        layer = Linear("fc", 4, 4)
        layer.init_params(rng, dtype=np.float64)
        layer.weight[...] = np.eye(4)
        layer.bias[...] = 0.0
        x = rng.normal(size=(3, 4))
        out, _ = layer.forward(x)
        np.testing.assert_allclose(out, x, rtol=1e-15)

    def test_conv_delegates_to_kernel(self, rng):
        layer = make_conv(rng)
        x = rng.normal(size=(2, 2, 6, 6))
        out, _ = layer.forward(x)
        expected = ops.conv2d(x, layer.weight, layer.bias, stride=1, padding=1)
        np.testing.assert_array_equal(out, expected)

    def test_input_shape_validated(self, rng):
        layer = make_conv(rng, in_ch=2)
        with pytest.raises(ShapeError, match="conv"):
            layer.forward(np.zeros((1, 3, 6, 6)))
        fc = make_linear(rng, n_in=6)
        with pytest.raises(ShapeError, match="fc"):
            fc.forward(np.zeros((1, 7)))

    def test_eval_mode_returns_no_cache(self, rng):
        layer = make_conv(rng)
        x = rng.normal(size=(1, 2, 4, 4))
        out, cache = layer.forward(x, need_cache=False)
        assert cache is None
        out_train, _ = layer.forward(x, need_cache=True)
        np.testing.assert_array_equal(out, out_train)


class TestBackward:
    def test_relu_gates_by_sign(self):
        layer = ReLU("relu")
        x = np.array([-1.0, 2.0])
        _, cache = layer.forward(x, need_cache=True)
        grad_in, grads = layer.backward(cache, np.array([5.0, 7.0]))
        np.testing.assert_array_equal(grad_in, [0.0, 7.0])
        assert grads == {}

    def test_linear_bias_grad_is_batch_sum(self, rng):
        layer = make_linear(rng)
        x = rng.normal(size=(5, 6))
        upstream = rng.normal(size=(5, 4))
        _, cache = layer.forward(x, need_cache=True)
        _, grads = layer.backward(cache, upstream)
        np.testing.assert_allclose(grads["fc.bias"], upstream.sum(axis=0), rtol=1e-12)

    def test_backward_without_cache_raises(self, rng):
        layer = make_conv(rng)
        with pytest.raises(RuntimeError, match="train-mode forward"):
            layer.backward(None, np.zeros((1, 3, 4, 4)))

    def test_maxpool_routes_zero_elsewhere(self, rng):
        layer = MaxPool2d("pool", window=2, stride=2)
        x = rng.permutation(np.linspace(-1.0, 1.0, 64)).reshape(1, 1, 8, 8)
        out, cache = layer.forward(x, need_cache=True)
        upstream = rng.normal(size=out.shape)
        grad_in, _ = layer.backward(cache, upstream)
        assert np.count_nonzero(grad_in) == out.size
        np.testing.assert_allclose(np.sort(grad_in[grad_in != 0]),
                                   np.sort(upstream.ravel()), rtol=1e-15)


class TestGradientChecks:
    """Analytic vs central-difference gradients, double precision.

    Inputs are kept away from ReLU kinks and maxpool ties so the finite
    difference is valid; positive upstream/inputs where cancellation
    would otherwise produce noise-floor components.
    """

    def test_conv_input_and_params(self, rng):
        layer = make_conv(rng)
        x = rng.uniform(0.5, 1.5, size=(2, 2, 5, 5))
        upstream = rng.uniform(0.5, 1.5, size=(2, 3, 5, 5))
        check_input_gradient(layer, x, upstream)
        check_param_gradients(layer, x, upstream)

    def test_conv_strided_unpadded(self, rng):
        layer = Conv2d("conv", 2, 2, kernel_size=3, stride=2, padding=0)
        layer.init_params(rng, dtype=np.float64)
        x = rng.uniform(0.5, 1.5, size=(2, 2, 7, 7))
        upstream = rng.uniform(0.5, 1.5, size=(2, 2, 3, 3))
        check_input_gradient(layer, x, upstream)
        check_param_gradients(layer, x, upstream)

    def test_linear_input_and_params(self, rng):
        layer = make_linear(rng)
        x = rng.uniform(0.5, 1.5, size=(3, 6))
        upstream = rng.uniform(0.5, 1.5, size=(3, 4))
        check_input_gradient(layer, x, upstream)
        check_param_gradients(layer, x, upstream)

    def test_relu(self, rng):
        layer = ReLU("relu")
        x = rng.uniform(0.2, 1.0, size=(4, 6)) * rng.choice([-1.0, 1.0], size=(4, 6))
        upstream = rng.uniform(0.5, 1.5, size=(4, 6))
        check_input_gradient(layer, x, upstream)

    def test_maxpool(self, rng):
        layer = MaxPool2d("pool", window=2, stride=2)
        # distinct values with gaps far above the FD step, so no tie flips
        x = rng.permutation(np.linspace(-1.0, 1.0, 2 * 36)).reshape(2, 1, 6, 6)
        upstream = rng.uniform(0.5, 1.5, size=(2, 1, 3, 3))
        check_input_gradient(layer, x, upstream)

    def test_flatten(self, rng):
        layer = Flatten("flatten")
        x = rng.uniform(0.5, 1.5, size=(2, 3, 4, 4))
        upstream = rng.uniform(0.5, 1.5, size=(2, 48))
        check_input_gradient(layer, x, upstream)

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 10_000), h=st.integers(4, 8), w=st.integers(4, 8))
    def test_conv_gradient_random_shapes(self, seed, h, w):
        g = np.random.default_rng(seed)
        layer = Conv2d("conv", 2, 2, kernel_size=3, stride=1, padding=1)
        layer.init_params(g, dtype=np.float64)
        x = g.uniform(0.5, 1.5, size=(1, 2, h, w))
        upstream = g.uniform(0.5, 1.5, size=(1, 2, h, w))
        check_input_gradient(layer, x, upstream)
        check_param_gradients(layer, x, upstream)


class TestInit:
    def test_same_seed_identical(self):
        a = Conv2d("conv", 3, 8)
        b = Conv2d("conv", 3, 8)
        a.init_params(np.random.default_rng(7))
        b.init_params(np.random.default_rng(7))
        assert a.weight.tobytes() == b.weight.tobytes()
        assert a.bias.tobytes() == b.bias.tobytes()

    def test_biases_zero(self):
        layer = Linear("fc", 32, 16)
        layer.init_params(np.random.default_rng(0))
        np.testing.assert_array_equal(layer.bias, np.zeros(16, dtype=np.float32))

    def test_weight_bounds_and_mean(self):
        layer = Linear("fc", 25, 400)  # 10_000 draws at fan_in 25
        layer.init_params(np.random.default_rng(5), dtype=np.float64)
        bound = np.sqrt(1.0 / 25)
        assert layer.weight.size == 10_000
        assert np.all(np.abs(layer.weight) <= bound)
        assert abs(layer.weight.mean()) < 0.01

    def test_conv_fan_in_bound(self):
        layer = Conv2d("conv", 3, 64, kernel_size=3)
        layer.init_params(np.random.default_rng(2), dtype=np.float64)
        assert np.all(np.abs(layer.weight) <= np.sqrt(1.0 / (3 * 9)))
