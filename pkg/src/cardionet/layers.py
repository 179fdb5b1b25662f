"""Network layers: each pairs a forward kernel with its analytic backward pass.

A layer owns its parameters (if any) after ``init_params``. Forward calls
return ``(output, cache)`` where the cache holds exactly what the backward
pass needs; evaluation passes ``need_cache=False`` and get ``None`` back.
Caches belong to the caller, never to the layer, so layers stay immutable
after initialization and forwards on distinct inputs can run concurrently.
"""
from __future__ import annotations

import numpy as np

from . import ops
from .errors import ShapeError


class Layer:
    """Base for all layers. Subclasses with parameters override init_params."""

    name: str

    def init_params(self, rng: np.random.Generator, dtype=ops.DEFAULT_DTYPE) -> None:
        pass

    def params(self) -> dict[str, np.ndarray]:
        return {}

    def load_params(self, mapping: dict[str, np.ndarray]) -> None:
        for key, value in self.params().items():
            incoming = mapping[key]
            if incoming.shape != value.shape:
                raise ShapeError(
                    f"{key}: stored shape {incoming.shape} does not match layer shape {value.shape}")
            value[...] = incoming

    def backward(self, cache, grad_out: np.ndarray):
        if cache is None:
            raise RuntimeError(
                f"{self.name}: backward() needs the cache from a train-mode forward")
        return self._backward(cache, grad_out)

    def _backward(self, cache, grad_out: np.ndarray):
        raise NotImplementedError


def _uniform_fan_in(rng: np.random.Generator, shape: tuple[int, ...],
                    fan_in: int, dtype) -> np.ndarray:
    bound = np.sqrt(1.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Conv2d(Layer):
    """2-d cross-correlation with bias, square kernel."""

    def __init__(self, name: str, in_channels: int, out_channels: int,
                 kernel_size: int = 3, stride: int = 1, padding: int = 1):
        self.name = name
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.padding = padding
        self.weight: np.ndarray | None = None
        self.bias: np.ndarray | None = None

    def init_params(self, rng, dtype=ops.DEFAULT_DTYPE):
        k = self.kernel_size
        shape = (self.out_channels, self.in_channels, k, k)
        self.weight = _uniform_fan_in(rng, shape, self.in_channels * k * k, dtype)
        self.bias = np.zeros(self.out_channels, dtype=dtype)

    def params(self):
        return {f"{self.name}.weight": self.weight, f"{self.name}.bias": self.bias}

    def forward(self, x: np.ndarray, need_cache: bool = False):
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ShapeError(
                f"{self.name}: expected input (N,{self.in_channels},H,W), got {x.shape}")
        out = ops.conv2d(x, self.weight, self.bias, self.stride, self.padding)
        return out, (x if need_cache else None)

    def _backward(self, cache, grad_out):
        grad_x, grad_w, grad_b = ops.conv2d_backward(
            cache, self.weight, self.stride, self.padding, grad_out)
        return grad_x, {f"{self.name}.weight": grad_w, f"{self.name}.bias": grad_b}


class Linear(Layer):
    """Affine map y = x @ weight + bias with weight shaped (in, out)."""

    def __init__(self, name: str, in_features: int, out_features: int):
        self.name = name
        self.in_features = in_features
        self.out_features = out_features
        self.weight: np.ndarray | None = None
        self.bias: np.ndarray | None = None

    def init_params(self, rng, dtype=ops.DEFAULT_DTYPE):
        self.weight = _uniform_fan_in(
            rng, (self.in_features, self.out_features), self.in_features, dtype)
        self.bias = np.zeros(self.out_features, dtype=dtype)

    def params(self):
        return {f"{self.name}.weight": self.weight, f"{self.name}.bias": self.bias}

    def forward(self, x: np.ndarray, need_cache: bool = False):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeError(
                f"{self.name}: expected input (N,{self.in_features}), got {x.shape}")
        out = ops.matmul(x, self.weight) + self.bias
        return out, (x if need_cache else None)

    def _backward(self, cache, grad_out):
        grad_w = ops.matmul(cache.T, grad_out)
        grad_b = grad_out.sum(axis=0)
        grad_x = ops.matmul(grad_out, self.weight.T)
        return grad_x, {f"{self.name}.weight": grad_w, f"{self.name}.bias": grad_b}


class ReLU(Layer):
    def __init__(self, name: str):
        self.name = name

    def forward(self, x: np.ndarray, need_cache: bool = False):
        return ops.relu(x), (x if need_cache else None)

    def _backward(self, cache, grad_out):
        return grad_out * (cache > 0), {}


class MaxPool2d(Layer):
    def __init__(self, name: str, window: int = 2, stride: int = 2):
        self.name = name
        self.window = window
        self.stride = stride

    def forward(self, x: np.ndarray, need_cache: bool = False):
        out, indices = ops.maxpool2d(x, self.window, self.stride)
        return out, ((x.shape, indices) if need_cache else None)

    def _backward(self, cache, grad_out):
        input_shape, indices = cache
        return ops.maxpool2d_backward(input_shape, indices, grad_out), {}


class Flatten(Layer):
    """Collapse all non-batch axes, row-major."""

    def __init__(self, name: str):
        self.name = name

    def forward(self, x: np.ndarray, need_cache: bool = False):
        out = ops.reshape(x, (x.shape[0], int(np.prod(x.shape[1:]))))
        return out, (x.shape if need_cache else None)

    def _backward(self, cache, grad_out):
        return grad_out.reshape(cache), {}
