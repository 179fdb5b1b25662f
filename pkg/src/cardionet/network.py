"""The fixed 4-conv / 4-FC classification network.

Each conv block is Conv(3x3, stride 1, padding 1) -> ReLU -> MaxPool(2x2,
stride 2), so a 75px input shrinks 75 -> 37 -> 18 -> 9 -> 4 across the four
blocks. The flattened features then pass through three hidden linear layers
with ReLU and a final linear layer producing one logit per class. No softmax
lives in the model; logits feed the fused cross-entropy loss.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ops
from .errors import ShapeError
from .layers import Conv2d, Flatten, Layer, Linear, MaxPool2d, ReLU


@dataclass
class CardioNetConfig:
    input_size: int = 75
    in_channels: int = 3
    conv_channels: tuple[int, ...] = (16, 32, 64, 128)
    fc_widths: tuple[int, ...] = (256, 128, 64)
    num_classes: int = 3

    def __post_init__(self):
        self.conv_channels = tuple(self.conv_channels)
        self.fc_widths = tuple(self.fc_widths)
        if len(self.conv_channels) != 4:
            raise ValueError(f"expected 4 conv channel counts, got {self.conv_channels}")
        if len(self.fc_widths) != 3:
            raise ValueError(f"expected 3 hidden FC widths, got {self.fc_widths}")
        if any(c < 1 for c in self.conv_channels) or any(w < 1 for w in self.fc_widths):
            raise ValueError("layer widths must be positive")
        if self.feature_size() < 1:
            raise ValueError(
                f"input size {self.input_size} collapses below 1x1 after the conv stack")

    def feature_size(self) -> int:
        """Spatial extent after the four conv+pool blocks.

        Conv is size-preserving (3x3, stride 1, padding 1); each pool
        needs at least a 2x2 input and halves it with floor division.
        """
        size = self.input_size
        for _ in range(4):
            if size < 2:
                return 0
            size = (size - 2) // 2 + 1
        return size

    def flatten_width(self) -> int:
        return self.conv_channels[-1] * self.feature_size() ** 2

    def as_dict(self) -> dict:
        return {
            "input_size": self.input_size,
            "in_channels": self.in_channels,
            "conv_channels": list(self.conv_channels),
            "fc_widths": list(self.fc_widths),
            "num_classes": self.num_classes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CardioNetConfig":
        return cls(**data)


def build_layers(config: CardioNetConfig) -> list[Layer]:
    layers: list[Layer] = []
    prev = config.in_channels
    for i, channels in enumerate(config.conv_channels, start=1):
        layers.append(Conv2d(f"conv{i}", prev, channels, kernel_size=3, stride=1, padding=1))
        layers.append(ReLU(f"relu_conv{i}"))
        layers.append(MaxPool2d(f"pool{i}", window=2, stride=2))
        prev = channels
    layers.append(Flatten("flatten"))
    width = config.flatten_width()
    for i, out in enumerate(config.fc_widths, start=1):
        layers.append(Linear(f"fc{i}", width, out))
        layers.append(ReLU(f"relu_fc{i}"))
        width = out
    layers.append(Linear(f"fc{len(config.fc_widths) + 1}", width, config.num_classes))
    return layers


class CardioNet:
    """Assembled network exposing whole-model forward/backward.

    Parameter enumeration order follows layer declaration order and is
    identical across runs, which keeps optimizer state and checkpoint
    serialization aligned.
    """

    def __init__(self, config: CardioNetConfig | None = None, seed: int = 0,
                 dtype=ops.DEFAULT_DTYPE):
        self.config = config or CardioNetConfig()
        self.dtype = np.dtype(dtype)
        self.layers = build_layers(self.config)
        rng = np.random.default_rng(seed)
        for layer in self.layers:
            layer.init_params(rng, self.dtype)

    def parameters(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for layer in self.layers:
            out.update(layer.params())
        return out

    def load_parameters(self, mapping: dict[str, np.ndarray]) -> None:
        own = self.parameters()
        missing = sorted(set(own) - set(mapping))
        if missing:
            raise ShapeError(f"missing parameters: {missing}")
        for layer in self.layers:
            if layer.params():
                layer.load_params({k: np.asarray(v, dtype=self.dtype)
                                   for k, v in mapping.items() if k in layer.params()})

    def forward(self, x: np.ndarray, train: bool = False):
        """Run the network; returns (logits, context).

        The context is a list of per-layer caches in train mode and None in
        eval mode. Both modes produce identical logits.
        """
        cfg = self.config
        expected = (cfg.in_channels, cfg.input_size, cfg.input_size)
        if x.ndim != 4 or x.shape[1:] != expected:
            raise ShapeError(
                f"forward: expected input (N, {expected[0]}, {expected[1]}, {expected[2]}), "
                f"got {x.shape}")
        x = np.asarray(x, dtype=self.dtype)
        caches = [] if train else None
        for layer in self.layers:
            x, cache = layer.forward(x, need_cache=train)
            if train:
                caches.append(cache)
        return x, caches

    def backward(self, context, grad_logits: np.ndarray) -> dict[str, np.ndarray]:
        """Accumulate gradients for every parameter from d(loss)/d(logits)."""
        if context is None:
            raise RuntimeError("backward: context is None; run forward with train=True")
        grads: dict[str, np.ndarray] = {}
        grad = grad_logits
        for layer, cache in zip(reversed(self.layers), reversed(context)):
            grad, layer_grads = layer.backward(cache, grad)
            grads.update(layer_grads)
        return grads
