"""Raw numerical kernels the network is built from.

Tensors are plain contiguous row-major numpy arrays, float32 by default.
Float64 is used by the gradient-check suites, so every kernel preserves
the dtype of its inputs and accumulates in that same precision.

All functions here are pure: no hidden state, deterministic output for
a fixed input within one build.
"""
from __future__ import annotations

import numpy as np

from .errors import ShapeError

DEFAULT_DTYPE = np.float32


def conv2d(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray,
           stride: int = 1, padding: int = 0) -> np.ndarray:
    """Cross-correlate a batch of images with a bank of filters.

    Args:
        x: input of shape (N, Cin, H, W).
        kernel: filters of shape (Cout, Cin, kh, kw).
        bias: per-filter offset of shape (Cout,).
        stride: step between window positions.
        padding: zero padding applied to both spatial axes.

    Returns:
        Output of shape (N, Cout, H', W') with
        H' = (H + 2*padding - kh) // stride + 1 and likewise for W'.
    """
    if x.ndim != 4:
        raise ShapeError(f"conv2d: input must be 4-d (N,C,H,W), got {x.ndim}-d {x.shape}")
    if kernel.ndim != 4:
        raise ShapeError(f"conv2d: kernel must be 4-d (Cout,Cin,kh,kw), got {kernel.ndim}-d {kernel.shape}")
    n, cin, h, w = x.shape
    cout, kcin, kh, kw = kernel.shape
    if kcin != cin:
        raise ShapeError(
            f"conv2d: input channel axis (axis 1) has {cin} channels "
            f"but kernel expects {kcin}")
    if bias.shape != (cout,):
        raise ShapeError(f"conv2d: bias shape {bias.shape} does not match {cout} output channels")
    if stride < 1:
        raise ShapeError(f"conv2d: stride must be positive, got {stride}")
    if padding < 0:
        raise ShapeError(f"conv2d: padding must be non-negative, got {padding}")
    if kh > h + 2 * padding or kw > w + 2 * padding:
        raise ShapeError(
            f"conv2d: kernel {kh}x{kw} larger than padded input "
            f"{h + 2 * padding}x{w + 2 * padding}")

    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = _sliding_windows(x, kh, kw, stride)
    # (N,Ho,Wo,Cout) <- contract windows (N,C,Ho,Wo,kh,kw) with kernel (Cout,C,kh,kw)
    out = np.tensordot(windows, kernel, axes=([1, 4, 5], [1, 2, 3]))
    out += bias
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2))


def conv2d_backward(x: np.ndarray, kernel: np.ndarray, stride: int, padding: int,
                    grad_out: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of conv2d w.r.t. input, kernel, and bias.

    grad_out has the forward output's shape (N, Cout, H', W').
    """
    n, cin, h, w = x.shape
    cout, _, kh, kw = kernel.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x
    windows = _sliding_windows(xp, kh, kw, stride)

    grad_bias = grad_out.sum(axis=(0, 2, 3))
    # (Cout,Cin,kh,kw) <- contract grad (N,Cout,Ho,Wo) with windows (N,C,Ho,Wo,kh,kw)
    grad_kernel = np.tensordot(grad_out, windows, axes=([0, 2, 3], [0, 2, 3]))

    # (N,Ho,Wo,Cin,kh,kw): per-window gradient, then scatter back with overlap adds
    grad_windows = np.tensordot(grad_out, kernel, axes=([1], [0]))
    ho, wo = grad_out.shape[2], grad_out.shape[3]
    grad_xp = np.zeros_like(xp)
    for a in range(kh):
        for b in range(kw):
            grad_xp[:, :, a:a + ho * stride:stride, b:b + wo * stride:stride] += \
                grad_windows[:, :, :, :, a, b].transpose(0, 3, 1, 2)
    if padding:
        grad_x = grad_xp[:, :, padding:padding + h, padding:padding + w]
    else:
        grad_x = grad_xp
    return np.ascontiguousarray(grad_x), grad_kernel, grad_bias


def maxpool2d(x: np.ndarray, window: int, stride: int) -> tuple[np.ndarray, np.ndarray]:
    """Max over non-overlapping (or strided) square windows.

    Returns the pooled tensor (N, C, H', W') and an int64 array of the same
    shape holding, for each output element, the flat index row*W + col of
    the winning input position. Ties go to the first element in row-major
    window order, which keeps the backward pass deterministic.
    """
    if x.ndim != 4:
        raise ShapeError(f"maxpool2d: input must be 4-d (N,C,H,W), got {x.ndim}-d {x.shape}")
    n, c, h, w = x.shape
    if window < 1 or stride < 1:
        raise ShapeError(f"maxpool2d: window and stride must be positive, got {window}, {stride}")
    if window > h or window > w:
        raise ShapeError(f"maxpool2d: window {window} exceeds spatial extent {h}x{w}")

    windows = _sliding_windows(x, window, window, stride)  # (N,C,Ho,Wo,wh,ww)
    ho, wo = windows.shape[2], windows.shape[3]
    flat = windows.reshape(n, c, ho, wo, window * window)
    local = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, local[..., None], axis=-1)[..., 0]

    rows = (np.arange(ho) * stride)[None, None, :, None] + local // window
    cols = (np.arange(wo) * stride)[None, None, None, :] + local % window
    indices = rows * w + cols
    return np.ascontiguousarray(out), indices


def maxpool2d_backward(input_shape: tuple[int, ...], indices: np.ndarray,
                       grad_out: np.ndarray) -> np.ndarray:
    """Route grad_out back to the argmax positions; all others get 0."""
    n, c, h, w = input_shape
    grad_x = np.zeros((n, c, h * w), dtype=grad_out.dtype)
    flat_idx = indices.reshape(n, c, -1)
    np.add.at(grad_x, (np.arange(n)[:, None, None], np.arange(c)[None, :, None], flat_idx),
              grad_out.reshape(n, c, -1))
    return grad_x.reshape(n, c, h, w)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of a (M,K) and b (K,P)."""
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul: expected 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"matmul: inner dimensions differ, a has {a.shape[1]} columns "
            f"but b has {b.shape[0]} rows")
    return a @ b


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape("add", a, b)
    return a + b


def scale(x: np.ndarray, factor: float) -> np.ndarray:
    return x * x.dtype.type(factor)


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape("hadamard", a, b)
    return a * b


def sqrt(x: np.ndarray) -> np.ndarray:
    if np.any(x < 0):
        raise ValueError("sqrt: operand has negative elements")
    return np.sqrt(x)


def reshape(x: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Row-major reshape; element count must be preserved."""
    if int(np.prod(shape)) != x.size:
        raise ShapeError(f"reshape: cannot view {x.size} elements as shape {shape}")
    return x.reshape(shape)


def _sliding_windows(x: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    """Strided view (N,C,Ho,Wo,kh,kw) over the spatial axes. Read-only."""
    n, c, h, w = x.shape
    ho = (h - kh) // stride + 1
    wo = (w - kw) // stride + 1
    s0, s1, s2, s3 = x.strides
    return np.lib.stride_tricks.as_strided(
        x, (n, c, ho, wo, kh, kw), (s0, s1, s2 * stride, s3 * stride, s2, s3),
        writeable=False)


def _check_same_shape(op: str, a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: operand shapes differ, {a.shape} vs {b.shape}")
