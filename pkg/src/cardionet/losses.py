"""Softmax cross-entropy with its analytic gradient.

Softmax and the log-likelihood are fused through a single log-sum-exp so
no bare softmax backward ever exists; probabilities are computed after
per-row max subtraction, which makes the loss invariant to shifting all
logits of a row by a constant.
"""
from __future__ import annotations

import numpy as np

from .errors import ShapeError


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, targets) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood over the batch and its logit gradient.

    Args:
        logits: (N, C) pre-softmax scores.
        targets: length-N integer class indices in [0, C).

    Returns:
        (loss, grad) where loss is the per-sample mean and
        grad = (softmax(logits) - one_hot(targets)) / N.
    """
    if logits.ndim != 2:
        raise ShapeError(f"softmax_cross_entropy: logits must be 2-d, got {logits.shape}")
    if not np.all(np.isfinite(logits)):
        raise ValueError("softmax_cross_entropy: logits contain non-finite values")
    targets = np.asarray(targets)
    n, c = logits.shape
    if targets.shape != (n,):
        raise ShapeError(
            f"softmax_cross_entropy: expected {n} targets, got shape {targets.shape}")
    if targets.min() < 0 or targets.max() >= c:
        raise ValueError(f"softmax_cross_entropy: targets out of range [0, {c})")

    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    log_p = z - lse[:, None]
    rows = np.arange(n)
    loss = float(-log_p[rows, targets].mean())

    grad = np.exp(log_p)
    grad[rows, targets] -= 1
    grad /= n
    return loss, grad.astype(logits.dtype, copy=False)
