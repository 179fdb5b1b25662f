"""Adam optimizer with bias-corrected moment estimates.

Per element, with timestep t starting at 1 on the first step:

    m = beta1 * m + (1 - beta1) * g
    v = beta2 * v + (1 - beta2) * g**2
    m_hat = m / (1 - beta1**t)
    v_hat = v / (1 - beta2**t)
    theta = theta - lr * m_hat / (sqrt(v_hat) + eps)

eps is added outside the square root. The update is purely coordinate-wise
and deterministic for identical inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np


@dataclass
class AdamConfig:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not 0 <= self.beta1 < 1:
            raise ValueError(f"beta1 must be in [0, 1), got {self.beta1}")
        if not 0 <= self.beta2 < 1:
            raise ValueError(f"beta2 must be in [0, 1), got {self.beta2}")
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")


class Adam:
    """Holds first/second moment estimates per parameter and a shared timestep.

    Parameters are updated in place, so the arrays passed at construction
    must be the ones the model reads from. A single writer owns one
    instance; the state is not serialized into checkpoints.
    """

    def __init__(self, params: Mapping[str, np.ndarray], config: AdamConfig | None = None):
        self.config = config or AdamConfig()
        self.params = dict(params)
        self.m = {k: np.zeros_like(p) for k, p in self.params.items()}
        self.v = {k: np.zeros_like(p) for k, p in self.params.items()}
        self.t = 0

    def step(self, grads: Mapping[str, np.ndarray]) -> None:
        if set(grads) != set(self.params):
            missing = sorted(set(self.params) - set(grads))
            extra = sorted(set(grads) - set(self.params))
            raise ValueError(
                f"adam step: gradient/parameter mismatch, missing={missing}, unexpected={extra}")
        for key, grad in grads.items():
            if grad.shape != self.params[key].shape:
                raise ValueError(
                    f"adam step: gradient for {key} has shape {grad.shape}, "
                    f"parameter has {self.params[key].shape}")
            if not np.all(np.isfinite(grad)):
                raise ValueError(f"adam step: non-finite gradient for {key}")

        cfg = self.config
        self.t += 1
        bc1 = 1.0 - cfg.beta1 ** self.t
        bc2 = 1.0 - cfg.beta2 ** self.t
        for key, grad in grads.items():
            m, v = self.m[key], self.v[key]
            m *= cfg.beta1
            m += (1 - cfg.beta1) * grad
            v *= cfg.beta2
            v += (1 - cfg.beta2) * np.square(grad)
            m_hat = m / bc1
            v_hat = v / bc2
            self.params[key] -= cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.eps)
