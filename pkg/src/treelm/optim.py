"""Gradient-descent optimizers: SGD (default) and Adam, with global norm clipping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autograd import Tensor


class GradientError(RuntimeError):
    """Non-finite gradients; message lists the offending parameters."""


@dataclass
class OptimConfig:
    algorithm: str = "sgd"  # "sgd" | "adam"
    lr: float = 0.5
    clip_norm: float | None = 5.0
    lr_decay: float = 0.5  # applied on dev-loss plateau by the training loop
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.algorithm not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer algorithm {self.algorithm!r}")


class Optimizer:
    def __init__(self, named_params: list[tuple[str, Tensor]], config: OptimConfig):
        self.named_params = list(named_params)
        self.config = config
        self.lr = config.lr
        self._step_count = 0
        if config.algorithm == "adam":
            self._m = [np.zeros_like(t.values) for _, t in self.named_params]
            self._v = [np.zeros_like(t.values) for _, t in self.named_params]

    def zero_grad(self):
        for _, t in self.named_params:
            t.zero_grad()

    def decay_lr(self):
        self.lr *= self.config.lr_decay

    def global_grad_norm(self) -> float:
        total = 0.0
        for _, t in self.named_params:
            if t.grad is not None:
                total += float(np.sum(t.grad * t.grad))
        return float(np.sqrt(total))

    def _check_finite(self):
        bad = [name for name, t in self.named_params if t.grad is not None and not np.all(np.isfinite(t.grad))]
        if bad:
            raise GradientError(f"non-finite gradients in parameters: {', '.join(sorted(bad))}")

    def step(self):
        """Clip by global norm when configured, then apply the update rule in place."""
        self._check_finite()
        factor = 1.0
        if self.config.clip_norm is not None:
            norm = self.global_grad_norm()
            if norm > self.config.clip_norm:
                factor = self.config.clip_norm / norm
        self._step_count += 1
        if self.config.algorithm == "sgd":
            for _, t in self.named_params:
                if t.grad is not None:
                    t.values -= self.lr * factor * t.grad
        else:
            b1, b2, eps = self.config.adam_beta1, self.config.adam_beta2, self.config.adam_eps
            corr1 = 1.0 - b1 ** self._step_count
            corr2 = 1.0 - b2 ** self._step_count
            for i, (_, t) in enumerate(self.named_params):
                if t.grad is None:
                    continue
                g = factor * t.grad
                self._m[i] = b1 * self._m[i] + (1.0 - b1) * g
                self._v[i] = b2 * self._v[i] + (1.0 - b2) * g * g
                m_hat = self._m[i] / corr1
                v_hat = self._v[i] / corr2
                t.values -= self.lr * m_hat / (np.sqrt(v_hat) + eps)
