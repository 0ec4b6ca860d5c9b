"""Optimizers and learning-rate schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import ConfigError, NonFiniteError, ShapeError
from .tensor import Tensor

ScheduleKind = Literal["one_cycle", "warmup_linear"]


@dataclass(frozen=True)
class ScheduleConfig:
    total_steps: int
    kind: ScheduleKind = "one_cycle"
    max_lr: float = 0.01
    warmup_fraction: float = 0.3
    div_factor: float = 25.0
    final_div_factor: float = 1e4

    def __post_init__(self) -> None:
        errors = []
        if self.total_steps < 1:
            errors.append(f"total_steps: must be >= 1, got {self.total_steps}")
        if self.max_lr <= 0:
            errors.append(f"max_lr: must be positive, got {self.max_lr}")
        if not 0.0 < self.warmup_fraction < 1.0:
            errors.append(f"warmup_fraction: must be in (0, 1), got {self.warmup_fraction}")
        if self.kind not in ("one_cycle", "warmup_linear"):
            errors.append(f"kind: unknown schedule {self.kind!r}")
        if errors:
            raise ConfigError(errors)

    @property
    def peak_step(self) -> float:
        return self.warmup_fraction * self.total_steps


def _check_step(step: int, cfg: ScheduleConfig) -> None:
    if not 0 <= step <= cfg.total_steps:
        raise ValueError(f"step {step} is outside [0, {cfg.total_steps}]")


def _cosine(start: float, end: float, pct: float) -> float:
    return end + (start - end) / 2.0 * (math.cos(math.pi * pct) + 1.0)


def one_cycle_lr(step: int, cfg: ScheduleConfig) -> float:
    """Cosine ramp from ``max_lr / div_factor`` to ``max_lr``, then cosine
    anneal to ``max_lr / final_div_factor`` at the last step."""
    _check_step(step, cfg)
    peak = cfg.peak_step
    if step <= peak:
        return _cosine(cfg.max_lr / cfg.div_factor, cfg.max_lr, step / peak)
    return _cosine(cfg.max_lr, cfg.max_lr / cfg.final_div_factor, (step - peak) / (cfg.total_steps - peak))


def warmup_linear_lr(step: int, cfg: ScheduleConfig) -> float:
    """Linear warm-up from 0 to ``max_lr``, then linear decay to 0."""
    _check_step(step, cfg)
    peak = cfg.peak_step
    if step <= peak:
        return cfg.max_lr * step / peak
    return cfg.max_lr * (cfg.total_steps - step) / (cfg.total_steps - peak)


def lr_at(step: int, cfg: ScheduleConfig) -> float:
    if cfg.kind == "one_cycle":
        return one_cycle_lr(step, cfg)
    return warmup_linear_lr(step, cfg)


# ── Optimizers ───────────────────────────────────────────────


class Optimizer:
    """Holds per-parameter state; ``step(lr)`` consumes the current gradients."""

    def __init__(self, params: Sequence[Tensor], weight_decay: float = 0.0):
        self.params = list(params)
        self.weight_decay = weight_decay

    def _gradients(self) -> list[np.ndarray]:
        grads = []
        for p in self.params:
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if g.shape != p.shape:
                raise ShapeError(f"gradient shape {g.shape} does not match parameter {p.shape}")
            if not np.isfinite(g).all():
                raise NonFiniteError(f"non-finite gradient for parameter {p.name or tuple(p.shape)}")
            grads.append(g)
        return grads

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self, lr: float) -> None:
        if lr < 0:
            raise ValueError(f"learning rate must be non-negative, got {lr}")
        grads = self._gradients()
        self._advance()
        for i, (p, g) in enumerate(zip(self.params, grads)):
            self._update(i, p, g + self.weight_decay * p.data, lr)

    def _advance(self) -> None:
        pass

    def _update(self, i: int, p: Tensor, g: np.ndarray, lr: float) -> None:
        raise NotImplementedError


class SGD(Optimizer):
    """Heavy-ball momentum: ``v = mu v + g + wd p``, ``p -= lr v``."""

    def __init__(self, params: Sequence[Tensor], momentum: float = 0.9, weight_decay: float = 0.0):
        super().__init__(params, weight_decay)
        self.momentum = momentum
        self.velocity = [np.zeros_like(p.data) for p in self.params]

    def _update(self, i: int, p: Tensor, g: np.ndarray, lr: float) -> None:
        v = self.velocity[i]
        v *= self.momentum
        v += g
        p.data = p.data - lr * v


class Adam(Optimizer):
    """Bias-corrected Adam with weight decay added to the gradient as an L2 term."""

    def __init__(
        self,
        params: Sequence[Tensor],
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.01,
    ):
        super().__init__(params, weight_decay)
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def _advance(self) -> None:
        self.t += 1

    def _update(self, i: int, p: Tensor, g: np.ndarray, lr: float) -> None:
        m, v = self.m[i], self.v[i]
        m *= self.beta1
        m += (1 - self.beta1) * g
        v *= self.beta2
        v += (1 - self.beta2) * g * g
        m_hat = m / (1 - self.beta1 ** self.t)
        v_hat = v / (1 - self.beta2 ** self.t)
        p.data = p.data - lr * m_hat / (np.sqrt(v_hat) + self.eps)
