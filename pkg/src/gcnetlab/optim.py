"""Adam optimizer and reduce-on-plateau learning-rate scheduling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteError
from .network import Network


@dataclass
class TrainConfig:
    learning_rate: float = 5e-5
    batch_size: int = 1024
    epochs: int = 100
    scheduler_factor: float = 0.9
    scheduler_patience: int = 10
    weight_decay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 < self.scheduler_factor < 1.0:
            raise ValueError("scheduler_factor must lie in (0, 1)")
        if self.scheduler_patience < 1:
            raise ValueError("scheduler_patience must be >= 1")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size >= 1 and epochs >= 0 required")


class AdamState:
    """First/second moment accumulators, one pair per parameter tensor."""

    def __init__(self, net: Network, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m_w = [np.zeros_like(w) for w in net.weights]
        self.v_w = [np.zeros_like(w) for w in net.weights]
        self.m_b = [np.zeros_like(b) for b in net.biases]
        self.v_b = [np.zeros_like(b) for b in net.biases]


def adam_step(state: AdamState, net: Network, grad_w, grad_b, lr: float,
              weight_decay: float = 0.0) -> None:
    """One bias-corrected Adam update, applied in place."""
    for g in grad_w + grad_b:
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("non-finite gradient passed to adam_step")
    state.step_count += 1
    t = state.step_count
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for ws, gs, ms, vs in (
        (net.weights, grad_w, state.m_w, state.v_w),
        (net.biases, grad_b, state.m_b, state.v_b),
    ):
        for w, g, m, v in zip(ws, gs, ms, vs):
            if weight_decay:
                g = g + weight_decay * w
            m *= state.beta1
            m += (1.0 - state.beta1) * g
            v *= state.beta2
            v += (1.0 - state.beta2) * g * g
            w -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


@dataclass
class PlateauScheduler:
    """Cuts the learning rate by ``factor`` after ``patience`` consecutive
    epochs without strict improvement over the best loss seen."""

    lr: float
    factor: float = 0.9
    patience: int = 10
    threshold: float = 0.0
    best: float = field(default=np.inf)
    bad_epochs: int = 0

    def step(self, epoch_loss: float) -> float:
        if not np.isfinite(epoch_loss):
            raise NonFiniteError("non-finite epoch loss")
        if epoch_loss < self.best - self.threshold:
            self.best = epoch_loss
            self.bad_epochs = 0
        else:
            self.bad_epochs += 1
            if self.bad_epochs >= self.patience:
                self.lr *= self.factor
                self.bad_epochs = 0
        return self.lr
