"""Regression losses for control targets.

Three kinds:

- ``mse``: mean of squared component errors.
- ``cosine``: 1 - cos(angle) between prediction and target, treating the
  whole output as a direction. Invariant under positive scaling of
  either argument; undefined (raises) on a zero-norm direction.
- ``throttle_direction``: squared error on component 0 plus the cosine
  term on components 1..3.

Batch values are the mean of per-sample losses; gradients are taken with
respect to the prediction and already include the batch-mean factor.
"""

from __future__ import annotations

import numpy as np

LOSS_KINDS = ("mse", "cosine", "throttle_direction")


def _as_batch(pred, target):
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError("prediction and target shapes differ")
    if p.ndim == 1:
        p, t = p[None, :], t[None, :]
    return p, t


def _cosine_terms(p, t):
    np_ = np.linalg.norm(p, axis=1)
    nt = np.linalg.norm(t, axis=1)
    if np.any(np_ == 0.0) or np.any(nt == 0.0):
        raise ValueError("zero-norm direction vector: cosine loss undefined")
    dot = np.sum(p * t, axis=1)
    return np_, nt, dot


def _cosine_value(p, t):
    np_, nt, dot = _cosine_terms(p, t)
    return 1.0 - dot / (np_ * nt)


def _cosine_grad(p, t):
    # d/dp [1 - p.t/(|p||t|)] = -t/(|p||t|) + (p.t) p / (|p|^3 |t|)
    np_, nt, dot = _cosine_terms(p, t)
    return -t / (np_ * nt)[:, None] + (dot / (np_**3 * nt))[:, None] * p


def loss_value(kind: str, pred, target) -> float:
    p, t = _as_batch(pred, target)
    if kind == "mse":
        return float(np.mean((p - t) ** 2))
    if kind == "cosine":
        return float(np.mean(_cosine_value(p, t)))
    if kind == "throttle_direction":
        if p.shape[1] != 4:
            raise ValueError("throttle_direction expects 4 components")
        sq = (p[:, 0] - t[:, 0]) ** 2
        return float(np.mean(sq + _cosine_value(p[:, 1:], t[:, 1:])))
    raise ValueError(f"unknown loss kind {kind!r}")


def loss_grad(kind: str, pred, target):
    """Gradient of the batch-mean loss with respect to the prediction."""
    p, t = _as_batch(pred, target)
    n = p.shape[0]
    if kind == "mse":
        g = 2.0 * (p - t) / (n * p.shape[1])
    elif kind == "cosine":
        g = _cosine_grad(p, t) / n
    elif kind == "throttle_direction":
        if p.shape[1] != 4:
            raise ValueError("throttle_direction expects 4 components")
        g = np.zeros_like(p)
        g[:, 0] = 2.0 * (p[:, 0] - t[:, 0]) / n
        g[:, 1:] = _cosine_grad(p[:, 1:], t[:, 1:]) / n
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    return g if np.asarray(pred).ndim > 1 else g[0]


def default_loss(problem: str) -> str:
    """Loss kind conventionally paired with each control problem."""
    return {"drone": "mse", "landing": "throttle_direction", "transfer": "cosine"}[problem]
