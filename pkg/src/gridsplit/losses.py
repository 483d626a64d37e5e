"""Binary classification losses with analytic gradients.

All losses operate on raw logits.  Probabilities are clamped to
[1e-7, 1 - 1e-7] before any log, which bounds the loss without moving
the gradient inside the representable band.  Each loss ships a *_grad
twin so finite-difference checks can compare against closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GridSplitError

CLAMP = 1e-7


@dataclass(frozen=True)
class LossConfig:
    """Focal loss shape: alpha weights the positive class, gamma >= 0
    down-weights easy examples (gamma = 0 recovers alpha-weighted BCE)."""

    alpha: float = 0.25
    gamma: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise GridSplitError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.gamma < 0.0:
            raise GridSplitError(f"gamma must be >= 0, got {self.gamma}")


def sigmoid(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _clamped(x) -> np.ndarray:
    return np.clip(sigmoid(x), CLAMP, 1.0 - CLAMP)


def bce_loss(x, y) -> np.ndarray:
    """Elementwise binary cross-entropy on logits."""
    s = _clamped(x)
    y = np.asarray(y, dtype=np.float64)
    return -(y * np.log(s) + (1.0 - y) * np.log1p(-s))


def bce_grad(x, y) -> np.ndarray:
    """d bce_loss / d x = sigmoid(x) - y."""
    return sigmoid(x) - np.asarray(y, dtype=np.float64)


def sigmoid_focal_loss(x, y, cfg: LossConfig = LossConfig()) -> np.ndarray:
    """Elementwise focal loss on logits.

    y = 1: alpha * (1-s)^gamma * log(1/s)
    y = 0: (1-alpha) * s^gamma * log(1/(1-s))
    """
    s = _clamped(x)
    y = np.asarray(y, dtype=np.float64)
    pos = -cfg.alpha * (1.0 - s) ** cfg.gamma * np.log(s)
    neg = -(1.0 - cfg.alpha) * s**cfg.gamma * np.log1p(-s)
    return np.where(y >= 0.5, pos, neg)


def sigmoid_focal_grad(x, y, cfg: LossConfig = LossConfig()) -> np.ndarray:
    """Closed-form d focal / d x (reduces to bce_grad scaled by class
    weight at gamma = 0)."""
    s = sigmoid(x)
    sc = np.clip(s, CLAMP, 1.0 - CLAMP)
    y = np.asarray(y, dtype=np.float64)
    g = cfg.gamma
    pos = cfg.alpha * (1.0 - s) ** g * (g * s * np.log(sc) - (1.0 - s))
    neg = (1.0 - cfg.alpha) * s**g * (s - g * (1.0 - s) * np.log1p(-sc))
    return np.where(y >= 0.5, pos, neg)


def grad_check(
    fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
    t: np.ndarray,
    eps: float = 1e-5,
) -> float:
    """Max elementwise relative error between fn's analytic gradient and
    central differences of its value.

    fn maps an array to (scalar value, gradient of same shape).  The
    relative error denominator is floored at 1e-3 so near-zero entries
    compare absolutely.
    """
    if not 1e-6 <= eps <= 1e-3:
        raise GridSplitError(f"eps must be in [1e-6, 1e-3], got {eps}")
    t = np.asarray(t, dtype=np.float64)
    value, grad = fn(t)
    grad = np.asarray(grad, dtype=np.float64)
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        raise GridSplitError("non-finite value or gradient at the checked point")
    if grad.shape != t.shape:
        raise GridSplitError(f"gradient shape {grad.shape} != input shape {t.shape}")
    numeric = np.empty_like(t)
    flat = t.ravel()
    num_flat = numeric.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi, _ = fn(t)
        flat[i] = orig - eps
        lo, _ = fn(t)
        flat[i] = orig
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise GridSplitError(f"non-finite value at probe index {i}")
        num_flat[i] = (hi - lo) / (2.0 * eps)
    denom = np.maximum(np.maximum(np.abs(grad), np.abs(numeric)), 1e-3)
    return float(np.max(np.abs(grad - numeric) / denom))
