"""Numeric verification of every analytic loss gradient."""

from __future__ import annotations

import numpy as np

from ..losses import (
    LossConfig,
    bce_grad,
    bce_loss,
    grad_check,
    sigmoid_focal_grad,
    sigmoid_focal_loss,
)
from ..merger import loss_merge, loss_merge_grad
from ..splitter import (
    loss_instance,
    loss_instance_grad,
    loss_segmentation,
    loss_segmentation_grad,
)

FAMILIES = ("bce", "focal", "segmentation", "merge")


def _case(family: str, rng: np.random.Generator, cfg: LossConfig):
    """One (fn, logits) gradient-check case for the given loss family."""
    if family == "bce":
        x = rng.normal(0.0, 2.0, size=12)
        t = rng.integers(0, 2, size=12).astype(np.float64)
        return lambda v: (float(bce_loss(v, t).sum()), bce_grad(v, t)), x
    if family == "focal":
        x = rng.normal(0.0, 2.0, size=12)
        t = rng.integers(0, 2, size=12).astype(np.float64)
        return (
            lambda v: (float(sigmoid_focal_loss(v, t, cfg).sum()), sigmoid_focal_grad(v, t, cfg)),
            x,
        )
    if family == "segmentation":
        h, w, k = 5, 4, 3
        x = rng.normal(0.0, 2.0, size=(h, w, k))
        t = (rng.random((h, w, k)) < 0.3).astype(np.float64)
        t[rng.integers(0, h), rng.integers(0, w), :] = 1.0  # every channel needs mass
        return (
            lambda v: (loss_segmentation(v, t, cfg), loss_segmentation_grad(v, t, cfg)),
            x,
        )
    if family == "merge":
        m, n = 3, 2
        x = rng.normal(0.0, 2.0, size=(m, n, m, n))
        t = (rng.random((m, n, m, n)) < 0.3).astype(np.float64)
        ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
        t[ii, jj, ii, jj] = 1.0
        return lambda v: (loss_merge(v, t, cfg), loss_merge_grad(v, t, cfg)), x
    raise ValueError(f"unknown loss family {family!r}")


def run_gradcheck(
    seed: int = 0,
    count: int = 20,
    eps: float = 1e-5,
    cfg: LossConfig = LossConfig(),
) -> dict[str, float]:
    """Worst relative gradient error per loss family over count seeds."""
    worst = {f: 0.0 for f in FAMILIES}
    for family in FAMILIES:
        for i in range(count):
            rng = np.random.default_rng([seed + i, FAMILIES.index(family)])
            fn, x = _case(family, rng, cfg)
            worst[family] = max(worst[family], grad_check(fn, x, eps=eps))
    return worst


def instance_loss_pair(scores, target):
    """(value, grad) adapter for the instance loss, for spot checks."""
    return loss_instance(scores, target), loss_instance_grad(scores, target)
