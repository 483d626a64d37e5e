"""Learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class ScheduleConfig:
    eta_min: float
    eta_max: float
    t_max: int

    def __post_init__(self):
        if self.eta_min <= 0 or self.eta_max < self.eta_min:
            raise ConfigError(f"need 0 < eta_min <= eta_max, got {self.eta_min}, {self.eta_max}")
        if self.t_max < 1:
            raise ConfigError(f"t_max must be >= 1, got {self.t_max}")


def cosine_lr(t_cur: int, cfg: ScheduleConfig) -> float:
    """Cosine annealing from eta_max (t=0) down to eta_min (t=t_max)."""
    if not 0 <= t_cur <= cfg.t_max:
        raise ConfigError(f"t_cur must be in [0, {cfg.t_max}], got {t_cur}")
    span = cfg.eta_max - cfg.eta_min
    return cfg.eta_min + 0.5 * span * (1.0 + math.cos(math.pi * t_cur / cfg.t_max))
