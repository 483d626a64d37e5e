"""Pipeline configuration and key=value override parsing."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .errors import ConfigError

# Environment knobs.  THREADS caps every worker pool the CLI creates;
# PURE and NO_EXT are honored by the kernel backend and the build.
ENV_THREADS = "GRIDSPLIT_THREADS"

ALIASES = {"R": "roi_bins", "C": "channels", "D": "embed_dim"}


@dataclass(frozen=True)
class PipelineConfig:
    threshold: float = 0.5
    alpha: float = 0.25
    gamma: float = 2.0
    roi_bins: int = 3
    channels: int = 256
    embed_dim: int = 512
    seed: int = 0
    use_position_encoding: bool = True
    downscale: int = 4

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must lie in (0, 1), got {self.threshold}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.gamma < 0.0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if self.roi_bins < 1:
            raise ConfigError(f"roi_bins must be >= 1, got {self.roi_bins}")
        if self.channels < 1:
            raise ConfigError(f"channels must be >= 1, got {self.channels}")
        if self.embed_dim < 4:
            raise ConfigError(f"embed_dim must be >= 4, got {self.embed_dim}")
        if self.downscale < 1:
            raise ConfigError(f"downscale must be >= 1, got {self.downscale}")


def _coerce(name: str, kind: type, raw: str):
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name} expects a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name} expects {kind.__name__}, got {raw!r}") from None


def parse_overrides(pairs, base: PipelineConfig | None = None) -> PipelineConfig:
    """Apply key=value strings (aliases R, C, D allowed) to a config."""
    cfg = base or PipelineConfig()
    kinds = {
        "threshold": float, "alpha": float, "gamma": float,
        "roi_bins": int, "channels": int, "embed_dim": int,
        "seed": int, "use_position_encoding": bool, "downscale": int,
    }
    assert set(kinds) == {f.name for f in fields(PipelineConfig)}
    updates = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"expected key=value, got {pair!r}")
        name = ALIASES.get(key, key)
        if name not in kinds:
            raise ConfigError(f"unknown config key {key!r}")
        updates[name] = _coerce(name, kinds[name], raw)
    return replace(cfg, **updates)


def max_workers(requested: int | None = None) -> int:
    """Worker count for batch commands; the environment caps requests."""
    cap = None
    raw = os.environ.get(ENV_THREADS)
    if raw is not None:
        try:
            cap = int(raw)
        except ValueError:
            raise ConfigError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
        if cap < 1:
            raise ConfigError(f"{ENV_THREADS} must be >= 1, got {cap}")
    if requested is not None and requested < 1:
        raise ConfigError(f"worker count must be >= 1, got {requested}")
    if requested is None:
        return cap or 1
    return min(requested, cap) if cap else requested
