"""CPI surprise series (temporary + permanent components) and liquidity series.

The surprise at event t is the sum of a transient component and a random-walk
(permanent) component; liquidity is an i.i.d. normal level clamped at a floor.
Both are pure functions of (config, stream).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import Stream


@dataclass(frozen=True)
class ShockConfig:
    temp_scale: float = 0.1
    perm_scale: float = 0.05
    temp_ar: float = 0.0          # AR(1) coefficient on the temp component; 0 = i.i.d.
    liq_mean: float = 0.5
    liq_scale: float = 0.1
    liquidity_floor: float = 0.0
    horizon: int = 36

    def __post_init__(self):
        if self.temp_scale < 0:
            raise ValueError(f"shock.temp_scale must be >= 0, got {self.temp_scale}")
        if self.perm_scale < 0:
            raise ValueError(f"shock.perm_scale must be >= 0, got {self.perm_scale}")
        if not -1.0 < self.temp_ar < 1.0:
            raise ValueError(f"shock.temp_ar must lie in (-1, 1), got {self.temp_ar}")
        if self.liq_scale < 0:
            raise ValueError(f"shock.liq_scale must be >= 0, got {self.liq_scale}")
        if self.horizon < 1:
            raise ValueError(f"shock horizon must be >= 1, got {self.horizon}")


@dataclass(frozen=True)
class SurprisePath:
    """Per-event surprise decomposition.

    `temp` is stored as ``total - perm`` so that recovering the temporary
    component from the other two is bit-exact; it differs from the raw
    scaled draw by at most one ulp.
    """

    temp: np.ndarray
    perm: np.ndarray
    total: np.ndarray


@dataclass(frozen=True)
class LiquiditySeries:
    """Per-event liquidity level; `clamped` flags draws raised to the floor."""

    values: np.ndarray
    clamped: np.ndarray


def generate_surprises(cfg: ShockConfig, stream: Stream) -> SurprisePath:
    """Draw one surprise path of length ``cfg.horizon``.

    Consumes exactly 2*horizon normals: the first block drives the temp
    component, the second block the permanent random-walk increments (the
    walk starts at its first increment, i.e. perm[0] = perm_scale * w_0).
    """
    t = cfg.horizon
    z = stream.normals(2 * t)
    innovations = cfg.temp_scale * z[:t]
    if cfg.temp_ar != 0.0:
        temp = np.empty(t)
        prev = 0.0
        for i in range(t):
            prev = cfg.temp_ar * prev + innovations[i]
            temp[i] = prev
    else:
        temp = innovations
    perm = np.cumsum(cfg.perm_scale * z[t:])
    total = temp + perm
    return SurprisePath(temp=total - perm, perm=perm, total=total)


def generate_liquidity(cfg: ShockConfig, stream: Stream) -> LiquiditySeries:
    """Draw one liquidity series of length ``cfg.horizon`` (horizon normals)."""
    z = stream.normals(cfg.horizon)
    raw = cfg.liq_mean + cfg.liq_scale * z
    clamped = raw < cfg.liquidity_floor
    return LiquiditySeries(values=np.maximum(raw, cfg.liquidity_floor), clamped=clamped)
