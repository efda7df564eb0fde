"""Occupancy-map domain types and the pure cell-level update rules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class CellState(IntEnum):
    UNKNOWN = 0
    KNOWN_FREE = 1
    OCCUPIED = 2


class InflationState(IntEnum):
    NO_INFLATION = 0
    UNKNOWN_INFLATION = 1
    OCCUPIED_INFLATION = 2


def prob_to_logodds(p: float) -> float:
    """ln(p / (1 - p)); domain (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability out of (0,1): {p}")
    return math.log(p / (1.0 - p))


def logodds_to_prob(l: float) -> float:
    return 1.0 / (1.0 + math.exp(-l))


# State thresholds default to the single-hit log-odds increment so one hit on a
# fresh cell is already Occupied; the rounded 0.8473 would need two.
_L_HIT_07 = prob_to_logodds(0.70)


@dataclass(frozen=True)
class GridConfig:
    resolution: float = 0.1
    dims: tuple[int, int, int] = (256, 256, 128)
    p_hit: float = 0.70
    p_miss: float = 0.40
    l_occ: float = _L_HIT_07
    l_free: float = -_L_HIT_07
    l_min: float = -2.0
    l_max: float = 3.5
    r_occ: float = 0.2
    r_unk: float = 0.2
    raycast_range: float = 20.0
    slide_threshold: float = 1.0

    def __post_init__(self) -> None:
        if not 0.5 < self.p_hit < 1.0:
            raise ValueError("p_hit must lie in (0.5, 1)")
        if not 0.0 < self.p_miss < 0.5:
            raise ValueError("p_miss must lie in (0, 0.5)")
        if not self.l_free < 0.0 < self.l_occ:
            raise ValueError("need l_free < 0 < l_occ")
        if self.l_min > self.l_free or self.l_max < self.l_occ:
            raise ValueError("clamp bounds must bracket the state thresholds")
        if self.r_occ < 0.0 or self.r_unk < 0.0:
            raise ValueError("inflation radii must be non-negative")
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")
        if len(self.dims) != 3 or any(int(d) < 1 for d in self.dims):
            raise ValueError("dims must be three positive cell counts")
        if self.raycast_range <= 0.0 or self.slide_threshold <= 0.0:
            raise ValueError("raycast_range and slide_threshold must be positive")

    @property
    def l_hit(self) -> float:
        return prob_to_logodds(self.p_hit)

    @property
    def l_miss(self) -> float:
        return prob_to_logodds(self.p_miss)


def update_cell(l_prev: float, hit: bool, cfg: GridConfig) -> float:
    """One measurement folded into a cell's log-odds, clamped."""
    if not math.isfinite(l_prev):
        raise ValueError("log-odds must be finite")
    l = l_prev + (cfg.l_hit if hit else cfg.l_miss)
    return min(max(l, cfg.l_min), cfg.l_max)


def precompute_offsets(r: float, resolution: float, ndim: int = 3) -> np.ndarray:
    """Integer cell offsets with ||delta||*resolution strictly below r, plus zero.

    The strict inequality matters: at r=0.2 m and 0.1 m cells it yields 9
    offsets in 2-D (a <= rule would give 13) and 27 in 3-D.
    """
    if r < 0.0 or resolution <= 0.0:
        raise ValueError("need r >= 0 and resolution > 0")
    if ndim not in (2, 3):
        raise ValueError("ndim must be 2 or 3")
    reach = int(math.ceil(r / resolution)) + 1
    axes = [np.arange(-reach, reach + 1)] * ndim
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, ndim)
    norm = np.sqrt((grid.astype(float) ** 2).sum(axis=1))
    keep = norm * resolution < r
    keep |= norm == 0.0
    out = grid[keep]
    order = np.lexsort(out.T[::-1])
    return np.ascontiguousarray(out[order], dtype=np.int64)


def cell_of(points: np.ndarray, resolution: float) -> np.ndarray:
    """Cell index of a world point; cell centers sit at integer multiples of res."""
    return np.floor(np.asarray(points, float) / resolution + 0.5).astype(np.int64)


def center_of(cells: np.ndarray, resolution: float) -> np.ndarray:
    return np.asarray(cells, np.int64) * resolution
