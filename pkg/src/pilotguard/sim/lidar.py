"""LiDAR sensor model: panoramic random sampling, range noise, and the
near-blind / no-return invalid-point behavior."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..types import LidarScan
from .world import NO_HIT, WorldModel


@dataclass(frozen=True)
class SensorConfig:
    max_range: float = 40.0
    sigma_range: float = 0.02
    points_per_scan: int = 6667
    vertical_fov_deg: float = 59.0

    def __post_init__(self) -> None:
        if self.max_range <= 0 or self.points_per_scan < 0:
            raise ValueError("bad sensor config")
        if not 0.0 < self.vertical_fov_deg <= 180.0:
            raise ValueError("vertical FOV out of range")


def near_blind_ratio(d: float) -> float:
    """Probability that a return closer than 1 m comes back invalid.

    Linear from 0.8 at 0.1 m down to 0.1 just under 1 m, zero beyond.
    """
    if d >= 1.0:
        return 0.0
    return float(np.clip(0.8 - 0.7 * (d - 0.1) / 0.9, 0.0, 0.8))


def sample_scan(
    world: WorldModel,
    attitude: np.ndarray,
    origin: np.ndarray,
    stamp: float,
    rng: np.random.Generator,
    cfg: SensorConfig = SensorConfig(),
) -> LidarScan:
    """One panoramic scan from `origin` with the sensor fixed to the body.

    Azimuth is uniform over the full circle and elevation uniform across the
    vertical FOV, both in the sensor frame, then rotated by `attitude`.  The
    non-repetitive rosette of the real unit is approximated by independent
    random directions each scan.
    """
    n = cfg.points_per_scan
    az = rng.uniform(-np.pi, np.pi, size=n)
    half_fov = np.deg2rad(cfg.vertical_fov_deg) / 2.0
    el = rng.uniform(-half_fov, half_fov, size=n)
    ce = np.cos(el)
    body_dirs = np.stack([ce * np.cos(az), ce * np.sin(az), np.sin(el)], axis=1)
    dirs = body_dirs @ np.asarray(attitude, float).T

    true_dist = world.raycast(origin, dirs, stamp, cfg.max_range)
    hit = true_dist < cfg.max_range

    noise = rng.normal(0.0, cfg.sigma_range, size=n)
    ranges = np.where(hit, true_dist + noise, np.nan)
    # Noise must not push a return non-positive or past max_range.
    ranges = np.where(hit, np.clip(ranges, 1e-3, cfg.max_range), np.nan)

    blind_draw = rng.random(n)
    blind = np.zeros(n, bool)
    close = hit & (true_dist < 1.0)
    if close.any():
        d = true_dist[close]
        probs = np.clip(0.8 - 0.7 * (d - 0.1) / 0.9, 0.0, 0.8)
        blind[close] = blind_draw[close] < probs

    valid = hit & ~blind
    return LidarScan(stamp=stamp, origin=np.asarray(origin, float), dirs=dirs,
                     ranges=ranges, valid=valid)
