"""Single-polytope safe flight corridor around a seed point.

The corridor starts as the axis-aligned collection box (seed +- sfc_range,
intersected with the map window) and is carved by tangent halfplanes: take
the obstacle point nearest the seed, cut it away with a plane pulled inward
of it, drop every point behind that plane, repeat.  Obstacle points are the
centers of Occupied and frontier cells, so unknown space is never entered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..mapping import CellState, LocalMap, center_of
from .frontend import NoCorridor

_MAX_PLANES = 60
_SEED_MARGIN = 1e-9


@dataclass
class Polytope:
    C: np.ndarray  # (k, 3) unit outward normals
    d: np.ndarray  # (k,) offsets after the vehicle-radius shrink, m
    d_pre: np.ndarray  # (k,) offsets before the shrink, m

    def contains(self, points, margin: float = 0.0, pre: bool = False) -> np.ndarray:
        """Row-wise test C p <= d - margin for (n, 3) points."""
        pts = np.atleast_2d(np.asarray(points, float))
        d = self.d_pre if pre else self.d
        return np.all(pts @ self.C.T <= d - margin + 1e-12, axis=1)


def generate_sfc(
    lmap: LocalMap,
    seed,
    r_q: float = 0.2,
    sfc_range: float = 5.0,
    max_planes: int = _MAX_PLANES,
) -> Polytope:
    """Largest-effort convex corridor around `seed`.

    The returned offsets are shrunk by r_q plus half a cell diagonal so the
    corridor constrains the vehicle center, not just a point.  Raises
    NoCorridor when the seed cell is not KnownFree or the plane budget runs
    out before every obstacle point is excluded.
    """
    seed = np.asarray(seed, float)
    if seed.shape != (3,):
        raise ValueError("seed must be a 3-vector")
    if not lmap.contains(seed):
        raise NoCorridor("seed outside the window")
    if lmap.state_at(seed) != CellState.KNOWN_FREE:
        raise NoCorridor("seed cell is not KnownFree")

    res = lmap.config.resolution
    half_diag = 0.5 * res * math.sqrt(3.0)
    win_lo, win_hi = lmap.window_bounds()
    box_lo = np.maximum(seed - sfc_range, win_lo)
    box_hi = np.minimum(seed + sfc_range, win_hi)

    rows_c = [np.eye(3)[i] for i in range(3)] + [-np.eye(3)[i] for i in range(3)]
    rows_d = [box_hi[0], box_hi[1], box_hi[2], -box_lo[0], -box_lo[1], -box_lo[2]]

    obstacles = center_of(lmap.obstacle_cells(box_lo, box_hi), res)
    if len(obstacles):
        inside = np.all(
            obstacles @ np.array(rows_c).T <= np.array(rows_d) + 1e-12, axis=1
        )
        remaining = obstacles[inside]
    else:
        remaining = obstacles

    added = 0
    while len(remaining):
        if added >= max_planes:
            raise NoCorridor("halfplane budget exhausted")
        dists = np.linalg.norm(remaining - seed, axis=1)
        j = int(np.argmin(dists))
        dist = float(dists[j])
        if dist <= 0.0:
            raise NoCorridor("obstacle point coincides with the seed")
        n = (remaining[j] - seed) / dist
        # Pull the plane inward of the point, but never past the seed.
        slack = min(max(half_diag, 0.15 * dist), 0.8 * dist)
        d_i = float(n @ remaining[j]) - slack
        rows_c.append(n)
        rows_d.append(d_i)
        added += 1
        remaining = remaining[remaining @ n <= d_i + 1e-12]

    C = np.array(rows_c, float)
    d_pre = np.array(rows_d, float)
    seed_proj = C @ seed
    d = np.maximum(d_pre - (r_q + half_diag), seed_proj + _SEED_MARGIN)
    return Polytope(C=C, d=d, d_pre=d_pre)
