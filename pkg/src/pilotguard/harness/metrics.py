"""Run metrics and clearance computation.

Clearance is the exact analytic distance from the vehicle center to the
nearest obstacle primitive (boxes, capsules, spheres at their positions at
the sample time).  Terrain is excluded: it is the flight floor, not an
avoidance target, and including it would make the no-obstacle sentinel
unreachable.  ``CLEARANCE_SENTINEL`` (1e30) stands in for infinity so logs
stay strict JSON.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..sim import WorldModel

CLEARANCE_SENTINEL = 1e30  # matches WorldModel.clearance with nothing to hit


def min_clearance(points, times, world: WorldModel) -> float:
    """Minimum distance from trajectory samples to the nearest surface."""
    pts = np.atleast_2d(np.asarray(points, float))
    ts = np.atleast_1d(np.asarray(times, float))
    if pts.shape[0] == 0:
        raise ValueError("trajectory must be non-empty")
    if pts.shape[0] != ts.shape[0]:
        raise ValueError("points and times must share one length")
    best = CLEARANCE_SENTINEL
    for p, t in zip(pts, ts):
        d = world.clearance(p, t, include_ground=False)
        if d < best:
            best = d
    return float(min(best, CLEARANCE_SENTINEL))


def timing_stats(samples) -> dict[str, float]:
    """p50/p90/p99 in milliseconds."""
    if not samples:
        return {"p50": 0.0, "p90": 0.0, "p99": 0.0, "count": 0}
    arr = np.asarray(samples, float) * 1e3
    return {
        "p50": float(np.percentile(arr, 50)),
        "p90": float(np.percentile(arr, 90)),
        "p99": float(np.percentile(arr, 99)),
        "count": int(arr.size),
    }


@dataclass
class Metrics:
    min_clearance: float = CLEARANCE_SENTINEL
    mean_speed: float = 0.0
    max_speed: float = 0.0
    path_length: float = 0.0
    completion: bool = True
    safety_violation: bool = False
    counters: dict = field(default_factory=dict)
    # Wall-clock percentiles per module. Reported to the caller but kept out
    # of the log payload: logs must be byte-identical across equal-seed runs.
    timings: dict = field(default_factory=dict)

    def summary_payload(self) -> dict:
        return {
            "type": "summary",
            "min_clearance": self.min_clearance,
            "mean_speed": self.mean_speed,
            "max_speed": self.max_speed,
            "path_length": self.path_length,
            "completion": self.completion,
            "safety_violation": self.safety_violation,
            "counters": dict(self.counters),
        }
