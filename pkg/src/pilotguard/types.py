"""Shared sensor/state record types passed between simulator, mapper and
controller."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LidarScan:
    stamp: float
    origin: np.ndarray  # (3,) sensor position, world frame
    dirs: np.ndarray  # (k, 3) unit directions, world frame
    ranges: np.ndarray  # (k,) metres; undefined where not valid
    valid: np.ndarray  # (k,) bool

    def __post_init__(self) -> None:
        self.origin = np.asarray(self.origin, float)
        self.dirs = np.asarray(self.dirs, float).reshape(-1, 3)
        self.ranges = np.asarray(self.ranges, float).reshape(-1)
        self.valid = np.asarray(self.valid, bool).reshape(-1)
        if not (len(self.dirs) == len(self.ranges) == len(self.valid)):
            raise ValueError("scan arrays must share one length")


@dataclass
class Odometry:
    stamp: float
    p: np.ndarray  # (3,) m
    v: np.ndarray  # (3,) m/s
    a: np.ndarray  # (3,) m/s^2, gravity-compensated world frame
    yaw: float

    def __post_init__(self) -> None:
        self.p = np.asarray(self.p, float)
        self.v = np.asarray(self.v, float)
        self.a = np.asarray(self.a, float)


@dataclass
class JoystickCommand:
    """Velocity-style stick input: body-frame translational command plus a
    yaw rate, both normalized to physical units already."""

    stamp: float
    v_cmd: np.ndarray  # (3,) m/s in the yaw-aligned frame
    yaw_rate: float  # rad/s

    def __post_init__(self) -> None:
        self.v_cmd = np.asarray(self.v_cmd, float)


@dataclass
class AttitudeCommand:
    """Body-rate plus collective-throttle setpoint for the inner loop."""

    stamp: float
    rates: np.ndarray  # (3,) body rates p_r, q_r, r_r, rad/s
    thrust: float  # throttle command T_r (same units as C_T * accel)

    def __post_init__(self) -> None:
        self.rates = np.asarray(self.rates, float)
