"""Small shared geometry helpers."""

from __future__ import annotations

import numpy as np


def wrap_angle(a: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    w = -((-a + np.pi) % (2.0 * np.pi) - np.pi)
    # fmod can land exactly on -pi; fold that onto +pi
    if w <= -np.pi:
        w = np.pi
    return float(w)


def yaw_rotation(yaw: float) -> np.ndarray:
    """Rotation matrix of the yaw frame w.r.t. the world frame (roll=pitch=0)."""
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def yaw_of_rotation(R: np.ndarray) -> float:
    """Yaw angle of a body rotation matrix (heading of the body x axis)."""
    return float(np.arctan2(R[1, 0], R[0, 0]))


def rotation_exp(omega: np.ndarray, dt: float) -> np.ndarray:
    """Rodrigues' formula for the incremental rotation exp([omega*dt]_x)."""
    phi = omega * dt
    angle = np.linalg.norm(phi)
    if angle < 1e-12:
        K = skew(phi)
        return np.eye(3) + K + 0.5 * (K @ K)
    axis = phi / angle
    K = skew(axis)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def skew(v: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )
