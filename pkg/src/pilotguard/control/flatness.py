"""Differential-flatness map from translational references to body rates and
throttle.

The quadrotor's flat outputs make attitude a function of the thrust vector
t = a + g e_z: the body z axis must align with t.  Rates follow from the
jerk projected onto the plane normal to z_B, divided by the thrust-vector
norm (the acceleration norm is singular at hover and is not used)."""

from __future__ import annotations

import numpy as np

from ..geom import wrap_angle
from ..types import AttitudeCommand

GRAVITY = 9.81
_EPS_THRUST = 1e-6


class FreeFall(ValueError):
    """Thrust vector vanished; no attitude can realize the command."""


def _basis(a, yaw: float, g: float):
    a = np.asarray(a, float)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite flatness input")
    t = a + np.array([0.0, 0.0, g])
    t_norm = float(np.linalg.norm(t))
    if t_norm <= _EPS_THRUST:
        raise FreeFall("zero thrust vector")
    z_b = t / t_norm
    x_c = np.array([np.cos(yaw), np.sin(yaw), 0.0])
    y_b = np.cross(z_b, x_c)
    y_norm = float(np.linalg.norm(y_b))
    if y_norm <= _EPS_THRUST:
        raise FreeFall("thrust vector parallel to the yaw heading")
    y_b /= y_norm
    x_b = np.cross(y_b, z_b)
    return x_b, y_b, z_b, t_norm


def flat_frame(a, yaw: float, g: float = GRAVITY) -> np.ndarray:
    """Attitude realizing acceleration `a` at heading `yaw`, as a rotation
    matrix with columns (x_B, y_B, z_B)."""
    x_b, y_b, z_b, _ = _basis(a, yaw, g)
    return np.column_stack([x_b, y_b, z_b])


def flatness_transform(
    a,
    j,
    yaw: float,
    yaw_ref: float,
    c_t: float = 1.0,
    g: float = GRAVITY,
    stamp: float = 0.0,
) -> AttitudeCommand:
    """Body rates (p_r, q_r, r_r) and throttle for an acceleration/jerk pair.

    Raises FreeFall when the commanded thrust vector is (numerically) zero;
    the caller should hold its previous command.
    """
    j = np.asarray(j, float)
    if not np.all(np.isfinite(j)):
        raise ValueError("non-finite flatness input")
    x_b, y_b, z_b, t_norm = _basis(a, yaw, g)
    h_w = (j - (z_b @ j) * z_b) / t_norm
    p_r = -float(h_w @ y_b)
    q_r = float(h_w @ x_b)
    r_r = wrap_angle(yaw_ref - yaw) * float(z_b[2])
    return AttitudeCommand(
        stamp=stamp,
        rates=np.array([p_r, q_r, r_r]),
        thrust=c_t * t_norm,
    )
