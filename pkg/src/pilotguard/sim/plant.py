"""Quadrotor plant: body-rate/throttle inner loop abstracted as a first-order
lag, rigid-body kinematics integrated with semi-implicit Euler."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geom import rotation_exp, yaw_of_rotation
from ..types import AttitudeCommand, Odometry

GRAVITY = 9.81


@dataclass(frozen=True)
class PlantParams:
    c_t: float = 1.0  # throttle units per m/s^2 of collective acceleration
    tau_omega: float = 0.05  # body-rate loop time constant, s
    g: float = GRAVITY

    def __post_init__(self) -> None:
        if self.c_t <= 0 or self.tau_omega <= 0:
            raise ValueError("bad plant parameters")


@dataclass
class PlantState:
    p: np.ndarray
    v: np.ndarray
    attitude: np.ndarray  # 3x3 rotation, body to world
    omega: np.ndarray  # body rates, rad/s
    t_sim: float = 0.0
    a: np.ndarray = field(default_factory=lambda: np.zeros(3))  # last world accel

    @property
    def yaw(self) -> float:
        return yaw_of_rotation(self.attitude)

    def copy(self) -> "PlantState":
        return PlantState(
            p=self.p.copy(),
            v=self.v.copy(),
            attitude=self.attitude.copy(),
            omega=self.omega.copy(),
            t_sim=self.t_sim,
            a=self.a.copy(),
        )


def hover_state(position, yaw: float = 0.0) -> PlantState:
    c, s = np.cos(yaw), np.sin(yaw)
    att = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return PlantState(
        p=np.asarray(position, float).copy(),
        v=np.zeros(3),
        attitude=att,
        omega=np.zeros(3),
    )


def step_plant(
    state: PlantState,
    cmd: AttitudeCommand,
    wind: np.ndarray,
    dt: float,
    params: PlantParams = PlantParams(),
) -> PlantState:
    """One integration step.

    Order: rate lag, attitude, acceleration from the new attitude, velocity,
    then position from the new velocity.  Hover (zero rates, T = c_t * g,
    zero wind) is an exact fixed point of this scheme.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not (np.all(np.isfinite(cmd.rates)) and np.isfinite(cmd.thrust)):
        raise ValueError("non-finite attitude command")
    if cmd.thrust < 0:
        raise ValueError("negative thrust command")
    wind = np.asarray(wind, float)

    omega = state.omega + (dt / params.tau_omega) * (cmd.rates - state.omega)
    att = state.attitude @ rotation_exp(omega, dt)
    z_b = att[:, 2]
    accel = (cmd.thrust / params.c_t) * z_b - np.array([0.0, 0.0, params.g]) + wind
    v = state.v + accel * dt
    p = state.p + v * dt
    return PlantState(
        p=p, v=v, attitude=att, omega=omega, t_sim=state.t_sim + dt, a=accel
    )


def read_odometry(
    state: PlantState,
    rng: np.random.Generator | None = None,
    sigma_p: float = 0.0,
    sigma_v: float = 0.0,
) -> Odometry:
    p = state.p.copy()
    v = state.v.copy()
    if rng is not None and (sigma_p > 0.0 or sigma_v > 0.0):
        p = p + rng.normal(0.0, sigma_p, 3) if sigma_p > 0 else p
        v = v + rng.normal(0.0, sigma_v, 3) if sigma_v > 0 else v
    return Odometry(stamp=state.t_sim, p=p, v=v, a=state.a.copy(), yaw=state.yaw)
