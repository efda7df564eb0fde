"""Deterministic world, LiDAR and quadrotor plant simulation."""

from .lidar import SensorConfig, sample_scan
from .plant import PlantParams, PlantState, hover_state, read_odometry, step_plant
from .world import (
    BoxSpec,
    MovingSphereSpec,
    NetSpec,
    WorldModel,
    WorldSpec,
    generate_world,
)

__all__ = [
    "BoxSpec",
    "MovingSphereSpec",
    "NetSpec",
    "PlantParams",
    "PlantState",
    "SensorConfig",
    "WorldModel",
    "WorldSpec",
    "generate_world",
    "hover_state",
    "read_odometry",
    "sample_scan",
    "step_plant",
]
