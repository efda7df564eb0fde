"""Scenario configuration schema.

A scenario is one YAML document; every key has a default, so ``{}`` is a
valid scenario.  Validation errors carry the offending key path (pydantic
reports ``section.field`` locations natively).
"""

from __future__ import annotations

from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..control import MpcConfig
from ..mapping import GridConfig
from ..sim import NetSpec, BoxSpec, MovingSphereSpec, SensorConfig, WorldSpec

Vec3 = tuple[float, float, float]


class ConfigError(ValueError):
    """Scenario file failed schema validation."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BoxObstacle(_Section):
    lo: Vec3
    hi: Vec3


class NetObstacle(_Section):
    center: Vec3
    width: float
    height: float
    yaw: float = 0.0
    spacing: float = 0.25
    wire_radius: float = 0.01


class SphereObstacle(_Section):
    center: Vec3
    radius: float
    velocity: Vec3 = (0.0, 0.0, 0.0)


class WorldSection(_Section):
    bounds_lo: Vec3 = (-20.0, -20.0, 0.0)
    bounds_hi: Vec3 = (20.0, 20.0, 10.0)
    ground_z: float = 0.0
    ground_amp: float = 0.0
    ground_wavelength: float = 8.0
    branch_density: float = 0.0
    branch_radius: tuple[float, float] = (0.02, 0.08)
    branch_height: tuple[float, float] = (1.0, 4.0)
    branch_tilt_max: float = 0.25
    boxes: list[BoxObstacle] = Field(default_factory=list)
    nets: list[NetObstacle] = Field(default_factory=list)
    spheres: list[SphereObstacle] = Field(default_factory=list)

    def to_spec(self) -> WorldSpec:
        return WorldSpec(
            bounds_lo=self.bounds_lo,
            bounds_hi=self.bounds_hi,
            ground_z=self.ground_z,
            ground_amp=self.ground_amp,
            ground_wavelength=self.ground_wavelength,
            branch_density=self.branch_density,
            branch_radius=self.branch_radius,
            branch_height=self.branch_height,
            branch_tilt_max=self.branch_tilt_max,
            boxes=tuple(BoxSpec(lo=b.lo, hi=b.hi) for b in self.boxes),
            nets=tuple(
                NetSpec(
                    center=n.center,
                    width=n.width,
                    height=n.height,
                    yaw=n.yaw,
                    spacing=n.spacing,
                    wire_radius=n.wire_radius,
                )
                for n in self.nets
            ),
            spheres=tuple(
                MovingSphereSpec(center=s.center, radius=s.radius, velocity=s.velocity)
                for s in self.spheres
            ),
        )


class GridSection(_Section):
    resolution: float = 0.1
    dims: tuple[int, int, int] = (128, 128, 48)
    d0: float = 0.4  # avoidance distance; becomes the occupied inflation radius
    r_unk: float | None = None  # unknown inflation radius; defaults to d0
    raycast_range: float = 8.0
    slide_threshold: float = 1.0

    def to_config(self) -> GridConfig:
        return GridConfig(
            resolution=self.resolution,
            dims=self.dims,
            r_occ=self.d0,
            r_unk=self.d0 if self.r_unk is None else self.r_unk,
            raycast_range=self.raycast_range,
            slide_threshold=self.slide_threshold,
        )


class PlannerSection(_Section):
    beta: float = 3.0  # escape search radius, m
    sfc_range: float = 3.0  # half-extent of the corridor collection box, m
    r_q: float = 0.2  # corridor shrink radius, m; at least the vehicle half-size
    goal_lookahead: float = 1.0  # seconds of stick velocity integrated into the goal


class MpcSection(_Section):
    n: int = 20
    dt: float = 0.05
    r_p: float = 100.0
    r_u: float = 0.1
    r_c: float = 1.0
    r_vn: float = 10.0
    r_an: float = 1.0
    v_max: float = 2.0
    a_max_xy: float = 6.0
    a_z_min: float = -5.0
    a_z_max: float = 14.0
    j_max: float = 60.0
    v_r: float = 1.5
    c_t: float = 1.0
    k_brake: float = 2.0
    slack_weight: float = 1.0e4

    def to_config(self) -> MpcConfig:
        return MpcConfig(**self.model_dump())


class SensorSection(_Section):
    max_range: float = 15.0
    sigma_range: float = 0.02
    points_per_scan: int = 2500
    vertical_fov_deg: float = 59.0

    def to_config(self) -> SensorConfig:
        return SensorConfig(**self.model_dump())


class PlantSection(_Section):
    c_t: float = 1.0
    tau_omega: float = 0.05
    sigma_p: float = 0.0  # odometry position noise, m
    sigma_v: float = 0.0  # odometry velocity noise, m/s
    wind: Vec3 = (0.0, 0.0, 0.0)


class RatesSection(_Section):
    plant: int = 1000
    odom: int = 200
    mpc: int = 100
    scan: int = 30
    joystick: int = 10

    @model_validator(mode="after")
    def _check(self) -> "RatesSection":
        for name in ("plant", "odom", "mpc", "scan", "joystick"):
            value = getattr(self, name)
            if value <= 0:
                raise ValueError(f"rate '{name}' must be positive")
            if name != "plant" and value > self.plant:
                raise ValueError(f"rate '{name}' exceeds the plant rate")
        return self


class ScriptSegment(_Section):
    t: float  # segment start, s
    v: Vec3  # stick velocity in the yaw-aligned frame, m/s
    yaw_rate: float = 0.0


class WaypointLeg(_Section):
    point: Vec3
    speed: float
    capture_radius: float = 0.3


class JoystickSection(_Section):
    source: Literal["hover", "script", "waypoints", "recorded", "live"] = "hover"
    segments: list[ScriptSegment] = Field(default_factory=list)
    waypoints: list[WaypointLeg] = Field(default_factory=list)
    recording: str | None = None  # JSONL file of joy records
    failsafe_timeout: float = 0.5  # silence before substituting hover, s

    @model_validator(mode="after")
    def _check(self) -> "JoystickSection":
        if self.source == "script" and not self.segments:
            raise ValueError("script source needs at least one segment")
        if self.source == "waypoints" and not self.waypoints:
            raise ValueError("waypoints source needs at least one leg")
        if self.source == "recorded" and not self.recording:
            raise ValueError("recorded source needs a recording path")
        if self.failsafe_timeout <= 0:
            raise ValueError("failsafe_timeout must be positive")
        return self


class ScenarioConfig(_Section):
    name: str = "scenario"
    duration: float = 10.0
    seed: int = 0
    initial_position: Vec3 = (0.0, 0.0, 1.2)
    initial_yaw: float = 0.0
    goal: Vec3 | None = None  # completion target; None means any outcome completes
    goal_tolerance: float = 0.5
    vehicle_radius: float = 0.2  # physical half-size for the safety flag, m
    world: WorldSection = Field(default_factory=WorldSection)
    grid: GridSection = Field(default_factory=GridSection)
    planner: PlannerSection = Field(default_factory=PlannerSection)
    mpc: MpcSection = Field(default_factory=MpcSection)
    sensor: SensorSection = Field(default_factory=SensorSection)
    plant: PlantSection = Field(default_factory=PlantSection)
    rates: RatesSection = Field(default_factory=RatesSection)
    joystick: JoystickSection = Field(default_factory=JoystickSection)

    @model_validator(mode="after")
    def _check(self) -> "ScenarioConfig":
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        return self

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=True)


def parse_scenario(data: dict | None) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data or {})
    except ValidationError as e:  # re-raise with key paths, minus the traceback wall
        lines = []
        for err in e.errors():
            path = ".".join(str(part) for part in err["loc"]) or "<root>"
            lines.append(f"{path}: {err['msg']}")
        raise ConfigError("; ".join(lines)) from None


def load_scenario(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is not None and not isinstance(data, dict):
        raise ConfigError("scenario file must contain a mapping")
    return parse_scenario(data)
