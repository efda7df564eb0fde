"""Synthetic scene construction and geometric queries.

A world is a flat or gently rolling terrain plus three obstacle families:
axis-aligned boxes (walls, blocks), capsules (branches, net wires after
expansion) and spheres that may translate at constant velocity (a walking
person stand-in).  Generation is a pure function of (spec, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _geom

NO_HIT = _geom.NO_HIT


@dataclass(frozen=True)
class BoxSpec:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]


@dataclass(frozen=True)
class NetSpec:
    """Rectangular wire net in a vertical plane.

    The rectangle spans `width` (horizontal) by `height` (vertical), centered
    at `center`, rotated by `yaw` about z.  Wires run both directions every
    `spacing` metres with radius `wire_radius`.
    """

    center: tuple[float, float, float]
    width: float
    height: float
    yaw: float = 0.0
    spacing: float = 0.25
    wire_radius: float = 0.01


@dataclass(frozen=True)
class MovingSphereSpec:
    center: tuple[float, float, float]
    radius: float
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class WorldSpec:
    bounds_lo: tuple[float, float, float] = (-20.0, -20.0, 0.0)
    bounds_hi: tuple[float, float, float] = (20.0, 20.0, 10.0)
    ground_z: float = 0.0
    ground_amp: float = 0.0
    ground_wavelength: float = 8.0
    branch_density: float = 0.0  # branches per square metre of footprint
    branch_radius: tuple[float, float] = (0.02, 0.08)
    branch_height: tuple[float, float] = (1.0, 4.0)
    branch_tilt_max: float = 0.25  # radians from vertical
    boxes: tuple[BoxSpec, ...] = ()
    nets: tuple[NetSpec, ...] = ()
    spheres: tuple[MovingSphereSpec, ...] = ()

    def __post_init__(self) -> None:
        lo = np.asarray(self.bounds_lo, float)
        hi = np.asarray(self.bounds_hi, float)
        if not np.all(hi > lo):
            raise ValueError("degenerate world bounds")
        if self.branch_density < 0:
            raise ValueError("branch density must be non-negative")
        for b in self.boxes:
            if not np.all(np.asarray(b.hi) > np.asarray(b.lo)):
                raise ValueError(f"degenerate box {b}")
        for n in self.nets:
            if n.width <= 0 or n.height <= 0 or n.spacing <= 0 or n.wire_radius <= 0:
                raise ValueError(f"degenerate net {n}")
        for s in self.spheres:
            if s.radius <= 0:
                raise ValueError(f"degenerate sphere {s}")


@dataclass
class WorldModel:
    spec: WorldSpec
    seed: int
    boxes: np.ndarray  # (nb, 6) lo xyz, hi xyz
    capsules: np.ndarray  # (nc, 7) a xyz, b xyz, radius
    spheres: np.ndarray  # (ns, 4) center xyz at t=0, radius
    sphere_vel: np.ndarray  # (ns, 3)
    branch_count: int = 0

    def raycast(self, origin, dirs, t_now: float, max_range: float) -> np.ndarray:
        """Nearest-hit distances; NO_HIT sentinel where nothing is hit."""
        origin = np.asarray(origin, float)
        dirs = np.ascontiguousarray(dirs, float)
        s = self.spec
        return _geom.raycast(
            origin[0], origin[1], origin[2], dirs,
            self.boxes, self.capsules, self.spheres, self.sphere_vel, t_now,
            s.ground_z, s.ground_amp,
            2.0 * np.pi / s.ground_wavelength, 2.0 * np.pi / s.ground_wavelength,
            max_range,
        )

    def clearance(self, point, t_now: float, include_ground: bool = True) -> float:
        """Distance from a point to the nearest obstacle surface."""
        p = np.asarray(point, float)
        s = self.spec
        return float(
            _geom.distance_to_surfaces(
                p[0], p[1], p[2],
                self.boxes, self.capsules, self.spheres, self.sphere_vel, t_now,
                s.ground_z, s.ground_amp,
                2.0 * np.pi / s.ground_wavelength, 2.0 * np.pi / s.ground_wavelength,
                include_ground,
            )
        )


def _net_wires(net: NetSpec) -> list[tuple[np.ndarray, np.ndarray, float]]:
    c = np.asarray(net.center, float)
    along = np.array([np.cos(net.yaw), np.sin(net.yaw), 0.0])
    up = np.array([0.0, 0.0, 1.0])
    wires = []
    half_w = net.width / 2.0
    half_h = net.height / 2.0
    n_v = int(np.floor(net.width / net.spacing)) + 1
    for i in range(n_v):
        u = -half_w + i * net.spacing
        base = c + along * u
        wires.append((base - up * half_h, base + up * half_h, net.wire_radius))
    n_h = int(np.floor(net.height / net.spacing)) + 1
    for i in range(n_h):
        w = -half_h + i * net.spacing
        base = c + up * w
        wires.append((base - along * half_w, base + along * half_w, net.wire_radius))
    return wires


def generate_world(spec: WorldSpec, seed: int) -> WorldModel:
    rng = np.random.default_rng(seed)
    lo = np.asarray(spec.bounds_lo, float)
    hi = np.asarray(spec.bounds_hi, float)
    area = (hi[0] - lo[0]) * (hi[1] - lo[1])
    n_branches = int(round(spec.branch_density * area))

    capsules = []
    for _ in range(n_branches):
        base = np.array(
            [
                rng.uniform(lo[0], hi[0]),
                rng.uniform(lo[1], hi[1]),
                spec.ground_z,
            ]
        )
        height = rng.uniform(*spec.branch_height)
        tilt = rng.uniform(0.0, spec.branch_tilt_max)
        azim = rng.uniform(0.0, 2.0 * np.pi)
        tip = base + height * np.array(
            [np.sin(tilt) * np.cos(azim), np.sin(tilt) * np.sin(azim), np.cos(tilt)]
        )
        radius = rng.uniform(*spec.branch_radius)
        capsules.append((base, tip, radius))

    for net in spec.nets:
        capsules.extend(_net_wires(net))

    cap_arr = np.zeros((len(capsules), 7))
    for i, (a, b, r) in enumerate(capsules):
        cap_arr[i, 0:3] = a
        cap_arr[i, 3:6] = b
        cap_arr[i, 6] = r

    box_arr = np.zeros((len(spec.boxes), 6))
    for i, b in enumerate(spec.boxes):
        box_arr[i, 0:3] = b.lo
        box_arr[i, 3:6] = b.hi

    sph_arr = np.zeros((len(spec.spheres), 4))
    vel_arr = np.zeros((len(spec.spheres), 3))
    for i, s in enumerate(spec.spheres):
        sph_arr[i, 0:3] = s.center
        sph_arr[i, 3] = s.radius
        vel_arr[i] = s.velocity

    return WorldModel(
        spec=spec,
        seed=seed,
        boxes=box_arr,
        capsules=cap_arr,
        spheres=sph_arr,
        sphere_vel=vel_arr,
        branch_count=n_branches,
    )
