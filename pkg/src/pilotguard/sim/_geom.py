"""Analytic ray and distance queries against the scene primitive arrays."""

from __future__ import annotations

import numpy as np
from numba import njit

NO_HIT = 1e30


@njit(cache=True, inline="always")
def _ray_box(px, py, pz, dx, dy, dz, lo0, lo1, lo2, hi0, hi1, hi2):
    t0 = 0.0
    t1 = NO_HIT
    for ax in range(3):
        if ax == 0:
            p, d, lo, hi = px, dx, lo0, hi0
        elif ax == 1:
            p, d, lo, hi = py, dy, lo1, hi1
        else:
            p, d, lo, hi = pz, dz, lo2, hi2
        if d == 0.0:
            if p < lo or p > hi:
                return NO_HIT
        else:
            ta = (lo - p) / d
            tb = (hi - p) / d
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
            if t0 > t1:
                return NO_HIT
    return t0  # 0 when the origin already sits inside


@njit(cache=True, inline="always")
def _ray_sphere(px, py, pz, dx, dy, dz, cx, cy, cz, r):
    ox = px - cx
    oy = py - cy
    oz = pz - cz
    b = ox * dx + oy * dy + oz * dz
    c = ox * ox + oy * oy + oz * oz - r * r
    if c <= 0.0:
        return 0.0  # inside
    disc = b * b - c
    if disc < 0.0:
        return NO_HIT
    t = -b - np.sqrt(disc)
    if t < 0.0:
        return NO_HIT
    return t


@njit(cache=True, inline="always")
def _ray_capsule(px, py, pz, dx, dy, dz, ax, ay, az, bx, by, bz, r):
    ux = bx - ax
    uy = by - ay
    uz = bz - az
    seg2 = ux * ux + uy * uy + uz * uz
    if seg2 < 1e-18:
        return _ray_sphere(px, py, pz, dx, dy, dz, ax, ay, az, r)
    ox = px - ax
    oy = py - ay
    oz = pz - az
    du = dx * ux + dy * uy + dz * uz
    ou = ox * ux + oy * uy + oz * uz
    # Components orthogonal to the axis.
    a_q = 1.0 - du * du / seg2
    b_q = (ox * dx + oy * dy + oz * dz) - ou * du / seg2
    c_q = (ox * ox + oy * oy + oz * oz) - ou * ou / seg2 - r * r
    if c_q <= 0.0 and 0.0 <= ou <= seg2:
        return 0.0  # origin already inside the tube
    # First boundary crossing of the union of tube and cap spheres is the
    # minimum of the three component entries.
    best = NO_HIT
    if a_q > 1e-14:
        disc = b_q * b_q - a_q * c_q
        if disc >= 0.0:
            t = (-b_q - np.sqrt(disc)) / a_q
            if t >= 0.0:
                s = ou + t * du  # axial coordinate scaled by |u|^2
                if 0.0 <= s <= seg2:
                    best = t
    tc = _ray_sphere(px, py, pz, dx, dy, dz, ax, ay, az, r)
    if tc < best:
        best = tc
    tc = _ray_sphere(px, py, pz, dx, dy, dz, bx, by, bz, r)
    if tc < best:
        best = tc
    return best


@njit(cache=True)
def raycast(
    px, py, pz, dirs,
    boxes, capsules, spheres, sphere_vel, t_now,
    ground_z, ground_amp, ground_kx, ground_ky,
    max_range,
):
    """Nearest-hit distance per ray; NO_HIT where nothing within max_range."""
    n = dirs.shape[0]
    out = np.full(n, NO_HIT)
    for i in range(n):
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        best = NO_HIT
        for b in range(boxes.shape[0]):
            t = _ray_box(
                px, py, pz, dx, dy, dz,
                boxes[b, 0], boxes[b, 1], boxes[b, 2],
                boxes[b, 3], boxes[b, 4], boxes[b, 5],
            )
            if t < best:
                best = t
        for c in range(capsules.shape[0]):
            t = _ray_capsule(
                px, py, pz, dx, dy, dz,
                capsules[c, 0], capsules[c, 1], capsules[c, 2],
                capsules[c, 3], capsules[c, 4], capsules[c, 5],
                capsules[c, 6],
            )
            if t < best:
                best = t
        for s in range(spheres.shape[0]):
            cx = spheres[s, 0] + sphere_vel[s, 0] * t_now
            cy = spheres[s, 1] + sphere_vel[s, 1] * t_now
            cz = spheres[s, 2] + sphere_vel[s, 2] * t_now
            t = _ray_sphere(px, py, pz, dx, dy, dz, cx, cy, cz, spheres[s, 3])
            if t < best:
                best = t
        # Terrain: exact plane when flat, bracket-and-bisect otherwise.
        if ground_amp == 0.0:
            if dz < 0.0 and pz > ground_z:
                t = (ground_z - pz) / dz
                if t < best:
                    best = t
            elif pz <= ground_z:
                best = 0.0
        else:
            zmax = ground_z + ground_amp
            if pz <= zmax + 1e-9 or dz < 0.0:
                t_lo = 0.0
                h_lo = pz - (
                    ground_z
                    + ground_amp * np.sin(ground_kx * px) * np.sin(ground_ky * py)
                )
                if h_lo <= 0.0:
                    best = 0.0
                else:
                    limit = best if best < max_range else max_range
                    t = 0.1
                    while t <= limit:
                        x = px + dx * t
                        y = py + dy * t
                        z = pz + dz * t
                        h = z - (
                            ground_z
                            + ground_amp * np.sin(ground_kx * x) * np.sin(ground_ky * y)
                        )
                        if h <= 0.0:
                            a_t = t - 0.1
                            b_t = t
                            for _ in range(30):
                                m = 0.5 * (a_t + b_t)
                                x = px + dx * m
                                y = py + dy * m
                                z = pz + dz * m
                                h = z - (
                                    ground_z
                                    + ground_amp
                                    * np.sin(ground_kx * x)
                                    * np.sin(ground_ky * y)
                                )
                                if h <= 0.0:
                                    b_t = m
                                else:
                                    a_t = m
                            if b_t < best:
                                best = b_t
                            break
                        t += 0.1
        out[i] = best
    return out


@njit(cache=True)
def distance_to_surfaces(
    px, py, pz,
    boxes, capsules, spheres, sphere_vel, t_now,
    ground_z, ground_amp, ground_kx, ground_ky,
    include_ground,
):
    """Distance from a point to the nearest obstacle surface (negative when
    inside).  Terrain distance is measured vertically."""
    best = NO_HIT
    for b in range(boxes.shape[0]):
        qx = 0.0
        qy = 0.0
        qz = 0.0
        inside = True
        # Clamp onto the box; track max per-axis penetration for inside case.
        pen = -NO_HIT
        for ax in range(3):
            if ax == 0:
                p, lo, hi = px, boxes[b, 0], boxes[b, 3]
            elif ax == 1:
                p, lo, hi = py, boxes[b, 1], boxes[b, 4]
            else:
                p, lo, hi = pz, boxes[b, 2], boxes[b, 5]
            q = p
            if p < lo:
                q = lo
                inside = False
            elif p > hi:
                q = hi
                inside = False
            depth = min(p - lo, hi - p)
            if depth > pen:
                pen = depth
            if ax == 0:
                qx = q
            elif ax == 1:
                qy = q
            else:
                qz = q
        if inside:
            d = -pen
        else:
            d = np.sqrt((px - qx) ** 2 + (py - qy) ** 2 + (pz - qz) ** 2)
        if d < best:
            best = d
    for c in range(capsules.shape[0]):
        axx = capsules[c, 0]
        axy = capsules[c, 1]
        axz = capsules[c, 2]
        ux = capsules[c, 3] - axx
        uy = capsules[c, 4] - axy
        uz = capsules[c, 5] - axz
        seg2 = ux * ux + uy * uy + uz * uz
        if seg2 < 1e-18:
            s = 0.0
        else:
            s = ((px - axx) * ux + (py - axy) * uy + (pz - axz) * uz) / seg2
            if s < 0.0:
                s = 0.0
            elif s > 1.0:
                s = 1.0
        qx = axx + s * ux
        qy = axy + s * uy
        qz = axz + s * uz
        d = np.sqrt((px - qx) ** 2 + (py - qy) ** 2 + (pz - qz) ** 2) - capsules[c, 6]
        if d < best:
            best = d
    for s_i in range(spheres.shape[0]):
        cx = spheres[s_i, 0] + sphere_vel[s_i, 0] * t_now
        cy = spheres[s_i, 1] + sphere_vel[s_i, 1] * t_now
        cz = spheres[s_i, 2] + sphere_vel[s_i, 2] * t_now
        d = (
            np.sqrt((px - cx) ** 2 + (py - cy) ** 2 + (pz - cz) ** 2)
            - spheres[s_i, 3]
        )
        if d < best:
            best = d
    if include_ground:
        gz = ground_z
        if ground_amp != 0.0:
            gz = ground_z + ground_amp * np.sin(ground_kx * px) * np.sin(ground_ky * py)
        d = pz - gz
        if d < best:
            best = d
    return best
