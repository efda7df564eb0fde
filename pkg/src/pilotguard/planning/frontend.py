"""Local goal from the sticks, then a two-segment reference path on the
inflated grid: an escape out of inflated space plus a straight free-space run
toward the resolved goal."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..geom import wrap_angle, yaw_rotation
from ..mapping import InflationState, LocalMap, cell_of, center_of
from ..types import JoystickCommand, Odometry


class Unreachable(RuntimeError):
    """No inflation-free cell within the search radius; hold position."""


class NoCorridor(RuntimeError):
    """Corridor generation failed; hold position."""


@dataclass
class ReferencePath:
    p_inf: np.ndarray  # (k, 3) cell centers, escape segment; may be empty
    p_no_inf: np.ndarray  # (m, 3) cell centers, free segment, starts at p_s
    goal: np.ndarray  # (3,) resolved goal, m
    yaw_ref: float

    @property
    def points(self) -> np.ndarray:
        """Full polyline; the shared p_s cell appears once."""
        if len(self.p_inf) == 0:
            return self.p_no_inf
        return np.vstack([self.p_inf[:-1], self.p_no_inf])


def joystick_to_goal(cmd: JoystickCommand, odom: Odometry, dt: float):
    """Stick deflection integrated over one joystick period in the yaw frame."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not (np.all(np.isfinite(cmd.v_cmd)) and np.isfinite(cmd.yaw_rate)):
        raise ValueError("non-finite joystick command")
    p_g = yaw_rotation(odom.yaw) @ cmd.v_cmd * dt + odom.p
    yaw_ref = wrap_angle(odom.yaw + cmd.yaw_rate * dt)
    return p_g, yaw_ref


@njit(cache=True)
def _bfs_kernel(n_occ, n_unk, ox, oy, oz, sx, sy, sz, radius):
    """6-connected BFS from (sx,sy,sz) to the nearest NoInflation cell.

    Expansion is depth-limited to `radius` hops.  Returns the hop path as
    world cells, start first; empty array when nothing was reached."""
    nx, ny, nz = n_occ.shape
    side = 2 * radius + 1
    base_x = sx - radius
    base_y = sy - radius
    base_z = sz - radius
    depth = np.full((side, side, side), -1, np.int32)
    parent = np.full((side, side, side), -1, np.int8)
    qx = np.empty(side * side * side, np.int64)
    qy = np.empty(side * side * side, np.int64)
    qz = np.empty(side * side * side, np.int64)
    head = 0
    tail = 0
    qx[tail] = sx
    qy[tail] = sy
    qz[tail] = sz
    tail += 1
    depth[radius, radius, radius] = 0
    steps_x = (1, -1, 0, 0, 0, 0)
    steps_y = (0, 0, 1, -1, 0, 0)
    steps_z = (0, 0, 0, 0, 1, -1)
    gx = np.int64(0)
    gy = np.int64(0)
    gz = np.int64(0)
    found = False
    while head < tail and not found:
        cx = qx[head]
        cy = qy[head]
        cz = qz[head]
        head += 1
        d = depth[cx - base_x, cy - base_y, cz - base_z]
        if d >= radius:
            continue
        for k in range(6):
            tx = cx + steps_x[k]
            ty = cy + steps_y[k]
            tz = cz + steps_z[k]
            lx = tx - base_x
            ly = ty - base_y
            lz = tz - base_z
            if depth[lx, ly, lz] >= 0:
                continue
            if not (ox <= tx < ox + nx and oy <= ty < oy + ny and oz <= tz < oz + nz):
                continue
            depth[lx, ly, lz] = d + 1
            parent[lx, ly, lz] = k
            if (
                n_occ[tx % nx, ty % ny, tz % nz] == 0
                and n_unk[tx % nx, ty % ny, tz % nz] == 0
            ):
                found = True
                gx, gy, gz = tx, ty, tz
                break
            qx[tail] = tx
            qy[tail] = ty
            qz[tail] = tz
            tail += 1
    if not found:
        return np.empty((0, 3), np.int64)
    length = int(depth[gx - base_x, gy - base_y, gz - base_z]) + 1
    path = np.empty((length, 3), np.int64)
    cx, cy, cz = gx, gy, gz
    for i in range(length - 1, -1, -1):
        path[i, 0] = cx
        path[i, 1] = cy
        path[i, 2] = cz
        if i > 0:
            k = parent[cx - base_x, cy - base_y, cz - base_z]
            cx -= steps_x[k]
            cy -= steps_y[k]
            cz -= steps_z[k]
    return path


def _no_inflation(lmap: LocalMap, cells: np.ndarray) -> np.ndarray:
    cells = np.atleast_2d(np.asarray(cells, np.int64))
    return lmap.inflation_states(cells) == InflationState.NO_INFLATION


def bfs_escape(lmap: LocalMap, start_cell, beta: float):
    """Shortest 6-connected hop path from `start_cell` to NoInflation space.

    Returns (p_s cell, path cells).  The path is empty when the start already
    lies in NoInflation space; otherwise it includes both endpoints.
    """
    start_cell = np.asarray(start_cell, np.int64)
    if not lmap._in_window(start_cell[None, :])[0]:
        raise ValueError("bfs_escape start cell outside the window")
    if _no_inflation(lmap, start_cell)[0]:
        return start_cell, np.empty((0, 3), np.int64)
    radius = max(1, int(np.ceil(beta / lmap.config.resolution - 1e-9)))
    path = _bfs_kernel(
        lmap.n_occ, lmap.n_unk,
        *lmap._origin_args(),
        int(start_cell[0]), int(start_cell[1]), int(start_cell[2]),
        radius,
    )
    if len(path) == 0:
        raise Unreachable(f"no inflation-free cell within {beta} m")
    return path[-1].copy(), path


def _line_cells(a_cell: np.ndarray, b_cell: np.ndarray) -> np.ndarray:
    """Cells crossed by the segment between two cell centers, inclusive,
    advancing one axis per step."""
    a = np.asarray(a_cell, np.int64)
    b = np.asarray(b_cell, np.int64)
    cells = [a.copy()]
    d = (b - a).astype(float)
    n_steps = int(np.abs(b - a).sum())
    t_max = np.full(3, np.inf)
    t_delta = np.full(3, np.inf)
    step = np.zeros(3, np.int64)
    for ax in range(3):
        if d[ax] > 0:
            step[ax] = 1
            t_max[ax] = 0.5 / d[ax]
            t_delta[ax] = 1.0 / d[ax]
        elif d[ax] < 0:
            step[ax] = -1
            t_max[ax] = -0.5 / d[ax]
            t_delta[ax] = -1.0 / d[ax]
    cur = a.copy()
    for _ in range(n_steps):
        ax = int(np.argmin(t_max))
        cur[ax] += step[ax]
        t_max[ax] += t_delta[ax]
        cells.append(cur.copy())
    return np.array(cells, np.int64)


def find_farthest_grid(lmap: LocalMap, p_s_cell, p_g):
    """Walk the grid line from p_s toward p_g and stop just before the first
    cell that is not NoInflation.

    Returns (goal cell, traversed cells up to and including it)."""
    p_s_cell = np.asarray(p_s_cell, np.int64)
    g_cell = cell_of(np.asarray(p_g, float), lmap.config.resolution)
    line = _line_cells(p_s_cell, g_cell)
    ok = _no_inflation(lmap, line)
    if not ok[0]:
        raise ValueError("find_farthest_grid requires a NoInflation start")
    stop = len(line)
    for i in range(1, len(line)):
        if not ok[i]:
            stop = i
            break
    kept = line[:stop]
    return kept[-1].copy(), kept


def search_reference_path(
    lmap: LocalMap, p_odom, p_g, beta: float = 3.0, yaw_ref: float = 0.0
) -> ReferencePath:
    """Escape out of inflated space, then run straight through free space
    toward the goal (re-resolved by BFS when it sits inside inflation)."""
    res = lmap.config.resolution
    p_g = np.asarray(p_g, float).copy()
    oc = lmap.origin_cell
    # Clamp the goal altitude to the window so the line walk stays bounded.
    p_g[2] = np.clip(p_g[2], oc[2] * res, (oc[2] + lmap.dims[2] - 1) * res)

    start_cell = cell_of(np.asarray(p_odom, float), res)
    p_s, p_inf = bfs_escape(lmap, start_cell, beta)

    g_cell = cell_of(p_g, res)
    if lmap._in_window(g_cell[None, :])[0] and _no_inflation(lmap, g_cell)[0]:
        target = p_g
    else:
        g_in = g_cell if lmap._in_window(g_cell[None, :])[0] else np.clip(
            g_cell, oc, oc + lmap.dims - 1
        )
        p_gn, _ = bfs_escape(lmap, g_in, beta)
        target = center_of(p_gn, res)
    goal_cell, p_no_inf = find_farthest_grid(lmap, p_s, target)
    return ReferencePath(
        p_inf=center_of(p_inf, res),
        p_no_inf=center_of(p_no_inf, res),
        goal=center_of(goal_cell, res),
        yaw_ref=yaw_ref,
    )
