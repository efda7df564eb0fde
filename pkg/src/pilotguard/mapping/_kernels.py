"""Hot loops for the sliding occupancy grid, compiled with numba.

All kernels work in world cell coordinates; storage is a ring buffer, so the
array index of world cell w along an axis of size n is simply w mod n.  Cells
outside the current window are treated as Unknown everywhere.
"""

from __future__ import annotations

import numpy as np
from numba import njit

UNKNOWN = 0
FREE = 1
OCCUPIED = 2


@njit(cache=True, inline="always")
def _in_window(wx, wy, wz, ox, oy, oz, nx, ny, nz):
    if wx < ox or wx >= ox + nx:
        return False
    if wy < oy or wy >= oy + ny:
        return False
    if wz < oz or wz >= oz + nz:
        return False
    return True


@njit(cache=True)
def _transition(
    wx, wy, wz, new_state,
    state, n_occ, n_unk, n_f, occ_off, unk_off,
    ox, oy, oz,
    tr_cells, tr_old, tr_new, tr_count,
):
    nx, ny, nz = state.shape
    sx = wx % nx
    sy = wy % ny
    sz = wz % nz
    old = state[sx, sy, sz]
    if old == new_state:
        return
    state[sx, sy, sz] = new_state
    k = tr_count[0]
    if k < tr_cells.shape[0]:
        tr_cells[k, 0] = wx
        tr_cells[k, 1] = wy
        tr_cells[k, 2] = wz
        tr_old[k] = old
        tr_new[k] = new_state
    tr_count[0] = k + 1
    # Both derived layers hear about every transition exactly once, here.
    if old == OCCUPIED or new_state == OCCUPIED:
        d = 1 if new_state == OCCUPIED else -1
        for i in range(occ_off.shape[0]):
            tx = wx + occ_off[i, 0]
            ty = wy + occ_off[i, 1]
            tz = wz + occ_off[i, 2]
            if _in_window(tx, ty, tz, ox, oy, oz, nx, ny, nz):
                n_occ[tx % nx, ty % ny, tz % nz] += d
    if old == UNKNOWN or new_state == UNKNOWN:
        d = 1 if new_state == UNKNOWN else -1
        for i in range(unk_off.shape[0]):
            tx = wx + unk_off[i, 0]
            ty = wy + unk_off[i, 1]
            tz = wz + unk_off[i, 2]
            if _in_window(tx, ty, tz, ox, oy, oz, nx, ny, nz):
                n_unk[tx % nx, ty % ny, tz % nz] += d
    if old == FREE or new_state == FREE:
        d = 1 if new_state == FREE else -1
        for dx in range(-1, 2):
            for dy in range(-1, 2):
                for dz in range(-1, 2):
                    tx = wx + dx
                    ty = wy + dy
                    tz = wz + dz
                    if _in_window(tx, ty, tz, ox, oy, oz, nx, ny, nz):
                        n_f[tx % nx, ty % ny, tz % nz] += d


@njit(cache=True)
def _apply(
    wx, wy, wz, delta,
    log_odds, state, n_occ, n_unk, n_f, occ_off, unk_off,
    ox, oy, oz,
    thr_occ, thr_free, l_min, l_max,
    tr_cells, tr_old, tr_new, tr_count,
):
    nx, ny, nz = state.shape
    if not _in_window(wx, wy, wz, ox, oy, oz, nx, ny, nz):
        return
    sx = wx % nx
    sy = wy % ny
    sz = wz % nz
    l0 = log_odds[sx, sy, sz]
    l = l0 + delta
    if l > l_max:
        l = l_max
    elif l < l_min:
        l = l_min
    if l == l0:
        return  # saturated cell: skip the write, no transition possible
    log_odds[sx, sy, sz] = l
    if l >= thr_occ:
        ns = OCCUPIED
    elif l <= thr_free:
        ns = FREE
    else:
        ns = UNKNOWN
    _transition(
        wx, wy, wz, ns,
        state, n_occ, n_unk, n_f, occ_off, unk_off,
        ox, oy, oz,
        tr_cells, tr_old, tr_new, tr_count,
    )


@njit(cache=True)
def _carve(
    px, py, pz, qx, qy, qz,
    exx, exy, exz, has_excl,
    res, miss_delta,
    log_odds, state, n_occ, n_unk, n_f, occ_off, unk_off,
    ox, oy, oz,
    thr_occ, thr_free, l_min, l_max,
    tr_cells, tr_old, tr_new, tr_count,
):
    """Miss every cell the segment traverses except the start cell and,
    optionally, one excluded (hit) cell.  The segment's own end cell is
    included."""
    cx = np.int64(np.floor(px / res + 0.5))
    cy = np.int64(np.floor(py / res + 0.5))
    cz = np.int64(np.floor(pz / res + 0.5))
    ex = np.int64(np.floor(qx / res + 0.5))
    ey = np.int64(np.floor(qy / res + 0.5))
    ez = np.int64(np.floor(qz / res + 0.5))
    if cx == ex and cy == ey and cz == ez:
        return
    dx = qx - px
    dy = qy - py
    dz = qz - pz
    big = 1e18
    stx = np.int64(0)
    tmx = big
    tdx = big
    if dx > 0.0:
        stx = np.int64(1)
        tmx = ((cx + 0.5) * res - px) / dx
        tdx = res / dx
    elif dx < 0.0:
        stx = np.int64(-1)
        tmx = ((cx - 0.5) * res - px) / dx
        tdx = -res / dx
    sty = np.int64(0)
    tmy = big
    tdy = big
    if dy > 0.0:
        sty = np.int64(1)
        tmy = ((cy + 0.5) * res - py) / dy
        tdy = res / dy
    elif dy < 0.0:
        sty = np.int64(-1)
        tmy = ((cy - 0.5) * res - py) / dy
        tdy = -res / dy
    stz = np.int64(0)
    tmz = big
    tdz = big
    if dz > 0.0:
        stz = np.int64(1)
        tmz = ((cz + 0.5) * res - pz) / dz
        tdz = res / dz
    elif dz < 0.0:
        stz = np.int64(-1)
        tmz = ((cz - 0.5) * res - pz) / dz
        tdz = -res / dz
    steps = abs(ex - cx) + abs(ey - cy) + abs(ez - cz)
    ix, iy, iz = cx, cy, cz
    for _ in range(steps):
        if tmx <= tmy and tmx <= tmz:
            ix += stx
            tmx += tdx
        elif tmy <= tmz:
            iy += sty
            tmy += tdy
        else:
            iz += stz
            tmz += tdz
        if has_excl and ix == exx and iy == exy and iz == exz:
            continue
        _apply(
            ix, iy, iz, miss_delta,
            log_odds, state, n_occ, n_unk, n_f, occ_off, unk_off,
            ox, oy, oz,
            thr_occ, thr_free, l_min, l_max,
            tr_cells, tr_old, tr_new, tr_count,
        )


@njit(cache=True)
def classify_infinite(px, py, pz, dirs, invalid, state, ox, oy, oz, res, limit):
    """For each invalid ray, True iff no Occupied cell lies on the first
    `limit` metres of the ray (out-of-window cells count as not occupied)."""
    n_rays = dirs.shape[0]
    out = np.zeros(n_rays, np.bool_)
    nx, ny, nz = state.shape
    for r in range(n_rays):
        if not invalid[r]:
            continue
        dx = dirs[r, 0]
        dy = dirs[r, 1]
        dz = dirs[r, 2]
        qx = px + dx * limit
        qy = py + dy * limit
        qz = pz + dz * limit
        cx = np.int64(np.floor(px / res + 0.5))
        cy = np.int64(np.floor(py / res + 0.5))
        cz = np.int64(np.floor(pz / res + 0.5))
        ex = np.int64(np.floor(qx / res + 0.5))
        ey = np.int64(np.floor(qy / res + 0.5))
        ez = np.int64(np.floor(qz / res + 0.5))
        blocked = False
        if _in_window(cx, cy, cz, ox, oy, oz, nx, ny, nz):
            if state[cx % nx, cy % ny, cz % nz] == OCCUPIED:
                blocked = True
        if not blocked:
            big = 1e18
            stx = np.int64(0)
            tmx = big
            tdx = big
            if dx > 0.0:
                stx = np.int64(1)
                tmx = ((cx + 0.5) * res - px) / dx
                tdx = res / dx
            elif dx < 0.0:
                stx = np.int64(-1)
                tmx = ((cx - 0.5) * res - px) / dx
                tdx = -res / dx
            sty = np.int64(0)
            tmy = big
            tdy = big
            if dy > 0.0:
                sty = np.int64(1)
                tmy = ((cy + 0.5) * res - py) / dy
                tdy = res / dy
            elif dy < 0.0:
                sty = np.int64(-1)
                tmy = ((cy - 0.5) * res - py) / dy
                tdy = -res / dy
            stz = np.int64(0)
            tmz = big
            tdz = big
            if dz > 0.0:
                stz = np.int64(1)
                tmz = ((cz + 0.5) * res - pz) / dz
                tdz = res / dz
            elif dz < 0.0:
                stz = np.int64(-1)
                tmz = ((cz - 0.5) * res - pz) / dz
                tdz = -res / dz
            steps = abs(ex - cx) + abs(ey - cy) + abs(ez - cz)
            ix, iy, iz = cx, cy, cz
            for _ in range(steps):
                if tmx <= tmy and tmx <= tmz:
                    ix += stx
                    tmx += tdx
                elif tmy <= tmz:
                    iy += sty
                    tmy += tdy
                else:
                    iz += stz
                    tmz += tdz
                if _in_window(ix, iy, iz, ox, oy, oz, nx, ny, nz):
                    if state[ix % nx, iy % ny, iz % nz] == OCCUPIED:
                        blocked = True
                        break
        out[r] = not blocked
    return out


@njit(cache=True)
def integrate_scan(
    px, py, pz, dirs, ranges, valid, infinite,
    raycast_range, res,
    log_odds, state, n_occ, n_unk, n_f, occ_off, unk_off,
    ox, oy, oz,
    hit_delta, miss_delta, thr_occ, thr_free, l_min, l_max,
    tr_cells, tr_old, tr_new, tr_count,
):
    nx, ny, nz = state.shape
    wlo_x = (ox - 0.5) * res
    wlo_y = (oy - 0.5) * res
    wlo_z = (oz - 0.5) * res
    whi_x = (ox + nx - 0.5) * res
    whi_y = (oy + ny - 0.5) * res
    whi_z = (oz + nz - 0.5) * res
    eps = res * 1e-6
    for r in range(dirs.shape[0]):
        if not valid[r] and not infinite[r]:
            continue
        dx = dirs[r, 0]
        dy = dirs[r, 1]
        dz = dirs[r, 2]
        # Parameter at which the ray leaves the window box (sensor is inside).
        t_box = 1e18
        if dx > 0.0:
            t_box = min(t_box, (whi_x - px) / dx)
        elif dx < 0.0:
            t_box = min(t_box, (wlo_x - px) / dx)
        if dy > 0.0:
            t_box = min(t_box, (whi_y - py) / dy)
        elif dy < 0.0:
            t_box = min(t_box, (wlo_y - py) / dy)
        if dz > 0.0:
            t_box = min(t_box, (whi_z - pz) / dz)
        elif dz < 0.0:
            t_box = min(t_box, (wlo_z - pz) / dz)
        t_box -= eps
        if t_box < 0.0:
            t_box = 0.0
        if valid[r]:
            rng = ranges[r]
            hx = px + dx * rng
            hy = py + dy * rng
            hz = pz + dz * rng
            hcx = np.int64(np.floor(hx / res + 0.5))
            hcy = np.int64(np.floor(hy / res + 0.5))
            hcz = np.int64(np.floor(hz / res + 0.5))
            has_hit = _in_window(hcx, hcy, hcz, ox, oy, oz, nx, ny, nz)
            t_miss = min(rng, raycast_range)
            if t_miss > t_box:
                t_miss = t_box
            if t_miss > 0.0:
                _carve(
                    px, py, pz,
                    px + dx * t_miss, py + dy * t_miss, pz + dz * t_miss,
                    hcx, hcy, hcz, True,
                    res, miss_delta,
                    log_odds, state, n_occ, n_unk, n_f, occ_off, unk_off,
                    ox, oy, oz,
                    thr_occ, thr_free, l_min, l_max,
                    tr_cells, tr_old, tr_new, tr_count,
                )
            if has_hit:
                _apply(
                    hcx, hcy, hcz, hit_delta,
                    log_odds, state, n_occ, n_unk, n_f, occ_off, unk_off,
                    ox, oy, oz,
                    thr_occ, thr_free, l_min, l_max,
                    tr_cells, tr_old, tr_new, tr_count,
                )
        else:
            # Infinite ray: free space carved all the way to the window edge.
            if t_box > 0.0:
                _carve(
                    px, py, pz,
                    px + dx * t_box, py + dy * t_box, pz + dz * t_box,
                    np.int64(0), np.int64(0), np.int64(0), False,
                    res, miss_delta,
                    log_odds, state, n_occ, n_unk, n_f, occ_off, unk_off,
                    ox, oy, oz,
                    thr_occ, thr_free, l_min, l_max,
                    tr_cells, tr_old, tr_new, tr_count,
                )


@njit(cache=True)
def apply_point_updates(
    cells, deltas,
    log_odds, state, n_occ, n_unk, n_f, occ_off, unk_off,
    ox, oy, oz,
    thr_occ, thr_free, l_min, l_max,
    tr_cells, tr_old, tr_new, tr_count,
):
    for i in range(cells.shape[0]):
        _apply(
            cells[i, 0], cells[i, 1], cells[i, 2], deltas[i],
            log_odds, state, n_occ, n_unk, n_f, occ_off, unk_off,
            ox, oy, oz,
            thr_occ, thr_free, l_min, l_max,
            tr_cells, tr_old, tr_new, tr_count,
        )


@njit(cache=True)
def demote_box(
    lx, ly, lz, hx, hy, hz,
    log_odds, state, n_occ, n_unk, n_f, occ_off, unk_off,
    ox, oy, oz,
    tr_cells, tr_old, tr_new, tr_count,
):
    """Reset world cells in [l, h) to Unknown through the normal hooks."""
    nx, ny, nz = state.shape
    for wx in range(lx, hx):
        for wy in range(ly, hy):
            for wz in range(lz, hz):
                log_odds[wx % nx, wy % ny, wz % nz] = 0.0
                _transition(
                    wx, wy, wz, UNKNOWN,
                    state, n_occ, n_unk, n_f, occ_off, unk_off,
                    ox, oy, oz,
                    tr_cells, tr_old, tr_new, tr_count,
                )


@njit(cache=True)
def reset_box(lx, ly, lz, hx, hy, hz, log_odds, state, n_occ, n_unk, n_f):
    nx, ny, nz = state.shape
    for wx in range(lx, hx):
        for wy in range(ly, hy):
            for wz in range(lz, hz):
                sx = wx % nx
                sy = wy % ny
                sz = wz % nz
                log_odds[sx, sy, sz] = 0.0
                state[sx, sy, sz] = UNKNOWN
                n_occ[sx, sy, sz] = 0
                n_unk[sx, sy, sz] = 0
                n_f[sx, sy, sz] = 0


@njit(cache=True)
def recompute_box(
    lx, ly, lz, hx, hy, hz,
    state, n_occ, n_unk, n_f, occ_off, unk_off,
    ox, oy, oz,
):
    """Counters for world cells in [l, h) rebuilt from neighbor states."""
    nx, ny, nz = state.shape
    for wx in range(lx, hx):
        for wy in range(ly, hy):
            for wz in range(lz, hz):
                co = 0
                for i in range(occ_off.shape[0]):
                    tx = wx + occ_off[i, 0]
                    ty = wy + occ_off[i, 1]
                    tz = wz + occ_off[i, 2]
                    if _in_window(tx, ty, tz, ox, oy, oz, nx, ny, nz):
                        if state[tx % nx, ty % ny, tz % nz] == OCCUPIED:
                            co += 1
                cu = 0
                for i in range(unk_off.shape[0]):
                    tx = wx + unk_off[i, 0]
                    ty = wy + unk_off[i, 1]
                    tz = wz + unk_off[i, 2]
                    if not _in_window(tx, ty, tz, ox, oy, oz, nx, ny, nz):
                        cu += 1
                    elif state[tx % nx, ty % ny, tz % nz] == UNKNOWN:
                        cu += 1
                cf = 0
                for dx in range(-1, 2):
                    for dy in range(-1, 2):
                        for dz in range(-1, 2):
                            tx = wx + dx
                            ty = wy + dy
                            tz = wz + dz
                            if _in_window(tx, ty, tz, ox, oy, oz, nx, ny, nz):
                                if state[tx % nx, ty % ny, tz % nz] == FREE:
                                    cf += 1
                sx = wx % nx
                sy = wy % ny
                sz = wz % nz
                n_occ[sx, sy, sz] = co
                n_unk[sx, sy, sz] = cu
                n_f[sx, sy, sz] = cf


@njit(cache=True)
def collect_box(lx, ly, lz, hx, hy, hz, state, n_f, ox, oy, oz, mode):
    """World cells in [l, h) matching mode 0=occupied, 1=frontier, 2=either,
    3=any non-Unknown."""
    nx, ny, nz = state.shape
    if lx < ox:
        lx = ox
    if ly < oy:
        ly = oy
    if lz < oz:
        lz = oz
    if hx > ox + nx:
        hx = ox + nx
    if hy > oy + ny:
        hy = oy + ny
    if hz > oz + nz:
        hz = oz + nz
    count = 0
    for wx in range(lx, hx):
        for wy in range(ly, hy):
            for wz in range(lz, hz):
                s = state[wx % nx, wy % ny, wz % nz]
                occ = s == OCCUPIED
                fr = False
                if s == UNKNOWN:
                    v = n_f[wx % nx, wy % ny, wz % nz]
                    fr = 0 < v < 27
                if (
                    (mode == 0 and occ)
                    or (mode == 1 and fr)
                    or (mode == 2 and (occ or fr))
                    or (mode == 3 and s != UNKNOWN)
                ):
                    count += 1
    out = np.empty((count, 3), np.int64)
    k = 0
    for wx in range(lx, hx):
        for wy in range(ly, hy):
            for wz in range(lz, hz):
                s = state[wx % nx, wy % ny, wz % nz]
                occ = s == OCCUPIED
                fr = False
                if s == UNKNOWN:
                    v = n_f[wx % nx, wy % ny, wz % nz]
                    fr = 0 < v < 27
                if (
                    (mode == 0 and occ)
                    or (mode == 1 and fr)
                    or (mode == 2 and (occ or fr))
                    or (mode == 3 and s != UNKNOWN)
                ):
                    out[k, 0] = wx
                    out[k, 1] = wy
                    out[k, 2] = wz
                    k += 1
    return out
