"""Independent reference implementations used only to check the real code.

Everything here is deliberately written the slow, obvious way: dense
enumeration, brute-force geometry, textbook iterations.  None of it shares
code paths with the package under test.
"""

from __future__ import annotations

import numpy as np

INF = 1e30


# ---------------------------------------------------------------------------
# QP: dual accelerated projected gradient + exact KKT refinement
# ---------------------------------------------------------------------------

def qp_reference_solve(H, g, A, l, u, iters: int = 8000):
    """Solve min 1/2 x'Hx + g'x s.t. l <= Ax <= u for strictly convex H.

    Runs FISTA on the (concave) dual over the split multipliers, then
    identifies the active set and solves its KKT system exactly.  Returns the
    primal point.
    """
    H = np.asarray(H, float)
    g = np.asarray(g, float).ravel()
    A = np.asarray(A, float).reshape(-1, H.shape[0])
    l = np.asarray(l, float).ravel()
    u = np.asarray(u, float).ravel()
    n, m = H.shape[0], A.shape[0]
    Hinv = np.linalg.inv(H)
    if m == 0:
        return -Hinv @ g

    has_u = u < INF
    has_l = l > -INF
    Au = A[has_u]
    Al = A[has_l]
    uf = u[has_u]
    lf = l[has_l]
    A_stack = np.vstack([Au, -Al]) if (Au.size or Al.size) else np.zeros((0, n))
    if A_stack.shape[0] == 0:
        return -Hinv @ g
    G = A_stack @ Hinv @ A_stack.T
    L = max(np.linalg.eigvalsh(G).max(), 1e-12)

    mu = Au.shape[0]
    lam = np.zeros(A_stack.shape[0])
    lam_prev = lam.copy()
    t_prev = 1.0
    for _ in range(iters):
        beta = lam + ((t_prev - 1.0) / (0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_prev**2)))) * (
            lam - lam_prev
        )
        t_prev = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_prev**2))
        x = -Hinv @ (g + A_stack.T @ beta)
        grad = np.concatenate([Au @ x - uf, lf - Al @ x])
        lam_prev = lam
        lam = np.maximum(beta + grad / L, 0.0)

    x = -Hinv @ (g + A_stack.T @ lam)

    # Active-set refinement: try progressively looser detection thresholds.
    best = x
    for thresh in (1e-8, 1e-6, 1e-4, 1e-3):
        refined = _kkt_refine(H, g, A, l, u, x, lam, mu, has_u, has_l, thresh)
        if refined is not None:
            best = refined
            break
    return best


def _kkt_refine(H, g, A, l, u, x, lam, mu, has_u, has_l, thresh):
    n = H.shape[0]
    ax = A @ x
    act_u = np.where(has_u)[0][(lam[:mu] > thresh)]
    act_l = np.where(has_l)[0][(lam[mu:] > thresh)]
    act_l = np.setdiff1d(act_l, act_u)
    rows = np.concatenate([act_u, act_l]).astype(int)
    b = np.concatenate([u[act_u], l[act_l]])
    na = rows.size
    kkt = np.zeros((n + na, n + na))
    kkt[:n, :n] = H
    if na:
        kkt[:n, n:] = A[rows].T
        kkt[n:, :n] = A[rows]
    try:
        sol = np.linalg.solve(kkt, np.concatenate([-g, b]))
    except np.linalg.LinAlgError:
        return None
    x_p = sol[:n]
    y_act = sol[n:]
    ax_p = A @ x_p
    feas = np.all(ax_p <= u + 1e-7) and np.all(ax_p >= l - 1e-7)
    nu = act_u.size
    signs = np.all(y_act[:nu] >= -1e-7) and np.all(y_act[nu:] <= 1e-7)
    if feas and signs:
        return x_p
    return None


# ---------------------------------------------------------------------------
# Occupancy mapping: dense batch recomputation and probability-space updates
# ---------------------------------------------------------------------------

UNKNOWN, FREE, OCCUPIED = 0, 1, 2


def bayes_update(p_prev: float, p_meas: float) -> float:
    """Posterior occupancy from the odds-product form with a 0.5 prior."""
    ratio = (1.0 - p_meas) / p_meas * ((1.0 - p_prev) / p_prev)
    return 1.0 / (1.0 + ratio)


def _shifted(arr: np.ndarray, off, fill) -> np.ndarray:
    out = np.full(arr.shape, fill, arr.dtype)
    src = []
    dst = []
    for ax, o in enumerate(off):
        n = arr.shape[ax]
        o = int(o)
        if o >= 0:
            dst.append(slice(0, n - o))
            src.append(slice(o, n))
        else:
            dst.append(slice(-o, n))
            src.append(slice(0, n + o))
        if dst[-1].stop <= dst[-1].start:
            return out
    out[tuple(dst)] = arr[tuple(src)]
    return out


def batch_counters(states: np.ndarray, occ_off: np.ndarray, unk_off: np.ndarray):
    """Recompute (n_occ, n_unk, n_f) from a dense world-ordered state block.

    Cells beyond the block boundary count as Unknown: they contribute to
    n_unk but never to n_occ or n_f.
    """
    occ = states == OCCUPIED
    unk = states == UNKNOWN
    free = states == FREE
    n_occ = np.zeros(states.shape, np.int64)
    n_unk = np.zeros(states.shape, np.int64)
    n_f = np.zeros(states.shape, np.int64)
    for off in occ_off:
        n_occ += _shifted(occ, off, False)
    for off in unk_off:
        n_unk += _shifted(unk, off, True)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                n_f += _shifted(free, (dx, dy, dz), False)
    return n_occ, n_unk, n_f


def batch_frontiers(states: np.ndarray, n_f: np.ndarray) -> np.ndarray:
    return (states == UNKNOWN) & (n_f > 0) & (n_f < 27)


def dense_window(lmap):
    """The map's state block in world order (oracle-side ring unwrapping)."""
    o = lmap.origin_cell
    d = lmap.dims
    xs = np.arange(o[0], o[0] + d[0]) % d[0]
    ys = np.arange(o[1], o[1] + d[1]) % d[1]
    zs = np.arange(o[2], o[2] + d[2]) % d[2]
    ix = np.ix_(xs, ys, zs)
    return (
        lmap.state[ix].copy(),
        lmap.log_odds[ix].copy(),
        lmap.n_occ[ix].copy(),
        lmap.n_unk[ix].copy(),
        lmap.n_f[ix].copy(),
    )


def segment_hits_occupied(origin, direction, length, occupied_cells, res) -> bool:
    """Brute-force: does the segment intersect any occupied cell's cube?"""
    p = np.asarray(origin, float)
    d = np.asarray(direction, float) * length
    for c in occupied_cells:
        lo = (np.asarray(c, float) - 0.5) * res
        hi = lo + res
        t0, t1 = 0.0, 1.0
        ok = True
        for ax in range(3):
            if d[ax] == 0.0:
                if p[ax] < lo[ax] or p[ax] > hi[ax]:
                    ok = False
                    break
            else:
                ta = (lo[ax] - p[ax]) / d[ax]
                tb = (hi[ax] - p[ax]) / d[ax]
                if ta > tb:
                    ta, tb = tb, ta
                t0 = max(t0, ta)
                t1 = min(t1, tb)
                if t0 > t1:
                    ok = False
                    break
        if ok:
            return True
    return False


def random_qp(rng: np.random.Generator, n_max: int = 20, m_max: int = 40):
    """Random strictly convex, strictly feasible instance with mixed bounds."""
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    M = rng.normal(size=(n + 2, n))
    H = M.T @ M + 1e-3 * np.eye(n)
    g = rng.normal(size=n)
    A = rng.normal(size=(m, n))
    x0 = rng.normal(size=n)
    b = A @ x0
    l = b - np.abs(rng.normal(size=m)) - 0.1
    u = b + np.abs(rng.normal(size=m)) + 0.1
    drop_l = rng.random(m) < 0.3
    drop_u = (rng.random(m) < 0.3) & ~drop_l
    l[drop_l] = -INF
    u[drop_u] = INF
    return H, g, A, l, u


# ---------------------------------------------------------------------------
# Planning: brute-force escape search over a dense snapshot
# ---------------------------------------------------------------------------


def no_inflation_block(lmap) -> np.ndarray:
    """Dense world-ordered NoInflation mask, recomputed from cell states."""
    states, _, _, _, _ = dense_window(lmap)
    n_occ, n_unk, _ = batch_counters(states, lmap.occ_off, lmap.unk_off)
    return (n_occ == 0) & (n_unk == 0)


def bfs_escape_distance(lmap, start_cell, beta: float):
    """Hop count from start to the nearest NoInflation cell, breadth-first
    over face neighbors inside the window, capped at ceil(beta/res) hops.
    Returns None when nothing is reachable."""
    from collections import deque

    radius = max(1, int(np.ceil(beta / lmap.config.resolution - 1e-9)))
    no_inf = no_inflation_block(lmap)
    dims = no_inf.shape
    s = tuple(np.asarray(start_cell, np.int64) - lmap.origin_cell)
    if no_inf[s]:
        return 0
    seen = np.zeros(dims, bool)
    seen[s] = True
    queue = deque([(s, 0)])
    while queue:
        (x, y, z), depth = queue.popleft()
        if depth >= radius:
            continue
        for dx, dy, dz in (
            (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
        ):
            t = (x + dx, y + dy, z + dz)
            if not (0 <= t[0] < dims[0] and 0 <= t[1] < dims[1] and 0 <= t[2] < dims[2]):
                continue
            if seen[t]:
                continue
            seen[t] = True
            if no_inf[t]:
                return depth + 1
            queue.append((t, depth + 1))
    return None


# ---------------------------------------------------------------------------
# MPC: independent sparse equality-form reference solve (cvxopt)
# ---------------------------------------------------------------------------


def mpc_reference_solve(refs, x0, cfg, sfc=None):
    """Solve the tracking QP in the uncondensed form: decision vector
    [x_1..x_N, u_0..u_{N-1}] with explicit dynamics equality rows, handed to
    cvxopt's interior-point solver.  Returns the (n, 3) input sequence."""
    import cvxopt

    refs = np.asarray(refs, float)
    n, dt = cfg.n, cfg.dt
    nx, nu = 9 * n, 3 * n
    nz = nx + nu
    I3 = np.eye(3)

    A_d = np.zeros((9, 9))
    A_d[:3, :3] = I3
    A_d[:3, 3:6] = dt * I3
    A_d[:3, 6:9] = 0.5 * dt**2 * I3
    A_d[3:6, 3:6] = I3
    A_d[3:6, 6:9] = dt * I3
    A_d[6:9, 6:9] = I3
    B_d = np.vstack([dt**3 / 6 * I3, dt**2 / 2 * I3, dt * I3])

    def xs(k):  # slice of x_k (1-based)
        return slice(9 * (k - 1), 9 * k)

    def us(k):  # slice of u_k (0-based)
        return slice(nx + 3 * k, nx + 3 * k + 3)

    Aeq = np.zeros((9 * n, nz))
    beq = np.zeros(9 * n)
    x_init = np.concatenate([x0.p, x0.v, x0.a])
    for k in range(1, n + 1):
        r = slice(9 * (k - 1), 9 * k)
        Aeq[r, xs(k)] = np.eye(9)
        Aeq[r, us(k - 1)] = -B_d
        if k == 1:
            beq[r] = A_d @ x_init
        else:
            Aeq[r, xs(k - 1)] = -A_d

    P = np.zeros((nz, nz))
    q = np.zeros(nz)
    for k in range(1, n + 1):
        ps = slice(9 * (k - 1), 9 * (k - 1) + 3)
        P[ps, ps] += 2 * cfg.r_p * I3
        q[ps] += -2 * cfg.r_p * refs[k - 1]
    for k in range(n):
        P[us(k), us(k)] += 2 * cfg.r_u * I3
    for k in range(1, n):
        d_rows = np.zeros((3, nz))
        d_rows[:, us(k)] = I3
        d_rows[:, us(k - 1)] = -I3
        P += 2 * cfg.r_c * d_rows.T @ d_rows
    vN = slice(9 * (n - 1) + 3, 9 * (n - 1) + 6)
    aN = slice(9 * (n - 1) + 6, 9 * n)
    P[vN, vN] += 2 * cfg.r_vn * I3
    P[aN, aN] += 2 * cfg.r_an * I3
    P += 1e-9 * np.eye(nz)

    G_rows = []
    h_vals = []

    def bound(idx, lo, hi):
        row = np.zeros(nz)
        row[idx] = 1.0
        G_rows.append(row.copy())
        h_vals.append(hi)
        row2 = np.zeros(nz)
        row2[idx] = -1.0
        G_rows.append(row2)
        h_vals.append(-lo)

    for k in range(1, n + 1):
        base = 9 * (k - 1)
        for ax in range(3):
            bound(base + 3 + ax, -cfg.v_max, cfg.v_max)
        bound(base + 6, -cfg.a_max_xy, cfg.a_max_xy)
        bound(base + 7, -cfg.a_max_xy, cfg.a_max_xy)
        bound(base + 8, cfg.a_z_min, cfg.a_z_max)
    for k in range(n):
        for ax in range(3):
            bound(nx + 3 * k + ax, -cfg.j_max, cfg.j_max)
    if sfc is not None:
        keep = sfc.contains(refs)
        for k in range(1, n + 1):
            if not keep[k - 1]:
                continue
            for ci in range(len(sfc.d)):
                row = np.zeros(nz)
                row[9 * (k - 1) : 9 * (k - 1) + 3] = sfc.C[ci]
                G_rows.append(row)
                h_vals.append(sfc.d[ci])

    cvxopt.solvers.options.update(
        {"show_progress": False, "abstol": 1e-10, "reltol": 1e-10, "feastol": 1e-10}
    )
    sol = cvxopt.solvers.qp(
        cvxopt.matrix(P),
        cvxopt.matrix(q),
        cvxopt.matrix(np.array(G_rows)),
        cvxopt.matrix(np.array(h_vals)),
        cvxopt.matrix(Aeq),
        cvxopt.matrix(beq),
    )
    if sol["status"] != "optimal":
        return None
    z = np.array(sol["x"]).ravel()
    return z[nx:].reshape(n, 3)


def segment_hits_occupied_many(origin, dirs, length, occupied_cells, res) -> np.ndarray:
    """Vectorized slab-test form of `segment_hits_occupied` for many rays.

    Returns a bool mask per ray.  Independent of the grid traversal code:
    pure segment-vs-cube interval intersection.
    """
    dirs = np.asarray(dirs, float)
    if len(occupied_cells) == 0:
        return np.zeros(len(dirs), bool)
    if len(dirs) > 2048:  # bound the (rays, cells, 3) intermediates
        return np.concatenate([
            segment_hits_occupied_many(origin, dirs[i:i + 2048], length,
                                       occupied_cells, res)
            for i in range(0, len(dirs), 2048)
        ])
    p = np.asarray(origin, float)
    d = dirs * length  # (r, 3)
    lo = (np.asarray(occupied_cells, float) - 0.5) * res  # (c, 3)
    hi = lo + res
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (lo[None, :, :] - p) / d[:, None, :]
        tb = (hi[None, :, :] - p) / d[:, None, :]
    t_lo = np.minimum(ta, tb)
    t_hi = np.maximum(ta, tb)
    # axes with zero direction: interval is all of R if p inside the slab
    zero = d == 0.0  # (r, 3)
    inside = (p >= lo[None, :, :]) & (p <= hi[None, :, :])
    t_lo = np.where(zero[:, None, :], np.where(inside, -np.inf, np.inf), t_lo)
    t_hi = np.where(zero[:, None, :], np.where(inside, np.inf, -np.inf), t_hi)
    t0 = np.maximum(t_lo.max(axis=2), 0.0)
    t1 = np.minimum(t_hi.min(axis=2), 1.0)
    return (t0 <= t1).any(axis=1)
