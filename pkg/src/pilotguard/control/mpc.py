"""Corridor-constrained MPC on a jerk-input triple integrator.

States are eliminated up front: with x = [p, v, a] per axis and piecewise
constant jerk u over dt, every predicted state is affine in the stacked
input vector U, so the tracking problem condenses to a dense QP in 3N (or
3N+1 with the corridor slack) variables that the operator-splitting solver
handles in a few hundred microseconds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import qp
from ..planning import Polytope, ReferencePath
from ..types import AttitudeCommand
from .flatness import FreeFall, flatness_transform


@dataclass(frozen=True)
class MpcConfig:
    n: int = 20
    dt: float = 0.05
    r_p: float = 100.0  # path tracking
    r_u: float = 0.1  # jerk effort
    r_c: float = 1.0  # control variation
    r_vn: float = 10.0  # terminal velocity
    r_an: float = 1.0  # terminal acceleration
    v_max: float = 2.0  # per axis, m/s
    a_max_xy: float = 6.0  # m/s^2
    a_z_min: float = -5.0
    a_z_max: float = 14.0
    j_max: float = 60.0  # per axis, m/s^3
    v_r: float = 1.5  # reference sampling speed, m/s
    c_t: float = 1.0
    g: float = 9.81
    k_brake: float = 2.0  # braking accel gain, 1/s
    slack_weight: float = 1e4

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("horizon must be at least 2")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        for name in ("r_p", "r_u", "r_c", "r_vn", "r_an"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.a_z_min <= -self.g:
            raise ValueError("a_z_min must stay above free fall")
        if min(self.v_max, self.a_max_xy, self.j_max) <= 0:
            raise ValueError("limits must be positive")


@dataclass
class MpcState:
    p: np.ndarray
    v: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, float)
        self.v = np.asarray(self.v, float)
        self.a = np.asarray(self.a, float)
        stacked = np.concatenate([self.p, self.v, self.a])
        if stacked.shape != (9,) or not np.all(np.isfinite(stacked)):
            raise ValueError("state must be three finite 3-vectors")


@dataclass
class MpcSolution:
    u: np.ndarray  # (n, 3) jerk inputs
    p: np.ndarray  # (n, 3) predicted positions, stages 1..N
    v: np.ndarray
    a: np.ndarray
    status: str  # solved | degraded | infeasible
    iterations: int
    solve_time: float
    slack: float = 0.0


@lru_cache(maxsize=8)
def _prediction(n: int, dt: float):
    """Per-axis impulse-response matrices of the dt-sampled triple integrator.

    Row k-1 gives stage k (1-based); column i the effect of u_i."""
    m = np.arange(n, dtype=float)
    h_p = dt**3 * (1.0 / 6.0 + m / 2.0 + m**2 / 2.0)
    h_v = dt**2 * (0.5 + m)
    h_a = np.full(n, dt)
    idx = np.subtract.outer(np.arange(n), np.arange(n))  # k-1-i
    mask = idx >= 0
    g_p = np.where(mask, h_p[np.clip(idx, 0, n - 1)], 0.0)
    g_v = np.where(mask, h_v[np.clip(idx, 0, n - 1)], 0.0)
    g_a = np.where(mask, h_a[np.clip(idx, 0, n - 1)], 0.0)
    return g_p, g_v, g_a


def _free_response(x0: MpcState, n: int, dt: float):
    k = np.arange(1, n + 1, dtype=float)[:, None] * dt
    f_p = x0.p[None, :] + k * x0.v[None, :] + 0.5 * k**2 * x0.a[None, :]
    f_v = x0.v[None, :] + k * x0.a[None, :]
    f_a = np.broadcast_to(x0.a, (n, 3)).copy()
    return f_p, f_v, f_a


def predict(u: np.ndarray, x0: MpcState, cfg: MpcConfig):
    """Predicted (p, v, a) over stages 1..N for stacked or (n,3) inputs."""
    u = np.asarray(u, float).reshape(cfg.n, 3)
    g_p, g_v, g_a = _prediction(cfg.n, cfg.dt)
    f_p, f_v, f_a = _free_response(x0, cfg.n, cfg.dt)
    return g_p @ u + f_p, g_v @ u + f_v, g_a @ u + f_a


def sample_references(
    points: np.ndarray,
    p_odom,
    v_r: float,
    dt: float,
    n: int,
    sfc: Polytope | None,
) -> np.ndarray:
    """N waypoints along the polyline, spaced v_r*dt in arc length from the
    point nearest the vehicle; sampling pins at the path end or at the exact
    point where the path falls out of the corridor, whichever comes first.

    A prefix outside the corridor (vehicle still escaping toward it) is kept
    as-is: those stages simply get no corridor rows, and clipping them to the
    start would freeze the vehicle in place."""
    pts = np.atleast_2d(np.asarray(points, float))
    p_odom = np.asarray(p_odom, float)
    if len(pts) == 1:
        return np.repeat(pts, n, axis=0)
    seg = np.diff(pts, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = float(cum[-1])

    # closest point on the polyline
    safe = np.where(seg_len > 0, seg_len, 1.0)
    t = np.einsum("ij,ij->i", p_odom[None, :] - pts[:-1], seg) / safe**2
    t = np.clip(t, 0.0, 1.0)
    proj = pts[:-1] + t[:, None] * seg
    i0 = int(np.argmin(np.linalg.norm(proj - p_odom, axis=1)))
    s0 = float(cum[i0] + t[i0] * seg_len[i0])

    def point_at(s: float) -> np.ndarray:
        s = min(max(s, 0.0), total)
        i = int(np.searchsorted(cum, s, side="right") - 1)
        i = min(i, len(seg) - 1)
        if seg_len[i] == 0:
            return pts[i].copy()
        return pts[i] + (s - cum[i]) / seg_len[i] * seg[i]

    refs = np.empty((n, 3))
    refs[0] = point_at(s0)
    entered = sfc is not None and bool(sfc.contains(refs[0])[0])
    pinned = False
    s = s0
    for k in range(1, n):
        if pinned:
            refs[k] = refs[k - 1]
            continue
        s = s + v_r * dt
        cand = point_at(s)
        if sfc is None or sfc.contains(cand)[0]:
            refs[k] = cand
            entered = True
            continue
        if not entered:
            refs[k] = cand
            continue
        # exact corridor exit on the segment from the last in-corridor point
        prev = refs[k - 1]
        delta = cand - prev
        grow = sfc.C @ delta
        room = sfc.d - sfc.C @ prev
        with np.errstate(divide="ignore"):
            ratios = np.where(grow > 1e-12, room / grow, np.inf)
        t_exit = float(np.clip(ratios.min(), 0.0, 1.0))
        refs[k] = prev + t_exit * delta
        pinned = True
    return refs


def eligible_stages(refs: np.ndarray, sfc: Polytope) -> np.ndarray:
    """Corridor rows only constrain stages whose reference the corridor
    actually contains."""
    return sfc.contains(refs)


def _interleave(per_axis: np.ndarray) -> np.ndarray:
    return np.asarray(per_axis, float).reshape(-1)


def build_qp(
    refs: np.ndarray, x0: MpcState, sfc: Polytope | None, cfg: MpcConfig
) -> qp.QpProblem:
    """Condense the tracking problem into min 1/2 U'HU + g'U, l <= AU <= u.

    When x0 sits outside the corridor a single nonnegative slack variable is
    appended and subtracted from every corridor row, keeping the QP feasible
    while the vehicle is still escaping inflated space."""
    refs = np.asarray(refs, float)
    n = cfg.n
    if refs.shape != (n, 3):
        raise ValueError(f"expected {(n, 3)} references, got {refs.shape}")
    g_p, g_v, g_a = _prediction(n, cfg.dt)
    f_p, f_v, f_a = _free_response(x0, n, cfg.dt)

    diff = np.zeros((n - 1, n))
    rows = np.arange(n - 1)
    diff[rows, rows] = -1.0
    diff[rows, rows + 1] = 1.0
    gv_n = g_v[-1]
    ga_n = g_a[-1]

    h_1d = 2.0 * (
        cfg.r_p * g_p.T @ g_p
        + cfg.r_u * np.eye(n)
        + cfg.r_c * diff.T @ diff
        + cfg.r_vn * np.outer(gv_n, gv_n)
        + cfg.r_an * np.outer(ga_n, ga_n)
    )
    H = np.kron(h_1d, np.eye(3))

    err_p = f_p - refs  # (n, 3)
    g_lin = 2.0 * (
        cfg.r_p * g_p.T @ err_p
        + cfg.r_vn * np.outer(gv_n, f_v[-1])
        + cfg.r_an * np.outer(ga_n, f_a[-1])
    )
    g_vec = _interleave(g_lin)

    blocks_a = [np.kron(g_v, np.eye(3)), np.kron(g_a, np.eye(3)), np.eye(3 * n)]
    f_v_flat = _interleave(f_v)
    f_a_flat = _interleave(f_a)
    l_v = -cfg.v_max - f_v_flat
    u_v = cfg.v_max - f_v_flat
    a_lo = np.tile([-cfg.a_max_xy, -cfg.a_max_xy, cfg.a_z_min], n)
    a_hi = np.tile([cfg.a_max_xy, cfg.a_max_xy, cfg.a_z_max], n)
    l_a = a_lo - f_a_flat
    u_a = a_hi - f_a_flat
    l_j = np.full(3 * n, -cfg.j_max)
    u_j = np.full(3 * n, cfg.j_max)
    lo = [l_v, l_a, l_j]
    hi = [u_v, u_a, u_j]

    soften = False
    if sfc is not None:
        stages = np.flatnonzero(eligible_stages(refs, sfc))
        soften = not bool(sfc.contains(x0.p)[0])
        if len(stages):
            kron_p = np.kron(g_p, np.eye(3))
            c_blocks = []
            c_hi = []
            for k in stages:
                c_blocks.append(sfc.C @ kron_p[3 * k : 3 * k + 3])
                c_hi.append(sfc.d - sfc.C @ f_p[k])
            blocks_a.append(np.vstack(c_blocks))
            hi.append(np.concatenate(c_hi))
            lo.append(np.full(len(hi[-1]), -qp.INF))
        else:
            soften = False

    A = np.vstack(blocks_a)
    l = np.concatenate(lo)
    u = np.concatenate(hi)

    if soften:
        n_corr = len(hi[-1])
        col = np.zeros((A.shape[0], 1))
        col[-n_corr:, 0] = -1.0
        A = np.hstack([A, col])
        slack_row = np.zeros((1, A.shape[1]))
        slack_row[0, -1] = 1.0
        A = np.vstack([A, slack_row])
        l = np.concatenate([l, [0.0]])
        u = np.concatenate([u, [qp.INF]])
        H = np.pad(H, ((0, 1), (0, 1)))
        H[-1, -1] = 2.0 * cfg.slack_weight
        g_vec = np.concatenate([g_vec, [0.0]])

    return qp.QpProblem(H=H, g=g_vec, A=A, l=l, u=u)


def solve_mpc(
    problem: qp.QpProblem,
    x0: MpcState,
    cfg: MpcConfig,
    warm=None,
    settings: qp.QpSettings | None = None,
) -> MpcSolution:
    t0 = time.perf_counter()
    sol = qp.solve(problem, warm=warm, settings=settings)
    elapsed = time.perf_counter() - t0
    n_var = 3 * cfg.n
    u = sol.x[:n_var].reshape(cfg.n, 3)
    slack = float(sol.x[n_var]) if len(sol.x) > n_var else 0.0
    p, v, a = predict(u, x0, cfg)
    status = {"solved": "solved", "max_iter": "degraded", "infeasible": "infeasible"}[
        sol.status
    ]
    return MpcSolution(
        u=u, p=p, v=v, a=a,
        status=status, iterations=sol.iterations, solve_time=elapsed, slack=slack,
    )


def brake_command(
    state: MpcState, yaw: float, cfg: MpcConfig, stamp: float = 0.0
) -> AttitudeCommand:
    """Fallback: decelerate along the current velocity, zero jerk."""
    a = -cfg.k_brake * state.v
    a[0] = np.clip(a[0], -cfg.a_max_xy, cfg.a_max_xy)
    a[1] = np.clip(a[1], -cfg.a_max_xy, cfg.a_max_xy)
    a[2] = np.clip(a[2], cfg.a_z_min, cfg.a_z_max)
    return flatness_transform(
        a, np.zeros(3), yaw, yaw, c_t=cfg.c_t, g=cfg.g, stamp=stamp
    )


class MpcController:
    """Stateful 100 Hz tracking loop: sample references, condense, solve,
    map to body rates.  Keeps the shifted previous solution as a warm start
    and falls back to braking whenever no usable solution exists."""

    def __init__(self, cfg: MpcConfig | None = None):
        self.cfg = cfg or MpcConfig()
        self._warm_u: np.ndarray | None = None
        self._last_cmd: AttitudeCommand | None = None

    def reset(self) -> None:
        self._warm_u = None
        self._last_cmd = None

    def _warm_start(self, n_var: int, m_rows: int):
        if self._warm_u is None:
            return None
        shifted = np.vstack([self._warm_u[1:], self._warm_u[-1:]])
        x = shifted.reshape(-1)
        if n_var > x.size:
            x = np.concatenate([x, np.zeros(n_var - x.size)])
        return x[:n_var], np.zeros(m_rows)

    def step(
        self,
        state: MpcState,
        yaw: float,
        path: ReferencePath | None,
        sfc: Polytope | None,
        stamp: float = 0.0,
    ):
        """Returns (command, solution | None, refs | None)."""
        cfg = self.cfg
        if path is None or sfc is None or len(path.points) == 0:
            self._warm_u = None
            cmd = brake_command(state, yaw, cfg, stamp)
            self._last_cmd = cmd
            return cmd, None, None
        refs = sample_references(
            path.points, state.p, cfg.v_r, cfg.dt, cfg.n, sfc
        )
        problem = build_qp(refs, state, sfc, cfg)
        sol = solve_mpc(
            problem, state, cfg,
            warm=self._warm_start(problem.H.shape[0], problem.A.shape[0]),
        )
        if sol.status == "infeasible":
            self._warm_u = None
            cmd = brake_command(state, yaw, cfg, stamp)
            self._last_cmd = cmd
            return cmd, sol, refs
        self._warm_u = sol.u
        try:
            cmd = flatness_transform(
                sol.a[0], sol.u[0], yaw, path.yaw_ref,
                c_t=cfg.c_t, g=cfg.g, stamp=stamp,
            )
        except FreeFall:
            cmd = self._last_cmd or brake_command(state, yaw, cfg, stamp)
        self._last_cmd = cmd
        return cmd, sol, refs
