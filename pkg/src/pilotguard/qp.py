"""Dense convex QP solver: ADMM operator splitting with warm starting.

Solves problems of the form

    min  1/2 x'Hx + g'x   s.t.  l <= Ax <= u

sized for receding-horizon control instances (tens of variables, hundreds of
rows) at sub-millisecond to few-millisecond latency.  One-sided rows use the
``INF`` sentinel.  The iteration is the standard operator-splitting scheme
with over-relaxation, a diagonally preconditioned problem, residual-based
step-size adaptation, and an optional active-set polish that refines the
converged iterate to near machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

# Sentinel for one-sided rows; values at or beyond it are treated as infinite.
INF = 1e30


class QpError(ValueError):
    """Malformed problem data (dimension mismatch, non-PSD Hessian, l > u)."""


@dataclass
class QpProblem:
    """Dense QP data. H must be symmetric PSD, bounds elementwise l <= u."""

    H: np.ndarray
    g: np.ndarray
    A: np.ndarray
    l: np.ndarray
    u: np.ndarray

    def __post_init__(self) -> None:
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        self.g = np.asarray(self.g, dtype=float).ravel()
        self.A = np.asarray(self.A, dtype=float).reshape(-1, self.H.shape[0])
        self.l = np.asarray(self.l, dtype=float).ravel()
        self.u = np.asarray(self.u, dtype=float).ravel()
        n = self.H.shape[0]
        m = self.A.shape[0]
        if self.H.shape != (n, n) or self.g.shape != (n,):
            raise QpError("H/g dimension mismatch")
        if self.l.shape != (m,) or self.u.shape != (m,):
            raise QpError("A/l/u dimension mismatch")
        scale = max(1.0, float(np.abs(self.H).max(initial=0.0)))
        if np.abs(self.H - self.H.T).max(initial=0.0) > 1e-9 * scale:
            raise QpError("H is not symmetric")
        self.H = 0.5 * (self.H + self.H.T)
        if np.any(self.l > self.u):
            raise QpError("lower bound exceeds upper bound")

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.H @ x + self.g @ x)


@dataclass
class QpSettings:
    eps_prim: float = 1e-5
    eps_dual: float = 1e-5
    eps_infeas: float = 1e-7
    max_iter: int = 4000
    rho: float = 0.1
    sigma: float = 1e-6
    alpha: float = 1.6
    psd_reg: float = 1e-8
    adapt_interval: int = 25
    scaling_iters: int = 10
    polish: bool = True


@dataclass
class QpSolution:
    x: np.ndarray
    y: np.ndarray
    status: str  # solved | max_iter | infeasible
    iterations: int
    primal_res: float
    dual_res: float
    polished: bool = False


@dataclass
class _Scaling:
    d: np.ndarray  # variable scaling (n)
    e: np.ndarray  # constraint scaling (m)
    c: float  # cost scaling


def _ruiz_equilibrate(H: np.ndarray, g: np.ndarray, A: np.ndarray, iters: int) -> _Scaling:
    """Modified Ruiz equilibration on the stacked [[H, A'], [A, 0]] matrix."""
    n, m = H.shape[0], A.shape[0]
    d = np.ones(n)
    e = np.ones(m)
    c = 1.0
    for _ in range(iters):
        col = np.maximum(np.abs(H).max(axis=0, initial=0.0), np.abs(A).max(axis=0, initial=0.0))
        row = np.abs(A).max(axis=1, initial=0.0) if m else np.zeros(0)
        dd = 1.0 / np.sqrt(np.maximum(col, 1e-10))
        ee = 1.0 / np.sqrt(np.maximum(row, 1e-10))
        H = dd[:, None] * H * dd[None, :]
        g = dd * g
        A = ee[:, None] * A * dd[None, :]
        d *= dd
        e *= ee
        # cost scaling keeps the Hessian's magnitude near unity
        h_norm = np.abs(H).max(axis=0, initial=0.0).mean() if n else 1.0
        cc = 1.0 / max(h_norm, np.abs(g).max(initial=0.0), 1e-10)
        cc = min(max(cc, 1e-6), 1e6)
        H = H * cc
        g = g * cc
        c *= cc
    return _Scaling(d=d, e=e, c=c)


class QpSolver:
    """Reusable solver instance; not safe for concurrent solves."""

    def __init__(self, settings: QpSettings | None = None) -> None:
        self.settings = settings or QpSettings()

    def solve(
        self,
        problem: QpProblem,
        warm: tuple[np.ndarray, np.ndarray] | None = None,
    ) -> QpSolution:
        s = self.settings
        n, m = problem.n, problem.m

        # PSD check: Cholesky of the regularized Hessian must succeed.
        try:
            scipy.linalg.cho_factor(problem.H + s.psd_reg * np.eye(n), lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise QpError("Hessian is not positive semidefinite") from exc

        if m == 0:
            x = scipy.linalg.solve(
                problem.H + s.psd_reg * np.eye(n), -problem.g, assume_a="pos"
            )
            res = float(np.abs(problem.H @ x + problem.g).max(initial=0.0))
            return QpSolution(
                x=x, y=np.zeros(0), status="solved", iterations=0,
                primal_res=0.0, dual_res=res,
            )

        scal = _ruiz_equilibrate(problem.H, problem.g, problem.A, s.scaling_iters)
        H = scal.c * (scal.d[:, None] * problem.H * scal.d[None, :])
        g = scal.c * (scal.d * problem.g)
        A = scal.e[:, None] * problem.A * scal.d[None, :]
        l = np.where(problem.l <= -INF, -np.inf, problem.l * scal.e)
        u = np.where(problem.u >= INF, np.inf, problem.u * scal.e)

        # Per-row step size: boosted on equality rows.
        rho_base = s.rho
        eq = (problem.l == problem.u) & np.isfinite(l) & np.isfinite(u)

        def rho_vec(base: float) -> np.ndarray:
            r = np.full(m, base)
            r[eq] = base * 1e3
            return np.clip(r, 1e-6, 1e6)

        rho = rho_vec(rho_base)
        K = H + s.sigma * np.eye(n) + (A.T * rho) @ A
        chol = scipy.linalg.cho_factor(K, lower=True)

        if warm is not None:
            x = (warm[0] / scal.d).copy()
            y = (warm[1] * scal.c / scal.e).copy()
            z = np.clip(A @ x, l, u)
        else:
            x = np.zeros(n)
            y = np.zeros(m)
            z = np.zeros(m)

        status = "max_iter"
        iters = s.max_iter
        prim_res = dual_res = np.inf
        for k in range(1, s.max_iter + 1):
            rhs = s.sigma * x - g + A.T @ (rho * z - y)
            x_t = scipy.linalg.cho_solve(chol, rhs)
            z_t = A @ x_t
            x_new = s.alpha * x_t + (1.0 - s.alpha) * x
            z_rel = s.alpha * z_t + (1.0 - s.alpha) * z
            z_new = np.clip(z_rel + y / rho, l, u)
            y_new = y + rho * (z_rel - z_new)

            dy = y_new - y
            x, z, y = x_new, z_new, y_new

            if k % s.adapt_interval == 0 or k == s.max_iter:
                prim_res, dual_res = self._residuals(problem, scal, x, z, y)
                if prim_res <= s.eps_prim and dual_res <= s.eps_dual:
                    status = "solved"
                    iters = k
                    break
                if self._primal_infeasible(problem, scal, dy):
                    status = "infeasible"
                    iters = k
                    break
                # residual-balancing step-size adaptation
                new_base = self._adapted_rho(rho_base, H, g, A, x, z, y)
                if new_base / rho_base > 5.0 or rho_base / new_base > 5.0:
                    rho_base = new_base
                    rho = rho_vec(rho_base)
                    K = H + s.sigma * np.eye(n) + (A.T * rho) @ A
                    chol = scipy.linalg.cho_factor(K, lower=True)

        x_out = scal.d * x
        y_out = (scal.e * y) / scal.c
        polished = False
        if status == "solved" and s.polish:
            pol = self._polish(problem, x_out, y_out)
            if pol is not None:
                x_out, y_out, prim_res, dual_res = pol
                polished = True
        return QpSolution(
            x=x_out, y=y_out, status=status, iterations=iters,
            primal_res=float(prim_res), dual_res=float(dual_res), polished=polished,
        )

    @staticmethod
    def _residuals(
        problem: QpProblem, scal: _Scaling, x: np.ndarray, z: np.ndarray, y: np.ndarray
    ) -> tuple[float, float]:
        """Unscaled termination residuals."""
        xs = scal.d * x
        zs = z / scal.e
        ys = (scal.e * y) / scal.c
        rp = np.abs(problem.A @ xs - zs).max(initial=0.0)
        rd = np.abs(problem.H @ xs + problem.g + problem.A.T @ ys).max(initial=0.0)
        return float(rp), float(rd)

    @staticmethod
    def _adapted_rho(
        rho: float, H: np.ndarray, g: np.ndarray, A: np.ndarray,
        x: np.ndarray, z: np.ndarray, y: np.ndarray,
    ) -> float:
        ax = A @ x
        rp = np.abs(ax - z).max(initial=0.0)
        rd = np.abs(H @ x + g + A.T @ y).max(initial=0.0)
        p_scale = max(np.abs(ax).max(initial=0.0), np.abs(z).max(initial=0.0), 1e-10)
        d_scale = max(
            np.abs(H @ x).max(initial=0.0),
            np.abs(g).max(initial=0.0),
            np.abs(A.T @ y).max(initial=0.0),
            1e-10,
        )
        ratio = np.sqrt((rp / p_scale) / max(rd / d_scale, 1e-12))
        return float(np.clip(rho * ratio, 1e-6, 1e6))

    def _primal_infeasible(self, problem: QpProblem, scal: _Scaling, dy: np.ndarray) -> bool:
        """Standard certificate test on the dual-iterate difference."""
        dy_us = (scal.e * dy) / scal.c
        norm = np.abs(dy_us).max(initial=0.0)
        if norm < 1e-12:
            return False
        dy_us = dy_us / norm
        eps = self.settings.eps_infeas
        if np.abs(problem.A.T @ dy_us).max(initial=0.0) > eps:
            return False
        pos = np.maximum(dy_us, 0.0)
        neg = np.minimum(dy_us, 0.0)
        # an unbounded side cannot support a certificate component
        if np.any((pos > eps) & (problem.u >= INF)) or np.any((neg < -eps) & (problem.l <= -INF)):
            return False
        u_fin = np.where(problem.u >= INF, 0.0, problem.u)
        l_fin = np.where(problem.l <= -INF, 0.0, problem.l)
        support = float(u_fin @ pos + l_fin @ neg)
        return support < -eps

    def _polish(
        self, problem: QpProblem, x: np.ndarray, y: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, float, float] | None:
        """Refine by solving the KKT system of the detected active set."""
        s = self.settings
        ax = problem.A @ x
        tol = 10.0 * max(s.eps_prim, 1e-7)
        low = (ax - problem.l < tol) & (problem.l > -INF)
        upp = (problem.u - ax < tol) & (problem.u < INF)
        eq = low & upp  # tight or equality rows: either side may bind
        low = (low & ~eq) | (eq & (y < 0))
        upp = (upp & ~eq) | (eq & (y >= 0))
        act = np.where(low | upp)[0]
        b = np.where(low[act], problem.l[act], problem.u[act])
        eq_act = eq[act]
        na = act.size
        n = problem.n
        kkt = np.zeros((n + na, n + na))
        kkt[:n, :n] = problem.H + s.psd_reg * np.eye(n)
        if na:
            kkt[:n, n:] = problem.A[act].T
            kkt[n:, :n] = problem.A[act]
            kkt[n:, n:] = -s.psd_reg * np.eye(na)
        rhs = np.concatenate([-problem.g, b])
        try:
            sol = scipy.linalg.solve(kkt, rhs)
        except scipy.linalg.LinAlgError:
            return None
        x_p = sol[:n]
        y_p = np.zeros(problem.m)
        y_p[act] = sol[n:]
        ax_p = problem.A @ x_p
        rp = float(
            np.abs(ax_p - np.clip(ax_p, problem.l, problem.u)).max(initial=0.0)
        )
        rd = float(np.abs(problem.H @ x_p + problem.g + problem.A.T @ y_p).max(initial=0.0))
        y_act = y_p[act]
        sign_tol = s.eps_dual * 10
        ok_signs = np.all(y_act[low[act] & ~eq_act] <= sign_tol) and np.all(
            y_act[upp[act] & ~eq_act] >= -sign_tol
        )
        if rp <= s.eps_prim and rd <= s.eps_dual and ok_signs:
            return x_p, y_p, rp, rd
        return None


def solve(
    problem: QpProblem,
    warm: tuple[np.ndarray, np.ndarray] | None = None,
    settings: QpSettings | None = None,
) -> QpSolution:
    """One-shot convenience wrapper around :class:`QpSolver`."""
    return QpSolver(settings).solve(problem, warm=warm)
