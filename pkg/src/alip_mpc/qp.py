"""Dense strictly-convex QP solver (dual active-set, Goldfarb-Idnani style).

Solves  min 1/2 u'Hu + f'u  s.t.  G u <= ub  for positive-definite H.
Starting from the unconstrained optimum the iterates stay dual feasible,
so no phase-1 is needed; adding a violated row either steps onto it (full
step), drops a blocking row whose multiplier hits zero (partial step), or
proves infeasibility via a Farkas combination of the working set.

The inner equality systems are solved by block elimination against H's
inverse; a :class:`QpFactor` caches H^-1 and H^-1 G' so receding-horizon
callers pay only small active-set solves per tick.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constraints import LinearInequalitySet
from .errors import InvalidParameterError

__all__ = ["QpProblem", "QpSolution", "QpFactor", "solve_qp", "solve_qp_dense"]

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_MAX_ITERATIONS = "max-iterations"

_FEAS_TOL = 1e-9        # constraint violation considered active
_CURV_REL_TOL = 1e-12   # projected curvature considered null


@dataclass
class QpProblem:
    """Condensed QP: Hessian, gradient and inequality rows with resolved bounds."""

    H: np.ndarray
    f: np.ndarray
    ineq: LinearInequalitySet
    ub: np.ndarray  # effective right-hand sides (initial state folded in)

    def __post_init__(self) -> None:
        n = self.H.shape[0]
        if self.H.shape != (n, n) or self.f.shape != (n,):
            raise InvalidParameterError("inconsistent QP dimensions")
        if not np.allclose(self.H, self.H.T, atol=1e-12):
            raise InvalidParameterError("Hessian must be symmetric")

    def objective(self, u: np.ndarray) -> float:
        return float(0.5 * u @ self.H @ u + self.f @ u)


@dataclass
class QpFactor:
    """Precomputed pieces shared across solves with the same (H, G)."""

    H: np.ndarray
    G: np.ndarray
    Hinv: np.ndarray
    HGt: np.ndarray  # H^-1 G'

    @classmethod
    def build(cls, H: np.ndarray, G: np.ndarray) -> "QpFactor":
        H = np.asarray(H, dtype=float)
        G = np.asarray(G, dtype=float).reshape(-1, H.shape[0])
        try:
            np.linalg.cholesky(H)
        except np.linalg.LinAlgError as exc:
            raise InvalidParameterError("Hessian must be positive definite") from exc
        Hinv = np.linalg.inv(H)
        Hinv = 0.5 * (Hinv + Hinv.T)
        return cls(H=H, G=G, Hinv=Hinv, HGt=Hinv @ G.T)


@dataclass
class QpSolution:
    primal: np.ndarray
    status: str
    active: tuple[int, ...] = ()
    duals: np.ndarray = field(default=None, repr=False)
    primal_residual: float = np.inf
    dual_residual: float = np.inf
    comp_residual: float = np.inf
    iterations: int = 0
    certificate: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OPTIMAL


def _kkt_residuals(H, f, G, ub, u, lam):
    if G.shape[0]:
        slack = G @ u - ub
        primal = float(max(0.0, slack.max()))
        comp = float(np.max(np.abs(lam * slack))) if lam.size else 0.0
        dual = float(np.linalg.norm(H @ u + f + G.T @ lam, ord=np.inf))
    else:
        primal = 0.0
        comp = 0.0
        dual = float(np.linalg.norm(H @ u + f, ord=np.inf))
    return primal, dual, comp


def solve_qp_dense(
    H: np.ndarray,
    f: np.ndarray,
    G: np.ndarray,
    ub: np.ndarray,
    warm_start: Optional[Sequence[int]] = None,
    max_iter: Optional[int] = None,
    factor: Optional[QpFactor] = None,
) -> QpSolution:
    if factor is None:
        factor = QpFactor.build(H, G)
    H, G = factor.H, factor.G
    Hinv, HGt = factor.Hinv, factor.HGt
    f = np.asarray(f, dtype=float)
    ub = np.asarray(ub, dtype=float).reshape(-1)
    n, R = H.shape[0], G.shape[0]
    if max_iter is None:
        max_iter = 50 + 10 * (n + R)

    u = Hinv @ -f
    active: list[int] = []
    lam_active: list[float] = []
    warm_order = [int(i) for i in warm_start] if warm_start else []
    iterations = 0

    def finish(status, certificate=()):
        lam_full = np.zeros(R)
        for idx, l in zip(active, lam_active):
            lam_full[idx] = l
        primal, dual, comp = _kkt_residuals(H, f, G, ub, u, lam_full)
        # status contract: optimal implies the residual bounds hold
        # (scale-relative so huge-weight Hessians are not misflagged)
        scale = 1.0 + float(np.abs(f).max()) + float(np.abs(u).max())
        if status == STATUS_OPTIMAL and (
            primal > 1e-6 or dual > 1e-6 * scale or comp > 1e-8 * scale
        ):
            status = STATUS_MAX_ITERATIONS
        return QpSolution(
            primal=u,
            status=status,
            active=tuple(sorted(active)),
            duals=lam_full,
            primal_residual=primal,
            dual_residual=dual,
            comp_residual=comp,
            iterations=iterations,
            certificate=tuple(certificate),
        )

    while iterations < max_iter:
        iterations += 1
        slack = G @ u - ub if R else np.zeros(0)
        p = -1
        # Warm rows are re-activated first so receding-horizon resolves
        # typically repeat the previous active set in few iterations.
        for idx in warm_order:
            if 0 <= idx < R and idx not in active and slack[idx] > _FEAS_TOL:
                p = idx
                break
        if p < 0:
            if R and slack.size:
                cand = int(np.argmax(slack))
                if slack[cand] > _FEAS_TOL:
                    p = cand
        if p < 0:
            return finish(STATUS_OPTIMAL)

        lam_p = 0.0
        g_p = G[p]
        Hig_p = HGt[:, p]
        c0 = float(g_p @ Hig_p)  # unprojected curvature scale
        while iterations < max_iter:
            iterations += 1
            na = len(active)
            if na:
                # KKT block elimination: w solves (G_A Hinv G_A') w = -G_A Hinv g_p
                Ga = G[active]
                HGa = HGt[:, active]
                S = Ga @ HGa
                rhs = Ga @ Hig_p
                try:
                    w = np.linalg.solve(S, -rhs)
                except np.linalg.LinAlgError:
                    w = np.linalg.lstsq(S, -rhs, rcond=None)[0]
                z = -Hig_p - HGa @ w
            else:
                w = np.zeros(0)
                z = -Hig_p

            curvature = float(-g_p @ z)  # equals z'Hz >= 0
            z_is_zero = curvature <= _CURV_REL_TOL * c0

            # Dual step limit: duals move along w; negative components shrink.
            t1 = np.inf
            k_drop = -1
            for j in range(na):
                if w[j] < -1e-14:
                    cand_t = lam_active[j] / (-w[j])
                    if cand_t < t1 - 1e-15:
                        t1, k_drop = cand_t, j

            if z_is_zero:
                if k_drop < 0:
                    return finish(STATUS_INFEASIBLE, certificate=active + [p])
                lam_p += t1
                for j in range(na):
                    lam_active[j] += t1 * w[j]
                active.pop(k_drop)
                lam_active.pop(k_drop)
                continue

            s_p = float(g_p @ u - ub[p])
            t2 = s_p / curvature
            t = min(t1, t2)
            u = u + t * z
            for j in range(len(active)):
                lam_active[j] += t * w[j]
            lam_p += t
            if t2 <= t1:
                active.append(p)
                lam_active.append(lam_p)
                break
            active.pop(k_drop)
            lam_active.pop(k_drop)

    return finish(STATUS_MAX_ITERATIONS)


def solve_qp(
    qp: QpProblem, warm_start: Optional[Sequence[int]] = None
) -> QpSolution:
    """Solve a condensed QP; see :func:`solve_qp_dense` for the contract."""
    return solve_qp_dense(qp.H, qp.f, qp.ineq.G, qp.ub, warm_start=warm_start)
