"""Real linear-algebra kernels.

Non-negative least squares (Lawson-Hanson active set), the minimum-norm
quadratic program ``min ||x||^2 s.t. G x >= c`` solved through its
least-distance-programming dual (a single NNLS), KKT certification and the
right pseudo-inverse used by the zero-forcing schemes.

The hot kernels are compiled with numba; the public functions wrap them,
validate inputs and translate status codes into exceptions.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (
    ConvergenceFailure,
    InfeasibleError,
    InvalidArgument,
    SingularChannelError,
)

TOL_FEAS = 1e-8
KKT_CAP = 1e-6
INFEASIBLE_SCALE = 1e12
NNLS_ITER_FACTOR = 50

_OK, _MAXITER, _INFEASIBLE = 0, 1, 2


@dataclass(frozen=True)
class RealSystem:
    """Linear inequality system ``G x >= c`` over real vectors."""

    G: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if G.ndim != 2 or G.shape[0] < 1 or G.shape[1] < 1:
            raise InvalidArgument(f"G must be a non-empty matrix, got shape {G.shape}")
        if c.shape != (G.shape[0],):
            raise InvalidArgument(f"c has shape {c.shape}, expected ({G.shape[0]},)")
        if not (np.all(np.isfinite(G)) and np.all(np.isfinite(c))):
            raise InvalidArgument("system contains non-finite entries")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "c", c)

    @property
    def shape(self):
        return self.G.shape


@dataclass(frozen=True)
class QpSolution:
    x: np.ndarray
    multipliers: np.ndarray
    power: float
    kkt_residual: float


# ---------------------------------------------------------------------------
# compiled kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def _nnls_kernel(A, b, maxiter):
    m, n = A.shape
    x = np.zeros(n)
    passive = np.zeros(n, dtype=np.bool_)
    amax = np.max(np.abs(A))
    bmax = np.max(np.abs(b))
    tol = 10.0 * np.finfo(np.float64).eps * max(m, n) * amax * bmax
    w = A.T @ b
    it = 0
    while True:
        j = -1
        wbest = tol
        for i in range(n):
            if not passive[i] and w[i] > wbest:
                wbest = w[i]
                j = i
        if j < 0:
            return x, _OK
        passive[j] = True
        first = True
        while True:
            it += 1
            if it > maxiter:
                return x, _MAXITER
            idx = np.nonzero(passive)[0]
            sub = np.ascontiguousarray(A[:, idx])
            s = np.linalg.lstsq(sub, b)[0]
            if first:
                # entering variable must move into the interior; otherwise a
                # rounding artefact would cycle forever
                pos = 0
                for t in range(idx.size):
                    if idx[t] == j:
                        pos = t
                if s[pos] <= 0.0:
                    passive[j] = False
                    w[j] = 0.0
                    break
                first = False
            if np.min(s) > 0.0:
                x[:] = 0.0
                for t in range(idx.size):
                    x[idx[t]] = s[t]
                break
            alpha = np.inf
            blocking = -1
            for t in range(idx.size):
                if s[t] <= 0.0:
                    xi = x[idx[t]]
                    a = xi / (xi - s[t])
                    if a < alpha:
                        alpha = a
                        blocking = idx[t]
            for t in range(idx.size):
                i = idx[t]
                x[i] += alpha * (s[t] - x[i])
                if i == blocking or x[i] <= 0.0:
                    x[i] = 0.0
                    passive[i] = False
        if passive[j] or not first:
            w = A.T @ (b - A @ x)


@njit(cache=True)
def _kkt_normalized(G, c, x, lam):
    r = G @ x - c
    worst = 0.0
    for i in range(r.size):
        worst = max(worst, -r[i], -lam[i], abs(lam[i] * r[i]))
    stat = x - G.T @ lam
    for i in range(stat.size):
        worst = max(worst, abs(stat[i]))
    return worst


@njit(cache=True)
def _min_norm_qp_kernel(G, c, maxiter):
    """Returns (x, multipliers, kkt residual, status, farkas support)."""
    m, n = G.shape
    x = np.zeros(n)
    lam = np.zeros(m)
    support = np.zeros(m, dtype=np.bool_)
    norms = np.sqrt(np.sum(G * G, axis=1))
    Gn = np.zeros((m, n))
    cn = np.zeros(m)
    for i in range(m):
        if norms[i] > 0.0:
            Gn[i] = G[i] / norms[i]
            cn[i] = c[i] / norms[i]
        elif c[i] > 0.0:
            support[i] = True
            return x, lam, np.inf, _INFEASIBLE, support
    scale = np.max(cn)
    if scale <= 0.0:
        return x, lam, 0.0, _OK, support
    cn = cn / scale

    # least-distance programming: NNLS on [G^T; c^T] u ~ e_{n+1}
    E = np.empty((n + 1, m))
    E[:n, :] = Gn.T
    E[n, :] = cn
    f = np.zeros(n + 1)
    f[n] = 1.0
    u, status = _nnls_kernel(E, f, maxiter)
    denom = 1.0 - cn @ u
    if denom <= 1.0 / INFEASIBLE_SCALE:
        for i in range(m):
            support[i] = u[i] > 0.0
        return x, lam, np.inf, _INFEASIBLE, support
    lam_n = u / denom
    x_n = Gn.T @ lam_n
    resid = _kkt_normalized(Gn, cn, x_n, lam_n)

    # polish on the detected active set
    act = np.nonzero(lam_n > 0.0)[0]
    if act.size > 0:
        Ga = np.ascontiguousarray(Gn[act])
        xp = np.linalg.lstsq(Ga, np.ascontiguousarray(cn[act]))[0]
        mu = np.linalg.lstsq(np.ascontiguousarray(Ga.T), xp)[0]
        lam_p = np.zeros(m)
        for t in range(act.size):
            lam_p[act[t]] = mu[t]
        resid_p = _kkt_normalized(Gn, cn, xp, lam_p)
        if resid_p < resid:
            x_n, lam_n, resid = xp, lam_p, resid_p

    x = x_n * scale
    for i in range(m):
        if norms[i] > 0.0:
            lam[i] = lam_n[i] * scale / norms[i]
    return x, lam, resid, status, support


@njit(cache=True)
def _min_norm_qp_many(Gs, cs, maxiter):
    B, m, n = Gs.shape
    xs = np.zeros((B, n))
    lams = np.zeros((B, m))
    resids = np.zeros(B)
    status = np.zeros(B, dtype=np.int64)
    for i in range(B):
        x, lam, r, st, _ = _min_norm_qp_kernel(
            np.ascontiguousarray(Gs[i]), np.ascontiguousarray(cs[i]), maxiter
        )
        xs[i] = x
        lams[i] = lam
        resids[i] = r
        status[i] = st
    return xs, lams, resids, status


# ---------------------------------------------------------------------------
# public surface
# ---------------------------------------------------------------------------


def nnls(A, b):
    """Solve ``min ||A x - b||_2`` subject to ``x >= 0``.

    Lawson-Hanson active set method with lowest-index tie-breaking and an
    iteration cap of ``50 (m + n)`` inner steps.

    Raises
    ------
    InvalidArgument
        Non-finite or mis-shaped input.
    ConvergenceFailure
        Iteration cap exceeded; ``exc.best`` holds the last iterate.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1 or b.shape != (A.shape[0],):
        raise InvalidArgument(f"incompatible shapes A{A.shape} b{b.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise InvalidArgument("nnls input contains non-finite entries")
    m, n = A.shape
    x, status = _nnls_kernel(np.ascontiguousarray(A), np.ascontiguousarray(b),
                             NNLS_ITER_FACTOR * (m + n))
    if status == _MAXITER:
        raise ConvergenceFailure("nnls iteration cap exceeded", best=x)
    return x


def _raise_for_status(status, resid, x, support, context=""):
    if status == _INFEASIBLE:
        rows = np.nonzero(support)[0]
        raise InfeasibleError(f"constraint system is infeasible{context}; "
                              f"conflicting rows {rows.tolist()}", rows=rows)
    if status == _MAXITER:
        raise ConvergenceFailure(f"minimum-norm QP hit the NNLS cap{context}", best=x)
    if resid > KKT_CAP:
        raise ConvergenceFailure(
            f"minimum-norm QP KKT residual {resid:.3e} above {KKT_CAP:g}{context}", best=x)


def solve_min_norm_qp(sys: RealSystem) -> QpSolution:
    """Minimum-norm point of ``{x : G x >= c}``.

    The system is row-normalised and rescaled so that tolerances are
    independent of the physical units; the returned ``kkt_residual`` is
    measured in those normalised units.
    """
    m, n = sys.shape
    x, lam, resid, status, support = _min_norm_qp_kernel(
        sys.G, sys.c, NNLS_ITER_FACTOR * (m + n + 1))
    _raise_for_status(status, resid, x, support)
    return QpSolution(x=x, multipliers=lam, power=float(x @ x), kkt_residual=float(resid))


def solve_min_norm_qp_many(Gs, cs):
    """Batched ``solve_min_norm_qp`` over a stack of equally sized systems.

    Returns ``(xs, multipliers, kkt_residuals)``.
    """
    Gs = np.ascontiguousarray(Gs, dtype=float)
    cs = np.ascontiguousarray(cs, dtype=float)
    _, m, n = Gs.shape
    xs, lams, resids, status = _min_norm_qp_many(Gs, cs, NNLS_ITER_FACTOR * (m + n + 1))
    bad = np.nonzero((status != _OK) | (resids > KKT_CAP))[0]
    if bad.size:
        i = int(bad[0])
        _, _, _, st, support = _min_norm_qp_kernel(Gs[i], cs[i], NNLS_ITER_FACTOR * (m + n + 1))
        _raise_for_status(st, resids[i], xs[i], support, context=f" (system {i})")
    return xs, lams, resids


def kkt_certificate(sys: RealSystem, sol: QpSolution) -> float:
    """Largest violation of primal feasibility, dual sign, stationarity and
    complementary slackness, with every row scaled to unit norm."""
    m, n = sys.shape
    x = np.asarray(sol.x, dtype=float)
    lam = np.asarray(sol.multipliers, dtype=float)
    if x.shape != (n,) or lam.shape != (m,):
        raise InvalidArgument(
            f"solution shapes x{x.shape} multipliers{lam.shape} do not match system {m}x{n}")
    norms = np.linalg.norm(sys.G, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    Gn = sys.G / safe[:, None]
    cn = sys.c / safe
    return float(_kkt_normalized(Gn, cn, x, lam * norms))


def right_pseudo_inverse(heff, rcond=1e-12):
    """``W = H^H (H H^H)^{-1}`` so that ``H W = I`` for a wide channel ``H``."""
    H = np.atleast_2d(np.asarray(heff, dtype=complex))
    K, M = H.shape
    if K > M:
        raise SingularChannelError(f"zero forcing needs K <= M, got K={K}, M={M}")
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[0] == 0 or sv[-1] / sv[0] < rcond:
        raise SingularChannelError("channel matrix is rank deficient")
    Hh = H.conj().T
    return Hh @ np.linalg.solve(H @ Hh, np.eye(K))
