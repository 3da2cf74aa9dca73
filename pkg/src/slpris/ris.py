"""RIS phase design for fixed precoders.

With the precoders of a block held fixed, the received sample of user ``k``
in slot ``l`` is affine in each unit-modulus coefficient ``exp(j theta_n)``.
The phases are chosen to maximise the summed QoS margin

    sum_{l,k} min(Re(y_lk) / Re(t_lk), Im(y_lk) / Im(t_lk))

by cyclic coordinate ascent: each coordinate is searched on a uniform grid,
refined by golden section around the best grid point, and only accepted when
it strictly improves the sum.

The summed minimum is nonsmooth, and at points where a margin's two pieces
are equal no single coordinate may be able to improve it. Each sweep is
therefore followed by joint moves along the steepest-ascent direction (the
minimum-norm element of the generalised gradient), again accepted only on
strict improvement.
"""

import numpy as np
from numba import njit

from .channel import ChannelSet, PhaseConfig, effective_channel
from .config import AscentOptions
from .errors import InvalidArgument
from .slp import PrecoderBlock


@njit(cache=True)
def _search_1d(fun, payload, grid_points, refine_tol):
    """Maximise a 2*pi-periodic scalar function; returns ``(theta, value)``."""
    two_pi = 2.0 * np.pi
    inv_golden = (np.sqrt(5.0) - 1.0) / 2.0
    step = two_pi / grid_points
    best_t = 0.0
    best_v = -np.inf
    for g in range(grid_points):
        t = g * step
        v = fun(t, payload)
        if v > best_v:
            best_v = v
            best_t = t
    lo = best_t - step
    hi = best_t + step
    x1 = hi - inv_golden * (hi - lo)
    x2 = lo + inv_golden * (hi - lo)
    f1 = fun(x1, payload)
    f2 = fun(x2, payload)
    while hi - lo > refine_tol:
        if f1 >= f2:
            hi = x2
            x2 = x1
            f2 = f1
            x1 = hi - inv_golden * (hi - lo)
            f1 = fun(x1, payload)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            x2 = lo + inv_golden * (hi - lo)
            f2 = fun(x2, payload)
    if f1 > best_v:
        best_v = f1
        best_t = x1
    if f2 > best_v:
        best_v = f2
        best_t = x2
    best_t = best_t % two_pi
    if best_t >= two_pi:
        best_t = 0.0
    return best_t, best_v


@njit(cache=True)
def _sum_margins(y, inv_re, inv_im):
    total = 0.0
    for p in range(y.size):
        zr = y[p].real * inv_re[p]
        zi = y[p].imag * inv_im[p]
        total += zr if zr < zi else zi
    return total


@njit(cache=True)
def _margin_objective(t, payload):
    a, b, inv_re, inv_im = payload
    e = np.exp(1j * t)
    total = 0.0
    for p in range(a.size):
        y = a[p] + b[p] * e
        zr = y.real * inv_re[p]
        zi = y.imag * inv_im[p]
        total += zr if zr < zi else zi
    return total


# grid points of the line search along an escape direction
_LINE_GRID = 16


@njit(cache=True)
def _box_min_norm(g0, D, sweeps):
    """Minimum-norm point of ``{g0 + D^T w : 0 <= w <= 1}`` by exact coordinate descent."""
    g = g0.copy()
    w = np.zeros(D.shape[0])
    for _ in range(sweeps):
        change = 0.0
        for i in range(D.shape[0]):
            nn = D[i] @ D[i]
            if nn == 0.0:
                continue
            wi = min(1.0, max(0.0, w[i] - (D[i] @ g) / nn))
            if wi != w[i]:
                g += (wi - w[i]) * D[i]
                change = max(change, abs(wi - w[i]))
                w[i] = wi
        if change < 1e-9:
            break
    return g


@njit(cache=True)
def _ascent_direction(terms, total, inv_re, inv_im, kink_tol):
    """Steepest-ascent direction of the summed margin at a possibly nonsmooth point.

    ``terms[n] = exp(j theta_n) * cascade[n]``. Margins whose two pieces agree to
    ``kink_tol`` (relative) contribute the whole segment between both gradients;
    the direction is the minimum-norm element of the resulting set.
    """
    N, P = terms.shape
    g0 = np.zeros(N)
    kinked = np.zeros(P, dtype=np.bool_)
    for p in range(P):
        u = total[p].real * inv_re[p]
        v = total[p].imag * inv_im[p]
        if abs(u - v) <= kink_tol * (abs(u) + abs(v)):
            kinked[p] = True
    D = np.empty((kinked.sum(), N))
    for n in range(N):
        col = 0
        for p in range(P):
            gu = -terms[n, p].imag * inv_re[p]
            gv = terms[n, p].real * inv_im[p]
            if kinked[p]:
                g0[n] += gv
                D[col, n] = gu - gv
                col += 1
            elif total[p].real * inv_re[p] < total[p].imag * inv_im[p]:
                g0[n] += gu
            else:
                g0[n] += gv
    return _box_min_norm(g0, D, 50)


@njit(cache=True)
def _along(t, terms, direct, dirn, inv_re, inv_im):
    y = direct.copy()
    for n in range(terms.shape[0]):
        y += terms[n] * np.exp(1j * t * dirn[n])
    return _sum_margins(y, inv_re, inv_im)


@njit(cache=True)
def _line_search(terms, direct, dirn, inv_re, inv_im, grid_points, refine_tol):
    """Best step ``t`` in (0, pi] along ``dirn``; returns ``(t, value)``."""
    inv_golden = (np.sqrt(5.0) - 1.0) / 2.0
    step = np.pi / grid_points
    best_g = 1
    best_v = -np.inf
    for g in range(1, grid_points + 1):
        v = _along(g * step, terms, direct, dirn, inv_re, inv_im)
        if v > best_v:
            best_v = v
            best_g = g
    best_t = best_g * step
    lo = (best_g - 1) * step
    hi = min(best_g + 1, grid_points) * step
    x1 = hi - inv_golden * (hi - lo)
    x2 = lo + inv_golden * (hi - lo)
    f1 = _along(x1, terms, direct, dirn, inv_re, inv_im)
    f2 = _along(x2, terms, direct, dirn, inv_re, inv_im)
    while hi - lo > refine_tol:
        if f1 >= f2:
            hi = x2
            x2 = x1
            f2 = f1
            x1 = hi - inv_golden * (hi - lo)
            f1 = _along(x1, terms, direct, dirn, inv_re, inv_im)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            x2 = lo + inv_golden * (hi - lo)
            f2 = _along(x2, terms, direct, dirn, inv_re, inv_im)
    if f1 > best_v:
        best_v = f1
        best_t = x1
    if f2 > best_v:
        best_v = f2
        best_t = x2
    return best_t, best_v


# takes a jitted objective as argument, which numba cannot cache
@njit
def _phase_ascent(direct, cascade, inv_re, inv_im, theta0,
                  grid_points, refine_tol, max_passes, rel_tol, max_escapes, kink_tol):
    N = cascade.shape[0]
    theta = theta0.copy()
    total = direct.copy()
    for n in range(N):
        total += np.exp(1j * theta[n]) * cascade[n]
    f = _sum_margins(total, inv_re, inv_im)
    trace = np.empty(1 + (N + max_escapes) * max_passes)
    trace[0] = f
    t = 1
    terms = np.empty_like(cascade)
    for _ in range(max_passes):
        f_start = f
        for n in range(N):
            b = cascade[n]
            if np.all(b == 0):
                trace[t] = f
                t += 1
                continue
            a = total - np.exp(1j * theta[n]) * b
            cand, _v = _search_1d(_margin_objective, (a, b, inv_re, inv_im),
                                  grid_points, refine_tol)
            new_total = a + np.exp(1j * cand) * b
            v = _sum_margins(new_total, inv_re, inv_im)
            if v > f:
                theta[n] = cand
                total = new_total
                f = v
            trace[t] = f
            t += 1
        if f - f_start > rel_tol * abs(f_start):
            continue
        # the sweep stalled: try joint moves out of kinks where no single
        # coordinate can improve
        f_sweep = f
        for _e in range(max_escapes):
            for n in range(N):
                terms[n] = np.exp(1j * theta[n]) * cascade[n]
            g = _ascent_direction(terms, total, inv_re, inv_im, kink_tol)
            gmax = np.max(np.abs(g))
            if gmax <= 1e-12 * (1.0 + abs(f)):
                break
            dirn = g / gmax
            step, _v = _line_search(terms, direct, dirn, inv_re, inv_im, _LINE_GRID, refine_tol)
            new_theta = (theta + step * dirn) % (2.0 * np.pi)
            new_total = direct.copy()
            for n in range(N):
                new_total += np.exp(1j * new_theta[n]) * cascade[n]
            v = _sum_margins(new_total, inv_re, inv_im)
            if not v > f:
                break
            theta = new_theta
            total = new_total
            f = v
            trace[t] = f
            t += 1
        if f == f_sweep:
            break
    return theta, trace[:t]


def _precoder_matrix(X):
    return X.x if isinstance(X, PrecoderBlock) else np.atleast_2d(np.asarray(X, dtype=complex))


def _received_parts(ch: ChannelSet, X, beta):
    """Direct term (L, K) and per-element cascaded terms (N, L, K)."""
    x = _precoder_matrix(X)
    direct = (ch.direct @ x).T
    cascade = beta * (ch.bs_ris @ x)[:, :, None] * ch.ris_user.T[:, None, :]
    return direct, cascade


def margins(ch: ChannelSet, phase: PhaseConfig, X, targets) -> np.ndarray:
    """QoS margin table ``z`` of shape (L, K): the largest scaling of each
    target that the received sample still satisfies."""
    x = _precoder_matrix(X)
    targets = np.atleast_2d(np.asarray(targets, dtype=complex))
    if x.shape[0] != ch.M or targets.shape != (x.shape[1], ch.K):
        raise InvalidArgument(
            f"precoder {x.shape} and targets {targets.shape} do not match M={ch.M}, K={ch.K}")
    y = (effective_channel(ch, phase) @ x).T
    return np.minimum(y.real / targets.real, y.imag / targets.imag)


def phase_profile(ch: ChannelSet, phase: PhaseConfig, X, k, l, n):
    """Coefficients ``(a, b)`` with ``h_k(theta) x[l] = a + b exp(j theta_n)``."""
    if not 0 <= n < ch.N:
        raise InvalidArgument(f"RIS element index {n} out of range for N={ch.N}")
    if not 0 <= k < ch.K:
        raise InvalidArgument(f"user index {k} out of range for K={ch.K}")
    x = _precoder_matrix(X)
    if not 0 <= l < x.shape[1]:
        raise InvalidArgument(f"slot index {l} out of range for L={x.shape[1]}")
    xl = x[:, l]
    hx = ch.bs_ris @ xl
    terms = phase.beta * ch.ris_user[k] * hx
    others = np.exp(1j * phase.theta) * terms
    a = ch.direct[k] @ xl + (others.sum() - others[n])
    return complex(a), complex(terms[n])


def optimize_phases(ch: ChannelSet, X, targets, theta_init: PhaseConfig,
                    opts: AscentOptions = AscentOptions(), return_trace=False):
    """Coordinate ascent on the summed margin; never returns a worse point
    than ``theta_init``.

    With ``return_trace`` the summed margin after every coordinate update is
    returned as well (its first entry is the starting value).
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=complex))
    if theta_init.theta.shape != (ch.N,):
        raise InvalidArgument(f"initial phases have length {theta_init.theta.size}, "
                              f"RIS has {ch.N} elements")
    direct, cascade = _received_parts(ch, X, theta_init.beta)
    if targets.shape != direct.shape:
        raise InvalidArgument(f"targets {targets.shape} do not match (L, K) = {direct.shape}")
    P = direct.size
    theta, trace = _phase_ascent(
        np.ascontiguousarray(direct.ravel()),
        np.ascontiguousarray(cascade.reshape(ch.N, P)),
        np.ascontiguousarray(1.0 / targets.real.ravel()),
        np.ascontiguousarray(1.0 / targets.imag.ravel()),
        np.ascontiguousarray(theta_init.theta),
        opts.grid_points, opts.refine_tol, opts.max_passes, opts.rel_tol,
        opts.max_escapes, opts.kink_tol,
    )
    out = PhaseConfig(theta, theta_init.beta)
    if return_trace:
        return out, trace
    return out
