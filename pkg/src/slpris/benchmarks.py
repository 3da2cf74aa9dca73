"""Comparison schemes: zero forcing and conventional SLP, with and without
the RIS, plus the finite-block rotation search without the RIS."""

import numpy as np
from numba import njit

from .channel import ChannelSet, PhaseConfig, effective_channel
from .config import SCHEMES, AlternationOptions, AscentOptions
from .errors import InvalidArgument, SingularChannelError
from .numerics import right_pseudo_inverse
from .orchestrator import alternate_block, rotation_search
from .ris import _search_1d
from .slp import QosTargets, SymbolBlock, block_power, solve_block


def zf_block(heff, targets, qos: QosTargets):
    """ZF transmit vectors ``W (s * d)`` for a block of targets (L, K).

    Returns ``(X, power)`` with X of shape (M, L).
    """
    heff = np.atleast_2d(np.asarray(heff, dtype=complex))
    targets = np.atleast_2d(np.asarray(targets, dtype=complex))
    W = right_pseudo_inverse(heff)
    X = W @ (qos.s[:, None] * targets.T)
    return X, block_power(X)


@njit(cache=True)
def _neg_zf_power(t, payload):
    A, B, S = payload
    H = A + np.exp(1j * t) * B
    gram = H @ H.conj().T
    return -np.real(np.trace(np.linalg.solve(gram, S)))


# takes a jitted objective as argument, which numba cannot cache
@njit
def _zf_phase_descent(direct, rows, cols, S, theta0, grid_points, refine_tol,
                      max_passes, rel_tol):
    # effective channel = direct + sum_n e^{j theta_n} rows[:, n] cols[n, :]
    N = cols.shape[0]
    theta = theta0.copy()
    H = direct.copy()
    for n in range(N):
        H += np.exp(1j * theta[n]) * np.outer(rows[:, n], cols[n])
    p = _neg_zf_power(0.0, (H, np.zeros_like(H), S))
    trace = np.empty(1 + N * max_passes)
    trace[0] = -p
    t = 1
    for _ in range(max_passes):
        p_start = p
        for n in range(N):
            B = np.outer(rows[:, n], cols[n])
            if np.all(B == 0):
                trace[t] = -p
                t += 1
                continue
            A = H - np.exp(1j * theta[n]) * B
            cand, _v = _search_1d(_neg_zf_power, (A, B, S), grid_points, refine_tol)
            new_H = A + np.exp(1j * cand) * B
            v = _neg_zf_power(0.0, (new_H, np.zeros_like(new_H), S))
            if v > p:
                theta[n] = cand
                H = new_H
                p = v
            trace[t] = -p
            t += 1
        if p - p_start <= rel_tol * abs(p_start):
            break
    return theta, trace[:t]


def zf_phase_design(ch: ChannelSet, targets, qos: QosTargets, theta0: PhaseConfig,
                    opts: AscentOptions = AscentOptions(), return_trace=False):
    """Coordinate descent on the block ZF power ``sum_l ||W(theta) (s * d_l)||^2``.

    Uses ``||W v||^2 = v^H (H H^H)^{-1} v`` so each evaluation is a K x K solve.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=complex))
    if ch.K > ch.M:
        raise SingularChannelError(f"zero forcing needs K <= M, got K={ch.K}, M={ch.M}")
    v = qos.s[None, :] * targets
    S = v.T @ v.conj()  # sum_l v_l v_l^H
    # probe the start point for rank deficiency before entering compiled code
    right_pseudo_inverse(effective_channel(ch, theta0))
    theta, trace = _zf_phase_descent(
        np.ascontiguousarray(ch.direct),
        np.ascontiguousarray(theta0.beta * ch.ris_user),
        np.ascontiguousarray(ch.bs_ris),
        np.ascontiguousarray(S),
        np.ascontiguousarray(theta0.theta),
        opts.grid_points, opts.refine_tol, opts.max_passes, opts.rel_tol,
    )
    out = PhaseConfig(theta, theta0.beta)
    return (out, trace) if return_trace else out


def zf_with_ris(ch: ChannelSet, data, qos: QosTargets, theta0: PhaseConfig = None,
                opts: AscentOptions = AscentOptions(), return_phase=False):
    data = np.atleast_2d(np.asarray(data, dtype=complex))
    if theta0 is None:
        theta0 = PhaseConfig.identity(ch.N)
    theta = zf_phase_design(ch, data, qos, theta0, opts) if ch.N else theta0
    _, power = zf_block(effective_channel(ch, theta), data, qos)
    return (power, theta) if return_phase else power


def run_scheme(scheme, ch: ChannelSet, data, qos: QosTargets,
               opts: AlternationOptions = AlternationOptions()):
    """Block transmit power of one scheme on one channel/symbol block."""
    data = np.atleast_2d(np.asarray(data, dtype=complex))
    K = data.shape[1]
    zero = np.zeros(K)
    if scheme == "proposed":
        return rotation_search(ch, data, qos, opts).power
    if scheme == "slp_finite_no_ris":
        return rotation_search(ch.without_ris(), data, qos, opts).power
    if scheme == "slp_conventional_ris":
        return alternate_block(ch, SymbolBlock(data, zero), PhaseConfig.identity(ch.N),
                               qos, opts).power
    if scheme == "slp_conventional_no_ris":
        return solve_block(ch.direct, data, qos).total_power
    if scheme == "zf_ris":
        return zf_with_ris(ch, data, qos, opts=opts.ascent)
    if scheme == "zf_no_ris":
        return zf_block(ch.direct, data, qos)[1]
    raise InvalidArgument(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
