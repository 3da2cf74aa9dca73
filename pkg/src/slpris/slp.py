"""Constructive-interference symbol-level precoding for rotated QPSK.

For a target symbol ``t`` the noiseless received sample ``y = h x`` must lie
in ``t``'s quadrant, beyond the scaled constellation point::

    Re(y) / Re(t) >= s    and    Im(y) / Im(t) >= s

Each condition is one real row over the stacked transmit vector
``(Re x, Im x)``, which gives ``2K`` rows per symbol slot.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, UnsupportedConstellation
from .numerics import RealSystem, solve_min_norm_qp, solve_min_norm_qp_many

QPSK = np.exp(1j * np.pi / 4 * np.array([1, 3, 5, 7]))


@dataclass(frozen=True)
class SymbolBlock:
    data: np.ndarray  # (L, K)
    rotations: np.ndarray  # (K,)
    psi: int = 4

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data, dtype=complex))
        rotations = np.atleast_1d(np.asarray(self.rotations, dtype=float))
        if rotations.shape != (data.shape[1],):
            raise InvalidArgument(
                f"need one rotation per user: data has {data.shape[1]} users, "
                f"got {rotations.size} rotations")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "rotations", rotations)

    @classmethod
    def random(cls, L, K, rng, rotations=None):
        data = QPSK[rng.integers(0, 4, size=(L, K))]
        return cls(data, np.zeros(K) if rotations is None else rotations)

    @property
    def L(self):
        return self.data.shape[0]

    @property
    def K(self):
        return self.data.shape[1]

    def with_rotations(self, rotations):
        return SymbolBlock(self.data, rotations, self.psi)


@dataclass(frozen=True)
class QosTargets:
    """Per-user scaling ``s_k`` (noise std times square-root SINR target)."""

    s: np.ndarray

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.s, dtype=float))
        if np.any(s <= 0) or not np.all(np.isfinite(s)):
            raise InvalidArgument("QoS scaling must be positive and finite")
        object.__setattr__(self, "s", s)

    @classmethod
    def uniform(cls, K, value):
        return cls(np.full(K, float(value)))


@dataclass(frozen=True)
class PrecoderBlock:
    x: np.ndarray  # (M, L)
    total_power: float

    @classmethod
    def from_columns(cls, x):
        x = np.asarray(x, dtype=complex)
        return cls(x, block_power(x))


def rotation_grid(psi=4):
    return 2 * np.pi * np.arange(psi) / psi


def rotate_symbols(block: SymbolBlock) -> np.ndarray:
    """Effective targets ``exp(-j phi_k) d_k[l]``, shape (L, K)."""
    return block.data * np.exp(-1j * block.rotations)[None, :]


def _check_targets(targets):
    scale = np.abs(targets)
    if np.any(np.abs(targets.real) <= 1e-12 * scale) or np.any(np.abs(targets.imag) <= 1e-12 * scale):
        raise UnsupportedConstellation(
            "target symbol on a decision boundary (zero real or imaginary part); "
            "only quadrant regions (QPSK with quarter-turn rotations) are supported")


def _ci_rows(h, targets, s):
    """Stacked constraint rows; ``h`` (K, M), ``targets`` (..., K)."""
    K, M = h.shape
    sr = np.sign(targets.real)[..., None]
    si = np.sign(targets.imag)[..., None]
    row_re = np.concatenate([np.broadcast_to(h.real, targets.shape + (M,)),
                             np.broadcast_to(-h.imag, targets.shape + (M,))], axis=-1)
    row_im = np.concatenate([np.broadcast_to(h.imag, targets.shape + (M,)),
                             np.broadcast_to(h.real, targets.shape + (M,))], axis=-1)
    G = np.stack([sr * row_re, si * row_im], axis=-2)  # (..., K, 2, 2M)
    c = np.stack([s * np.abs(targets.real), s * np.abs(targets.imag)], axis=-1)
    lead = targets.shape[:-1]
    return G.reshape(lead + (2 * K, 2 * M)), c.reshape(lead + (2 * K,))


def ci_system(h, targets, qos: QosTargets) -> RealSystem:
    """Rows ``2k`` / ``2k+1`` carry user ``k``'s real / imaginary condition."""
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    if targets.shape != (h.shape[0],) or qos.s.shape != (h.shape[0],):
        raise InvalidArgument("channel rows, targets and QoS must agree on K")
    _check_targets(targets)
    G, c = _ci_rows(h, targets, qos.s)
    return RealSystem(G, c)


def solve_symbol_precoder(h, targets, qos: QosTargets):
    """Minimum-power transmit vector for one slot; returns ``(x, power)``."""
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    M = h.shape[1]
    sol = solve_min_norm_qp(ci_system(h, targets, qos))
    x = sol.x[:M] + 1j * sol.x[M:]
    return x, sol.power


def solve_block(heff, targets, qos: QosTargets) -> PrecoderBlock:
    """Solve every slot of a block under one effective channel.

    ``targets`` is (L, K); slots are independent problems solved in order.
    """
    h = np.atleast_2d(np.asarray(heff, dtype=complex))
    targets = np.atleast_2d(np.asarray(targets, dtype=complex))
    K, M = h.shape
    if targets.shape[1] != K or qos.s.shape != (K,):
        raise InvalidArgument("channel rows, targets and QoS must agree on K")
    _check_targets(targets)
    G, c = _ci_rows(h, targets, qos.s)
    xs, _, _ = solve_min_norm_qp_many(G, c)
    return PrecoderBlock.from_columns((xs[:, :M] + 1j * xs[:, M:]).T)


def block_power(X) -> float:
    x = X.x if isinstance(X, PrecoderBlock) else np.asarray(X)
    return float(np.sum(np.abs(x) ** 2))
