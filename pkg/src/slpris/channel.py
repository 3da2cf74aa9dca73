"""Street-canyon scenario: geometry, path loss, Rician fading and the
effective BS-to-user channel seen through the RIS.

Coordinates are metres. The BS sits at the origin with its uniform linear
array along the x-axis, the RIS is mounted on a facade ``ris_x_distance_m``
away with its array along the street (y-axis), and users stand on the street
axis (x = 0) at a uniformly random y.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

BS_AXIS = np.array([1.0, 0.0, 0.0])
RIS_AXIS = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class ScenarioGeometry:
    bs_position: np.ndarray
    ris_position: np.ndarray
    user_positions: np.ndarray  # (K, 3)
    wavelength: float
    element_spacing: float  # metres

    @property
    def num_users(self):
        return self.user_positions.shape[0]

    @property
    def spacing_over_wavelength(self):
        return self.element_spacing / self.wavelength


@dataclass(frozen=True)
class ChannelSet:
    """One channel realisation.

    ``direct`` is (K, M), ``bs_ris`` is (N, M) and ``ris_user`` is (K, N).
    """

    direct: np.ndarray
    bs_ris: np.ndarray
    ris_user: np.ndarray

    def __post_init__(self):
        direct = np.atleast_2d(np.asarray(self.direct, dtype=complex))
        K, M = direct.shape
        bs_ris = np.asarray(self.bs_ris, dtype=complex).reshape(-1, M)
        N = bs_ris.shape[0]
        ris_user = np.asarray(self.ris_user, dtype=complex).reshape(K, N)
        for name, arr in (("direct", direct), ("bs_ris", bs_ris), ("ris_user", ris_user)):
            if not np.all(np.isfinite(arr)):
                raise InvalidArgument(f"channel component {name} has non-finite entries")
        object.__setattr__(self, "direct", direct)
        object.__setattr__(self, "bs_ris", bs_ris)
        object.__setattr__(self, "ris_user", ris_user)

    @property
    def M(self):
        return self.direct.shape[1]

    @property
    def K(self):
        return self.direct.shape[0]

    @property
    def N(self):
        return self.bs_ris.shape[0]

    def without_ris(self):
        """The same realisation with the surface removed (direct links only)."""
        return ChannelSet(self.direct, np.zeros((0, self.M)), np.zeros((self.K, 0)))


@dataclass(frozen=True)
class PhaseConfig:
    theta: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        theta = np.mod(np.atleast_1d(np.asarray(self.theta, dtype=float)), 2 * np.pi)
        # mod can round up to exactly 2*pi for tiny negative inputs
        theta[theta >= 2 * np.pi] = 0.0
        if not 0.0 <= self.beta <= 1.0:
            raise InvalidArgument(f"reflection efficiency beta must lie in [0, 1], got {self.beta}")
        object.__setattr__(self, "theta", theta)

    @classmethod
    def identity(cls, n, beta=1.0):
        return cls(np.zeros(n), beta)

    @property
    def reflection(self):
        """Diagonal of the reflection matrix, ``beta * exp(j theta)``."""
        return self.beta * np.exp(1j * self.theta)


def path_loss_db(d, rho):
    """Distance-dependent path-loss gain ``-30 - 10 rho log10(d)`` in dB."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise InvalidArgument(f"link distance must be positive, got {d}")
    if rho <= 0:
        raise InvalidArgument(f"path-loss exponent must be positive, got {rho}")
    out = -30.0 - 10.0 * rho * np.log10(d)
    return float(out) if out.ndim == 0 else out


def path_loss_amplitude(d, rho):
    return np.sqrt(10.0 ** (path_loss_db(d, rho) / 10.0))


def build_geometry(params, rng):
    """Place BS, RIS and ``params.K`` users; consumes ``K`` uniforms from ``rng``."""
    K = params.num_users
    if K < 1:
        raise InvalidArgument("at least one user is required")
    bs = np.array([0.0, 0.0, params.bs_height_m])
    ris = np.array([params.ris_x_distance_m, 0.0, params.ris_height_m])
    y = rng.uniform(params.user_y_min_m, params.user_y_max_m, size=K)
    users = np.column_stack([np.zeros(K), y, np.full(K, params.user_height_m)])
    wavelength = params.wavelength
    return ScenarioGeometry(bs, ris, users, wavelength,
                            params.element_spacing_wavelengths * wavelength)


def ula_response(angle, count, spacing_over_wavelength):
    """Uniform linear array response ``exp(j 2 pi s n sin(angle))``, n = 0..count-1."""
    n = np.arange(count)
    return np.exp(2j * np.pi * spacing_over_wavelength * n * np.sin(angle))


def _angle(src, dst, axis):
    # angle off broadside, from the projection of the direction on the array axis
    u = (dst - src) / np.linalg.norm(dst - src)
    return float(np.arcsin(np.clip(u @ axis, -1.0, 1.0)))


def draw_rician(rows, cols, eta, los, rng):
    """``sqrt(eta/(1+eta)) los + sqrt(1/(1+eta)) w`` with ``w`` i.i.d. CN(0, 1)."""
    los = np.asarray(los, dtype=complex)
    if los.shape != (rows, cols):
        raise InvalidArgument(f"LOS component has shape {los.shape}, expected {(rows, cols)}")
    if eta < 0:
        raise InvalidArgument(f"Rician factor must be non-negative, got {eta}")
    w = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    return np.sqrt(eta / (1 + eta)) * los + np.sqrt(1 / (1 + eta)) * w


def draw_scene_channels(geometry, params, rng):
    """Draw all links of one realisation.

    Direct links are drawn first so that they do not depend on the RIS size:
    sweeping N leaves the no-RIS schemes on identical channels.
    """
    M, N, K = params.num_bs_antennas, params.num_ris_elements, geometry.num_users
    s = geometry.spacing_over_wavelength
    eta = params.rician_factor
    bs, ris = geometry.bs_position, geometry.ris_position

    direct = np.empty((K, M), dtype=complex)
    for k, user in enumerate(geometry.user_positions):
        los = ula_response(_angle(bs, user, BS_AXIS), M, s)[None, :]
        direct[k] = path_loss_amplitude(np.linalg.norm(user - bs), params.pathloss_exponent_bs_user) * \
            draw_rician(1, M, eta, los, rng)[0]

    if N == 0:
        return ChannelSet(direct, np.zeros((0, M), dtype=complex), np.zeros((K, 0), dtype=complex))

    los = np.outer(ula_response(_angle(ris, bs, RIS_AXIS), N, s),
                   ula_response(_angle(bs, ris, BS_AXIS), M, s))
    bs_ris = path_loss_amplitude(np.linalg.norm(ris - bs), params.pathloss_exponent_bs_ris) * \
        draw_rician(N, M, eta, los, rng)
    ris_user = np.empty((K, N), dtype=complex)
    for k, user in enumerate(geometry.user_positions):
        los = ula_response(_angle(ris, user, RIS_AXIS), N, s)[None, :]
        ris_user[k] = path_loss_amplitude(np.linalg.norm(user - ris), params.pathloss_exponent_ris_user) * \
            draw_rician(1, N, eta, los, rng)[0]
    return ChannelSet(direct, bs_ris, ris_user)


def effective_channel(ch: ChannelSet, phase: PhaseConfig) -> np.ndarray:
    """Rows ``h_d,k + h_r,k diag(beta e^{j theta}) H``, shape (K, M)."""
    if phase.theta.shape != (ch.N,):
        raise InvalidArgument(f"phase vector has length {phase.theta.size}, RIS has {ch.N} elements")
    if ch.N == 0:
        return ch.direct.copy()
    return ch.direct + (ch.ris_user * phase.reflection) @ ch.bs_ris
