"""Experiment configuration and algorithm options.

``SweepConfig`` mirrors the flat JSON configuration file: every field name is
also the JSON key. Defaults reproduce the smart-city street scenario
(4 antennas, 4 users, 64 RIS elements, 2.4 GHz).
"""

from dataclasses import asdict, dataclass, field, fields, replace

from .errors import ConfigError

SCHEMES = (
    "proposed",
    "slp_finite_no_ris",
    "slp_conventional_ris",
    "slp_conventional_no_ris",
    "zf_ris",
    "zf_no_ris",
)
RIS_SCHEMES = ("proposed", "slp_conventional_ris", "zf_ris")
ZF_SCHEMES = ("zf_ris", "zf_no_ris")
ROTATION_SCHEMES = ("proposed", "slp_finite_no_ris")

SWEEP_AXES = ("block_length", "ris_elements", "users")
DEFAULT_SWEEP_VALUES = {
    "block_length": [8, 16, 32, 64],
    "ris_elements": [16, 32, 48, 64],
    "users": [2, 3, 4, 5],
}
# exhaustive rotation search enumerates 4**K combinations
MAX_ROTATION_USERS = 8
SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class AscentOptions:
    """Cyclic coordinate search over RIS phases (grid + golden section).

    After each sweep up to ``max_escapes`` joint moves along the steepest-ascent
    direction are tried; margins whose real and imaginary pieces agree to
    ``kink_tol`` (relative) are treated as nonsmooth when building it.
    """

    grid_points: int = 64
    refine_tol: float = 1e-6
    max_passes: int = 10
    rel_tol: float = 1e-4
    max_escapes: int = 3
    kink_tol: float = 1e-4


@dataclass(frozen=True)
class AlternationOptions:
    eps_conv: float = 1e-3
    max_iter: int = 20
    ascent: AscentOptions = field(default_factory=AscentOptions)


@dataclass(frozen=True)
class SweepConfig:
    num_bs_antennas: int = 4
    num_users: int = 4
    num_ris_elements: int = 64
    block_length: int = 8
    carrier_frequency_hz: float = 2.4e9
    bs_height_m: float = 3.0
    user_height_m: float = 1.5
    ris_height_m: float = 3.0
    ris_x_distance_m: float = 3.0
    user_y_min_m: float = 20.0
    user_y_max_m: float = 40.0
    element_spacing_wavelengths: float = 0.5
    pathloss_exponent_bs_ris: float = 2.3
    pathloss_exponent_ris_user: float = 2.6
    pathloss_exponent_bs_user: float = 2.6
    rician_factor_db: float = 10.0
    qos_scale: float = 1e-7
    realizations: int = 100
    blocks_per_realization: int = 10
    sweep_axis: str = "block_length"
    sweep_values: tuple = (8, 16, 32, 64)
    seed: int = 0
    schemes: tuple = SCHEMES

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "schemes", tuple(self.schemes))

    # short algebraic names used throughout the numerics
    @property
    def M(self):
        return self.num_bs_antennas

    @property
    def K(self):
        return self.num_users

    @property
    def N(self):
        return self.num_ris_elements

    @property
    def L(self):
        return self.block_length

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_frequency_hz

    @property
    def rician_factor(self):
        return 10.0 ** (self.rician_factor_db / 10.0)

    def at(self, value):
        """Copy of this configuration with the sweep axis set to ``value``."""
        key = {"block_length": "block_length",
               "ris_elements": "num_ris_elements",
               "users": "num_users"}[self.sweep_axis]
        return replace(self, **{key: int(value)})

    def to_dict(self):
        d = asdict(self)
        d["sweep_values"] = list(self.sweep_values)
        d["schemes"] = list(self.schemes)
        return d

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}",
                              field=unknown[0])
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        ints = {
            "num_bs_antennas": "M", "num_users": "K", "block_length": "L",
            "realizations": None, "blocks_per_realization": None,
        }
        for name, symbol in ints.items():
            v = getattr(self, name)
            label = f"{name} ({symbol})" if symbol else name
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{label} must be an integer >= 1, got {v!r}", field=name)
        n = self.num_ris_elements
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise ConfigError(f"num_ris_elements (N) must be an integer >= 0, got {n!r}",
                              field="num_ris_elements")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}",
                              field="seed")
        positive = ("carrier_frequency_hz", "qos_scale", "element_spacing_wavelengths",
                    "pathloss_exponent_bs_ris", "pathloss_exponent_ris_user",
                    "pathloss_exponent_bs_user", "ris_x_distance_m")
        for name in positive:
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"{name} must be a positive number, got {v!r}", field=name)
        for name in ("bs_height_m", "user_height_m", "ris_height_m", "rician_factor_db",
                     "user_y_min_m", "user_y_max_m"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{name} must be a number, got {v!r}", field=name)
        if not 0 < self.user_y_min_m <= self.user_y_max_m:
            raise ConfigError("user_y_min_m must be positive and <= user_y_max_m",
                              field="user_y_min_m")
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}",
                              field="sweep_axis")
        if not self.sweep_values:
            raise ConfigError("sweep_values must not be empty", field="sweep_values")
        floor = 0 if self.sweep_axis == "ris_elements" else 1
        for v in self.sweep_values:
            if isinstance(v, bool) or not isinstance(v, int) or v < floor:
                raise ConfigError(f"sweep_values entries must be integers >= {floor} "
                                  f"for axis {self.sweep_axis}, got {v!r}", field="sweep_values")
        if not self.schemes:
            raise ConfigError("schemes must not be empty", field="schemes")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}; expected one of {SCHEMES}",
                                  field="schemes")
        users = self.user_counts()
        if any(s in ROTATION_SCHEMES for s in self.schemes) and max(users) > MAX_ROTATION_USERS:
            raise ConfigError(
                f"num_users (K) = {max(users)} exceeds {MAX_ROTATION_USERS}: rotation search "
                f"would enumerate 4**K combinations", field="num_users")

    def user_counts(self):
        if self.sweep_axis == "users":
            return list(self.sweep_values)
        return [self.num_users]

    def zf_overloaded(self):
        """True when some sweep point has more users than antennas for ZF."""
        return (any(s in ZF_SCHEMES for s in self.schemes)
                and max(self.user_counts()) > self.num_bs_antennas)

