"""Kinematics of the reconfigurable spring-pair elastic element.

Two coaxial plates are coupled by ``pairs`` identical pairs of linear
tension springs hitched at radius ``r1`` on the inner plate and ``r2`` on
the outer plate.  The outer radius is sized by the installed pre-tension,
``r2 = r1 + l0 + pretension``.  Each spring of a pair may be hitched with
an angular offset at the neutral position, which shapes the
torque-deflection law (hardening, linear or softening).

All quantities are SI internally (m, rad, N, N*m).  Degrees and
millimetres appear only at serialization boundaries.

Every function here is pure and accepts either scalars or numpy arrays
for the deflection argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

# Minimum installed pre-tension keeps every spring taut at rest so the
# element never goes completely slack (zero local stiffness).
MIN_PRETENSION = 0.5e-3

# Prototype defaults: 20 kN/m tension springs, 28.5 mm rest length,
# 24.5 mm inner hitching radius, 31.4 deg structural deflection stop.
DEFAULT_SPRING_STIFFNESS = 20e3
DEFAULT_REST_LENGTH = 28.5e-3
DEFAULT_MAX_EXTENSION = 6.5e-3
DEFAULT_INNER_RADIUS = 24.5e-3
DEFAULT_MAX_DEFLECTION = math.radians(31.4)
DEFAULT_PAIR_COUNT = 6


class TorqueRangeError(ValueError):
    """Requested torque lies outside the reachable working space."""


class UnsupportedConfigError(ValueError):
    """Torque profile is not monotone, so the inverse is ill-defined."""


@dataclass(frozen=True)
class SpringSpec:
    """Linear tension spring: rate (N/m), rest length (m), max extension (m)."""

    stiffness: float = DEFAULT_SPRING_STIFFNESS
    rest_length: float = DEFAULT_REST_LENGTH
    max_extension: float = DEFAULT_MAX_EXTENSION

    def __post_init__(self):
        if self.stiffness <= 0:
            raise ValueError(f"spring stiffness must be > 0, got {self.stiffness}")
        if self.rest_length <= 0:
            raise ValueError(f"spring rest_length must be > 0, got {self.rest_length}")
        if self.max_extension <= 0:
            raise ValueError(f"spring max_extension must be > 0, got {self.max_extension}")


@dataclass(frozen=True)
class ElasticConfig:
    """One full configuration of the reconfigurable elastic element.

    pairs           number of spring pairs (1..6)
    pretension      installed extension at zero deflection and offset (m)
    offset_a/b      hitching offsets of the two springs in a pair (rad);
                    opposite signs give a symmetric torque profile
    inner_radius    hitching radius of the inner plate (m)
    max_deflection  structural deflection stop (rad)
    min_pretension  lower bound enforced on ``pretension`` (m)
    """

    pairs: int = DEFAULT_PAIR_COUNT
    pretension: float = MIN_PRETENSION
    offset_a: float = 0.0
    offset_b: float = 0.0
    inner_radius: float = DEFAULT_INNER_RADIUS
    max_deflection: float = DEFAULT_MAX_DEFLECTION
    spring: SpringSpec = SpringSpec()
    min_pretension: float = MIN_PRETENSION

    def __post_init__(self):
        if not 1 <= self.pairs <= 6:
            raise ValueError(f"pairs must be in 1..6, got {self.pairs}")
        if self.pretension < self.min_pretension:
            raise ValueError(
                f"pretension {self.pretension * 1e3:.3f} mm is below the "
                f"minimum {self.min_pretension * 1e3:.3f} mm"
            )
        if self.inner_radius <= 0:
            raise ValueError("inner_radius must be > 0")
        if not 0 < self.max_deflection <= math.pi / 2:
            raise ValueError("max_deflection must be in (0, pi/2]")
        for name in ("offset_a", "offset_b"):
            if abs(getattr(self, name)) > self.max_deflection:
                raise ValueError(f"|{name}| must not exceed max_deflection")

    @property
    def outer_radius(self) -> float:
        return outer_radius(self)


def outer_radius(cfg: ElasticConfig) -> float:
    """Outer hitching radius set by the installed pre-tension (m)."""
    return cfg.inner_radius + cfg.spring.rest_length + cfg.pretension


@dataclass
class SpringState:
    """Lengths (m) and tension forces (N) of the two springs in a pair."""

    length_a: np.ndarray | float
    length_b: np.ndarray | float
    force_a: np.ndarray | float
    force_b: np.ndarray | float


def _lengths(cfg: ElasticConfig, beta):
    r1 = cfg.inner_radius
    r2 = outer_radius(cfg)
    sq = r1 * r1 + r2 * r2
    cross = 2.0 * r1 * r2
    la = np.sqrt(sq - cross * np.cos(beta + cfg.offset_a))
    lb = np.sqrt(sq - cross * np.cos(beta + cfg.offset_b))
    return la, lb


def spring_state(cfg: ElasticConfig, beta) -> SpringState:
    """Spring lengths by the cosine law and Hooke forces at deflection ``beta``.

    Tension springs cannot push: force is clamped to zero when a spring is
    shorter than its rest length.
    """
    la, lb = _lengths(cfg, beta)
    k = cfg.spring.stiffness
    l0 = cfg.spring.rest_length
    fa = k * np.maximum(la - l0, 0.0)
    fb = k * np.maximum(lb - l0, 0.0)
    return SpringState(length_a=la, length_b=lb, force_a=fa, force_b=fb)


def is_feasible(cfg: ElasticConfig, beta):
    """True where ``beta`` is inside the working space.

    Requires the deflection within the structural stop and neither spring
    stretched past its rated maximum extension.
    """
    la, lb = _lengths(cfg, beta)
    l0 = cfg.spring.rest_length
    ext_ok = (la - l0 <= cfg.spring.max_extension) & (lb - l0 <= cfg.spring.max_extension)
    return ext_ok & (np.abs(beta) <= cfg.max_deflection)


def max_feasible_deflection(cfg: ElasticConfig) -> float:
    """Largest symmetric deflection (rad) with both springs inside their
    extension limit and the structural stop."""
    r1 = cfg.inner_radius
    r2 = outer_radius(cfg)
    l_lim = cfg.spring.rest_length + cfg.spring.max_extension
    arg = (r1 * r1 + r2 * r2 - l_lim * l_lim) / (2.0 * r1 * r2)
    if arg < -1.0:
        s_lim = math.pi
    elif arg > 1.0:
        return 0.0
    else:
        s_lim = math.acos(arg)
    phi = max(abs(cfg.offset_a), abs(cfg.offset_b))
    return max(0.0, min(cfg.max_deflection, s_lim - phi))


def output_torque(cfg: ElasticConfig, beta):
    """Torque (N*m) transmitted between the plates at deflection ``beta``.

    Sum of the two spring tangential force moments per pair, scaled by the
    pair count.  A slack spring contributes nothing.  The pair count is
    applied as the final factor so torque is exactly proportional to it.
    """
    r1 = cfg.inner_radius
    r2 = outer_radius(cfg)
    l0 = cfg.spring.rest_length
    la, lb = _lengths(cfg, beta)
    ta = np.where(la > l0, (1.0 - l0 / la) * np.sin(beta + cfg.offset_a), 0.0)
    tb = np.where(lb > l0, (1.0 - l0 / lb) * np.sin(beta + cfg.offset_b), 0.0)
    return cfg.pairs * (cfg.spring.stiffness * r1 * r2 * (ta + tb))


def equivalent_stiffness(cfg: ElasticConfig, beta):
    """Local slope of the torque-deflection curve (N*m/rad).

    Analytic derivative of :func:`output_torque`; slack-spring terms are
    dropped piecewise.
    """
    r1 = cfg.inner_radius
    r2 = outer_radius(cfg)
    l0 = cfg.spring.rest_length
    la, lb = _lengths(cfg, beta)
    acc = 0.0
    for length, offset in ((la, cfg.offset_a), (lb, cfg.offset_b)):
        s = beta + offset
        term = (1.0 - l0 / length) * np.cos(s) + l0 * r1 * r2 * np.sin(s) ** 2 / length**3
        acc = acc + np.where(length > l0, term, 0.0)
    return cfg.pairs * (cfg.spring.stiffness * r1 * r2 * acc)


def spring_potential_energy(cfg: ElasticConfig, beta):
    """Elastic energy (J) stored in all springs at deflection ``beta``."""
    la, lb = _lengths(cfg, beta)
    l0 = cfg.spring.rest_length
    ea = np.maximum(la - l0, 0.0) ** 2
    eb = np.maximum(lb - l0, 0.0) ** 2
    return cfg.pairs * (0.5 * cfg.spring.stiffness * (ea + eb))


def deflection_for_torque(cfg: ElasticConfig, torque: float, check_points: int = 201) -> float:
    """Deflection (rad) at which the element transmits ``torque``.

    Bracketed root find on the structural deflection range.  The profile
    is first checked for monotonicity on a dense grid; a non-monotone
    profile (possible for exotic offset choices) is rejected.
    """
    b_max = cfg.max_deflection
    grid = np.linspace(-b_max, b_max, check_points)
    tau = output_torque(cfg, grid)
    if np.any(np.diff(tau) < 0.0):
        raise UnsupportedConfigError(
            "torque profile is not monotone on the deflection range; "
            "deflection_for_torque is undefined for this configuration"
        )
    lo, hi = float(tau[0]), float(tau[-1])
    if not lo <= torque <= hi:
        raise TorqueRangeError(
            f"torque {torque:.6g} N*m outside reachable range [{lo:.6g}, {hi:.6g}] N*m"
        )
    if torque == lo:
        return -b_max
    if torque == hi:
        return b_max
    return brentq(lambda b: output_torque(cfg, b) - torque, -b_max, b_max, xtol=1e-14)


# --- prototype presets -------------------------------------------------

def default_config() -> ElasticConfig:
    """Baseline configuration: six pairs, minimum pre-tension, no offset."""
    return ElasticConfig()


def offset_config(offset_rad: float, pairs: int = DEFAULT_PAIR_COUNT,
                  pretension: float = MIN_PRETENSION,
                  spring: SpringSpec | None = None) -> ElasticConfig:
    """Symmetric-offset configuration (opposite offsets in each pair)."""
    return ElasticConfig(
        pairs=pairs,
        pretension=pretension,
        offset_a=offset_rad,
        offset_b=-offset_rad,
        spring=spring or SpringSpec(),
    )


# Representative stiffness-profile presets, by nonlinearity level.
# Larger offsets flatten the profile toward the linear mode.
NONLINEARITY_PRESETS = {
    "high": 0.0,
    "medium": math.radians(10.0),
    "low": math.radians(20.0),
}


def nonlinearity_preset(level: str) -> ElasticConfig:
    try:
        offset = NONLINEARITY_PRESETS[level]
    except KeyError:
        raise ValueError(
            f"unknown preset {level!r}; choose from {sorted(NONLINEARITY_PRESETS)}"
        ) from None
    return offset_config(offset)


# --- JSON document form -------------------------------------------------
# Keys carry explicit units; see README for the full schema.

def config_to_dict(cfg: ElasticConfig) -> dict:
    return {
        "pairs": cfg.pairs,
        "pretension_mm": cfg.pretension * 1e3,
        "offset_a_deg": math.degrees(cfg.offset_a),
        "offset_b_deg": math.degrees(cfg.offset_b),
        "inner_radius_mm": cfg.inner_radius * 1e3,
        "max_deflection_deg": math.degrees(cfg.max_deflection),
        "spring": {
            "stiffness_n_per_m": cfg.spring.stiffness,
            "rest_length_mm": cfg.spring.rest_length * 1e3,
            "max_extension_mm": cfg.spring.max_extension * 1e3,
        },
    }


def config_from_dict(doc: dict) -> ElasticConfig:
    defaults = config_to_dict(ElasticConfig())
    spring_doc = dict(defaults["spring"])
    spring_doc.update(doc.get("spring", {}))
    unknown = set(spring_doc) - set(defaults["spring"])
    if unknown:
        raise ValueError(f"config.spring: unknown key(s) {sorted(unknown)}")
    top = {k: v for k, v in defaults.items() if k != "spring"}
    given = {k: v for k, v in doc.items() if k != "spring"}
    unknown = set(given) - set(top)
    if unknown:
        raise ValueError(f"config: unknown key(s) {sorted(unknown)}")
    top.update(given)
    spring = SpringSpec(
        stiffness=float(spring_doc["stiffness_n_per_m"]),
        rest_length=float(spring_doc["rest_length_mm"]) * 1e-3,
        max_extension=float(spring_doc["max_extension_mm"]) * 1e-3,
    )
    return ElasticConfig(
        pairs=int(top["pairs"]),
        pretension=float(top["pretension_mm"]) * 1e-3,
        offset_a=math.radians(float(top["offset_a_deg"])),
        offset_b=math.radians(float(top["offset_b_deg"])),
        inner_radius=float(top["inner_radius_mm"]) * 1e-3,
        max_deflection=math.radians(float(top["max_deflection_deg"])),
        spring=spring,
    )
