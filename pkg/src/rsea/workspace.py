"""Design-space sweeps, working-space masks and configuration search."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .elastic import (
    ElasticConfig,
    SpringSpec,
    equivalent_stiffness,
    is_feasible,
    max_feasible_deflection,
    output_torque,
)

# Default grid densities: fine enough that performance bounds move by
# less than 0.5% when the resolution doubles.
DEFAULT_CONFIG_RESOLUTION = 121
DEFAULT_BETA_RESOLUTION = 181

# A profile counts as linear when the residual fraction of the best
# straight-line fit falls below this.
LINEARITY_THRESHOLD = 5e-3


class InfeasibleRegionError(ValueError):
    """A sweep or bound query found no feasible grid cell."""


class SearchError(ValueError):
    """Design search could not produce a feasible configuration."""

    def __init__(self, message, best_candidate=None, residual=None):
        super().__init__(message)
        self.best_candidate = best_candidate
        self.residual = residual


@dataclass
class StiffnessMap:
    """Dense torque/stiffness evaluation over one configuration axis.

    ``axis1`` is the swept configuration parameter (pre-tension in m or
    offset in rad), ``beta`` the deflection grid.  Arrays are indexed
    ``[axis1, beta]``.  ``feasible`` marks cells inside the working space.
    """

    axis1: np.ndarray
    beta: np.ndarray
    torque: np.ndarray
    stiffness: np.ndarray
    feasible: np.ndarray
    axis1_name: str = "pretension"

    def to_csv(self, path):
        """Long-format export: axis1, beta, torque, stiffness, feasible."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([self.axis1_name, "beta_rad", "torque_nm",
                             "stiffness_nm_per_rad", "feasible"])
            for i, a in enumerate(self.axis1):
                for j, b in enumerate(self.beta):
                    writer.writerow([repr(float(a)), repr(float(b)),
                                     repr(float(self.torque[i, j])),
                                     repr(float(self.stiffness[i, j])),
                                     int(self.feasible[i, j])])


@dataclass
class PerformanceBounds:
    """Extrema over the feasible cells of a stiffness map."""

    k_min: float
    k_max: float
    tau_max: float
    beta_at_tau_max: float

    def to_dict(self) -> dict:
        return {
            "k_min_nm_per_rad": self.k_min,
            "k_max_nm_per_rad": self.k_max,
            "k_min_nm_per_deg": self.k_min * math.pi / 180.0,
            "k_max_nm_per_deg": self.k_max * math.pi / 180.0,
            "tau_max_nm": self.tau_max,
            "beta_at_tau_max_rad": self.beta_at_tau_max,
        }


def _sweep(configs, axis1, beta_range, beta_resolution, axis1_name):
    betas = np.linspace(beta_range[0], beta_range[1], beta_resolution)
    n1 = len(configs)
    torque = np.empty((n1, beta_resolution))
    stiffness = np.empty((n1, beta_resolution))
    feasible = np.empty((n1, beta_resolution), dtype=bool)
    for i, cfg in enumerate(configs):
        torque[i] = output_torque(cfg, betas)
        stiffness[i] = equivalent_stiffness(cfg, betas)
        feasible[i] = is_feasible(cfg, betas)
    if not feasible.any():
        raise InfeasibleRegionError(f"{axis1_name} sweep has no feasible cell")
    return StiffnessMap(axis1=np.asarray(axis1, dtype=float), beta=betas,
                        torque=torque, stiffness=stiffness,
                        feasible=feasible, axis1_name=axis1_name)


def sweep_pretension(spring: SpringSpec, pairs: int, offsets=(0.0, 0.0),
                     pretension_range=(0.5e-3, 6.5e-3),
                     beta_range=None,
                     resolution=(DEFAULT_CONFIG_RESOLUTION, DEFAULT_BETA_RESOLUTION),
                     max_deflection=None) -> StiffnessMap:
    """Map torque and stiffness against installed pre-tension and deflection."""
    probe = ElasticConfig(pairs=pairs, pretension=pretension_range[0],
                          offset_a=offsets[0], offset_b=offsets[1], spring=spring,
                          **({"max_deflection": max_deflection} if max_deflection else {}))
    if beta_range is None:
        beta_range = (-probe.max_deflection, probe.max_deflection)
    pretensions = np.linspace(pretension_range[0], pretension_range[1], resolution[0])
    configs = [
        ElasticConfig(pairs=pairs, pretension=float(dl), offset_a=offsets[0],
                      offset_b=offsets[1], spring=spring,
                      max_deflection=probe.max_deflection)
        for dl in pretensions
    ]
    return _sweep(configs, pretensions, beta_range, resolution[1], "pretension")


def sweep_offset(spring: SpringSpec, pairs: int, pretension=0.5e-3,
                 offset_range=None, beta_range=None,
                 resolution=(DEFAULT_CONFIG_RESOLUTION, DEFAULT_BETA_RESOLUTION),
                 max_deflection=None) -> StiffnessMap:
    """Map torque and stiffness against symmetric offset angle and deflection.

    Each pair is hitched at +offset and -offset.  Offsets are bounded by
    the structural deflection stop, like any valid configuration.
    """
    probe = ElasticConfig(pairs=pairs, pretension=pretension, spring=spring,
                          **({"max_deflection": max_deflection} if max_deflection else {}))
    if offset_range is None:
        offset_range = (-probe.max_deflection, probe.max_deflection)
    if beta_range is None:
        beta_range = (-probe.max_deflection, probe.max_deflection)
    if max(abs(offset_range[0]), abs(offset_range[1])) > probe.max_deflection:
        raise ValueError("offset range exceeds the structural deflection stop")
    offsets = np.linspace(offset_range[0], offset_range[1], resolution[0])
    configs = [
        ElasticConfig(pairs=pairs, pretension=pretension, offset_a=float(phi),
                      offset_b=-float(phi), spring=spring,
                      max_deflection=probe.max_deflection)
        for phi in offsets
    ]
    return _sweep(configs, offsets, beta_range, resolution[1], "offset")


def performance_bounds(stiffness_map: StiffnessMap) -> PerformanceBounds:
    """Stiffness range and peak torque over the feasible working space."""
    mask = stiffness_map.feasible
    if not mask.any():
        raise InfeasibleRegionError("map has no feasible cell")
    k = stiffness_map.stiffness[mask]
    tau = np.abs(stiffness_map.torque)
    tau_masked = np.where(mask, tau, -np.inf)
    i, j = np.unravel_index(np.argmax(tau_masked), tau_masked.shape)
    return PerformanceBounds(
        k_min=float(k.min()),
        k_max=float(k.max()),
        tau_max=float(tau[i, j]),
        beta_at_tau_max=float(stiffness_map.beta[j]),
    )


def linearity_index(cfg: ElasticConfig, beta_range=None, samples: int = DEFAULT_BETA_RESOLUTION) -> float:
    """Residual fraction (1 - R^2) of the best straight-line torque fit.

    Evaluated on a symmetric deflection grid; defaults to the largest
    feasible symmetric range of the configuration.  0 means exactly
    linear; hardening or softening profiles score higher.
    """
    if samples < 10:
        raise ValueError("need at least 10 sample points")
    if beta_range is None:
        lim = max_feasible_deflection(cfg)
        if lim <= 0.0:
            raise InfeasibleRegionError("configuration has no feasible deflection range")
        beta_range = (-lim, lim)
    betas = np.linspace(beta_range[0], beta_range[1], samples)
    if not bool(np.all(is_feasible(cfg, betas))):
        raise InfeasibleRegionError("deflection range contains infeasible samples")
    tau = output_torque(cfg, betas)
    basis = np.column_stack([betas, np.ones_like(betas)])
    coef, *_ = np.linalg.lstsq(basis, tau, rcond=None)
    residual = tau - basis @ coef
    ss_tot = float(np.sum((tau - tau.mean()) ** 2))
    if ss_tot == 0.0:
        return 0.0
    return float(np.sum(residual**2) / ss_tot)


def classify_stiffness_profile(cfg: ElasticConfig, beta_range=None,
                               threshold: float = LINEARITY_THRESHOLD) -> str:
    """Classify the profile as ``linear``, ``hardening`` or ``softening``."""
    index = linearity_index(cfg, beta_range=beta_range)
    if index < threshold:
        return "linear"
    if beta_range is None:
        lim = max_feasible_deflection(cfg)
        beta_range = (-lim, lim)
    betas = np.linspace(0.0, beta_range[1], 50)
    k = equivalent_stiffness(cfg, betas)
    return "hardening" if k[-1] >= k[0] else "softening"


@dataclass
class DesignTarget:
    """Desired torque-deflection samples plus box constraints for search."""

    betas: np.ndarray
    torques: np.ndarray
    weights: np.ndarray | None = None
    pairs_range: tuple = (1, 6)
    pretension_range: tuple = (0.5e-3, 6.5e-3)
    offset_range: tuple = (0.0, math.radians(20.0))
    spring: SpringSpec = field(default_factory=SpringSpec)

    def __post_init__(self):
        self.betas = np.asarray(self.betas, dtype=float)
        self.torques = np.asarray(self.torques, dtype=float)
        if self.betas.size < 2:
            raise ValueError("need at least 2 target samples")
        if self.betas.shape != self.torques.shape:
            raise ValueError("betas and torques must have equal length")
        if self.weights is None:
            self.weights = np.ones_like(self.betas)
        else:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != self.betas.shape:
                raise ValueError("weights must match the sample count")
            if np.any(self.weights <= 0):
                raise ValueError("weights must be positive")


@dataclass
class SearchResult:
    config: ElasticConfig
    residual_rms: float


def _weighted_rms(cfg, target):
    err = output_torque(cfg, target.betas) - target.torques
    w = target.weights
    return float(np.sqrt(np.sum(w * err**2) / np.sum(w)))


def search_configuration(target: DesignTarget, grid=(13, 13)) -> SearchResult:
    """Least-squares configuration search over (pairs, pretension, offset).

    Coarse grid scan followed by derivative-free local refinement of the
    continuous parameters for each pair count.  Deterministic; ties are
    broken toward fewer pairs, then smaller pre-tension, then smaller
    offset magnitude.
    """
    m_lo, m_hi = target.pairs_range
    dl_lo, dl_hi = target.pretension_range
    phi_lo, phi_hi = target.offset_range
    if m_lo > m_hi or dl_lo > dl_hi or phi_lo > phi_hi:
        raise SearchError("empty search box")

    def build(m, dl, phi):
        return ElasticConfig(pairs=int(m), pretension=float(dl),
                             offset_a=float(phi), offset_b=-float(phi),
                             spring=target.spring)

    def feasible(cfg):
        return bool(np.all(is_feasible(cfg, target.betas)))

    best = None  # (rms, m, dl, |phi|, cfg)
    best_any = None
    dls = np.linspace(dl_lo, dl_hi, grid[0])
    phis = np.linspace(phi_lo, phi_hi, grid[1])
    for m in range(int(m_lo), int(m_hi) + 1):
        for dl in dls:
            for phi in phis:
                cfg = build(m, dl, phi)
                rms = _weighted_rms(cfg, target)
                key = (rms, m, dl, abs(phi))
                if best_any is None or key < best_any[:4]:
                    best_any = key + (cfg,)
                if feasible(cfg) and (best is None or key < best[:4]):
                    best = key + (cfg,)

        # local refinement of (pretension, offset) at this pair count
        seed_pool = best if best is not None and best[1] == m else None
        if seed_pool is None:
            continue
        _, _, dl0, _, cfg0 = seed_pool
        x0 = np.array([cfg0.pretension, cfg0.offset_a])

        def cost(x):
            dl, phi = x
            if not (dl_lo <= dl <= dl_hi and phi_lo <= phi <= phi_hi):
                return 1e9
            cfg = build(m, dl, phi)
            if not feasible(cfg):
                return 1e9
            return _weighted_rms(cfg, target)

        res = minimize(cost, x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400})
        if res.fun < 1e9:
            cfg = build(m, res.x[0], res.x[1])
            key = (float(res.fun), m, float(res.x[0]), abs(float(res.x[1])))
            if key < best[:4]:
                best = key + (cfg,)

    if best is None:
        raise SearchError(
            "no feasible configuration covers the target deflections",
            best_candidate=best_any[4] if best_any else None,
            residual=best_any[0] if best_any else None,
        )
    return SearchResult(config=best[4], residual_rms=best[0])
