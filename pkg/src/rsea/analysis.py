"""Measurement and metrics: frequency response, step metrics, RMS errors,
and quasi-static torque-deflection fitting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .elastic import ElasticConfig, output_torque


class IdentifiabilityError(ValueError):
    """The sample set cannot distinguish the requested free parameters."""


@dataclass
class FrequencyResponse:
    """Describing-function gain/phase estimates at one excitation amplitude.

    Magnitudes are normalized to the gain of the lowest-frequency point,
    so the first entry is 0 dB by construction.  ``valid`` is False for
    points where the excitation left the working space or the simulation
    diverged; such points keep their estimate but must not be trusted.
    """

    frequencies: np.ndarray
    magnitude_db: np.ndarray
    phase_deg: np.ndarray
    amplitude: float
    gain: np.ndarray
    valid: np.ndarray

    def bandwidth(self) -> float:
        """First frequency (Hz) where the magnitude drops below the
        half-power level relative to DC; NaN when no crossing is found."""
        thresh = self.gain[0] / math.sqrt(2.0)
        g = self.gain
        f = self.frequencies
        for i in range(1, len(f)):
            if g[i] < thresh <= g[i - 1]:
                frac = (math.log(thresh) - math.log(g[i - 1])) / (math.log(g[i]) - math.log(g[i - 1]))
                return float(f[i - 1] * (f[i] / f[i - 1]) ** frac)
        return float("nan")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frequency_hz", "magnitude_db", "phase_deg",
                             "gain", "valid", "amplitude"])
            for row in zip(self.frequencies, self.magnitude_db, self.phase_deg,
                           self.gain, self.valid):
                writer.writerow([repr(float(row[0])), repr(float(row[1])),
                                 repr(float(row[2])), repr(float(row[3])),
                                 int(row[4]), repr(float(self.amplitude))])


def fit_sine(t, y, frequency: float):
    """Least-squares fit y ~ a*sin + b*cos + c at a known frequency.

    Returns the phasor a + j*b of A*sin(w t + phase): its magnitude is the
    amplitude and its angle the phase.
    """
    om = 2.0 * math.pi * frequency
    basis = np.column_stack([np.sin(om * t), np.cos(om * t), np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return complex(coef[0], coef[1])


def estimate_frequency_response(simulate_point, amplitude: float, frequencies,
                                periods: int = 8, discard: int = 2) -> FrequencyResponse:
    """Sine-by-sine frequency response of a (possibly nonlinear) system.

    ``simulate_point(frequency_hz, amplitude, n_periods)`` must run the
    system under a sinusoidal excitation and return ``(t, u, y)`` arrays
    plus an optional violation flag.  Per point, the first ``discard``
    periods are dropped as transient and gain/phase come from
    least-squares sine fits of input and output at the excitation
    frequency.
    """
    if periods <= discard:
        raise ValueError("periods must exceed the discarded transient")
    frequencies = np.asarray(frequencies, dtype=float)
    if np.any(np.diff(frequencies) <= 0):
        raise ValueError("frequencies must be strictly increasing")
    gains = np.zeros_like(frequencies)
    phases = np.zeros_like(frequencies)
    valid = np.ones(len(frequencies), dtype=bool)
    for idx, f in enumerate(frequencies):
        out = simulate_point(float(f), amplitude, periods)
        t, u, y = out[:3]
        violated = bool(out[3]) if len(out) > 3 else False
        keep = t - t[0] >= discard / f
        pu = fit_sine(t[keep], u[keep], f)
        py = fit_sine(t[keep], y[keep], f)
        if abs(pu) == 0.0 or not (np.isfinite(abs(pu)) and np.isfinite(abs(py))):
            valid[idx] = False
            gains[idx] = np.nan
            phases[idx] = np.nan
            continue
        gains[idx] = abs(py) / abs(pu)
        phases[idx] = math.degrees(np.angle(py / pu))
        if violated:
            valid[idx] = False
    mag_db = 20.0 * np.log10(gains / gains[0])
    return FrequencyResponse(frequencies=frequencies, magnitude_db=mag_db,
                             phase_deg=phases, amplitude=amplitude,
                             gain=gains, valid=valid)


@dataclass
class StepMetrics:
    rise_time: float          # 10-90% of the commanded step (s)
    overshoot_pct: float      # peak above the target, percent of step
    settling_time: float      # time to stay inside the 2% band (s); inf if never
    steady_state_error: float # |tail mean - target|

    def to_dict(self) -> dict:
        return {
            "rise_time_s": self.rise_time,
            "overshoot_pct": self.overshoot_pct,
            "settling_time_s": self.settling_time,
            "steady_state_error_nm": self.steady_state_error,
        }


def step_metrics(t, y, step_value: float, step_time: float = 0.0,
                 settle_band: float = 0.02, tail_fraction: float = 0.1) -> StepMetrics:
    """Standard step metrics on a sampled response channel.

    The response is assumed to start from 0 at ``step_time``.  Settling
    time is measured to the +-``settle_band`` * step band; a response that
    ends outside the band gets an infinite settling time.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = t >= step_time
    t, y = t[mask] - step_time, y[mask]
    if len(t) == 0:
        raise ValueError("record does not cover the step time")
    sign = 1.0 if step_value >= 0 else -1.0
    yn = sign * y / abs(step_value)

    def first_crossing(level):
        above = yn >= level
        if yn[0] >= level:
            return 0.0
        idx = np.argmax(above)
        if not above[idx]:
            return math.inf
        lo, hi = yn[idx - 1], yn[idx]
        frac = (level - lo) / (hi - lo) if hi != lo else 0.0
        return float(t[idx - 1] + frac * (t[idx] - t[idx - 1]))

    t10 = first_crossing(0.1)
    t90 = first_crossing(0.9)
    rise = t90 - t10 if math.isfinite(t10) and math.isfinite(t90) else math.inf

    overshoot = max(0.0, float(yn.max()) - 1.0) * 100.0

    outside = np.abs(yn - 1.0) > settle_band
    if outside[-1]:
        settling = math.inf
    elif not outside.any():
        settling = 0.0
    else:
        last_out = np.where(outside)[0][-1]
        settling = float(t[last_out + 1]) if last_out + 1 < len(t) else math.inf

    n_tail = max(1, int(len(y) * tail_fraction))
    sse = abs(float(np.mean(y[-n_tail:])) - step_value)
    return StepMetrics(rise_time=rise, overshoot_pct=overshoot,
                       settling_time=settling, steady_state_error=sse)


def rms_error(t, channel, reference, window: float = 0.5):
    """RMS of (channel - reference) over the trailing ``window`` fraction.

    ``reference`` may be a scalar, an array matching the channel, or a
    callable of time.  The leading portion of the record is discarded as
    transient.
    """
    if not 0 < window <= 1:
        raise ValueError("window must be in (0, 1]")
    t = np.asarray(t, dtype=float)
    y = np.asarray(channel, dtype=float)
    if len(t) == 0:
        raise ValueError("empty record")
    if callable(reference):
        ref = np.asarray([reference(tt) for tt in t], dtype=float)
    else:
        ref = np.broadcast_to(np.asarray(reference, dtype=float), y.shape)
    start = len(t) - max(1, int(round(len(t) * window)))
    err = y[start:] - ref[start:]
    return float(np.sqrt(np.mean(err**2)))


@dataclass
class FitReport:
    """Result of a quasi-static torque-deflection fit."""

    parameters: dict
    residual_rms: float
    residual_max: float
    sample_count: int

    def to_dict(self) -> dict:
        return {
            "parameters": dict(self.parameters),
            "residual_rms_nm": self.residual_rms,
            "residual_max_nm": self.residual_max,
            "sample_count": self.sample_count,
        }


_FIT_PARAMS = ("stiffness", "pretension", "offset")


def _apply_params(base: ElasticConfig, names, values) -> ElasticConfig:
    # the optimizer may probe nonphysical intermediate values, so the
    # pretension floor is lifted during fitting
    cfg = base
    for name, value in zip(names, values):
        if name == "stiffness":
            cfg = replace(cfg, spring=replace(cfg.spring, stiffness=float(value)))
        elif name == "pretension":
            cfg = replace(cfg, pretension=float(value), min_pretension=-math.inf)
        elif name == "offset":
            cfg = replace(cfg, offset_a=float(value), offset_b=-float(value))
    return cfg


def fit_quasi_static(betas, torques, base_config: ElasticConfig,
                     free=("stiffness",)) -> FitReport:
    """Nonlinear least squares of the torque law over chosen parameters.

    ``free`` selects from stiffness (N/m), pretension (m) and symmetric
    offset (rad); starting values come from ``base_config``.  Raises
    IdentifiabilityError when the samples cannot separate the free
    parameters (rank-deficient Jacobian at the starting point).
    """
    betas = np.asarray(betas, dtype=float)
    torques = np.asarray(torques, dtype=float)
    free = tuple(free)
    for name in free:
        if name not in _FIT_PARAMS:
            raise ValueError(f"unknown fit parameter {name!r}; choose from {_FIT_PARAMS}")
    if len(free) == 0:
        raise ValueError("need at least one free parameter")
    if betas.size < 3 * len(free):
        raise ValueError(
            f"need at least {3 * len(free)} samples for {len(free)} free parameter(s)"
        )

    x0 = []
    scale = []
    for name in free:
        if name == "stiffness":
            x0.append(base_config.spring.stiffness)
            scale.append(max(base_config.spring.stiffness, 1.0))
        elif name == "pretension":
            x0.append(base_config.pretension)
            scale.append(1e-3)
        else:
            x0.append(base_config.offset_a if base_config.offset_a else 0.05)
            scale.append(0.1)
    x0 = np.asarray(x0, dtype=float)

    def residual(x):
        cfg = _apply_params(base_config, free, x)
        return output_torque(cfg, betas) - torques

    # identifiability: finite-difference Jacobian at the start point
    jac = np.zeros((betas.size, len(free)))
    for i in range(len(free)):
        h = 1e-6 * scale[i]
        xp = x0.copy(); xp[i] += h
        xm = x0.copy(); xm[i] -= h
        jac[:, i] = (residual(xp) - residual(xm)) / (2 * h)
    rank = np.linalg.matrix_rank(jac, tol=1e-10 * max(1.0, float(np.abs(jac).max())))
    if rank < len(free):
        raise IdentifiabilityError(
            f"sample set is rank-deficient for parameters {free} (rank {rank})"
        )

    sol = least_squares(residual, x0, x_scale=np.asarray(scale), method="lm")
    res = residual(sol.x)
    return FitReport(
        parameters={name: float(v) for name, v in zip(free, sol.x)},
        residual_rms=float(np.sqrt(np.mean(res**2))),
        residual_max=float(np.abs(res).max()),
        sample_count=int(betas.size),
    )
