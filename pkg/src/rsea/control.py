"""Discrete cascade PI torque controller.

An outer PI loop turns torque error into a velocity command; an inner PI
loop turns velocity error into motor current.  Plate velocity is
estimated from sampled angle by a low-pass filtered differentiator.
Both loop outputs saturate and their integrators freeze while the
respective output is saturated (conditional anti-windup).

All discrete realizations are backward Euler at the fixed sample period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ControllerGains:
    """Cascade PI gains and limits (prototype defaults).

    kp_torque/ki_torque   outer loop, velocity command per torque error
    kp_velocity/ki_velocity inner loop, drive torque per velocity error
    filter_cutoff         differentiator low-pass cut-off (rad/s)
    sample_period         controller period (s)
    max_current           current saturation (A)
    max_velocity_command  velocity command saturation (rad/s)
    """

    kp_torque: float = 1.5
    ki_torque: float = 100.0
    kp_velocity: float = 0.6
    ki_velocity: float = 5.0
    filter_cutoff: float = 628.0
    sample_period: float = 1e-3
    max_current: float = 34.0
    max_velocity_command: float = 20.0

    def __post_init__(self):
        for name in ("kp_torque", "ki_torque", "kp_velocity", "ki_velocity"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("filter_cutoff", "sample_period", "max_current",
                     "max_velocity_command"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    def to_dict(self) -> dict:
        return {
            "kp_torque": self.kp_torque,
            "ki_torque": self.ki_torque,
            "kp_velocity": self.kp_velocity,
            "ki_velocity": self.ki_velocity,
            "filter_cutoff_rad_per_s": self.filter_cutoff,
            "sample_period_s": self.sample_period,
            "max_current_a": self.max_current,
            "max_velocity_command_rad_per_s": self.max_velocity_command,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ControllerGains":
        defaults = cls().to_dict()
        unknown = set(doc) - set(defaults)
        if unknown:
            raise ValueError(f"gains: unknown key(s) {sorted(unknown)}")
        merged = {**defaults, **doc}
        return cls(
            kp_torque=float(merged["kp_torque"]),
            ki_torque=float(merged["ki_torque"]),
            kp_velocity=float(merged["kp_velocity"]),
            ki_velocity=float(merged["ki_velocity"]),
            filter_cutoff=float(merged["filter_cutoff_rad_per_s"]),
            sample_period=float(merged["sample_period_s"]),
            max_current=float(merged["max_current_a"]),
            max_velocity_command=float(merged["max_velocity_command_rad_per_s"]),
        )


class VelocityFilter:
    """Low-pass filtered differentiator, wc*s/(s + wc), backward Euler.

    Update rule per sample:
        v[k] = (v[k-1] + wc*(x[k] - x[k-1])) / (1 + wc*Ts)
    """

    def __init__(self, cutoff: float, sample_period: float):
        self.cutoff = cutoff
        self.sample_period = sample_period
        self._den = 1.0 + cutoff * sample_period
        self.value = 0.0
        self._prev = None

    def update(self, sample: float) -> float:
        if self._prev is None:
            self._prev = sample
        self.value = (self.value + self.cutoff * (sample - self._prev)) / self._den
        self._prev = sample
        return self.value

    def reset(self):
        self.value = 0.0
        self._prev = None

    def discrete_response(self, omega: float) -> complex:
        """Closed-form frequency response of the discrete filter."""
        z_inv = complex(math.cos(omega * self.sample_period),
                        -math.sin(omega * self.sample_period))
        return self.cutoff * (1.0 - z_inv) / (self._den - z_inv)


def _sat(value: float, limit: float) -> float:
    if value > limit:
        return limit
    if value < -limit:
        return -limit
    return value


class CascadePiController:
    """Torque-to-current cascade, stepped once per sample period.

    ``drive_gain`` converts inner-loop drive torque to current; it equals
    the transmission ratio times the motor torque constant.
    """

    def __init__(self, gains: ControllerGains = ControllerGains(),
                 drive_gain: float = 0.88):
        if drive_gain <= 0:
            raise ValueError("drive_gain must be > 0")
        self.gains = gains
        self.drive_gain = drive_gain
        self.velocity_filter = VelocityFilter(gains.filter_cutoff, gains.sample_period)
        self.outer_integral = 0.0   # rad/s
        self.inner_integral = 0.0   # N m (plate-side drive torque)
        self.velocity_command = 0.0
        self.current = 0.0

    def reset(self):
        """Zero all controller memory."""
        self.outer_integral = 0.0
        self.inner_integral = 0.0
        self.velocity_command = 0.0
        self.current = 0.0
        self.velocity_filter.reset()

    def step(self, tau_d: float, tau_e: float, theta: float) -> float:
        """One control period: desired and measured torque in, current out.

        Non-finite inputs are a controller fault: the output is zeroed for
        the sample and no state is updated.
        """
        g = self.gains
        if not (math.isfinite(tau_d) and math.isfinite(tau_e) and math.isfinite(theta)):
            self.velocity_command = 0.0
            self.current = 0.0
            return 0.0

        velocity = self.velocity_filter.update(theta)

        e_tau = tau_d - tau_e
        candidate = self.outer_integral + g.ki_torque * e_tau * g.sample_period
        v_cmd = g.kp_torque * e_tau + candidate
        if abs(v_cmd) <= g.max_velocity_command:
            self.outer_integral = candidate
        else:
            v_cmd = _sat(v_cmd, g.max_velocity_command)
        self.velocity_command = v_cmd

        e_v = v_cmd - velocity
        candidate = self.inner_integral + g.ki_velocity * e_v * g.sample_period
        drive = g.kp_velocity * e_v + candidate
        current = drive / self.drive_gain
        if abs(current) <= g.max_current:
            self.inner_integral = candidate
        else:
            current = _sat(current, g.max_current)
        self.current = current
        return current
