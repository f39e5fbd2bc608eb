"""Lumped actuator dynamics: motor current command to output torque.

The motor drives the inner plate of the elastic element through an ideal
transmission of ratio ``ratio`` (motor angle = ratio * plate angle); the
outer plate connects to the load.  With reflected inertia
``J = structure_inertia + ratio^2 * motor_inertia`` the plate obeys

    J * theta_dd = ratio*k_m*i - tau_e(theta - q)
                   - ratio^2*b_m*theta_d - friction(theta_d)

against a pluggable load model for ``q``.  Integration is classical
fixed-step 4th order Runge-Kutta with the current command held constant
over each controller period.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .elastic import ElasticConfig, equivalent_stiffness, spring_potential_energy

# Structural deflection stop: one-sided spring-damper penalty keeps the
# ODE smooth instead of clamping the state.
HARD_STOP_STIFFNESS = 500.0
HARD_STOP_DAMPING = 5.0

DEFAULT_PLANT_DT = 1e-4
DEFAULT_CONTROL_PERIOD = 1e-3
DIVERGENCE_LIMIT = 1e6

NAN = float("nan")


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class FrictionModel:
    """Friction torque on the plate side of the transmission.

    ``viscous_coulomb`` smooths the Coulomb sign with tanh(v / smoothing)
    so the dynamics stay integrable through velocity reversals.
    """

    kind: str = "none"  # none | viscous | viscous_coulomb
    viscous: float = 0.0
    coulomb: float = 0.0
    smoothing: float = 0.01

    def __post_init__(self):
        if self.kind not in ("none", "viscous", "viscous_coulomb"):
            raise ValueError(f"unknown friction kind {self.kind!r}")
        if self.viscous < 0 or self.coulomb < 0:
            raise ValueError("friction coefficients must be >= 0")
        if self.smoothing <= 0:
            raise ValueError("smoothing velocity must be > 0")

    def torque(self, velocity: float) -> float:
        if self.kind == "none":
            return 0.0
        t = self.viscous * velocity
        if self.kind == "viscous_coulomb":
            t += self.coulomb * math.tanh(velocity / self.smoothing)
        return t


@dataclass(frozen=True)
class ActuatorParams:
    """Motor and transmission constants (prototype values by default)."""

    motor_inertia: float = 3.06e-4       # kg m^2
    motor_damping: float = 0.0           # N m s/rad, motor side
    torque_constant: float = 0.44        # N m/A
    structure_inertia: float = 2.33e-5   # kg m^2, plate side
    ratio: float = 2.0                   # motor angle per plate angle
    max_current: float = 34.0            # A
    friction: FrictionModel = FrictionModel()

    def __post_init__(self):
        if self.motor_inertia <= 0 or self.structure_inertia <= 0:
            raise ValueError("inertias must be > 0")
        if self.motor_damping < 0:
            raise ValueError("motor_damping must be >= 0")
        if self.torque_constant <= 0 or self.ratio <= 0 or self.max_current <= 0:
            raise ValueError("torque_constant, ratio and max_current must be > 0")

    @property
    def reflected_inertia(self) -> float:
        return self.structure_inertia + self.ratio**2 * self.motor_inertia

    @property
    def drive_gain(self) -> float:
        """Plate-side drive torque per ampere of motor current."""
        return self.ratio * self.torque_constant


@dataclass(frozen=True)
class LoadModel:
    """Load attached to the outer plate.

    locked      output held at a fixed angle (bench test)
    prescribed  output follows a given trajectory exactly (stiff handle)
    inertial    free inertia with damping, optional constant external
                torque and an optional one-sided hard stop on the angle
    """

    kind: str = "locked"
    angle: float = 0.0
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    table: tuple | None = None  # (times, angles), linearly interpolated
    inertia: float = 0.0
    damping: float = 0.0
    external_torque: float = 0.0
    stop_angle: float | None = None

    @classmethod
    def locked(cls, angle: float = 0.0) -> "LoadModel":
        return cls(kind="locked", angle=angle)

    @classmethod
    def prescribed_sine(cls, amplitude: float, frequency: float, phase: float = 0.0) -> "LoadModel":
        return cls(kind="prescribed", amplitude=amplitude, frequency=frequency, phase=phase)

    @classmethod
    def prescribed_table(cls, times, angles) -> "LoadModel":
        times = tuple(float(t) for t in times)
        angles = tuple(float(a) for a in angles)
        if len(times) != len(angles) or len(times) < 2:
            raise ValueError("table needs matching times and angles, at least 2 points")
        return cls(kind="prescribed", table=(times, angles))

    @classmethod
    def inertial(cls, inertia: float, damping: float = 0.0,
                 external_torque: float = 0.0, stop_angle: float | None = None) -> "LoadModel":
        if inertia <= 0:
            raise ValueError("load inertia must be > 0")
        if damping < 0:
            raise ValueError("load damping must be >= 0")
        return cls(kind="inertial", inertia=inertia, damping=damping,
                   external_torque=external_torque, stop_angle=stop_angle)

    def trajectory(self):
        """(q, q_dot, q_ddot) callables for a prescribed load."""
        if self.kind != "prescribed":
            raise ValueError("trajectory() only applies to prescribed loads")
        if self.table is not None:
            times = np.asarray(self.table[0])
            angles = np.asarray(self.table[1])
            vel = np.gradient(angles, times)
            acc = np.gradient(vel, times)

            def q(t): return float(np.interp(t, times, angles))
            def qd(t): return float(np.interp(t, times, vel))
            def qdd(t): return float(np.interp(t, times, acc))
            return q, qd, qdd
        om = 2.0 * math.pi * self.frequency
        a, ph = self.amplitude, self.phase

        def q(t): return a * math.sin(om * t + ph)
        def qd(t): return a * om * math.cos(om * t + ph)
        def qdd(t): return -a * om * om * math.sin(om * t + ph)
        return q, qd, qdd


@dataclass
class PlantState:
    theta: float = 0.0
    theta_dot: float = 0.0
    q: float = 0.0
    q_dot: float = 0.0
    t: float = 0.0


class CurrentCommand(NamedTuple):
    """Controller output for one period, with telemetry for the record."""

    current: float
    tau_d: float = NAN
    velocity_command: float = NAN


def _stop_torque(beta: float, beta_dot: float, limit: float) -> float:
    if beta > limit:
        return HARD_STOP_STIFFNESS * (beta - limit) + HARD_STOP_DAMPING * beta_dot
    if beta < -limit:
        return HARD_STOP_STIFFNESS * (beta + limit) + HARD_STOP_DAMPING * beta_dot
    return 0.0


def _scalar_torque_fn(cfg: ElasticConfig) -> Callable[[float], float]:
    """Fast scalar closure of the spring torque law for the ODE loop."""
    r1 = cfg.inner_radius
    r2 = cfg.outer_radius
    l0 = cfg.spring.rest_length
    sq = r1 * r1 + r2 * r2
    cross = 2.0 * r1 * r2
    gain = cfg.pairs * (cfg.spring.stiffness * r1 * r2)
    phi1, phi2 = cfg.offset_a, cfg.offset_b
    sqrt, sin, cos = math.sqrt, math.sin, math.cos

    def tau(beta: float) -> float:
        s1 = beta + phi1
        s2 = beta + phi2
        l1 = sqrt(sq - cross * cos(s1))
        l2 = sqrt(sq - cross * cos(s2))
        t1 = (1.0 - l0 / l1) * sin(s1) if l1 > l0 else 0.0
        t2 = (1.0 - l0 / l2) * sin(s2) if l2 > l0 else 0.0
        return gain * (t1 + t2)

    return tau


def plant_derivative(state: PlantState, current: float, cfg: ElasticConfig,
                     params: ActuatorParams, load: LoadModel):
    """Time derivative (theta_dot, theta_ddot, q_dot, q_ddot) of the plant.

    Raises IntegrationError on a non-finite state.
    """
    vals = (state.theta, state.theta_dot, state.q, state.q_dot)
    if not all(math.isfinite(v) for v in vals):
        raise IntegrationError(f"non-finite state at t={state.t}: {vals}")
    tau_fn = _scalar_torque_fn(cfg)
    deriv = _make_deriv(tau_fn, cfg, params, load)
    return deriv(state.t, state.theta, state.theta_dot, state.q, state.q_dot, current)


def _make_deriv(tau_fn, cfg, params, load):
    """Specialized 4-state derivative closure for one load kind."""
    n = params.ratio
    km = params.torque_constant
    j = params.reflected_inertia
    bm_eff = n * n * params.motor_damping
    fric = params.friction
    fric_none = fric.kind == "none"
    b_lim = cfg.max_deflection

    if load.kind == "locked":
        def deriv(t, th, w, q, qd, i):
            beta = th - q
            tau = tau_fn(beta) + _stop_torque(beta, w, b_lim)
            f = 0.0 if fric_none else fric.torque(w)
            return w, (n * km * i - tau - bm_eff * w - f) / j, 0.0, 0.0
        return deriv

    if load.kind == "prescribed":
        qfun, qdfun, _ = load.trajectory()

        def deriv(t, th, w, q, qd, i):
            qt = qfun(t)
            qdt = qdfun(t)
            beta = th - qt
            tau = tau_fn(beta) + _stop_torque(beta, w - qdt, b_lim)
            f = 0.0 if fric_none else fric.torque(w)
            return w, (n * km * i - tau - bm_eff * w - f) / j, qdt, 0.0
        return deriv

    if load.kind == "inertial":
        jl = load.inertia
        bl = load.damping
        text = load.external_torque
        qstop = load.stop_angle

        def deriv(t, th, w, q, qd, i):
            beta = th - q
            tau = tau_fn(beta) + _stop_torque(beta, w - qd, b_lim)
            f = 0.0 if fric_none else fric.torque(w)
            acc_m = (n * km * i - tau - bm_eff * w - f) / j
            ground = 0.0
            if qstop is not None and q > qstop:
                ground = HARD_STOP_STIFFNESS * (q - qstop) + HARD_STOP_DAMPING * qd
            acc_l = (tau - bl * qd + text - ground) / jl
            return w, acc_m, qd, acc_l
        return deriv

    raise ValueError(f"unknown load kind {load.kind!r}")


@dataclass
class SimRecord:
    """Uniformly sampled time series of one simulation run.

    Samples are taken at the controller period.  ``tau_e`` is the spring
    torque transmitted between the plates (hard-stop penalties excluded),
    which is also what the controller measures.
    """

    t: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    q: np.ndarray
    q_dot: np.ndarray
    beta: np.ndarray
    tau_e: np.ndarray
    tau_d: np.ndarray
    i_m: np.ndarray
    theta_dot_d: np.ndarray
    diverged: bool = False
    abort_reason: str | None = None
    meta: dict = field(default_factory=dict)

    COLUMNS = ("t_s", "theta_rad", "theta_dot_rad_s", "q_rad", "q_dot_rad_s",
               "beta_rad", "tau_e_Nm", "tau_d_Nm", "i_m_A", "theta_dot_d_rad_s")

    def __len__(self):
        return len(self.t)

    def _fields(self):
        return (self.t, self.theta, self.theta_dot, self.q, self.q_dot,
                self.beta, self.tau_e, self.tau_d, self.i_m, self.theta_dot_d)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.COLUMNS)
            for row in zip(*self._fields()):
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "SimRecord":
        data = np.genfromtxt(path, delimiter=",", names=True)
        data = np.atleast_1d(data)
        cols = [np.asarray(data[name.replace(".", "_")], dtype=float)
                for name in data.dtype.names]
        return cls(*cols)


def integrate(state0: PlantState, current_fn, cfg: ElasticConfig,
              params: ActuatorParams, load: LoadModel,
              dt: float = DEFAULT_PLANT_DT, duration: float = 1.0,
              control_period: float = DEFAULT_CONTROL_PERIOD,
              continuous_input: bool = False) -> SimRecord:
    """Fixed-step RK4 integration of the plant against ``current_fn``.

    ``current_fn(t, state, tau_e)`` is called once per controller period
    and may return a float or a :class:`CurrentCommand`; the current is
    held constant over the period (zero-order hold) and clamped to the
    actuator limit.  With ``continuous_input=True`` the command is instead
    re-evaluated at every integrator substage time, for signal-generator
    style open-loop runs.

    Integration aborts (record flagged, not raised) when the state leaves
    +-1e6 or turns non-finite, returning the samples accumulated so far.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if duration < 0:
        raise ValueError("duration must be >= 0")
    substeps = max(1, round(control_period / dt))
    if abs(substeps * dt - control_period) > 1e-9 * control_period:
        raise ValueError("control_period must be an integer multiple of dt")

    tau_fn = _scalar_torque_fn(cfg)
    deriv = _make_deriv(tau_fn, cfg, params, load)
    i_limit = params.max_current

    prescribed = load.kind == "prescribed"
    if prescribed:
        qfun, qdfun, _ = load.trajectory()

    n_ctrl = int(round(duration / control_period))
    n_samples = n_ctrl + 1
    cols = [np.zeros(n_samples) for _ in range(10)]
    (ts, ths, ws, qs, qds, betas, taues, tauds, ims, vds) = cols

    th, w = state0.theta, state0.theta_dot
    q, qd = state0.q, state0.q_dot
    if load.kind == "locked":
        q, qd = load.angle, 0.0
    elif prescribed:
        q, qd = qfun(state0.t), qdfun(state0.t)
    t = state0.t

    diverged = False
    reason = None
    h = dt
    filled = 0
    if continuous_input:
        def drv(tt, a, b, c, e, _unused):
            raw = current_fn(tt, None, 0.0)
            ii = raw.current if isinstance(raw, CurrentCommand) else float(raw)
            ii = min(max(ii, -i_limit), i_limit)
            return deriv(tt, a, b, c, e, ii)
    else:
        drv = deriv

    for k in range(n_samples):
        tau_e = tau_fn(th - q)
        cmd = current_fn(t, PlantState(th, w, q, qd, t), tau_e)
        if not isinstance(cmd, CurrentCommand):
            cmd = CurrentCommand(float(cmd))
        i_m = min(max(cmd.current, -i_limit), i_limit)

        ts[k], ths[k], ws[k], qs[k], qds[k] = t, th, w, q, qd
        betas[k], taues[k], tauds[k], ims[k], vds[k] = (
            th - q, tau_e, cmd.tau_d, i_m, cmd.velocity_command)
        filled = k + 1
        if k == n_ctrl:
            break

        for s in range(substeps):
            k1 = drv(t, th, w, q, qd, i_m)
            k2 = drv(t + 0.5 * h, th + 0.5 * h * k1[0], w + 0.5 * h * k1[1],
                     q + 0.5 * h * k1[2], qd + 0.5 * h * k1[3], i_m)
            k3 = drv(t + 0.5 * h, th + 0.5 * h * k2[0], w + 0.5 * h * k2[1],
                     q + 0.5 * h * k2[2], qd + 0.5 * h * k2[3], i_m)
            k4 = drv(t + h, th + h * k3[0], w + h * k3[1],
                     q + h * k3[2], qd + h * k3[3], i_m)
            th += h * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0
            w += h * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0
            q += h * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]) / 6.0
            qd += h * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]) / 6.0
            t += h

        t = state0.t + (k + 1) * control_period
        if prescribed:
            # pin the load to the commanded trajectory at sample instants
            q, qd = qfun(t), qdfun(t)

        bad = not all(math.isfinite(v) for v in (th, w, q, qd))
        if bad or max(abs(th), abs(w), abs(q), abs(qd)) > DIVERGENCE_LIMIT:
            diverged = True
            reason = ("non-finite state" if bad else "state exceeded divergence limit")
            reason += f" at t={t:.6g} s"
            break

    cols = [c[:filled] for c in cols]
    return SimRecord(*cols, diverged=diverged, abort_reason=reason,
                     meta={"dt": dt, "control_period": control_period})


def kinetic_energy(record: SimRecord, params: ActuatorParams, load: LoadModel):
    ke = 0.5 * params.reflected_inertia * record.theta_dot**2
    if load.kind == "inertial":
        ke = ke + 0.5 * load.inertia * record.q_dot**2
    return ke


def total_energy(record: SimRecord, cfg: ElasticConfig, params: ActuatorParams,
                 load: LoadModel):
    """Kinetic plus spring potential energy along the record (J)."""
    return kinetic_energy(record, params, load) + spring_potential_energy(cfg, record.beta)


def natural_frequency(cfg: ElasticConfig, params: ActuatorParams,
                      beta_op: float = 0.0) -> float:
    """Undamped locked-load natural frequency (Hz) at an operating point."""
    k = float(equivalent_stiffness(cfg, beta_op))
    return math.sqrt(k / params.reflected_inertia) / (2.0 * math.pi)


def linearized_bandwidth(cfg: ElasticConfig, params: ActuatorParams,
                         beta_op: float = 0.0) -> float:
    """-3 dB frequency (Hz) of the current-to-torque transfer function,
    linearized about ``beta_op`` with the load locked.

    G(s) = ratio*k_m*K / (J s^2 + B s + K); the crossing is taken relative
    to the DC gain, so it sits above the resonance for light damping.
    """
    k = float(equivalent_stiffness(cfg, beta_op))
    j = params.reflected_inertia
    b = params.ratio**2 * params.motor_damping + params.friction.viscous
    # |G|^2 / |G(0)|^2 = 1/2  =>  J^2 x^2 + (B^2 - 2JK) x - K^2 = 0, x = w^2
    c1 = b * b - 2.0 * j * k
    x = (-c1 + math.sqrt(c1 * c1 + 4.0 * j * j * k * k)) / (2.0 * j * j)
    return math.sqrt(x) / (2.0 * math.pi)
