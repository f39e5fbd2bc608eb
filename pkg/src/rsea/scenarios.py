"""Declarative scenario library reproducing the bench experiments.

Scenarios are JSON documents with unit-suffixed keys (see README for the
schema).  Omitted keys take prototype defaults; unknown keys are
rejected.  Every run writes its raw record as CSV plus a JSON summary
whose metrics are recomputable from the CSV.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis import (
    estimate_frequency_response,
    fit_quasi_static,
    rms_error,
    step_metrics,
)
from .control import CascadePiController, ControllerGains
from .elastic import (
    ElasticConfig,
    config_from_dict,
    config_to_dict,
    deflection_for_torque,
    max_feasible_deflection,
    output_torque,
)
from .plant import (
    ActuatorParams,
    CurrentCommand,
    FrictionModel,
    LoadModel,
    PlantState,
    SimRecord,
    integrate,
)
from .workspace import (
    DesignTarget,
    performance_bounds,
    search_configuration,
    sweep_offset,
    sweep_pretension,
)

KINDS = (
    "track_sine", "step", "collision", "quasi_static",
    "phri_passive", "phri_transparent", "phri_assistive",
    "bode_open", "bode_closed", "sweep_map", "design_search",
)

# Unpowered and human-interaction runs carry a friction model: the
# stick/slip behaviour of the unpowered drivetrain is what differentiates
# the stiffness profiles there (an ideal frictionless drivetrain reflects
# the same torque regardless of spring stiffness).
PHRI_FRICTION = {
    "kind": "viscous_coulomb",
    "viscous_nms_per_rad": 0.02,
    "coulomb_nm": 2.0,
    "smoothing_rad_per_s": 0.01,
}


class ScenarioValidationError(ValueError):
    pass


def _actuator_defaults(kind: str) -> dict:
    friction = dict(PHRI_FRICTION) if kind.startswith("phri") else {
        "kind": "none",
        "viscous_nms_per_rad": 0.0,
        "coulomb_nm": 0.0,
        "smoothing_rad_per_s": 0.01,
    }
    return {
        "motor_inertia_kg_m2": 3.06e-4,
        "motor_damping_nms_per_rad": 0.0,
        "torque_constant_nm_per_a": 0.44,
        "structure_inertia_kg_m2": 2.33e-5,
        "transmission_ratio": 2.0,
        "max_current_a": 34.0,
        "friction": friction,
    }


_LOAD_DEFAULTS = {"kind": "locked", "angle_deg": 0.0}

_KIND_DEFAULTS = {
    "track_sine": {"duration_s": 10.0, "amplitude_nm": 10.0, "frequency_hz": 0.3,
                   "load": dict(_LOAD_DEFAULTS), "torque_quantum_nm": 0.0},
    "step": {"duration_s": 2.0, "step_nm": 6.0, "step_time_s": 0.0,
             "load": dict(_LOAD_DEFAULTS), "torque_quantum_nm": 0.0},
    "collision": {"duration_s": 3.0, "hold_nm": 5.0, "release_time_s": 1.0,
                  "handle_inertia_kg_m2": 0.02, "handle_damping_nms_per_rad": 0.01,
                  "stop_angle_deg": 30.0, "torque_quantum_nm": 0.0},
    "quasi_static": {"noise_sigma_nm": 0.25, "sample_count": 60,
                     "free_parameters": ["stiffness"]},
    "phri_passive": {"duration_s": 12.0, "handle_amplitude_deg": 8.0,
                     "handle_frequency_hz": 0.25},
    "phri_transparent": {"duration_s": 15.0, "handle_amplitude_deg": 30.0,
                         "handle_frequency_hz": 0.2, "torque_quantum_nm": 0.0},
    "phri_assistive": {"duration_s": 15.0, "torque_nm": 5.0,
                       "handle_amplitude_deg": 30.0, "handle_frequency_hz": 0.2,
                       "torque_quantum_nm": 0.0},
    "bode_open": {"amplitude_nm": 1.0, "min_frequency_hz": 0.5,
                  "max_frequency_hz": 80.0, "points_per_decade": 10, "periods": 8},
    "bode_closed": {"amplitude_nm": 1.0, "min_frequency_hz": 0.5,
                    "max_frequency_hz": 80.0, "points_per_decade": 10, "periods": 8},
    "sweep_map": {"pretension_range_mm": [0.5, 6.5],
                  "offset_range_deg": [-31.4, 31.4],
                  "beta_range_deg": [-31.4, 31.4],
                  "config_resolution": 121, "beta_resolution": 181},
    "design_search": {"target": {"samples": [[10.0, 1.0], [20.0, 4.0], [31.4, 15.0]],
                                 "weights": None,
                                 "pairs_range": [1, 6],
                                 "pretension_range_mm": [0.5, 6.5],
                                 "offset_range_deg": [0.0, 20.0]}},
}

_BODE_DT = 2e-4


def default_document(kind: str = "track_sine") -> dict:
    """Fully explicit scenario document with every default filled in."""
    if kind not in KINDS:
        raise ScenarioValidationError(f"scenario.kind: unknown kind {kind!r}")
    doc = {
        "kind": kind,
        "label": kind,
        "seed": 0,
        "plant_dt_s": _BODE_DT if kind.startswith("bode") else 1e-4,
        "config": config_to_dict(ElasticConfig()),
        "actuator": _actuator_defaults(kind),
        "gains": ControllerGains().to_dict(),
    }
    doc.update(json.loads(json.dumps(_KIND_DEFAULTS[kind])))
    return doc


@dataclass
class Scenario:
    kind: str
    label: str
    seed: int
    plant_dt: float
    config: ElasticConfig
    actuator: ActuatorParams
    gains: ControllerGains
    document: dict = field(repr=False, default_factory=dict)
    params: dict = field(default_factory=dict)


def _merge(defaults: dict, given: dict, path: str, raw_keys=()) -> dict:
    if not isinstance(given, dict):
        raise ScenarioValidationError(f"{path}: expected an object")
    unknown = set(given) - set(defaults)
    if unknown:
        raise ScenarioValidationError(f"{path}: unknown key(s) {sorted(unknown)!r}")
    merged = {}
    for key, dval in defaults.items():
        if key in given and isinstance(dval, dict) and key not in raw_keys:
            merged[key] = _merge(dval, given[key], f"{path}.{key}")
        elif key in given:
            merged[key] = given[key]
        else:
            merged[key] = dval
    return merged


def _parse_actuator(doc: dict) -> ActuatorParams:
    fr = doc["friction"]
    try:
        friction = FrictionModel(kind=fr["kind"],
                                 viscous=float(fr["viscous_nms_per_rad"]),
                                 coulomb=float(fr["coulomb_nm"]),
                                 smoothing=float(fr["smoothing_rad_per_s"]))
        return ActuatorParams(
            motor_inertia=float(doc["motor_inertia_kg_m2"]),
            motor_damping=float(doc["motor_damping_nms_per_rad"]),
            torque_constant=float(doc["torque_constant_nm_per_a"]),
            structure_inertia=float(doc["structure_inertia_kg_m2"]),
            ratio=float(doc["transmission_ratio"]),
            max_current=float(doc["max_current_a"]),
            friction=friction,
        )
    except ValueError as exc:
        raise ScenarioValidationError(f"scenario.actuator: {exc}") from None


def _parse_load(doc: dict, path: str) -> LoadModel:
    kind = doc.get("kind", "locked")
    schemas = {
        "locked": {"kind": "locked", "angle_deg": 0.0},
        "prescribed": {"kind": "prescribed", "amplitude_deg": 0.0,
                       "frequency_hz": 0.0, "phase_deg": 0.0},
        "inertial": {"kind": "inertial", "inertia_kg_m2": 0.02,
                     "damping_nms_per_rad": 0.0, "external_torque_nm": 0.0,
                     "stop_angle_deg": None},
    }
    if kind not in schemas:
        raise ScenarioValidationError(f"{path}.kind: unknown load kind {kind!r}")
    merged = _merge(schemas[kind], doc, path)
    try:
        if kind == "locked":
            return LoadModel.locked(math.radians(float(merged["angle_deg"])))
        if kind == "prescribed":
            return LoadModel.prescribed_sine(
                math.radians(float(merged["amplitude_deg"])),
                float(merged["frequency_hz"]),
                math.radians(float(merged["phase_deg"])))
        stop = merged["stop_angle_deg"]
        return LoadModel.inertial(
            float(merged["inertia_kg_m2"]),
            damping=float(merged["damping_nms_per_rad"]),
            external_torque=float(merged["external_torque_nm"]),
            stop_angle=None if stop is None else math.radians(float(stop)))
    except ValueError as exc:
        raise ScenarioValidationError(f"{path}: {exc}") from None


def validate_config(document: dict) -> Scenario:
    """Parse and check a scenario document, filling defaults.

    Raises ScenarioValidationError with a path-qualified message for
    unknown keys or invariant violations.
    """
    if not isinstance(document, dict):
        raise ScenarioValidationError("scenario: expected a JSON object")
    kind = document.get("kind", "track_sine")
    if kind not in KINDS:
        raise ScenarioValidationError(
            f"scenario.kind: unknown kind {kind!r}; choose from {sorted(KINDS)}")
    defaults = default_document(kind)
    # the load schema depends on its own "kind", so it merges separately
    merged = _merge(defaults, document, "scenario", raw_keys=("load",))

    try:
        config = config_from_dict(merged["config"])
    except ValueError as exc:
        raise ScenarioValidationError(f"scenario.config: {exc}") from None
    actuator = _parse_actuator(merged["actuator"])
    try:
        gains = ControllerGains.from_dict(merged["gains"])
    except ValueError as exc:
        raise ScenarioValidationError(f"scenario.gains: {exc}") from None

    params = {k: v for k, v in merged.items()
              if k not in ("kind", "label", "seed", "plant_dt_s",
                           "config", "actuator", "gains")}
    if "load" in params:
        params["load"] = _parse_load(merged["load"], "scenario.load")
    if "duration_s" in params and not params["duration_s"] > 0:
        raise ScenarioValidationError("scenario.duration_s: must be > 0")
    if merged["plant_dt_s"] <= 0:
        raise ScenarioValidationError("scenario.plant_dt_s: must be > 0")
    if kind == "quasi_static":
        if params["sample_count"] < 9:
            raise ScenarioValidationError("scenario.sample_count: must be >= 9")
        if params["noise_sigma_nm"] < 0:
            raise ScenarioValidationError("scenario.noise_sigma_nm: must be >= 0")
        bad = set(params["free_parameters"]) - {"stiffness", "pretension", "offset"}
        if bad:
            raise ScenarioValidationError(
                f"scenario.free_parameters: unknown parameter(s) {sorted(bad)}")
    if kind == "step" and params["step_nm"] == 0:
        raise ScenarioValidationError("scenario.step_nm: must be nonzero")
    if kind.startswith("bode"):
        if params["amplitude_nm"] <= 0:
            raise ScenarioValidationError("scenario.amplitude_nm: must be > 0")
        if not 0 < params["min_frequency_hz"] < params["max_frequency_hz"]:
            raise ScenarioValidationError(
                "scenario.min_frequency_hz/max_frequency_hz: need 0 < min < max")
        if params["periods"] < 3:
            raise ScenarioValidationError("scenario.periods: must be >= 3")

    return Scenario(kind=kind, label=str(merged["label"]), seed=int(merged["seed"]),
                    plant_dt=float(merged["plant_dt_s"]), config=config,
                    actuator=actuator, gains=gains, document=merged, params=params)


@dataclass
class RunSummary:
    kind: str
    label: str
    status: str
    metrics: dict
    outputs: dict
    provenance: dict
    scenario: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "status": self.status,
            "metrics": self.metrics,
            "outputs": self.outputs,
            "provenance": self.provenance,
            "scenario": self.scenario,
        }


def _provenance(scenario: Scenario) -> dict:
    canon = json.dumps(scenario.document, sort_keys=True)
    return {
        "version": __version__,
        "config_sha256": hashlib.sha256(canon.encode()).hexdigest()[:16],
        "seed": scenario.seed,
    }


def _controller_fn(controller: CascadePiController, tau_d_fn, quantum: float = 0.0):
    def fn(t, state, tau_e):
        if quantum > 0.0:
            tau_e = round(tau_e / quantum) * quantum
        tau_d = tau_d_fn(t)
        current = controller.step(tau_d, tau_e, state.theta)
        return CurrentCommand(current, tau_d, controller.velocity_command)
    return fn


def _write_summary(summary: RunSummary, out_dir):
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w") as fh:
        json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
    summary.outputs["summary_json"] = path


def _finish(scenario, record, out_dir, metrics, extra_outputs=None):
    os.makedirs(out_dir, exist_ok=True)
    outputs = dict(extra_outputs or {})
    if record is not None:
        path = os.path.join(out_dir, "record.csv")
        record.to_csv(path)
        outputs["record_csv"] = path
    status = "diverged" if (record is not None and record.diverged) else "ok"
    if status == "diverged":
        metrics = dict(metrics)
        metrics["abort_reason"] = record.abort_reason
    summary = RunSummary(kind=scenario.kind, label=scenario.label, status=status,
                         metrics=metrics, outputs=outputs,
                         provenance=_provenance(scenario),
                         scenario=scenario.document)
    _write_summary(summary, out_dir)
    return summary


def run(scenario: Scenario, out_dir: str = "rsea_out") -> RunSummary:
    """Execute one scenario, write its outputs, and summarize the metrics."""
    runner = _RUNNERS[scenario.kind]
    return runner(scenario, out_dir)


def _run_track_sine(sc: Scenario, out_dir):
    p = sc.params
    amp, freq = float(p["amplitude_nm"]), float(p["frequency_hz"])
    controller = CascadePiController(sc.gains, drive_gain=sc.actuator.drive_gain)
    tau_d_fn = lambda t: amp * math.sin(2.0 * math.pi * freq * t)
    fn = _controller_fn(controller, tau_d_fn, float(p["torque_quantum_nm"]))
    record = integrate(PlantState(), fn, sc.config, sc.actuator, p["load"],
                       dt=sc.plant_dt, duration=float(p["duration_s"]),
                       control_period=sc.gains.sample_period)
    metrics = {
        "rms_torque_error_nm": rms_error(record.t, record.tau_e, tau_d_fn),
        "max_current_a": float(np.abs(record.i_m).max()),
        "max_deflection_rad": float(np.abs(record.beta).max()),
    }
    return _finish(sc, record, out_dir, metrics)


def _run_step(sc: Scenario, out_dir):
    p = sc.params
    step, t0 = float(p["step_nm"]), float(p["step_time_s"])
    controller = CascadePiController(sc.gains, drive_gain=sc.actuator.drive_gain)
    tau_d_fn = lambda t: step if t >= t0 else 0.0
    fn = _controller_fn(controller, tau_d_fn, float(p["torque_quantum_nm"]))
    record = integrate(PlantState(), fn, sc.config, sc.actuator, p["load"],
                       dt=sc.plant_dt, duration=float(p["duration_s"]),
                       control_period=sc.gains.sample_period)
    metrics = step_metrics(record.t, record.tau_e, step, step_time=t0).to_dict()
    metrics["step_nm"] = step
    return _finish(sc, record, out_dir, metrics)


def _run_collision(sc: Scenario, out_dir):
    """Hold a constant torque against a locked output, release the load to
    a free handle that crashes into a hard stop, and time the recovery."""
    p = sc.params
    hold = float(p["hold_nm"])
    t_rel = float(p["release_time_s"])
    duration = float(p["duration_s"])
    controller = CascadePiController(sc.gains, drive_gain=sc.actuator.drive_gain)
    fn = _controller_fn(controller, lambda t: hold, float(p["torque_quantum_nm"]))

    phase1 = integrate(PlantState(), fn, sc.config, sc.actuator, LoadModel.locked(),
                       dt=sc.plant_dt, duration=min(t_rel, duration),
                       control_period=sc.gains.sample_period)
    if t_rel >= duration or phase1.diverged:
        record = phase1
    else:
        handle = LoadModel.inertial(float(p["handle_inertia_kg_m2"]),
                                    damping=float(p["handle_damping_nms_per_rad"]),
                                    stop_angle=math.radians(float(p["stop_angle_deg"])))
        state = PlantState(theta=float(phase1.theta[-1]),
                           theta_dot=float(phase1.theta_dot[-1]),
                           q=float(phase1.q[-1]), q_dot=float(phase1.q_dot[-1]),
                           t=float(phase1.t[-1]))
        phase2 = integrate(state, fn, sc.config, sc.actuator, handle,
                           dt=sc.plant_dt, duration=duration - t_rel,
                           control_period=sc.gains.sample_period)
        fields = {}
        for name in ("t", "theta", "theta_dot", "q", "q_dot", "beta",
                     "tau_e", "tau_d", "i_m", "theta_dot_d"):
            fields[name] = np.concatenate([getattr(phase1, name),
                                           getattr(phase2, name)[1:]])
        record = SimRecord(**fields, diverged=phase2.diverged,
                           abort_reason=phase2.abort_reason, meta=phase1.meta)

    released = t_rel < duration
    # without a release there is nothing to recover from; report the
    # steadiness of the hold over the settled tail instead
    after = record.t >= (t_rel if released else 0.5 * duration)
    band = 0.05 * abs(hold)
    recovery = 0.0
    if released:
        recovery = math.inf
        t_after = record.t[after]
        inside = np.abs(record.tau_e[after] - hold) <= band
        for i in range(len(t_after)):
            if inside[i:].all():
                recovery = float(t_after[i] - t_rel)
                break
    metrics = {
        "hold_nm": hold,
        "release_time_s": t_rel,
        "recovery_time_s": recovery,
        "min_torque_nm": float(record.tau_e[after].min()),
        "max_torque_nm": float(record.tau_e[after].max()),
    }
    return _finish(sc, record, out_dir, metrics)


def collision_scenario(scenario: Scenario, out_dir: str = "rsea_out") -> RunSummary:
    if scenario.kind != "collision":
        raise ScenarioValidationError("collision_scenario needs kind == 'collision'")
    return _run_collision(scenario, out_dir)


def _run_quasi_static(sc: Scenario, out_dir):
    """Synthetic torque-deflection measurement and model fit."""
    p = sc.params
    sigma = float(p["noise_sigma_nm"])
    n = int(p["sample_count"])
    rng = np.random.default_rng(sc.seed)
    lim = max_feasible_deflection(sc.config)
    betas = np.linspace(-lim, lim, n)
    torques = output_torque(sc.config, betas) + rng.normal(0.0, sigma, size=n)
    report = fit_quasi_static(betas, torques, sc.config,
                              free=tuple(p["free_parameters"]))
    os.makedirs(out_dir, exist_ok=True)
    samples_path = os.path.join(out_dir, "samples.csv")
    with open(samples_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["beta_rad", "torque_nm"])
        for b, tq in zip(betas, torques):
            writer.writerow([repr(float(b)), repr(float(tq))])
    metrics = report.to_dict()
    metrics["noise_sigma_nm"] = sigma
    return _finish(sc, None, out_dir, metrics,
                   extra_outputs={"samples_csv": samples_path})


NAN_TAU = float("nan")


def _run_phri(sc: Scenario, out_dir):
    """Prescribed handle motion in passive, transparent or assistive mode."""
    p = sc.params
    amp = math.radians(float(p["handle_amplitude_deg"]))
    freq = float(p["handle_frequency_hz"])
    load = LoadModel.prescribed_sine(amp, freq)
    tau_d = float(p.get("torque_nm", 0.0))
    if sc.kind == "phri_passive":
        fn = lambda t, state, tau_e: CurrentCommand(0.0, NAN_TAU, NAN_TAU)
    else:
        controller = CascadePiController(sc.gains, drive_gain=sc.actuator.drive_gain)
        fn = _controller_fn(controller, lambda t: tau_d,
                            float(p.get("torque_quantum_nm", 0.0)))
    record = integrate(PlantState(), fn, sc.config, sc.actuator, load,
                       dt=sc.plant_dt, duration=float(p["duration_s"]),
                       control_period=sc.gains.sample_period)
    if sc.kind == "phri_assistive" and tau_d != 0.0:
        beta_ref = deflection_for_torque(sc.config, tau_d)
    else:
        beta_ref = 0.0
    rms_tau = rms_error(record.t, record.tau_e, tau_d)
    rms_beta = rms_error(record.t, record.beta, beta_ref)
    metrics = {
        "rms_torque_error_nm": rms_tau,
        "rms_deflection_error_rad": rms_beta,
        "rms_deflection_error_deg": math.degrees(rms_beta),
        "commanded_torque_nm": tau_d,
    }
    return _finish(sc, record, out_dir, metrics)


def _run_bode(sc: Scenario, out_dir):
    p = sc.params
    amp = float(p["amplitude_nm"])
    fmin, fmax = float(p["min_frequency_hz"]), float(p["max_frequency_hz"])
    n_points = max(2, int(math.ceil(p["points_per_decade"] * math.log10(fmax / fmin))) + 1)
    freqs = np.geomspace(fmin, fmax, n_points)
    periods = int(p["periods"])
    open_loop = sc.kind == "bode_open"
    beta_limit = sc.config.max_deflection
    control_period = sc.gains.sample_period

    def point(f, amplitude, n_periods):
        duration = round(n_periods / f / control_period) * control_period
        om = 2.0 * math.pi * f
        if open_loop:
            amp_i = amplitude / sc.actuator.drive_gain

            def fn(t, state, tau_e):
                return CurrentCommand(amp_i * math.sin(om * t))

            record = integrate(PlantState(), fn, sc.config, sc.actuator,
                               LoadModel.locked(), dt=sc.plant_dt,
                               duration=duration, control_period=control_period,
                               continuous_input=True)
            u = record.i_m * sc.actuator.drive_gain
        else:
            controller = CascadePiController(sc.gains, drive_gain=sc.actuator.drive_gain)
            fn = _controller_fn(controller,
                                lambda t: amplitude * math.sin(om * t))
            record = integrate(PlantState(), fn, sc.config, sc.actuator,
                               LoadModel.locked(), dt=sc.plant_dt,
                               duration=duration, control_period=control_period)
            u = record.tau_d
        violated = record.diverged or bool(np.any(np.abs(record.beta) > beta_limit))
        return record.t, u, record.tau_e, violated

    response = estimate_frequency_response(point, amp, freqs, periods=periods)
    os.makedirs(out_dir, exist_ok=True)
    resp_path = os.path.join(out_dir, "response.csv")
    response.to_csv(resp_path)
    metrics = {
        "bandwidth_hz": response.bandwidth(),
        "amplitude_nm": amp,
        "n_points": len(freqs),
        "n_valid_points": int(response.valid.sum()),
    }
    return _finish(sc, None, out_dir, metrics,
                   extra_outputs={"response_csv": resp_path})


def _run_sweep_map(sc: Scenario, out_dir):
    p = sc.params
    dl_range = tuple(v * 1e-3 for v in p["pretension_range_mm"])
    phi_range = tuple(math.radians(v) for v in p["offset_range_deg"])
    beta_range = tuple(math.radians(v) for v in p["beta_range_deg"])
    res = (int(p["config_resolution"]), int(p["beta_resolution"]))
    spring = sc.config.spring
    pairs = sc.config.pairs
    pre = sweep_pretension(spring, pairs, pretension_range=dl_range,
                           beta_range=beta_range, resolution=res,
                           max_deflection=sc.config.max_deflection)
    off = sweep_offset(spring, pairs, pretension=sc.config.pretension,
                       offset_range=phi_range, beta_range=beta_range,
                       resolution=res, max_deflection=sc.config.max_deflection)
    os.makedirs(out_dir, exist_ok=True)
    pre_path = os.path.join(out_dir, "pretension_map.csv")
    off_path = os.path.join(out_dir, "offset_map.csv")
    pre.to_csv(pre_path)
    off.to_csv(off_path)
    metrics = {
        "pretension": performance_bounds(pre).to_dict(),
        "offset": performance_bounds(off).to_dict(),
    }
    return _finish(sc, None, out_dir, metrics,
                   extra_outputs={"pretension_map_csv": pre_path,
                                  "offset_map_csv": off_path})


def _run_design_search(sc: Scenario, out_dir):
    t = sc.params["target"]
    samples = np.asarray(t["samples"], dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise ScenarioValidationError(
            "scenario.target.samples: expected [[beta_deg, torque_nm], ...]")
    target = DesignTarget(
        betas=np.radians(samples[:, 0]),
        torques=samples[:, 1],
        weights=None if t["weights"] is None else np.asarray(t["weights"], dtype=float),
        pairs_range=tuple(t["pairs_range"]),
        pretension_range=tuple(v * 1e-3 for v in t["pretension_range_mm"]),
        offset_range=tuple(math.radians(v) for v in t["offset_range_deg"]),
        spring=sc.config.spring,
    )
    result = search_configuration(target)
    metrics = {
        "residual_rms_nm": result.residual_rms,
        "config": config_to_dict(result.config),
    }
    return _finish(sc, None, out_dir, metrics)


_RUNNERS = {
    "track_sine": _run_track_sine,
    "step": _run_step,
    "collision": _run_collision,
    "quasi_static": _run_quasi_static,
    "phri_passive": _run_phri,
    "phri_transparent": _run_phri,
    "phri_assistive": _run_phri,
    "bode_open": _run_bode,
    "bode_closed": _run_bode,
    "sweep_map": _run_sweep_map,
    "design_search": _run_design_search,
}


def batch(documents, out_dir: str = "rsea_out") -> list:
    """Run a list of scenario documents, isolating individual failures.

    Writes each run into its own subdirectory plus an aggregate
    ``batch_summary.json`` comparing metrics across runs.
    """
    if not documents:
        raise ScenarioValidationError("batch needs at least one scenario")
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    summaries = []
    for idx, doc in enumerate(documents):
        try:
            scenario = validate_config(doc)
            sub = os.path.join(out_dir, f"{idx:02d}_{scenario.label}")
            summary = run(scenario, sub)
            summaries.append(summary)
            entries.append(summary.to_dict())
        except Exception as exc:  # isolate per-entry failures
            entries.append({"index": idx, "status": "error", "error": str(exc),
                            "kind": doc.get("kind") if isinstance(doc, dict) else None})
    comparison = {}
    for entry in entries:
        if entry.get("status") != "ok":
            continue
        kind = entry["kind"]
        comparison.setdefault(kind, {})[entry["label"]] = {
            k: v for k, v in entry["metrics"].items()
            if isinstance(v, (int, float)) and not isinstance(v, bool)
        }
    report = {"runs": entries, "comparison": comparison,
              "version": __version__}
    with open(os.path.join(out_dir, "batch_summary.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    return summaries
