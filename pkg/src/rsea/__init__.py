"""Reconfigurable rotary series elastic actuator: modelling, simulation
and design exploration."""

__version__ = "0.1.0"

from .elastic import (
    ElasticConfig,
    SpringSpec,
    SpringState,
    TorqueRangeError,
    UnsupportedConfigError,
    config_from_dict,
    config_to_dict,
    deflection_for_torque,
    default_config,
    equivalent_stiffness,
    is_feasible,
    max_feasible_deflection,
    nonlinearity_preset,
    offset_config,
    outer_radius,
    output_torque,
    spring_potential_energy,
    spring_state,
)
from .workspace import (
    DesignTarget,
    InfeasibleRegionError,
    PerformanceBounds,
    SearchError,
    StiffnessMap,
    classify_stiffness_profile,
    linearity_index,
    performance_bounds,
    search_configuration,
    sweep_offset,
    sweep_pretension,
)
from .plant import (
    ActuatorParams,
    CurrentCommand,
    FrictionModel,
    LoadModel,
    PlantState,
    SimRecord,
    integrate,
    linearized_bandwidth,
    natural_frequency,
    plant_derivative,
    total_energy,
)
from .control import CascadePiController, ControllerGains, VelocityFilter
from .analysis import (
    FitReport,
    FrequencyResponse,
    IdentifiabilityError,
    StepMetrics,
    estimate_frequency_response,
    fit_quasi_static,
    rms_error,
    step_metrics,
)
from .scenarios import (
    RunSummary,
    Scenario,
    ScenarioValidationError,
    batch,
    collision_scenario,
    default_document,
    run,
    validate_config,
)
