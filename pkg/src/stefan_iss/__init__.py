"""Stefan problem simulator with backstepping boundary control and ISS checks.

One- and two-phase melting with an unknown heat-loss disturbance: explicit
finite differences on boundary-immobilized grids, feedback/open-loop flux
controllers, energy identities, backstepping transforms, Lyapunov and
disturbance-to-state norm envelopes, and model-validity monitors.
"""

from .core import (
    AssumptionCheck,
    AssumptionReport,
    DerivedCoefficients,
    DisturbanceSpec,
    LinearProfile,
    NumericalBlowup,
    OnePhaseState,
    PhaseDisappeared,
    PhaseProperties,
    Scenario,
    ScenarioError,
    TabulatedProfile,
    Trajectory,
    TwoPhaseState,
    ZINC,
    check_assumptions,
    derive_coefficients,
    eval_initial_profile,
    load_scenario,
    sample_initial_profile,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .control import (
    ControllerConfig,
    closed_loop_flux_1p,
    closed_loop_flux_2p,
    flux_equivalence_residual,
    initial_feedback_flux,
    open_loop_flux,
)
from .analysis import (
    ISSEnvelope,
    KernelParams,
    ValidityViolation,
    choose_transform_parameter,
    decay_rate_1p,
    decay_rate_2p,
    direct_transform,
    energy_balance_residual,
    error_norm_1p,
    error_norm_2p,
    fit_envelope,
    fit_iss_envelope,
    internal_energy_1p,
    internal_energy_2p,
    inverse_transform,
    kernel_params,
    lyapunov_value,
    negativity_tolerance,
    reduced_interface_error,
    transform_margin,
    validity_monitor,
)
from .solver_one_phase import StepDiagnostics, interface_gradient, run, step
from .solver_two_phase import StepDiagnostics2, run2, step2
from . import oracle

__version__ = "0.1.0"
