"""Time integration of the one-phase problem on a boundary-immobilized grid.

The liquid occupies [0, s(t)]; mapping xi = x/s(t) fixes the domain to the
unit interval at the price of a grid-advection term.  Stepping is explicit
Euler with the interface ODE advanced from the gradient at step start
(temperature first, then s); the advection velocity lags by one step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels, analysis
from .control import ControllerConfig, closed_loop_flux_1p
from .core import (
    DisturbanceSpec,
    NumericalBlowup,
    OnePhaseState,
    PhaseProperties,
    Scenario,
    ScenarioError,
    Trajectory,
    derive_coefficients,
    sample_initial_profile,
)

__all__ = ["StepDiagnostics", "step", "interface_gradient", "run",
           "PHASE_FLOOR_FRACTION"]

# run() stops early once s shrinks below this fraction of s0 (the
# immobilized grid degenerates as s -> 0).
PHASE_FLOOR_FRACTION = 1e-3


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-step solver diagnostics.

    interface_velocity  s_dot [m/s]
    interface_flux      -k dT/dx at x = s [W/m^2]
    boundary_temp       T(0) - T_m after the step [K]
    cfl                 diffusive stability ratio actually used (<= 1)
    used_upwind         advective fallback triggered this step
    """

    interface_velocity: float
    interface_flux: float
    boundary_temp: float
    cfl: float
    used_upwind: bool = False


def interface_gradient(state: OnePhaseState, props: PhaseProperties) -> float:
    """Interface heat flux -k dT/dx at x = s [W/m^2].

    Second-order one-sided (three-point) difference at xi = 1, scaled by
    1/s; exact for profiles quadratic in xi.
    """
    if state.n_cells < 3:
        raise ValueError("interface gradient needs at least 3 cells")
    return float(_kernels.interface_flux_liquid(np.ascontiguousarray(state.u),
                                                state.s, props.conductivity))


def step(state: OnePhaseState, q_c: float, q_f: float, dt: float,
         props: PhaseProperties, s_dot_prev: float = 0.0,
         dirichlet_value: Optional[float] = None):
    """Advance the immobilized system by one explicit Euler step.

    q_c is the Neumann inflow at x = 0 unless ``dirichlet_value`` pins the
    boundary temperature excess instead (validation mode).  ``s_dot_prev``
    feeds the lagged grid-advection velocity; chain it from the previous
    step's diagnostics.  Returns (new_state, StepDiagnostics).

    Raises PhaseDisappeared when the step drives s <= 0 and NumericalBlowup
    on non-finite values.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    d = derive_coefficients(props)
    u = np.ascontiguousarray(state.u)
    u_new = np.empty_like(u)
    if dirichlet_value is None:
        bc_mode, bc_value = 0, float(q_c)
    else:
        bc_mode, bc_value = 1, float(dirichlet_value)
    s_new, s_dot, flux, _, _, upwind = _kernels.step_1p_kernel(
        u, u_new, state.s, s_dot_prev, bc_mode, bc_value, float(q_f), dt,
        d.alpha, d.beta, props.conductivity)
    t_new = state.t + dt
    if not (math.isfinite(s_new) and bool(np.all(np.isfinite(u_new)))):
        raise NumericalBlowup(t_new)
    if s_new <= 0.0:
        from .core import PhaseDisappeared
        raise PhaseDisappeared(t_new, s_new)
    n = state.n_cells
    diag = StepDiagnostics(
        interface_velocity=s_dot,
        interface_flux=flux,
        boundary_temp=float(u_new[0]),
        cfl=dt * 2.0 * d.alpha * n * n / (state.s * state.s),
        used_upwind=bool(upwind),
    )
    return OnePhaseState(t=t_new, s=s_new, u=u_new), diag


def _disturbance_kernel_args(dist: DisturbanceSpec):
    kind = _kernels.DIST_CODE[dist.kind]
    if dist.kind == "table":
        return kind, 0.0, 0.0, np.ascontiguousarray(dist.times), \
            np.ascontiguousarray(dist.values)
    return kind, dist.qf_bar, dist.decay, _kernels._EMPTY, _kernels._EMPTY


def run(scenario: Scenario, controller: Optional[ControllerConfig] = None,
        disturbance: Optional[DisturbanceSpec] = None) -> Trajectory:
    """Integrate the scenario from t0 to t_final, one snapshot per cadence
    interval (plus the initial condition).

    The controller defaults to the scenario's mode; a closed-loop flux is
    re-evaluated every internal step from the current state.  Terminates
    early with a recorded reason once s falls below PHASE_FLOOR_FRACTION*s0;
    raises NumericalBlowup (with the failure time) on non-finite values.
    """
    if scenario.two_phase:
        raise ScenarioError("two-phase scenario: use solver_two_phase.run2")
    cfg = controller if controller is not None else ControllerConfig.from_scenario(scenario)
    dist = disturbance if disturbance is not None else scenario.disturbance
    props = scenario.liquid
    d = derive_coefficients(props)

    u0 = sample_initial_profile(scenario, "liquid")
    u0[-1] = 0.0
    snap_times = scenario.snapshot_times()

    ctrl_code = _kernels.CTRL_CODE[cfg.mode]
    q0_open = 0.0
    if cfg.mode == "open-loop":
        if cfg.q0 is not None:
            q0_open = cfg.q0
        else:
            q0_open = closed_loop_flux_1p(
                OnePhaseState(t=scenario.t0, s=scenario.s0, u=u0), props, cfg)
    delta = cfg.delta_T if cfg.delta_T is not None else 0.0
    kind, qf_bar, qf_decay, table_t, table_v = _disturbance_kernel_args(dist)
    fixed_dt = scenario.dt if scenario.dt is not None else 0.0

    (status, fail_time, recorded, n_steps, max_cfl, min_u,
     prof, s_arr, qc_arr, qf_arr, e_arr, bt_arr, qin_arr) = _kernels.run_1p_kernel(
        u0, scenario.s0, snap_times,
        d.alpha, d.beta, props.conductivity,
        props.volumetric_heat_capacity, d.gamma,
        ctrl_code, cfg.gain, cfg.setpoint, q0_open, delta,
        kind, qf_bar, qf_decay, table_t, table_v,
        scenario.safety, fixed_dt, PHASE_FLOOR_FRACTION * scenario.s0)

    if status == _kernels.STATUS_BLOWUP:
        raise NumericalBlowup(fail_time)

    sl = slice(0, recorded)
    times = snap_times[sl]
    interface = s_arr[sl]
    profiles = prof[sl]

    epsilon = analysis.choose_transform_parameter(props, cfg.gain, cfg.setpoint)
    kp = analysis.kernel_params(props, cfg.gain, epsilon)
    psi = analysis.error_norm_series_1p(interface, profiles, cfg.setpoint)
    lyap = analysis.lyapunov_series_1p(interface, profiles, cfg.setpoint, kp)
    tol = analysis.negativity_tolerance(float(np.max(np.abs(u0))))
    _, flags = analysis._scan_validity(
        "one-phase", cfg.mode, times, interface, qc_arr[sl], profiles, None,
        cfg.setpoint, None, tol)

    phase_gone = status == _kernels.STATUS_PHASE_GONE
    return Trajectory(
        scenario=scenario,
        variant="one-phase",
        times=times,
        interface=interface,
        heat_input=qc_arr[sl],
        heat_loss=qf_arr[sl],
        energy=e_arr[sl],
        lyapunov=lyap,
        error_norm=psi,
        boundary_temp=bt_arr[sl],
        liquid_profiles=profiles,
        valid=flags,
        energy_inflow=qin_arr[sl],
        termination="phase-disappeared" if phase_gone else "completed",
        termination_time=fail_time if phase_gone else None,
        min_liquid_temp=min_u,
        max_cfl=max_cfl,
        n_steps=n_steps,
    )
