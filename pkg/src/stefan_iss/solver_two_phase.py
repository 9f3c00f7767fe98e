"""Time integration of the two-phase system with separately immobilized grids.

The liquid lives on xi = x/s as in the one-phase solver; the solid lives on
eta = (x - s)/(L - s) with a Dirichlet melting-temperature condition at the
interface and the heat loss imposed as a Neumann flux at x = L.  Both phases
share a single clock: the step size is the minimum of the two stability
limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels, analysis
from .control import ControllerConfig, closed_loop_flux_2p
from .core import (
    DisturbanceSpec,
    NumericalBlowup,
    PhaseDisappeared,
    PhaseProperties,
    Scenario,
    ScenarioError,
    Trajectory,
    TwoPhaseState,
    derive_coefficients,
    sample_initial_profile,
)
from .solver_one_phase import PHASE_FLOOR_FRACTION, _disturbance_kernel_args

__all__ = ["StepDiagnostics2", "step2", "run2"]


@dataclass(frozen=True)
class StepDiagnostics2:
    """Per-step diagnostics of the coupled step.

    liquid_interface_flux  -k_l dT_l/dx at x = s [W/m^2]
    solid_interface_flux   +k_s dT_s/dx at x = s [W/m^2]
    (their sum over gamma is the interface velocity)
    """

    interface_velocity: float
    liquid_interface_flux: float
    solid_interface_flux: float
    boundary_temp: float
    far_temp: float
    cfl: float
    used_upwind: bool = False


def step2(state: TwoPhaseState, q_c: float, q_f: float, dt: float,
          props_l: PhaseProperties, props_s: PhaseProperties,
          s_dot_prev: float = 0.0):
    """One explicit Euler step of the coupled PDE-ODE-PDE system.

    Liquid: Neumann inflow q_c at x = 0, melting temperature at x = s.
    Solid: melting temperature at x = s, outflow dT/dx(L) = -q_f/k_s.
    Interface: gamma s_dot = -k_l dT_l/dx(s) + k_s dT_s/dx(s), one-sided
    gradients from each side, no averaging.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    d_l = derive_coefficients(props_l)
    d_s = derive_coefficients(props_s)
    gamma = d_l.gamma
    u_l = np.ascontiguousarray(state.u_l)
    u_s = np.ascontiguousarray(state.u_s)
    buf_l = np.empty_like(u_l)
    buf_s = np.empty_like(u_s)
    s_new, s_dot, flux_l, grad_s, _, _, _, _, upwind = _kernels.step_2p_kernel(
        u_l, buf_l, u_s, buf_s, state.s, state.length, s_dot_prev,
        float(q_c), float(q_f), dt, d_l.alpha, props_l.conductivity,
        d_s.alpha, props_s.conductivity, gamma)
    t_new = state.t + dt
    if not (math.isfinite(s_new) and bool(np.all(np.isfinite(buf_l)))
            and bool(np.all(np.isfinite(buf_s)))):
        raise NumericalBlowup(t_new)
    if not (0.0 < s_new < state.length):
        raise PhaseDisappeared(t_new, s_new)
    nl = state.n_cells_liquid
    ns = state.n_cells_solid
    w = state.length - state.s
    cfl = max(dt * 2.0 * d_l.alpha * nl * nl / (state.s * state.s),
              dt * 2.0 * d_s.alpha * ns * ns / (w * w))
    diag = StepDiagnostics2(
        interface_velocity=s_dot,
        liquid_interface_flux=flux_l,
        solid_interface_flux=grad_s,
        boundary_temp=float(buf_l[0]),
        far_temp=float(buf_s[-1]),
        cfl=cfl,
        used_upwind=bool(upwind),
    )
    new_state = TwoPhaseState(t=t_new, s=s_new, length=state.length,
                              u_l=buf_l, u_s=buf_s)
    return new_state, diag


def run2(scenario: Scenario, controller: Optional[ControllerConfig] = None,
         disturbance: Optional[DisturbanceSpec] = None) -> Trajectory:
    """Two-phase companion of solver_one_phase.run.

    Terminates early (recorded, not raised) when the interface approaches
    either end of the domain; raises NumericalBlowup on non-finite values.
    Controller modes: closed-loop or open-loop.
    """
    if not scenario.two_phase:
        raise ScenarioError("one-phase scenario: use solver_one_phase.run")
    cfg = controller if controller is not None else ControllerConfig.from_scenario(scenario)
    if cfg.mode == "dirichlet":
        raise ScenarioError("dirichlet validation mode is one-phase only")
    dist = disturbance if disturbance is not None else scenario.disturbance
    props_l = scenario.liquid
    props_s = scenario.solid
    d_l = derive_coefficients(props_l)
    d_s = derive_coefficients(props_s)

    ul0 = sample_initial_profile(scenario, "liquid")
    ul0[-1] = 0.0
    us0 = sample_initial_profile(scenario, "solid")
    us0[0] = 0.0
    snap_times = scenario.snapshot_times()

    ctrl_code = _kernels.CTRL_CODE[cfg.mode]
    q0_open = 0.0
    if cfg.mode == "open-loop":
        if cfg.q0 is not None:
            q0_open = cfg.q0
        else:
            q0_open = closed_loop_flux_2p(
                TwoPhaseState(t=scenario.t0, s=scenario.s0,
                              length=scenario.length, u_l=ul0, u_s=us0),
                props_l, props_s, cfg)
    kind, qf_bar, qf_decay, table_t, table_v = _disturbance_kernel_args(dist)
    fixed_dt = scenario.dt if scenario.dt is not None else 0.0

    (status, fail_time, recorded, n_steps, max_cfl, min_ul, max_us,
     prof_l, prof_s, s_arr, qc_arr, qf_arr, e_arr, bt_arr, ft_arr, qin_arr) = \
        _kernels.run_2p_kernel(
            ul0, us0, scenario.s0, scenario.length, snap_times,
            d_l.alpha, props_l.conductivity, props_l.volumetric_heat_capacity,
            d_s.alpha, props_s.conductivity, props_s.volumetric_heat_capacity,
            d_l.gamma,
            ctrl_code, cfg.gain, cfg.setpoint, q0_open,
            kind, qf_bar, qf_decay, table_t, table_v,
            scenario.safety, fixed_dt,
            PHASE_FLOOR_FRACTION * scenario.s0,
            scenario.length * (1.0 - PHASE_FLOOR_FRACTION))

    if status == _kernels.STATUS_BLOWUP:
        raise NumericalBlowup(fail_time)

    sl = slice(0, recorded)
    times = snap_times[sl]
    interface = s_arr[sl]
    profiles_l = prof_l[sl]
    profiles_s = prof_s[sl]

    epsilon = analysis.choose_transform_parameter(props_l, cfg.gain, cfg.setpoint)
    kp = analysis.kernel_params(props_l, cfg.gain, epsilon)
    psi = analysis.error_norm_series_2p(interface, profiles_l, profiles_s,
                                        scenario.length, cfg.setpoint)
    lyap = analysis.lyapunov_series_2p(interface, profiles_l, profiles_s,
                                       scenario.length, cfg.setpoint, kp,
                                       props_l, props_s)
    scale = max(float(np.max(np.abs(ul0))), float(np.max(np.abs(us0))))
    tol = analysis.negativity_tolerance(scale)
    _, flags = analysis._scan_validity(
        "two-phase", cfg.mode, times, interface, qc_arr[sl], profiles_l,
        profiles_s, cfg.setpoint, scenario.length, tol)

    phase_gone = status == _kernels.STATUS_PHASE_GONE
    return Trajectory(
        scenario=scenario,
        variant="two-phase",
        times=times,
        interface=interface,
        heat_input=qc_arr[sl],
        heat_loss=qf_arr[sl],
        energy=e_arr[sl],
        lyapunov=lyap,
        error_norm=psi,
        boundary_temp=bt_arr[sl],
        liquid_profiles=profiles_l,
        valid=flags,
        solid_profiles=profiles_s,
        far_temp=ft_arr[sl],
        energy_inflow=qin_arr[sl],
        termination="phase-disappeared" if phase_gone else "completed",
        termination_time=fail_time if phase_gone else None,
        min_liquid_temp=min_ul,
        max_solid_temp=max_us,
        max_cfl=max_cfl,
        n_steps=n_steps,
    )
