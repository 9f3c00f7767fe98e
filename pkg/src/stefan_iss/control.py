"""Boundary heat-flux controllers.

Closed-loop state-feedback laws for the one- and two-phase systems, the
equivalent prescribed open-loop flux, and the runtime check that a recorded
closed-loop trajectory matches the open-loop formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import (
    DisturbanceSpec,
    OnePhaseState,
    PhaseProperties,
    Scenario,
    Trajectory,
    TwoPhaseState,
    derive_coefficients,
    sample_initial_profile,
)

__all__ = [
    "ControllerConfig",
    "closed_loop_flux_1p",
    "closed_loop_flux_2p",
    "open_loop_flux",
    "initial_feedback_flux",
    "flux_equivalence_residual",
]


@dataclass(frozen=True)
class ControllerConfig:
    """Boundary actuation selection.

    mode "closed-loop": state feedback flux with gain ``gain`` toward
    ``setpoint``; "open-loop": the equivalent prescribed flux starting at
    ``q0`` (``None`` means: evaluate the feedback law on the initial state);
    "dirichlet": fixed boundary temperature excess ``delta_T`` (validation
    against the similarity solution).
    """

    mode: str
    gain: float
    setpoint: float
    q0: Optional[float] = None
    delta_T: Optional[float] = None

    def __post_init__(self):
        if self.mode not in ("closed-loop", "open-loop", "dirichlet"):
            raise ValueError(f"unknown controller mode {self.mode!r}")
        if not (math.isfinite(self.gain) and self.gain > 0):
            raise ValueError("gain must be > 0")
        if not (math.isfinite(self.setpoint) and self.setpoint > 0):
            raise ValueError("setpoint must be > 0")
        if self.q0 is not None and self.q0 < 0:
            raise ValueError("open-loop q0 must be >= 0")
        if self.mode == "dirichlet" and self.delta_T is None:
            raise ValueError("dirichlet mode needs delta_T")

    @staticmethod
    def from_scenario(sc: Scenario) -> "ControllerConfig":
        return ControllerConfig(mode=sc.mode, gain=sc.gain, setpoint=sc.setpoint,
                                q0=sc.open_loop_q0, delta_T=sc.dirichlet_delta)


def closed_loop_flux_1p(state: OnePhaseState, props: PhaseProperties,
                        cfg: ControllerConfig) -> float:
    """State-feedback flux -c (rho Cp * int u dx + rho dH* (s - s_r)) [W/m^2].

    The thermal integral uses the composite trapezoid rule on the
    immobilized grid (dx = s dxi), matching the solver's quadrature.
    """
    return float(_kernels.closed_loop_value_1p(
        state.u, state.s, props.volumetric_heat_capacity,
        props.volumetric_latent_heat, cfg.gain, cfg.setpoint))


def closed_loop_flux_2p(state: TwoPhaseState, props_l: PhaseProperties,
                        props_s: PhaseProperties, cfg: ControllerConfig) -> float:
    """Two-phase feedback flux with both thermal integrals plus gamma (s - s_r)."""
    gamma = props_l.volumetric_latent_heat
    return float(_kernels.closed_loop_value_2p(
        state.u_l, state.u_s, state.s, state.length,
        props_l.volumetric_heat_capacity, props_s.volumetric_heat_capacity,
        gamma, cfg.gain, cfg.setpoint))


def initial_feedback_flux(scenario: Scenario) -> float:
    """The feedback flux evaluated on the initial condition (the open-loop q0)."""
    cfg = ControllerConfig(mode="closed-loop", gain=scenario.gain,
                           setpoint=scenario.setpoint)
    u0 = sample_initial_profile(scenario, "liquid")
    if scenario.two_phase:
        us0 = sample_initial_profile(scenario, "solid")
        state = TwoPhaseState(t=scenario.t0, s=scenario.s0,
                              length=scenario.length, u_l=u0, u_s=us0)
        return closed_loop_flux_2p(state, scenario.liquid, scenario.solid, cfg)
    state = OnePhaseState(t=scenario.t0, s=scenario.s0, u=u0)
    return closed_loop_flux_1p(state, scenario.liquid, cfg)


def _table_convolution(t: float, gain: float, dist: DisturbanceSpec,
                       rtol: float = 1e-12, max_doublings: int = 22) -> float:
    """gain * integral_0^t exp(-gain (t - tau)) q_f(tau) dtau, adaptive trapezoid.

    Knots of the table are kept as breakpoints; each subinterval is halved
    until the composite estimate is converged to rtol.
    """
    if t <= 0.0:
        return 0.0
    knots = [0.0]
    for tk in np.asarray(dist.times):
        if 0.0 < tk < t:
            knots.append(float(tk))
    knots.append(t)
    xs = np.unique(np.asarray(knots))

    def integrand(x):
        return np.exp(-gain * (t - x)) * np.interp(x, dist.times, dist.values)

    prev = None
    for _ in range(max_doublings):
        ys = integrand(xs)
        est = float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))
        if prev is not None and abs(est - prev) <= rtol * max(abs(est), 1e-300):
            prev = est
            break
        prev = est
        mids = 0.5 * (xs[1:] + xs[:-1])
        xs = np.sort(np.concatenate([xs, mids]))
    return gain * prev


def open_loop_flux(t: float, q0: float, gain: float,
                   disturbance: DisturbanceSpec) -> float:
    """Prescribed flux q0 e^{-ct} + c int_0^t e^{-c(t-tau)} q_f(tau) dtau.

    Closed form for zero/constant/exponential disturbances; adaptive
    trapezoid quadrature for tabulated ones.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if disturbance.kind == "table":
        return q0 * math.exp(-gain * t) + _table_convolution(t, gain, disturbance)
    kind = _kernels.DIST_CODE[disturbance.kind]
    return float(_kernels.open_loop_closed_form(
        t, q0, gain, kind, disturbance.qf_bar, disturbance.decay))


def flux_equivalence_residual(traj: Trajectory,
                              cfg: Optional[ControllerConfig] = None) -> float:
    """Max relative deviation of the recorded closed-loop flux from the
    equivalent open-loop formula.

    q0 is re-evaluated from the initial snapshot through the feedback law
    (not read off the diagnostics), then the open-loop flux is compared at
    every snapshot time: max_i |q_c(t_i) - q_ol(t_i)| / max(q0, |q_c(t_i)|).
    """
    sc = traj.scenario
    mode = cfg.mode if cfg is not None else sc.mode
    if mode != "closed-loop":
        raise ValueError("flux equivalence is defined for closed-loop trajectories")
    if cfg is None:
        cfg = ControllerConfig.from_scenario(sc)
    state0 = traj.initial_state
    if traj.variant == "two-phase":
        q0 = closed_loop_flux_2p(state0, sc.liquid, sc.solid, cfg)
    else:
        q0 = closed_loop_flux_1p(state0, sc.liquid, cfg)
    worst = 0.0
    t0 = traj.times[0]
    for i in range(traj.n_snapshots):
        ref = open_loop_flux(float(traj.times[i] - t0), q0, cfg.gain, sc.disturbance)
        rec = float(traj.heat_input[i])
        dev = abs(rec - ref) / max(q0, abs(rec))
        if dev > worst:
            worst = dev
    return worst
