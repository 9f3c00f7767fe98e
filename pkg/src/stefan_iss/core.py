"""Domain types, parameter derivation and scenario configuration.

Shared by the solvers, the controllers, the analysis functionals and the CLI.
SI units throughout: meters, seconds, Kelvin, W/m^2 for heat fluxes, J/m^2
for per-unit-area energies.  Temperatures are stored relative to the melting
point, i.e. ``u = T - T_m`` (liquid: u >= 0, solid: u <= 0).

All types are immutable value objects after construction; arrays they carry
are defensive read-only copies, so instances are safe to share across
threads.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

__all__ = [
    "PhaseProperties",
    "DerivedCoefficients",
    "derive_coefficients",
    "LinearProfile",
    "TabulatedProfile",
    "ProfileLike",
    "DisturbanceSpec",
    "Scenario",
    "OnePhaseState",
    "TwoPhaseState",
    "Trajectory",
    "AssumptionCheck",
    "AssumptionReport",
    "check_assumptions",
    "eval_initial_profile",
    "sample_initial_profile",
    "scenario_to_dict",
    "scenario_from_dict",
    "load_scenario",
    "save_scenario",
    "ScenarioError",
    "PhaseDisappeared",
    "NumericalBlowup",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Structural problem in a scenario definition (bad field, bad file)."""


class PhaseDisappeared(RuntimeError):
    """The interface left the admissible domain (a phase melted/froze away)."""

    def __init__(self, time: float, interface: float):
        self.time = time
        self.interface = interface
        super().__init__(f"phase disappeared at t={time:.6g} s (s={interface:.6g} m)")


class NumericalBlowup(RuntimeError):
    """Non-finite values appeared during time integration."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"non-finite state at t={time:.6g} s")


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# Physical properties
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseProperties:
    """Physical constants of one material phase.

    density       rho      [kg/m^3]
    latent_heat   dH*      [J/kg]    latent heat of fusion
    heat_capacity C_p      [J/(kg K)]
    conductivity  k        [W/(m K)]
    """

    density: float
    latent_heat: float
    heat_capacity: float
    conductivity: float

    def __post_init__(self):
        for name in ("density", "latent_heat", "heat_capacity", "conductivity"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"PhaseProperties.{name} must be finite and > 0, got {v!r}")

    @property
    def volumetric_heat_capacity(self) -> float:
        """rho * C_p = k / alpha  [J/(m^3 K)]."""
        return self.density * self.heat_capacity

    @property
    def volumetric_latent_heat(self) -> float:
        """rho * dH* = k / beta  [J/m^3]."""
        return self.density * self.latent_heat


@dataclass(frozen=True)
class DerivedCoefficients:
    """Coefficients derived from :class:`PhaseProperties`.

    alpha = k / (rho C_p)   thermal diffusivity      [m^2/s]
    beta  = k / (rho dH*)   latent-heat scaling      [m^2 K/(J s)] * W -> m/s
    gamma = rho dH*         volumetric latent heat   [J/m^3]
    """

    alpha: float
    beta: float
    gamma: float


def derive_coefficients(p: PhaseProperties) -> DerivedCoefficients:
    """Exact quotients alpha = k/(rho C_p), beta = k/(rho dH*), gamma = rho dH*."""
    return DerivedCoefficients(
        alpha=p.conductivity / (p.density * p.heat_capacity),
        beta=p.conductivity / (p.density * p.latent_heat),
        gamma=p.density * p.latent_heat,
    )


# Zinc, the stock example material.
ZINC = PhaseProperties(density=6570.0, latent_heat=111961.0,
                       heat_capacity=389.5687, conductivity=116.0)


# ---------------------------------------------------------------------------
# Initial temperature profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearProfile:
    """Linear ramp: ``boundary_value`` at the fixed boundary, 0 at the interface.

    For the liquid phase the fixed boundary is x = 0; for the solid phase it
    is x = L.  ``boundary_value`` is u = T - T_m there (>= 0 liquid, <= 0
    solid).
    """

    boundary_value: float


@dataclass(frozen=True, eq=False)
class TabulatedProfile:
    """Sampled profile with linear interpolation between samples.

    positions : absolute coordinates x [m], strictly increasing
    values    : u = T - T_m at those coordinates [K]
    """

    positions: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pos = _readonly(self.positions)
        val = _readonly(self.values)
        if pos.ndim != 1 or pos.shape != val.shape or pos.size < 2:
            raise ValueError("TabulatedProfile needs matching 1-D arrays with >= 2 samples")
        if not np.all(np.diff(pos) > 0):
            raise ValueError("TabulatedProfile positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "values", val)


ProfileLike = Union[LinearProfile, TabulatedProfile, Callable[[float], float]]


# ---------------------------------------------------------------------------
# Heat-loss disturbance
# ---------------------------------------------------------------------------

_DIST_KINDS = ("zero", "constant", "exponential", "table")


@dataclass(frozen=True, eq=False)
class DisturbanceSpec:
    """Declarative description of the unknown heat-loss signal q_f(t) >= 0.

    kind = "zero"                  q_f = 0
    kind = "constant"              q_f = qf_bar
    kind = "exponential"           q_f = qf_bar * exp(-K t)
    kind = "table"                 linear interpolation of (times, values),
                                   clamped to the end values outside the range

    Construction rejects negative values: the heat loss must be non-negative
    for the model to be meaningful.  Whether the *total* heat-loss energy is
    finite is reported by :meth:`total_energy_bounded` (a constant positive
    disturbance, or a table whose final value is positive, fails it; runs are
    still permitted, the assumption gate merely flags it).
    """

    kind: str
    qf_bar: float = 0.0
    decay: float = 0.0  # K [1/s], exponential kind only
    times: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in _DIST_KINDS:
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.kind in ("constant", "exponential"):
            if not (math.isfinite(self.qf_bar) and self.qf_bar >= 0):
                raise ValueError("qf_bar must be finite and >= 0")
        if self.kind == "exponential" and not (math.isfinite(self.decay) and self.decay >= 0):
            raise ValueError("exponential decay rate K must be finite and >= 0")
        if self.kind == "table":
            if self.times is None or self.values is None:
                raise ValueError("table disturbance needs times and values")
            t = _readonly(self.times)
            v = _readonly(self.values)
            if t.ndim != 1 or t.shape != v.shape or t.size < 2:
                raise ValueError("table disturbance needs matching 1-D arrays with >= 2 samples")
            if not np.all(np.diff(t) > 0):
                raise ValueError("table times must be strictly increasing")
            if np.any(v < 0):
                raise ValueError("heat loss must be non-negative")
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "values", v)

    # -- constructors -------------------------------------------------------
    @staticmethod
    def zero() -> "DisturbanceSpec":
        return DisturbanceSpec(kind="zero")

    @staticmethod
    def constant(qf_bar: float) -> "DisturbanceSpec":
        return DisturbanceSpec(kind="constant", qf_bar=qf_bar)

    @staticmethod
    def exponential(qf_bar: float, decay: float) -> "DisturbanceSpec":
        return DisturbanceSpec(kind="exponential", qf_bar=qf_bar, decay=decay)

    @staticmethod
    def table(times, values) -> "DisturbanceSpec":
        return DisturbanceSpec(kind="table", times=np.asarray(times, dtype=float),
                               values=np.asarray(values, dtype=float))

    # -- evaluation ---------------------------------------------------------
    def __call__(self, t: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.qf_bar
        if self.kind == "exponential":
            return self.qf_bar * math.exp(-self.decay * t)
        return float(np.interp(t, self.times, self.values))

    def supremum(self) -> float:
        """sup_t q_f(t); analytic for closed-form kinds, max sample for tables."""
        if self.kind == "zero":
            return 0.0
        if self.kind in ("constant", "exponential"):
            return self.qf_bar
        return float(np.max(self.values))

    def total_energy_bounded(self) -> bool:
        """Whether the integral of q_f over [0, inf) is finite."""
        if self.kind == "zero":
            return True
        if self.kind == "constant":
            return self.qf_bar == 0.0
        if self.kind == "exponential":
            return self.qf_bar == 0.0 or self.decay > 0.0
        return float(self.values[-1]) == 0.0  # clamped extension beyond last sample


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------

_MODES = ("closed-loop", "open-loop", "dirichlet")


@dataclass(frozen=True, eq=False)
class Scenario:
    """Full simulation configuration.

    The interface starts at ``s0`` and is steered toward ``setpoint`` with
    control gain ``gain``.  A scenario is two-phase when ``solid`` material
    properties (plus ``length``, ``initial_solid`` and ``n_cells_solid``)
    are given; otherwise the heat loss acts directly at the interface.

    ``mode`` selects the boundary actuation: "closed-loop" (state feedback
    flux), "open-loop" (prescribed exponential flux, optional explicit
    ``open_loop_q0``), or "dirichlet" (fixed boundary temperature excess
    ``dirichlet_delta``, used for validation against the classical
    similarity solution).

    Time stepping is explicit with adaptive step ``safety * dt_stable``
    unless a fixed ``dt`` is given.  ``setpoint <= s0`` is accepted at
    construction and reported by the assumption gate instead (it is exactly
    the setpoint restriction failing).
    """

    liquid: PhaseProperties
    s0: float
    setpoint: float
    gain: float
    disturbance: DisturbanceSpec
    initial_liquid: ProfileLike
    t_final: float
    n_cells: int = 200
    solid: Optional[PhaseProperties] = None
    length: Optional[float] = None
    initial_solid: Optional[ProfileLike] = None
    n_cells_solid: Optional[int] = None
    dt: Optional[float] = None
    safety: float = 0.4
    n_snapshots: int = 500
    mode: str = "closed-loop"
    open_loop_q0: Optional[float] = None
    dirichlet_delta: Optional[float] = None
    t0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.s0) and self.s0 > 0):
            raise ScenarioError(f"s0 must be > 0, got {self.s0!r}")
        if not (math.isfinite(self.setpoint) and self.setpoint > 0):
            raise ScenarioError(f"setpoint must be > 0, got {self.setpoint!r}")
        if not (math.isfinite(self.gain) and self.gain > 0):
            raise ScenarioError(f"gain must be > 0, got {self.gain!r}")
        if self.n_cells < 8:
            raise ScenarioError(f"n_cells must be >= 8, got {self.n_cells}")
        if not (math.isfinite(self.t_final) and self.t_final > self.t0):
            raise ScenarioError("t_final must exceed the start time")
        if not (0 < self.safety <= 1.0):
            raise ScenarioError(f"safety must be in (0, 1], got {self.safety!r}")
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0):
            raise ScenarioError(f"dt must be > 0 when given, got {self.dt!r}")
        if self.n_snapshots < 2:
            raise ScenarioError("n_snapshots must be >= 2")
        if self.mode not in _MODES:
            raise ScenarioError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.mode == "open-loop" and self.open_loop_q0 is not None and self.open_loop_q0 < 0:
            raise ScenarioError("open_loop_q0 must be >= 0")
        if self.mode == "dirichlet" and self.dirichlet_delta is None:
            raise ScenarioError("dirichlet mode needs dirichlet_delta")
        if self.solid is not None:
            if self.length is None or self.initial_solid is None or self.n_cells_solid is None:
                raise ScenarioError("two-phase scenario needs length, initial_solid and n_cells_solid")
            if not (self.s0 < self.length):
                raise ScenarioError(f"need 0 < s0 < length, got s0={self.s0}, length={self.length}")
            if self.n_cells_solid < 8:
                raise ScenarioError(f"n_cells_solid must be >= 8, got {self.n_cells_solid}")
            if self.mode == "dirichlet":
                raise ScenarioError("dirichlet validation mode is one-phase only")

    @property
    def two_phase(self) -> bool:
        return self.solid is not None

    def snapshot_times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t_final, self.n_snapshots + 1)


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OnePhaseState:
    """Liquid temperature profile on the immobilized grid plus interface.

    u[i] = T(xi_i * s, t) - T_m at xi_i = i/N; u[N] must be exactly 0 (the
    interface sits at the melting temperature).
    """

    t: float
    s: float
    u: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s > 0):
            raise ValueError(f"interface position must be > 0, got {self.s!r}")
        u = _readonly(self.u)
        if u.ndim != 1 or u.size < 4:
            raise ValueError("u must be 1-D with at least 4 samples")
        if u[-1] != 0.0:
            raise ValueError("u[N] must be exactly 0 (interface at melting temperature)")
        object.__setattr__(self, "u", u)

    @property
    def n_cells(self) -> int:
        return self.u.size - 1

    def physical_grid(self) -> np.ndarray:
        """Physical coordinates x_i = xi_i * s of the grid nodes [m]."""
        return np.linspace(0.0, self.s, self.u.size)


@dataclass(frozen=True, eq=False)
class TwoPhaseState:
    """Liquid and solid profiles on their own immobilized grids.

    u_l lives on xi = x/s in [0, 1] (u_l[N_l] = 0), u_s on
    eta = (x - s)/(L - s) in [0, 1] (u_s[0] = 0).
    """

    t: float
    s: float
    length: float
    u_l: np.ndarray
    u_s: np.ndarray

    def __post_init__(self):
        if not (0.0 < self.s < self.length):
            raise ValueError(f"need 0 < s < length, got s={self.s!r}, length={self.length!r}")
        u_l = _readonly(self.u_l)
        u_s = _readonly(self.u_s)
        if u_l.ndim != 1 or u_l.size < 4 or u_s.ndim != 1 or u_s.size < 4:
            raise ValueError("profiles must be 1-D with at least 4 samples")
        if u_l[-1] != 0.0:
            raise ValueError("u_l[N_l] must be exactly 0")
        if u_s[0] != 0.0:
            raise ValueError("u_s[0] must be exactly 0")
        object.__setattr__(self, "u_l", u_l)
        object.__setattr__(self, "u_s", u_s)

    @property
    def n_cells_liquid(self) -> int:
        return self.u_l.size - 1

    @property
    def n_cells_solid(self) -> int:
        return self.u_s.size - 1

    def liquid_slice(self) -> OnePhaseState:
        """The liquid phase viewed as a one-phase state."""
        return OnePhaseState(t=self.t, s=self.s, u=self.u_l)


# ---------------------------------------------------------------------------
# Trajectory
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time series of snapshots plus per-snapshot diagnostics.

    Scalar diagnostics are 1-D arrays indexed like ``times``:
    heat_input q_c, heat_loss q_f, energy E, lyapunov V, error_norm Psi,
    boundary_temp T(0,t)-T_m, and (two-phase) far_temp T_s(L,t)-T_m.
    ``valid`` flags snapshots satisfying the model-validity conditions.
    Global extremes over *every internal step* (not just snapshots) are kept
    in min_liquid_temp / max_solid_temp for the sign-preservation checks.
    """

    scenario: Scenario
    variant: str
    times: np.ndarray
    interface: np.ndarray
    heat_input: np.ndarray
    heat_loss: np.ndarray
    energy: np.ndarray
    lyapunov: np.ndarray
    error_norm: np.ndarray
    boundary_temp: np.ndarray
    liquid_profiles: np.ndarray
    valid: np.ndarray
    solid_profiles: Optional[np.ndarray] = None
    far_temp: Optional[np.ndarray] = None
    energy_inflow: Optional[np.ndarray] = None  # cumulative integral of
    # q_c - q_f from t0, accumulated per internal step (trapezoid)
    termination: str = "completed"
    termination_time: Optional[float] = None
    min_liquid_temp: float = 0.0
    max_solid_temp: Optional[float] = None
    max_cfl: float = 0.0
    n_steps: int = 0

    def __post_init__(self):
        if self.variant not in ("one-phase", "two-phase"):
            raise ValueError(f"bad variant {self.variant!r}")
        if self.times.size < 1:
            raise ValueError("trajectory must hold at least one snapshot")
        if not np.all(np.diff(self.times) > 0):
            raise ValueError("snapshot times must be strictly increasing")

    @property
    def n_snapshots(self) -> int:
        return self.times.size

    def state_at(self, i: int):
        if self.variant == "one-phase":
            return OnePhaseState(t=float(self.times[i]), s=float(self.interface[i]),
                                 u=self.liquid_profiles[i])
        return TwoPhaseState(t=float(self.times[i]), s=float(self.interface[i]),
                             length=float(self.scenario.length),
                             u_l=self.liquid_profiles[i], u_s=self.solid_profiles[i])

    @property
    def initial_state(self):
        return self.state_at(0)

    @property
    def final_state(self):
        return self.state_at(self.n_snapshots - 1)


# ---------------------------------------------------------------------------
# Initial-condition evaluation
# ---------------------------------------------------------------------------

def eval_initial_profile(scenario: Scenario, x: float, phase: str = "liquid") -> float:
    """Initial temperature excess T_0(x) - T_m at position x [K].

    Liquid phase: defined on [0, s0], pinned to exactly 0 at x = s0.
    Solid phase (two-phase scenarios): defined on [s0, L], pinned to 0 at
    x = s0.  Tabulated profiles are clamped to the admissible sign (>= 0
    liquid, <= 0 solid) with a warning; out-of-domain x raises ValueError.
    """
    if phase == "liquid":
        lo, hi = 0.0, scenario.s0
        profile = scenario.initial_liquid
        sign = 1.0
        interface = scenario.s0
    elif phase == "solid":
        if not scenario.two_phase:
            raise ValueError("scenario has no solid phase")
        lo, hi = scenario.s0, scenario.length
        profile = scenario.initial_solid
        sign = -1.0
        interface = scenario.s0
    else:
        raise ValueError(f"phase must be 'liquid' or 'solid', got {phase!r}")

    if not (lo <= x <= hi):
        raise ValueError(f"x={x!r} outside the {phase} domain [{lo}, {hi}]")
    if x == interface:
        return 0.0  # interface is at the melting temperature, enforced

    if isinstance(profile, LinearProfile):
        if phase == "liquid":
            return profile.boundary_value * (1.0 - x / scenario.s0)
        return profile.boundary_value * (x - scenario.s0) / (scenario.length - scenario.s0)
    if isinstance(profile, TabulatedProfile):
        v = float(np.interp(x, profile.positions, profile.values))
        if sign * v < 0.0:
            warnings.warn(
                f"tabulated initial {phase} profile clamped to "
                f"{'>= 0' if sign > 0 else '<= 0'} at x={x:.6g}", stacklevel=2)
            return 0.0
        return v
    return float(profile(x))


def sample_initial_profile(scenario: Scenario, phase: str = "liquid") -> np.ndarray:
    """Initial profile sampled on the phase's immobilized grid."""
    if phase == "liquid":
        xs = np.linspace(0.0, scenario.s0, scenario.n_cells + 1)
    else:
        xs = np.linspace(scenario.s0, scenario.length, scenario.n_cells_solid + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("once")
        u = np.array([eval_initial_profile(scenario, float(x), phase) for x in xs])
    return u


# ---------------------------------------------------------------------------
# Assumption gate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionCheck:
    """One pass/fail entry with the computed sides of the inequality."""

    name: str
    passed: bool
    lhs: float
    rhs: float
    comparison: str
    note: str = ""


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list:
        return [c for c in self.checks if not c.passed]


def _trapz(y: np.ndarray, dx: float) -> float:
    return float(dx * (0.5 * y[0] + y[1:-1].sum() + 0.5 * y[-1]))


def check_assumptions(scenario: Scenario) -> AssumptionReport:
    """Evaluate the admissibility conditions of the scenario.

    One-phase: positive initial interface, non-negative initial liquid
    temperature excess, non-negative heat loss with finite total energy,
    the setpoint restriction
    ``s_r > s0 + (beta/alpha) * integral(T0 - T_m)``
    and the gain bound ``c > sup q_f / (gamma * s_r)``.

    Two-phase adds: solid at or below melting initially, positive initial
    internal energy, and the setpoint window ``s_r_lower < s_r < L``.

    Integrals use the composite trapezoid rule on the scenario grid.
    Failures are reported, never raised.
    """
    checks = []
    d = derive_coefficients(scenario.liquid)
    u0 = sample_initial_profile(scenario, "liquid")
    dx = scenario.s0 / scenario.n_cells
    thermal_integral = _trapz(u0, dx)  # integral of (T0 - Tm) over the liquid [K m]

    checks.append(AssumptionCheck(
        name="initial-interface", passed=scenario.s0 > 0,
        lhs=scenario.s0, rhs=0.0, comparison=">",
        note="s0 > 0"))
    min_u0 = float(u0.min())
    checks.append(AssumptionCheck(
        name="initial-liquid-temperature", passed=min_u0 >= 0.0,
        lhs=min_u0, rhs=0.0, comparison=">=",
        note="liquid initially at or above the melting temperature"))

    qf_sup = scenario.disturbance.supremum()
    checks.append(AssumptionCheck(
        name="heat-loss-nonnegative", passed=True,
        lhs=0.0 if scenario.disturbance.kind != "table"
        else float(np.min(scenario.disturbance.values)),
        rhs=0.0, comparison=">=",
        note="enforced at construction"))
    checks.append(AssumptionCheck(
        name="heat-loss-energy-bounded",
        passed=scenario.disturbance.total_energy_bounded(),
        lhs=qf_sup, rhs=0.0, comparison="finite integral",
        note="total heat-loss energy must be finite"))

    gamma = d.gamma
    if scenario.two_phase:
        d_s = derive_coefficients(scenario.solid)
        us0 = sample_initial_profile(scenario, "solid")
        dx_s = (scenario.length - scenario.s0) / scenario.n_cells_solid
        solid_integral = _trapz(us0, dx_s)

        max_us0 = float(us0.max())
        checks.append(AssumptionCheck(
            name="initial-solid-temperature", passed=max_us0 <= 0.0,
            lhs=max_us0, rhs=0.0, comparison="<=",
            note="solid initially at or below the melting temperature"))

        # setpoint window: lower threshold uses beta_i/alpha_i = rho_i Cp_i / gamma
        lower = (scenario.s0
                 + scenario.liquid.volumetric_heat_capacity / gamma * thermal_integral
                 + scenario.solid.volumetric_heat_capacity / gamma * solid_integral)
        checks.append(AssumptionCheck(
            name="setpoint-above-threshold", passed=scenario.setpoint > lower,
            lhs=scenario.setpoint, rhs=lower, comparison=">",
            note="setpoint restriction (two-phase lower bound)"))
        checks.append(AssumptionCheck(
            name="setpoint-below-length", passed=scenario.setpoint < scenario.length,
            lhs=scenario.setpoint, rhs=scenario.length, comparison="<",
            note="setpoint must stay inside the domain"))

        e0 = (scenario.liquid.volumetric_heat_capacity * thermal_integral
              + scenario.solid.volumetric_heat_capacity * solid_integral
              + gamma * scenario.s0)
        checks.append(AssumptionCheck(
            name="initial-energy-positive", passed=e0 > 0.0,
            lhs=e0, rhs=0.0, comparison=">",
            note="initial internal energy of the total system"))
    else:
        # beta/alpha = Cp/dH*
        threshold = scenario.s0 + (d.beta / d.alpha) * thermal_integral
        checks.append(AssumptionCheck(
            name="setpoint-above-threshold", passed=scenario.setpoint > threshold,
            lhs=scenario.setpoint, rhs=threshold, comparison=">",
            note="setpoint restriction"))

    gain_threshold = qf_sup / (gamma * scenario.setpoint)  # beta/(k s_r) * qf_sup
    checks.append(AssumptionCheck(
        name="gain-above-threshold", passed=scenario.gain > gain_threshold,
        lhs=scenario.gain, rhs=gain_threshold, comparison=">",
        note="control gain large enough for the worst-case heat loss"))

    return AssumptionReport(checks=tuple(checks))


# ---------------------------------------------------------------------------
# Scenario (de)serialization
# ---------------------------------------------------------------------------

def _props_to_dict(p: PhaseProperties) -> dict:
    return {"rho": p.density, "latent_heat": p.latent_heat,
            "heat_capacity": p.heat_capacity, "conductivity": p.conductivity}


def _props_from_dict(d: dict, where: str) -> PhaseProperties:
    try:
        return PhaseProperties(density=float(d["rho"]), latent_heat=float(d["latent_heat"]),
                               heat_capacity=float(d["heat_capacity"]),
                               conductivity=float(d["conductivity"]))
    except KeyError as e:
        raise ScenarioError(f"{where}: missing key {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"{where}: {e}") from None


def _profile_to_dict(p: ProfileLike) -> dict:
    if isinstance(p, LinearProfile):
        return {"kind": "linear", "boundary_value": p.boundary_value}
    if isinstance(p, TabulatedProfile):
        return {"kind": "table", "positions": p.positions.tolist(),
                "values": p.values.tolist()}
    raise ScenarioError("callable initial profiles cannot be serialized; tabulate them")


def _profile_from_dict(d: dict, where: str) -> ProfileLike:
    kind = d.get("kind")
    if kind == "linear":
        return LinearProfile(boundary_value=float(d["boundary_value"]))
    if kind == "table":
        return TabulatedProfile(positions=np.asarray(d["positions"], dtype=float),
                                values=np.asarray(d["values"], dtype=float))
    raise ScenarioError(f"{where}: unknown profile kind {kind!r}")


def _disturbance_to_dict(d: DisturbanceSpec) -> dict:
    if d.kind == "zero":
        return {"kind": "zero"}
    if d.kind == "constant":
        return {"kind": "constant", "qf_bar": d.qf_bar}
    if d.kind == "exponential":
        return {"kind": "exponential", "qf_bar": d.qf_bar, "K": d.decay}
    return {"kind": "table", "times": d.times.tolist(), "values": d.values.tolist()}


def _disturbance_from_dict(d: dict) -> DisturbanceSpec:
    kind = d.get("kind")
    try:
        if kind == "zero":
            return DisturbanceSpec.zero()
        if kind == "constant":
            return DisturbanceSpec.constant(float(d["qf_bar"]))
        if kind == "exponential":
            return DisturbanceSpec.exponential(float(d["qf_bar"]), float(d["K"]))
        if kind == "table":
            return DisturbanceSpec.table(d["times"], d["values"])
    except KeyError as e:
        raise ScenarioError(f"disturbance: missing key {e.args[0]!r}") from None
    except ValueError as e:
        raise ScenarioError(f"disturbance: {e}") from None
    raise ScenarioError(f"disturbance: unknown kind {kind!r}")


def scenario_to_dict(sc: Scenario) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "liquid": _props_to_dict(sc.liquid),
        "s0": sc.s0,
        "setpoint": sc.setpoint,
        "gain": sc.gain,
        "disturbance": _disturbance_to_dict(sc.disturbance),
        "initial_liquid": _profile_to_dict(sc.initial_liquid),
        "grid": {"n_cells": sc.n_cells},
        "time": {"t_final": sc.t_final, "safety": sc.safety,
                 "n_snapshots": sc.n_snapshots},
        "controller": {"mode": sc.mode},
    }
    if sc.dt is not None:
        doc["time"]["dt"] = sc.dt
    if sc.t0 != 0.0:
        doc["time"]["t0"] = sc.t0
    if sc.mode == "open-loop" and sc.open_loop_q0 is not None:
        doc["controller"]["q0"] = sc.open_loop_q0
    if sc.mode == "dirichlet":
        doc["controller"]["delta_T"] = sc.dirichlet_delta
    if sc.two_phase:
        doc["solid"] = _props_to_dict(sc.solid)
        doc["length"] = sc.length
        doc["initial_solid"] = _profile_to_dict(sc.initial_solid)
        doc["grid"]["n_cells_solid"] = sc.n_cells_solid
    return doc


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}")
    missing = [k for k in ("liquid", "s0", "setpoint", "gain", "disturbance",
                           "initial_liquid", "time") if k not in doc]
    if missing:
        raise ScenarioError(f"scenario: missing keys {missing}")
    grid = doc.get("grid", {})
    time_cfg = doc["time"]
    ctrl = doc.get("controller", {"mode": "closed-loop"})
    if "t_final" not in time_cfg:
        raise ScenarioError("time: missing key 't_final'")
    kwargs = dict(
        liquid=_props_from_dict(doc["liquid"], "liquid"),
        s0=float(doc["s0"]),
        setpoint=float(doc["setpoint"]),
        gain=float(doc["gain"]),
        disturbance=_disturbance_from_dict(doc["disturbance"]),
        initial_liquid=_profile_from_dict(doc["initial_liquid"], "initial_liquid"),
        t_final=float(time_cfg["t_final"]),
        n_cells=int(grid.get("n_cells", 200)),
        safety=float(time_cfg.get("safety", 0.4)),
        n_snapshots=int(time_cfg.get("n_snapshots", 500)),
        mode=str(ctrl.get("mode", "closed-loop")),
        t0=float(time_cfg.get("t0", 0.0)),
    )
    if "dt" in time_cfg and time_cfg["dt"] is not None:
        kwargs["dt"] = float(time_cfg["dt"])
    if kwargs["mode"] == "open-loop" and "q0" in ctrl:
        kwargs["open_loop_q0"] = float(ctrl["q0"])
    if kwargs["mode"] == "dirichlet":
        if "delta_T" not in ctrl:
            raise ScenarioError("controller: dirichlet mode needs 'delta_T'")
        kwargs["dirichlet_delta"] = float(ctrl["delta_T"])
    if "solid" in doc:
        kwargs["solid"] = _props_from_dict(doc["solid"], "solid")
        if "length" not in doc or "initial_solid" not in doc:
            raise ScenarioError("two-phase scenario needs 'length' and 'initial_solid'")
        kwargs["length"] = float(doc["length"])
        kwargs["initial_solid"] = _profile_from_dict(doc["initial_solid"], "initial_solid")
        kwargs["n_cells_solid"] = int(grid.get("n_cells_solid", kwargs["n_cells"]))
    try:
        return Scenario(**kwargs)
    except (TypeError, ValueError) as e:
        if isinstance(e, ScenarioError):
            raise
        raise ScenarioError(str(e)) from None


def load_scenario(path) -> Scenario:
    """Parse a scenario JSON file; raises ScenarioError with a location."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as e:
        raise ScenarioError(f"{path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    try:
        return scenario_from_dict(doc)
    except ScenarioError as e:
        raise ScenarioError(f"{path}: {e}") from None


def save_scenario(sc: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario_to_dict(sc), f, indent=2)
        f.write("\n")
