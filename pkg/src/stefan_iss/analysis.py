"""Energy functionals, backstepping transforms, ISS norms and monitors.

All quadrature is composite trapezoid on the immobilized grids, consistent
with the solvers' spatial accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    OnePhaseState,
    PhaseProperties,
    Trajectory,
    TwoPhaseState,
    derive_coefficients,
)

__all__ = [
    "KernelParams",
    "kernel_params",
    "choose_transform_parameter",
    "transform_margin",
    "direct_transform",
    "inverse_transform",
    "lyapunov_value",
    "internal_energy_1p",
    "internal_energy_2p",
    "energy_balance_residual",
    "error_norm_1p",
    "error_norm_2p",
    "reduced_interface_error",
    "decay_rate_1p",
    "decay_rate_2p",
    "ISSEnvelope",
    "fit_envelope",
    "fit_iss_envelope",
    "ValidityViolation",
    "validity_monitor",
    "negativity_tolerance",
]


def _trapz(y: np.ndarray, dx: float) -> float:
    return float(dx * (0.5 * y[0] + y[1:-1].sum() + 0.5 * y[-1]))


# ---------------------------------------------------------------------------
# Transform kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelParams:
    """Parameters of the state-transform kernel pair.

    The direct kernel is affine, phi(d) = (gain/beta) d - epsilon; the
    inverse kernel is the damped oscillation
    psi(d) = e^{growth d} (sine_coeff sin(frequency d) + epsilon cos(frequency d)).
    ``epsilon`` must lie in (0, 2 sqrt(alpha gain)/beta) so the frequency is
    real.
    """

    epsilon: float
    gain: float
    alpha: float
    beta: float
    growth: float
    frequency: float
    sine_coeff: float


def kernel_params(props: PhaseProperties, gain: float, epsilon: float) -> KernelParams:
    d = derive_coefficients(props)
    limit = 2.0 * math.sqrt(d.alpha * gain) / d.beta
    if not (0.0 < epsilon < limit):
        raise ValueError(
            f"epsilon must lie in (0, {limit:.6g}) to keep the kernel frequency real, "
            f"got {epsilon!r}")
    eb = epsilon * d.beta
    disc = 4.0 * d.alpha * gain - eb * eb
    frequency = math.sqrt(disc) / (2.0 * d.alpha)
    return KernelParams(
        epsilon=epsilon,
        gain=gain,
        alpha=d.alpha,
        beta=d.beta,
        growth=d.beta * epsilon / (2.0 * d.alpha),
        frequency=frequency,
        sine_coeff=-(2.0 * d.alpha * gain - eb * eb) / (2.0 * d.alpha * d.beta * frequency),
    )


def transform_margin(epsilon: float, props: PhaseProperties, gain: float,
                     setpoint: float) -> float:
    """Lyapunov-certificate margin g(epsilon); positive inside the safe range.

    g(e) = c/(8 beta) - e/(4 s_r) - (beta/alpha) (64 c s_r^2/alpha + 3) e^2
    """
    d = derive_coefficients(props)
    curv = (d.beta / d.alpha) * (64.0 * gain * setpoint**2 / d.alpha + 3.0)
    return gain / (8.0 * d.beta) - epsilon / (4.0 * setpoint) - curv * epsilon**2


def choose_transform_parameter(props: PhaseProperties, gain: float,
                               setpoint: float) -> float:
    """A transform parameter strictly inside every admissibility bound.

    Takes half of the minimum of: the positive root of the margin g, the
    linear-term cap alpha/(8 beta s_r (64 c s_r^2/alpha + 3)), and the
    real-frequency limit 2 sqrt(alpha c)/beta.
    """
    d = derive_coefficients(props)
    curv = (d.beta / d.alpha) * (64.0 * gain * setpoint**2 / d.alpha + 3.0)
    lin = 1.0 / (4.0 * setpoint)
    const = gain / (8.0 * d.beta)
    root = (-lin + math.sqrt(lin * lin + 4.0 * curv * const)) / (2.0 * curv)
    cap = d.alpha / (8.0 * d.beta * setpoint * (64.0 * gain * setpoint**2 / d.alpha + 3.0))
    freq_limit = 2.0 * math.sqrt(d.alpha * gain) / d.beta * (1.0 - 1e-6)
    return 0.5 * min(root, cap, freq_limit)


def _phi_values(d: np.ndarray, kp: KernelParams) -> np.ndarray:
    return (kp.gain / kp.beta) * d - kp.epsilon


def _psi_values(d: np.ndarray, kp: KernelParams) -> np.ndarray:
    return np.exp(kp.growth * d) * (kp.sine_coeff * np.sin(kp.frequency * d)
                                    + kp.epsilon * np.cos(kp.frequency * d))


def _upper_trapezoid_weights(n_cells: int, h: float) -> np.ndarray:
    """W[i, j]: trapezoid weight of node j for an integral over [x_i, x_N]."""
    n = n_cells + 1
    w = np.triu(np.full((n, n), h))
    idx = np.arange(n)
    w[idx, idx] = 0.5 * h
    w[:, n - 1] = 0.5 * h
    w[n - 1, :] = 0.0
    return w


_UNIT_WEIGHTS_CACHE: dict = {}


def _unit_upper_weights(n_cells: int) -> np.ndarray:
    w = _UNIT_WEIGHTS_CACHE.get(n_cells)
    if w is None:
        w = _upper_trapezoid_weights(n_cells, 1.0 / n_cells)
        w.setflags(write=False)
        _UNIT_WEIGHTS_CACHE[n_cells] = w
    return w


def _transform_batch(profiles: np.ndarray, interface, X, kp: KernelParams) -> np.ndarray:
    """Direct transform of many snapshots at once.

    The affine kernel factors on the immobilized grid into two fixed-weight
    quadratures (of u and of xi*u), so the whole batch reduces to two
    matrix products with the unit-interval trapezoid weights.
    """
    profiles = np.atleast_2d(np.asarray(profiles, dtype=float))
    s = np.asarray(interface, dtype=float).reshape(-1, 1)
    x_err = np.asarray(X, dtype=float).reshape(-1, 1)
    n_cells = profiles.shape[1] - 1
    weights = _unit_upper_weights(n_cells)
    xi = np.linspace(0.0, 1.0, n_cells + 1)
    j0 = profiles @ weights.T                 # integral of u over [xi_i, 1]
    j1 = (profiles * xi) @ weights.T          # integral of xi*u over [xi_i, 1]
    cb = kp.gain / kp.beta
    integral = s * (cb * s * (xi * j0 - j1) - kp.epsilon * j0)
    boundary = (cb * s * (xi - 1.0) - kp.epsilon) * x_err
    return profiles - (kp.beta / kp.alpha) * integral - boundary


def _direct_transform_arrays(u: np.ndarray, s: float, X: float,
                             kp: KernelParams) -> np.ndarray:
    return _transform_batch(u, (s,), (X,), kp)[0]


def direct_transform(state: OnePhaseState, X: float, kp: KernelParams) -> np.ndarray:
    """Map the error state (u, X) to the target variable w on the grid.

    w(x) = u(x) - (beta/alpha) int_x^s phi(x - y) u(y) dy - phi(x - s) X;
    the inner integral is trapezoid on the sub-grid [x_i, s].  At the
    interface w(s) = epsilon X exactly.
    """
    return _direct_transform_arrays(state.u, state.s, X, kp)


def inverse_transform(w: np.ndarray, s: float, X: float, kp: KernelParams) -> np.ndarray:
    """Map the target variable w back: u(x) = w - (beta/alpha) int psi w - psi(x-s) X."""
    w = np.asarray(w, dtype=float)
    n_cells = w.size - 1
    h = s / n_cells
    x = np.linspace(0.0, s, w.size)
    diffs = x[:, None] - x[None, :]
    integral = (_psi_values(diffs, kp) * w[None, :] * _upper_trapezoid_weights(n_cells, h)).sum(axis=1)
    return w - (kp.beta / kp.alpha) * integral - _psi_values(x - s, kp) * X


def lyapunov_value(state: OnePhaseState, X: float, kp: KernelParams) -> float:
    """V = ||w||^2/(2 alpha) + epsilon X^2/(2 beta) with w the transformed state."""
    w = _direct_transform_arrays(state.u, state.s, X, kp)
    h = state.s / (w.size - 1)
    return _trapz(w * w, h) / (2.0 * kp.alpha) + kp.epsilon * X * X / (2.0 * kp.beta)


# ---------------------------------------------------------------------------
# Energies
# ---------------------------------------------------------------------------

def internal_energy_1p(state: OnePhaseState, props: PhaseProperties) -> float:
    """E = rho Cp int_0^s u dx + rho dH* s  [J/m^2]."""
    h = state.s / state.n_cells
    return (props.volumetric_heat_capacity * _trapz(state.u, h)
            + props.volumetric_latent_heat * state.s)


def internal_energy_2p(state: TwoPhaseState, props_l: PhaseProperties,
                       props_s: PhaseProperties) -> float:
    """Total internal energy with both thermal integrals plus gamma s [J/m^2]."""
    h_l = state.s / state.n_cells_liquid
    h_s = (state.length - state.s) / state.n_cells_solid
    return (props_l.volumetric_heat_capacity * _trapz(state.u_l, h_l)
            + props_s.volumetric_heat_capacity * _trapz(state.u_s, h_s)
            + props_l.volumetric_latent_heat * state.s)


def energy_balance_residual(traj: Trajectory, inflow: str = "snapshots") -> float:
    """|E(t_f) - E(0) - int (q_c - q_f) dt| / max(|E(0)|, |E(t_f)|).

    inflow "snapshots": the time integral is trapezoid on the recorded
    snapshots (limited by the output cadence for rapidly decaying fluxes).
    inflow "recorded": use the solver's step-resolution cumulative integral,
    which isolates the discretization error of the scheme itself.
    """
    e = traj.energy
    if inflow == "recorded":
        if traj.energy_inflow is None:
            raise ValueError("trajectory carries no recorded inflow")
        integral = float(traj.energy_inflow[-1] - traj.energy_inflow[0])
    elif inflow == "snapshots":
        net = traj.heat_input - traj.heat_loss
        dt = np.diff(traj.times)
        integral = float(np.sum(0.5 * (net[1:] + net[:-1]) * dt))
    else:
        raise ValueError(f"unknown inflow source {inflow!r}")
    num = abs(float(e[-1] - e[0]) - integral)
    den = max(abs(float(e[0])), abs(float(e[-1])))
    return num / den if den > 0 else num


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def error_norm_1p(state: OnePhaseState, setpoint: float) -> float:
    """(int_0^s u^2 dx + (s - s_r)^2)^{1/2}."""
    h = state.s / state.n_cells
    return math.sqrt(_trapz(state.u * state.u, h) + (state.s - setpoint) ** 2)


def error_norm_2p(state: TwoPhaseState, setpoint: float) -> float:
    """(int u_l^2 + int u_s^2 + (s - s_r)^2)^{1/2}."""
    h_l = state.s / state.n_cells_liquid
    h_s = (state.length - state.s) / state.n_cells_solid
    return math.sqrt(_trapz(state.u_l * state.u_l, h_l)
                     + _trapz(state.u_s * state.u_s, h_s)
                     + (state.s - setpoint) ** 2)


def reduced_interface_error(state: TwoPhaseState, props_l: PhaseProperties,
                            props_s: PhaseProperties, setpoint: float) -> float:
    """Interface error of the reduced system:
    (s - s_r) + (rho_s Cp_s / gamma) int_s^L u_s dx.

    Folding the solid thermal content into the interface coordinate reduces
    the two-phase dynamics to the one-phase error-system form.
    """
    h_s = (state.length - state.s) / state.n_cells_solid
    gamma = props_l.volumetric_latent_heat
    return (state.s - setpoint
            + props_s.volumetric_heat_capacity / gamma * _trapz(state.u_s, h_s))


# ---------------------------------------------------------------------------
# ISS decay rate and envelope
# ---------------------------------------------------------------------------

def decay_rate_1p(props: PhaseProperties, setpoint: float, gain: float) -> float:
    """lambda = (1/32) min(alpha/s_r^2, c)  [1/s]."""
    alpha = derive_coefficients(props).alpha
    return min(alpha / (setpoint * setpoint), gain) / 32.0


def decay_rate_2p(props_l: PhaseProperties, props_s: PhaseProperties,
                  length: float, gain: float) -> float:
    """lambda = (1/32) min(alpha_l/L^2, 2 alpha_s/L^2, c)  [1/s]."""
    alpha_l = derive_coefficients(props_l).alpha
    alpha_s = derive_coefficients(props_s).alpha
    ll = length * length
    return min(alpha_l / ll, 2.0 * alpha_s / ll, gain) / 32.0


@dataclass(frozen=True)
class ISSEnvelope:
    """Fitted disturbance-to-state envelope
    value(t) <= m1 * value(0) * exp(-decay_rate t) + m2 * sup forcing.

    ``fit_residual`` is the worst remaining constraint slack (<= 0 up to
    floating tolerance when the fit is feasible); m1 >= 1 by convention.
    """

    decay_rate: float
    m1: float
    m2: float
    fit_residual: float

    def __post_init__(self):
        if self.m1 < 1.0:
            raise ValueError("m1 >= 1 by convention")

    def bound(self, initial: float, forcing_sup, t):
        return self.m1 * initial * np.exp(-self.decay_rate * np.asarray(t)) \
            + self.m2 * forcing_sup


def _nondominated(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Drop covering constraints implied by another one (a_l<=a_k, b_l<=b_k,
    c_l>=c_k); identical rows keep the earliest index."""
    n = a.size
    le_a = a[None, :] <= a[:, None]
    le_b = b[None, :] <= b[:, None]
    ge_c = c[None, :] >= c[:, None]
    dom = le_a & le_b & ge_c
    strict = (a[None, :] < a[:, None]) | (b[None, :] < b[:, None]) | (c[None, :] > c[:, None])
    idx = np.arange(n)
    dom &= strict | (idx[None, :] < idx[:, None])
    np.fill_diagonal(dom, False)
    return ~dom.any(axis=1)


def fit_envelope(times: np.ndarray, values: np.ndarray, decay_rate: float,
                 forcing: np.ndarray) -> tuple:
    """Minimal (m1 >= 1, m2 >= 0) with
    values[i] <= m1 * values[0] * exp(-rate * (t_i - t_0)) + m2 * sup_{j<=i} forcing[j]
    at every sample.

    Two-variable covering LP solved exactly by enumerating the vertices of
    the binding constraints (pairwise intersections after a dominance
    prune, plus the m1 = 1 and m2 = 0 boundary points); objective
    m1 + kappa m2 with kappa = values[0]/sup(forcing).

    Returns (m1, m2, fit_residual).
    """
    if times.size == 0:
        raise ValueError("empty trajectory")
    t = np.asarray(times, dtype=float) - float(times[0])
    c = np.asarray(values, dtype=float)
    v0 = float(c[0])
    a = v0 * np.exp(-decay_rate * t)
    b = np.maximum.accumulate(np.asarray(forcing, dtype=float))
    if np.any(b < 0):
        raise ValueError("forcing must be non-negative")
    feas_tol = 1e-9 * max(1.0, float(np.max(np.abs(c))))
    bmax = float(b[-1])

    candidates = []
    pos_a = a > 0
    if np.any(pos_a):
        m1_only = max(1.0, float(np.max(c[pos_a] / a[pos_a])))
    else:
        m1_only = 1.0
    zero_a_uncovered = (~pos_a) & (b <= 0) & (c > feas_tol)
    if not np.any(zero_a_uncovered):
        candidates.append((m1_only, 0.0))
    need = c - a
    pos_b = b > 0
    if np.any(pos_b):
        m2_only = max(0.0, float(np.max(need[pos_b] / b[pos_b])))
        candidates.append((1.0, m2_only))
    if np.all(need <= feas_tol):
        candidates.append((1.0, 0.0))

    keep = _nondominated(a, b, c)
    ak, bk, ck = a[keep], b[keep], c[keep]
    if ak.size >= 2:
        ii, jj = np.triu_indices(ak.size, k=1)
        det = ak[ii] * bk[jj] - ak[jj] * bk[ii]
        ok = np.abs(det) > 1e-300
        ii, jj, det = ii[ok], jj[ok], det[ok]
        m1s = (ck[ii] * bk[jj] - ck[jj] * bk[ii]) / det
        m2s = (ak[ii] * ck[jj] - ak[jj] * ck[ii]) / det
        inside = (m1s >= 1.0 - 1e-12) & (m2s >= -1e-12)
        for m1c, m2c in zip(m1s[inside], m2s[inside]):
            candidates.append((max(1.0, float(m1c)), max(0.0, float(m2c))))

    kappa = (v0 if v0 > 0 else 1.0) / bmax if bmax > 0 else 1.0
    best = None
    best_obj = math.inf
    for m1c, m2c in candidates:
        slack = a * m1c + b * m2c - c
        if float(slack.min()) < -feas_tol:
            continue
        obj = m1c + kappa * m2c
        if obj < best_obj:
            best_obj = obj
            best = (m1c, m2c)
    if best is None:
        raise RuntimeError("no feasible envelope found (degenerate trajectory)")
    m1, m2 = best
    residual = float(np.max(c - a * m1 - b * m2))
    return m1, m2, residual


def fit_iss_envelope(traj: Trajectory, decay_rate: Optional[float] = None) -> ISSEnvelope:
    """Fit the ISS estimate Psi(t) <= m1 Psi(0) e^{-lambda t} + m2 sup q_f.

    ``decay_rate`` defaults to the explicit rate of the trajectory's
    variant.  The fitted envelope satisfies every pointwise constraint
    (non-positive fit_residual up to floating tolerance).
    """
    if traj.n_snapshots < 1:
        raise ValueError("empty trajectory")
    sc = traj.scenario
    if decay_rate is None:
        if traj.variant == "two-phase":
            decay_rate = decay_rate_2p(sc.liquid, sc.solid, sc.length, sc.gain)
        else:
            decay_rate = decay_rate_1p(sc.liquid, sc.setpoint, sc.gain)
    m1, m2, residual = fit_envelope(traj.times, traj.error_norm, decay_rate,
                                    traj.heat_loss)
    return ISSEnvelope(decay_rate=decay_rate, m1=m1, m2=m2, fit_residual=residual)


# ---------------------------------------------------------------------------
# Model-validity monitor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidityViolation:
    kind: str
    time: float
    magnitude: float


def negativity_tolerance(scale: float) -> float:
    """Round-off allowance for sign checks: 1e-10 * max(|scale|, 1 K)."""
    return 1e-10 * max(abs(scale), 1.0)


def _scan_validity(variant, mode, times, interface, heat_input,
                   liquid_profiles, solid_profiles, setpoint, length, tol):
    violations = []
    flags = np.ones(times.size, dtype=bool)
    check_flux = mode in ("closed-loop", "open-loop")
    for i in range(times.size):
        t = float(times[i])
        s = float(interface[i])
        mn = float(liquid_profiles[i].min())
        if mn < -tol:
            violations.append(ValidityViolation("liquid-below-melting", t, -mn))
            flags[i] = False
        if variant == "two-phase":
            mx = float(solid_profiles[i].max())
            if mx > tol:
                violations.append(ValidityViolation("solid-above-melting", t, mx))
                flags[i] = False
            if s >= length:
                violations.append(ValidityViolation("interface-beyond-length", t, s - length))
                flags[i] = False
        if s <= 0.0:
            violations.append(ValidityViolation("interface-nonpositive", t, -s))
            flags[i] = False
        if variant == "one-phase" and mode == "closed-loop" and s >= setpoint:
            violations.append(ValidityViolation("interface-overshoot", t, s - setpoint))
            flags[i] = False
        if check_flux and float(heat_input[i]) <= 0.0:
            violations.append(ValidityViolation("nonpositive-heat-input", t,
                                                -float(heat_input[i])))
            flags[i] = False
    return violations, flags


def validity_monitor(traj: Trajectory) -> list:
    """Scan snapshots for model-validity violations.

    Checks: liquid at or above melting, solid at or below melting
    (two-phase), 0 < s (and s < L two-phase), no setpoint overshoot
    (one-phase closed loop), strictly positive boundary heat input
    (closed/open loop).  Sign checks use the round-off tolerance scaled to
    the initial data.  Returns the violations with time and magnitude.
    """
    scale = float(np.max(np.abs(traj.liquid_profiles[0])))
    if traj.variant == "two-phase":
        scale = max(scale, float(np.max(np.abs(traj.solid_profiles[0]))))
    tol = negativity_tolerance(scale)
    violations, _ = _scan_validity(
        traj.variant, traj.scenario.mode, traj.times, traj.interface,
        traj.heat_input, traj.liquid_profiles, traj.solid_profiles,
        traj.scenario.setpoint, traj.scenario.length, tol)
    return violations


# ---------------------------------------------------------------------------
# Per-snapshot series used by the solvers when assembling trajectories
# ---------------------------------------------------------------------------

def error_norm_series_1p(interface: np.ndarray, profiles: np.ndarray,
                         setpoint: float) -> np.ndarray:
    n_cells = profiles.shape[1] - 1
    h = interface / n_cells
    sq = profiles * profiles
    integral = h * (0.5 * sq[:, 0] + sq[:, 1:-1].sum(axis=1) + 0.5 * sq[:, -1])
    return np.sqrt(integral + (interface - setpoint) ** 2)


def error_norm_series_2p(interface: np.ndarray, prof_l: np.ndarray,
                         prof_s: np.ndarray, length: float,
                         setpoint: float) -> np.ndarray:
    nl = prof_l.shape[1] - 1
    ns = prof_s.shape[1] - 1
    h_l = interface / nl
    h_s = (length - interface) / ns
    sq_l = prof_l * prof_l
    sq_s = prof_s * prof_s
    il = h_l * (0.5 * sq_l[:, 0] + sq_l[:, 1:-1].sum(axis=1) + 0.5 * sq_l[:, -1])
    isol = h_s * (0.5 * sq_s[:, 0] + sq_s[:, 1:-1].sum(axis=1) + 0.5 * sq_s[:, -1])
    return np.sqrt(il + isol + (interface - setpoint) ** 2)


def _lyapunov_from_batch(w: np.ndarray, interface: np.ndarray,
                         x_err: np.ndarray, kp: KernelParams) -> np.ndarray:
    h = interface / (w.shape[1] - 1)
    sq = w * w
    norm2 = h * (0.5 * sq[:, 0] + sq[:, 1:-1].sum(axis=1) + 0.5 * sq[:, -1])
    return norm2 / (2.0 * kp.alpha) + kp.epsilon * x_err * x_err / (2.0 * kp.beta)


def lyapunov_series_1p(interface: np.ndarray, profiles: np.ndarray,
                       setpoint: float, kp: KernelParams) -> np.ndarray:
    x_err = interface - setpoint
    w = _transform_batch(profiles, interface, x_err, kp)
    return _lyapunov_from_batch(w, interface, x_err, kp)


def lyapunov_series_2p(interface: np.ndarray, prof_l: np.ndarray,
                       prof_s: np.ndarray, length: float, setpoint: float,
                       kp: KernelParams, props_l: PhaseProperties,
                       props_s: PhaseProperties) -> np.ndarray:
    """Lyapunov values of the reduced system: the solid thermal content is
    folded into the interface error, then the one-phase functional applies."""
    gamma = props_l.volumetric_latent_heat
    ratio = props_s.volumetric_heat_capacity / gamma
    ns = prof_s.shape[1] - 1
    h_s = (length - interface) / ns
    solid_integral = h_s * (0.5 * prof_s[:, 0] + prof_s[:, 1:-1].sum(axis=1)
                            + 0.5 * prof_s[:, -1])
    x_err = interface - setpoint + ratio * solid_integral
    w = _transform_batch(prof_l, interface, x_err, kp)
    return _lyapunov_from_batch(w, interface, x_err, kp)
