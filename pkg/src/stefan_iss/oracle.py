"""Classical similarity solution of the constant-temperature melting problem.

Used as an independent correctness oracle for the solver: with the boundary
held at a fixed temperature excess delta_T (Dirichlet validation mode, no
heat loss), the interface follows s(t) = 2 lambda sqrt(alpha t) where lambda
solves the transcendental condition

    lambda * exp(lambda^2) * erf(lambda) = St / sqrt(pi),
    St = Cp * delta_T / dH*.

Everything here is deliberately independent of the finite-difference path:
the root is found by plain bisection on math.erf.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

from .core import DisturbanceSpec, PhaseProperties, Scenario, Trajectory, derive_coefficients
from . import solver_one_phase

__all__ = [
    "stefan_number",
    "neumann_lambda",
    "similarity_interface",
    "similarity_profile",
    "validation_scenario",
    "ValidationResult",
    "run_validation",
]


def stefan_number(props: PhaseProperties, delta_T: float) -> float:
    """Sensible-to-latent heat ratio Cp * delta_T / dH* (dimensionless)."""
    return props.heat_capacity * delta_T / props.latent_heat


def neumann_lambda(st: float, tol: float = 1e-12) -> float:
    """Root of lambda e^{lambda^2} erf(lambda) = St/sqrt(pi) by bisection."""
    if not (st > 0 and math.isfinite(st)):
        raise ValueError("Stefan number must be finite and > 0")
    target = st / math.sqrt(math.pi)

    def f(lam: float) -> float:
        return lam * math.exp(lam * lam) * math.erf(lam) - target

    lo, hi = 0.0, 1.0
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1e3:
            raise RuntimeError("failed to bracket the similarity root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def similarity_interface(t: float, lam: float, alpha: float) -> float:
    """s(t) = 2 lambda sqrt(alpha t) [m]."""
    return 2.0 * lam * math.sqrt(alpha * t)


def similarity_profile(x: float, t: float, lam: float, alpha: float,
                       delta_T: float) -> float:
    """Temperature excess delta_T (1 - erf(x / 2 sqrt(alpha t)) / erf(lambda))."""
    return delta_T * (1.0 - math.erf(x / (2.0 * math.sqrt(alpha * t)))
                      / math.erf(lam))


def validation_scenario(props: PhaseProperties, st: float, s0: float = 0.05,
                        horizon_ratio: float = 4.0, n_cells: int = 200,
                        safety: float = 0.4, n_snapshots: int = 500) -> Scenario:
    """Dirichlet-validation scenario seeded on the similarity solution.

    The run starts at the similarity time t0 = (s0 / 2 lambda)^2 / alpha
    with the exact analytic profile, so the numerical interface should track
    2 lambda sqrt(alpha t) from the start.  ``horizon_ratio`` is
    t_final/t0.
    """
    if horizon_ratio <= 1.0:
        raise ValueError("horizon_ratio must exceed 1")
    delta_T = st * props.latent_heat / props.heat_capacity
    alpha = derive_coefficients(props).alpha
    lam = neumann_lambda(st)
    t_start = (s0 / (2.0 * lam)) ** 2 / alpha

    def initial(x: float) -> float:
        return similarity_profile(x, t_start, lam, alpha, delta_T)

    return Scenario(
        liquid=props,
        s0=s0,
        setpoint=10.0 * s0,   # never reached; analysis plumbing only
        gain=1e-3,
        disturbance=DisturbanceSpec.zero(),
        initial_liquid=initial,
        t_final=horizon_ratio * t_start,
        t0=t_start,
        n_cells=n_cells,
        safety=safety,
        n_snapshots=n_snapshots,
        mode="dirichlet",
        dirichlet_delta=delta_T,
    )


@dataclass(frozen=True)
class ValidationResult:
    stefan_number: float
    lam: float
    n_cells: int
    max_rel_error: float       # over the final half of the horizon
    runtime_seconds: float
    trajectory: Optional[Trajectory] = None


def validation_error(traj: Trajectory, lam: float, alpha: float) -> float:
    """Max relative deviation of s(t) from 2 lambda sqrt(alpha t) over the
    final half of the horizon."""
    times = traj.times
    half = times[0] + 0.5 * (times[-1] - times[0])
    worst = 0.0
    for t, s in zip(times, traj.interface):
        if t < half:
            continue
        ref = similarity_interface(float(t), lam, alpha)
        dev = abs(float(s) - ref) / ref
        if dev > worst:
            worst = dev
    return worst


def run_validation(props: PhaseProperties, st: float, n_cells: int,
                   s0: float = 0.05, horizon_ratio: float = 4.0,
                   keep_trajectory: bool = False) -> ValidationResult:
    """Run the Dirichlet-validation scenario and compare with the oracle."""
    sc = validation_scenario(props, st, s0=s0, horizon_ratio=horizon_ratio,
                             n_cells=n_cells)
    alpha = derive_coefficients(props).alpha
    lam = neumann_lambda(st)
    start = time.perf_counter()
    traj = solver_one_phase.run(sc)
    elapsed = time.perf_counter() - start
    err = validation_error(traj, lam, alpha)
    return ValidationResult(stefan_number=st, lam=lam, n_cells=n_cells,
                            max_rel_error=err, runtime_seconds=elapsed,
                            trajectory=traj if keep_trajectory else None)
