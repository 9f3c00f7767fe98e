import json
import math

import numpy as np
import pytest

import stefan_iss as si
from conftest import CP, DH, K, RHO, S0, SETPOINT, T0_BAR, ZINC, paper_scenario, \
    two_phase_scenario, replace


# ---------------------------------------------------------------------------
# derive_coefficients
# ---------------------------------------------------------------------------

def test_zinc_diffusivity_is_direct_quotient():
    d = si.derive_coefficients(ZINC)
    assert d.alpha == K / (RHO * CP)
    assert abs(d.alpha - 4.532e-5) < 1e-8


def test_zinc_latent_scaling_and_gamma():
    d = si.derive_coefficients(ZINC)
    assert d.beta == K / (RHO * DH)
    assert d.gamma == RHO * DH


def test_unit_properties_give_unit_coefficients():
    p = si.PhaseProperties(density=1.0, latent_heat=1.0, heat_capacity=1.0,
                           conductivity=1.0)
    d = si.derive_coefficients(p)
    assert d.alpha == 1.0 and d.beta == 1.0 and d.gamma == 1.0


def test_conductivity_scaling_law():
    base = si.derive_coefficients(ZINC)
    scaled = si.derive_coefficients(si.PhaseProperties(
        density=RHO, latent_heat=DH, heat_capacity=CP, conductivity=2.0 * K))
    assert scaled.alpha == pytest.approx(2.0 * base.alpha, rel=1e-15)
    assert scaled.beta == pytest.approx(2.0 * base.beta, rel=1e-15)
    assert scaled.gamma == base.gamma


@pytest.mark.parametrize("field", ["density", "latent_heat", "heat_capacity",
                                   "conductivity"])
def test_nonpositive_properties_rejected(field):
    kwargs = dict(density=RHO, latent_heat=DH, heat_capacity=CP, conductivity=K)
    kwargs[field] = 0.0
    with pytest.raises(ValueError):
        si.PhaseProperties(**kwargs)


# ---------------------------------------------------------------------------
# initial profiles
# ---------------------------------------------------------------------------

def test_default_ramp_values():
    sc = paper_scenario(n_cells=50)
    assert si.eval_initial_profile(sc, 0.0) == T0_BAR
    assert si.eval_initial_profile(sc, S0) == 0.0
    assert si.eval_initial_profile(sc, S0 / 2) == pytest.approx(T0_BAR / 2, rel=1e-15)


def test_out_of_domain_position_rejected():
    sc = paper_scenario(n_cells=50)
    with pytest.raises(ValueError):
        si.eval_initial_profile(sc, -1e-6)
    with pytest.raises(ValueError):
        si.eval_initial_profile(sc, S0 + 1e-6)


def test_tabulated_profile_clamped_with_warning():
    prof = si.TabulatedProfile(positions=np.array([0.0, 0.05, 0.1]),
                               values=np.array([10.0, -1.0, 0.0]))
    sc = paper_scenario(n_cells=50, initial_liquid=prof)
    with pytest.warns(UserWarning):
        v = si.eval_initial_profile(sc, 0.05)
    assert v == 0.0


def test_interface_value_pinned_for_any_profile():
    prof = si.TabulatedProfile(positions=np.array([0.0, 0.1]),
                               values=np.array([10.0, 3.0]))
    sc = paper_scenario(n_cells=50, initial_liquid=prof)
    assert si.eval_initial_profile(sc, S0) == 0.0


def test_solid_profile_ramp():
    sc = two_phase_scenario()
    mid = 0.5 * (S0 + sc.length)
    assert si.eval_initial_profile(sc, sc.length, phase="solid") == -5.0
    assert si.eval_initial_profile(sc, S0, phase="solid") == 0.0
    assert si.eval_initial_profile(sc, mid, phase="solid") == pytest.approx(-2.5, rel=1e-15)


def test_callable_profile_used_directly():
    sc = paper_scenario(n_cells=50, initial_liquid=lambda x: 4.0 * (S0 - x))
    assert si.eval_initial_profile(sc, 0.025) == pytest.approx(0.3, rel=1e-15)


# ---------------------------------------------------------------------------
# disturbances
# ---------------------------------------------------------------------------

def test_disturbance_evaluation_by_kind():
    assert si.DisturbanceSpec.zero()(5.0) == 0.0
    assert si.DisturbanceSpec.constant(1e3)(7.0) == 1e3
    exp = si.DisturbanceSpec.exponential(1e3, 1e-2)
    assert exp(100.0) == pytest.approx(1e3 * math.exp(-1.0), rel=1e-15)
    tab = si.DisturbanceSpec.table([0.0, 10.0], [0.0, 100.0])
    assert tab(5.0) == pytest.approx(50.0)
    assert tab(20.0) == 100.0  # clamped beyond the last sample


def test_disturbance_supremum():
    assert si.DisturbanceSpec.zero().supremum() == 0.0
    assert si.DisturbanceSpec.constant(2e3).supremum() == 2e3
    assert si.DisturbanceSpec.exponential(2e3, 1e-5).supremum() == 2e3
    tab = si.DisturbanceSpec.table([0.0, 1.0, 2.0], [1.0, 7.0, 3.0])
    assert tab.supremum() == 7.0


def test_total_energy_bound_flags():
    assert si.DisturbanceSpec.zero().total_energy_bounded()
    assert not si.DisturbanceSpec.constant(10.0).total_energy_bounded()
    assert si.DisturbanceSpec.constant(0.0).total_energy_bounded()
    assert si.DisturbanceSpec.exponential(10.0, 1e-6).total_energy_bounded()
    assert not si.DisturbanceSpec.exponential(10.0, 0.0).total_energy_bounded()
    tail = si.DisturbanceSpec.table([0.0, 1.0], [5.0, 1.0])
    assert not tail.total_energy_bounded()
    closed = si.DisturbanceSpec.table([0.0, 1.0], [5.0, 0.0])
    assert closed.total_energy_bounded()


def test_negative_disturbance_rejected():
    with pytest.raises(ValueError):
        si.DisturbanceSpec.constant(-1.0)
    with pytest.raises(ValueError):
        si.DisturbanceSpec.table([0.0, 1.0], [1.0, -2.0])


# ---------------------------------------------------------------------------
# assumption gate
# ---------------------------------------------------------------------------

def test_setpoint_threshold_matches_analytic_value():
    sc = paper_scenario(qf_bar=1e4)
    rep = si.check_assumptions(sc)
    chk = rep["setpoint-above-threshold"]
    # beta/alpha = Cp/dH*, integral of the ramp = T0_bar * s0 / 2
    expected = S0 + (CP / DH) * (T0_BAR * S0 / 2.0)
    assert chk.rhs == pytest.approx(expected, rel=1e-13)
    assert abs(chk.rhs - 0.1017) < 1e-4
    assert chk.passed


def test_gain_threshold_matches_analytic_value():
    sc = paper_scenario(qf_bar=1e4)
    chk = si.check_assumptions(sc)["gain-above-threshold"]
    expected = 1e4 / (RHO * DH * SETPOINT)
    assert chk.rhs == pytest.approx(expected, rel=1e-13)
    assert abs(expected - 3.9e-5) < 2e-6
    assert chk.passed


def test_setpoint_equal_to_s0_fails():
    sc = paper_scenario(setpoint=S0)
    rep = si.check_assumptions(sc)
    assert not rep["setpoint-above-threshold"].passed
    assert not rep.all_passed


def test_setpoint_check_monotone_in_setpoint():
    rng = np.random.default_rng(3)
    for _ in range(20):
        s0 = rng.uniform(0.01, 0.5)
        t0bar = rng.uniform(0.0, 50.0)
        s_r = rng.uniform(s0, 2.0)
        sc = paper_scenario(s0=s0, setpoint=s_r,
                            initial_liquid=si.LinearProfile(t0bar))
        if si.check_assumptions(sc)["setpoint-above-threshold"].passed:
            bigger = replace(sc, setpoint=s_r * rng.uniform(1.0, 3.0))
            assert si.check_assumptions(bigger)["setpoint-above-threshold"].passed


def test_unbounded_energy_flagged_but_not_fatal():
    sc = paper_scenario(disturbance=si.DisturbanceSpec.constant(1e3))
    rep = si.check_assumptions(sc)
    assert not rep["heat-loss-energy-bounded"].passed
    assert rep["heat-loss-nonnegative"].passed


def test_two_phase_gate_entries():
    sc = two_phase_scenario()
    rep = si.check_assumptions(sc)
    assert rep.all_passed
    names = [c.name for c in rep.checks]
    assert "initial-solid-temperature" in names
    assert "initial-energy-positive" in names
    assert "setpoint-below-length" in names
    # lower threshold: s0 + Cp_l/dH* * int(u_l) / 1 + rho_s Cp_s/gamma * int(u_s)
    lower = (S0 + (CP / DH) * (T0_BAR * S0 / 2.0)
             + (380.0 * RHO / (RHO * DH)) * (-5.0 * (0.5 - S0) / 2.0))
    assert rep["setpoint-above-threshold"].rhs == pytest.approx(lower, rel=1e-12)


def test_two_phase_initial_energy_value():
    sc = two_phase_scenario()
    e0 = si.check_assumptions(sc)["initial-energy-positive"].lhs
    expected = (RHO * CP * (T0_BAR * S0 / 2.0)
                + RHO * 380.0 * (-5.0 * (0.5 - S0) / 2.0)
                + RHO * DH * S0)
    assert e0 == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

def test_one_phase_state_invariants():
    with pytest.raises(ValueError):
        si.OnePhaseState(t=0.0, s=0.0, u=np.zeros(9))
    u = np.zeros(9)
    u[-1] = 1e-16
    with pytest.raises(ValueError):
        si.OnePhaseState(t=0.0, s=0.1, u=u)
    st = si.OnePhaseState(t=0.0, s=0.1, u=np.zeros(9))
    with pytest.raises(ValueError):
        st.u[0] = 1.0  # read-only


def test_two_phase_state_invariants():
    with pytest.raises(ValueError):
        si.TwoPhaseState(t=0.0, s=0.5, length=0.5, u_l=np.zeros(9), u_s=np.zeros(9))
    bad = np.zeros(9)
    bad[0] = 1.0
    with pytest.raises(ValueError):
        si.TwoPhaseState(t=0.0, s=0.2, length=0.5, u_l=np.zeros(9), u_s=bad)
    st = si.TwoPhaseState(t=0.0, s=0.2, length=0.5, u_l=np.zeros(9), u_s=np.zeros(9))
    assert st.liquid_slice().s == 0.2


# ---------------------------------------------------------------------------
# scenario validation and serialization
# ---------------------------------------------------------------------------

def test_scenario_hard_validation():
    with pytest.raises(si.ScenarioError):
        paper_scenario(s0=-1.0)
    with pytest.raises(si.ScenarioError):
        paper_scenario(gain=0.0)
    with pytest.raises(si.ScenarioError):
        paper_scenario(n_cells=4)
    with pytest.raises(si.ScenarioError):
        paper_scenario(t_final=0.0)
    with pytest.raises(si.ScenarioError):
        two_phase_scenario(s0=0.6)  # beyond length
    # setpoint <= s0 is a gate failure, not a structural one
    paper_scenario(setpoint=S0)


def test_scenario_json_round_trip():
    sc = two_phase_scenario(n_snapshots=123, safety=0.3)
    doc = si.scenario_to_dict(sc)
    sc2 = si.scenario_from_dict(doc)
    assert si.scenario_to_dict(sc2) == doc
    assert doc["disturbance"] == {"kind": "exponential", "qf_bar": 1e3, "K": 5e-6}


def test_scenario_file_round_trip(tmp_path):
    sc = paper_scenario()
    path = tmp_path / "sc.json"
    si.save_scenario(sc, path)
    sc2 = si.load_scenario(path)
    assert si.scenario_to_dict(sc2) == si.scenario_to_dict(sc)


def test_malformed_json_reports_location(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ not json")
    with pytest.raises(si.ScenarioError, match="line"):
        si.load_scenario(path)


def test_missing_keys_rejected(tmp_path):
    path = tmp_path / "incomplete.json"
    path.write_text(json.dumps({"s0": 0.1}))
    with pytest.raises(si.ScenarioError, match="missing"):
        si.load_scenario(path)


def test_callable_profile_not_serializable():
    sc = paper_scenario(initial_liquid=lambda x: 1.0)
    with pytest.raises(si.ScenarioError):
        si.scenario_to_dict(sc)


# ---------------------------------------------------------------------------
# trajectory invariants
# ---------------------------------------------------------------------------

def test_trajectory_first_snapshot_is_initial_condition():
    sc = paper_scenario(n_cells=32, t_final=50.0, n_snapshots=5)
    traj = si.run(sc)
    assert traj.times[0] == 0.0
    assert traj.interface[0] == S0
    u0 = si.sample_initial_profile(sc, "liquid")
    assert np.array_equal(traj.liquid_profiles[0], u0)
    assert np.all(np.diff(traj.times) > 0)


def test_trajectory_rejects_nonincreasing_times():
    sc = paper_scenario(n_cells=32, t_final=50.0, n_snapshots=5)
    traj = si.run(sc)
    with pytest.raises(ValueError):
        replace(traj, times=np.zeros_like(traj.times))
