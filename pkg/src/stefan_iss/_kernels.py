"""Numba time-stepping kernels for the immobilized-grid solvers.

Private module: the public API lives in ``solver_one_phase`` and
``solver_two_phase``.  Everything here is plain float64 arithmetic, so runs
are deterministic and the single-step path and the run loop share the exact
same update (the loop calls the same step body).

Coordinates: the liquid lives on xi = x/s(t) in [0, 1], the solid on
eta = (x - s)/(L - s) in [0, 1].  Both fields evolve under
``v_t = D v_zz + a(z) v_z`` with metric diffusivity D and grid-advection
velocity a from the chain rule of the moving map.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# disturbance kinds
DIST_ZERO, DIST_CONST, DIST_EXP, DIST_TABLE = 0, 1, 2, 3
# controller modes
CTRL_CLOSED, CTRL_OPEN, CTRL_DIRICHLET = 0, 1, 2
# run termination status
STATUS_OK, STATUS_PHASE_GONE, STATUS_BLOWUP = 0, 1, 2

DIST_CODE = {"zero": DIST_ZERO, "constant": DIST_CONST,
             "exponential": DIST_EXP, "table": DIST_TABLE}
CTRL_CODE = {"closed-loop": CTRL_CLOSED, "open-loop": CTRL_OPEN,
             "dirichlet": CTRL_DIRICHLET}

_EMPTY = np.empty(0, dtype=np.float64)


@njit(cache=True, nogil=True)
def disturbance_value(t, kind, qf_bar, decay, table_t, table_v):
    if kind == DIST_ZERO:
        return 0.0
    if kind == DIST_CONST:
        return qf_bar
    if kind == DIST_EXP:
        return qf_bar * math.exp(-decay * t)
    return np.interp(t, table_t, table_v)


@njit(cache=True, nogil=True)
def open_loop_closed_form(elapsed, q0, c, kind, qf_bar, decay):
    """q0 e^{-ct} + c * convolution(e^{-c(t-tau)}, q_f) for closed-form kinds."""
    base = q0 * math.exp(-c * elapsed)
    if kind == DIST_ZERO:
        return base
    if kind == DIST_CONST:
        return base + qf_bar * (1.0 - math.exp(-c * elapsed))
    if abs(c - decay) <= 1e-12 * c:
        return base + c * qf_bar * elapsed * math.exp(-c * elapsed)
    return base + c * qf_bar * (math.exp(-decay * elapsed)
                                - math.exp(-c * elapsed)) / (c - decay)


@njit(cache=True, nogil=True)
def trapz_sum(y):
    """Composite-trapezoid sum with unit spacing (caller scales)."""
    n = y.shape[0]
    acc = 0.5 * (y[0] + y[n - 1])
    for i in range(1, n - 1):
        acc += y[i]
    return acc


@njit(cache=True, nogil=True)
def closed_loop_value_1p(u, s, rho_cp, gamma, c, s_r):
    N = u.shape[0] - 1
    integral = trapz_sum(u) * (s / N)
    return -c * (rho_cp * integral + gamma * (s - s_r))


@njit(cache=True, nogil=True)
def closed_loop_value_2p(u_l, u_s, s, length, rho_cp_l, rho_cp_s, gamma, c, s_r):
    il = trapz_sum(u_l) * (s / (u_l.shape[0] - 1))
    isol = trapz_sum(u_s) * ((length - s) / (u_s.shape[0] - 1))
    return -c * (rho_cp_l * il + rho_cp_s * isol + gamma * (s - s_r))


@njit(cache=True, nogil=True)
def energy_value_1p(u, s, rho_cp, gamma):
    N = u.shape[0] - 1
    return rho_cp * trapz_sum(u) * (s / N) + gamma * s


@njit(cache=True, nogil=True)
def energy_value_2p(u_l, u_s, s, length, rho_cp_l, rho_cp_s, gamma):
    il = trapz_sum(u_l) * (s / (u_l.shape[0] - 1))
    isol = trapz_sum(u_s) * ((length - s) / (u_s.shape[0] - 1))
    return rho_cp_l * il + rho_cp_s * isol + gamma * s


@njit(cache=True, nogil=True)
def boundary_flux_from_profile(u, s, k):
    """Reconstructed inflow -k dT/dx at x = 0 (one-sided, second order)."""
    N = u.shape[0] - 1
    dxi = 1.0 / N
    ux0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dxi) / s
    return -k * ux0


@njit(cache=True, nogil=True)
def interface_flux_liquid(u, s, k):
    """-k dT/dx at x = s from the liquid side (one-sided, second order)."""
    N = u.shape[0] - 1
    dxi = 1.0 / N
    ux = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * dxi) / s
    return -k * ux


@njit(cache=True, nogil=True)
def interface_gradient_solid(v, s, length, k_s):
    """+k_s dT/dx at x = s from the solid side (one-sided, second order)."""
    Ns = v.shape[0] - 1
    deta = 1.0 / Ns
    vx = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * deta) / (length - s)
    return k_s * vx


@njit(cache=True, nogil=True)
def advance_liquid_field(u, u_new, s, s_dot_lag, bc_mode, bc_value, dt, alpha, k):
    """Explicit Euler update of the liquid field on xi = x/s.

    bc_mode 0: Neumann inflow -k dT/dx(0) = bc_value (ghost node, 2nd order)
    bc_mode 1: Dirichlet u(0) = bc_value

    Central differencing for diffusion and grid advection; falls back to
    first-order upwind when the cell Peclet number reaches 2.  Returns
    (interface_flux, min_u_new, max_u_new, used_upwind); u_new[N] is pinned
    to 0.  The extremes feed the sign monitors and the per-step blowup
    check.
    """
    N = u.shape[0] - 1
    dxi = 1.0 / N
    inv_s = 1.0 / s
    diff = alpha * inv_s * inv_s / (dxi * dxi)
    flux = interface_flux_liquid(u, s, k)
    pe = abs(s_dot_lag) * s * dxi / alpha
    upwind = pe >= 2.0
    if bc_mode == 0:
        ghost = u[1] + 2.0 * dxi * s * bc_value / k
        u_new[0] = u[0] + dt * diff * (u[1] - 2.0 * u[0] + ghost)
    else:
        u_new[0] = bc_value
    mn = u_new[0]
    mx = u_new[0]
    sdot_os = s_dot_lag * inv_s
    for i in range(1, N):
        lap = diff * (u[i + 1] - 2.0 * u[i] + u[i - 1])
        a = (i * dxi) * sdot_os
        if upwind:
            if a >= 0.0:
                der = (u[i + 1] - u[i]) / dxi
            else:
                der = (u[i] - u[i - 1]) / dxi
        else:
            der = (u[i + 1] - u[i - 1]) * (0.5 / dxi)
        u_new[i] = u[i] + dt * (lap + a * der)
        if u_new[i] < mn:
            mn = u_new[i]
        elif u_new[i] > mx:
            mx = u_new[i]
    u_new[N] = 0.0
    return flux, mn, mx, upwind


@njit(cache=True, nogil=True)
def advance_solid_field(v, v_new, s, length, s_dot_lag, q_f, dt, alpha_s, k_s):
    """Explicit Euler update of the solid field on eta = (x - s)/(L - s).

    Dirichlet v(0) = 0 at the interface; heat loss at x = L imposed as
    dT/dx(L) = -q_f/k_s via a ghost node.  Returns
    (k_s * dT/dx at x = s, min_v_new, max_v_new, used_upwind); v_new[0] is
    pinned to 0.
    """
    Ns = v.shape[0] - 1
    deta = 1.0 / Ns
    w = length - s
    inv_w = 1.0 / w
    diff = alpha_s * inv_w * inv_w / (deta * deta)
    grad = interface_gradient_solid(v, s, length, k_s)
    pe = abs(s_dot_lag) * w * deta / alpha_s
    upwind = pe >= 2.0
    v_new[0] = 0.0
    mn = 0.0
    mx = 0.0
    sdot_ow = s_dot_lag * inv_w
    for j in range(1, Ns):
        lap = diff * (v[j + 1] - 2.0 * v[j] + v[j - 1])
        a = (1.0 - j * deta) * sdot_ow
        if upwind:
            if a >= 0.0:
                der = (v[j + 1] - v[j]) / deta
            else:
                der = (v[j] - v[j - 1]) / deta
        else:
            der = (v[j + 1] - v[j - 1]) * (0.5 / deta)
        v_new[j] = v[j] + dt * (lap + a * der)
        if v_new[j] > mx:
            mx = v_new[j]
        elif v_new[j] < mn:
            mn = v_new[j]
    ghost = v[Ns - 1] - 2.0 * deta * w * q_f / k_s
    v_new[Ns] = v[Ns] + dt * diff * (ghost - 2.0 * v[Ns] + v[Ns - 1])
    if v_new[Ns] > mx:
        mx = v_new[Ns]
    elif v_new[Ns] < mn:
        mn = v_new[Ns]
    return grad, mn, mx, upwind


@njit(cache=True, nogil=True)
def step_1p_kernel(u, u_new, s, s_dot_lag, bc_mode, bc_value, q_f, dt,
                   alpha, beta, k):
    """Field update plus interface ODE, temperature first then s.

    The interface velocity uses the gradient at step start:
    s_dot = (beta/k) * (interface_flux - q_f).
    Returns (s_new, s_dot, interface_flux, min_u_new, max_u_new,
    used_upwind).
    """
    flux, mn, mx, upwind = advance_liquid_field(u, u_new, s, s_dot_lag,
                                                bc_mode, bc_value, dt, alpha, k)
    s_dot = (beta / k) * (flux - q_f)
    s_new = s + dt * s_dot
    return s_new, s_dot, flux, mn, mx, upwind


@njit(cache=True, nogil=True)
def step_2p_kernel(u_l, u_l_new, u_s, u_s_new, s, length, s_dot_lag,
                   q_c, q_f, dt, alpha_l, k_l, alpha_s, k_s, gamma):
    """Two-phase step: both fields, then the interface energy balance

    gamma * s_dot = -k_l dT_l/dx(s) + k_s dT_s/dx(s).

    Returns (s_new, s_dot, liquid_flux, solid_grad, min_ul, max_ul, min_us,
    max_us, used_upwind).
    """
    flux_l, mn_l, mx_l, up1 = advance_liquid_field(u_l, u_l_new, s, s_dot_lag,
                                                   0, q_c, dt, alpha_l, k_l)
    grad_s, mn_s, mx_s, up2 = advance_solid_field(u_s, u_s_new, s, length,
                                                  s_dot_lag, q_f, dt,
                                                  alpha_s, k_s)
    s_dot = (flux_l + grad_s) / gamma
    s_new = s + dt * s_dot
    return s_new, s_dot, flux_l, grad_s, mn_l, mx_l, mn_s, mx_s, (up1 or up2)


@njit(cache=True, nogil=True)
def controller_value_1p(u, s, t, t0, conv, ctrl_mode, gain, setpoint, q0_open,
                        rho_cp, gamma, k, dist_kind, qf_bar, qf_decay,
                        table_t, table_v):
    if ctrl_mode == CTRL_CLOSED:
        return closed_loop_value_1p(u, s, rho_cp, gamma, gain, setpoint)
    if ctrl_mode == CTRL_OPEN:
        elapsed = t - t0
        if dist_kind == DIST_TABLE:
            return q0_open * math.exp(-gain * elapsed) + conv
        return open_loop_closed_form(elapsed, q0_open, gain, dist_kind,
                                     qf_bar, qf_decay)
    return boundary_flux_from_profile(u, s, k)


@njit(cache=True, nogil=True)
def run_1p_kernel(u0, s0, snap_times,
                  alpha, beta, k, rho_cp, gamma,
                  ctrl_mode, gain, setpoint, q0_open, dirichlet_delta,
                  dist_kind, qf_bar, qf_decay, table_t, table_v,
                  safety, fixed_dt, s_floor):
    """Integrate the one-phase system, landing exactly on snapshot times.

    The adaptive step is safety * min(diffusive, advective) stability limit,
    overridden by fixed_dt > 0.  Grid advection lags the interface velocity
    by one step.  Aborts with STATUS_PHASE_GONE when s <= s_floor and
    STATUS_BLOWUP on non-finite values (checked per step on s, per snapshot
    on the full field).
    """
    M = snap_times.shape[0]
    N = u0.shape[0] - 1
    t0 = snap_times[0]
    prof = np.zeros((M, N + 1))
    s_arr = np.zeros(M)
    qc_arr = np.zeros(M)
    qf_arr = np.zeros(M)
    e_arr = np.zeros(M)
    bt_arr = np.zeros(M)
    qin_arr = np.zeros(M)

    u = u0.copy()
    buf = np.empty_like(u)
    s = s0
    t = t0
    s_dot = 0.0
    conv = 0.0  # open-loop convolution accumulator, table disturbance only
    min_u = u[0]
    for i in range(N + 1):
        if u[i] < min_u:
            min_u = u[i]
    max_cfl = 0.0
    n_steps = 0
    status = STATUS_OK
    fail_time = t0

    qf_now = disturbance_value(t, dist_kind, qf_bar, qf_decay, table_t, table_v)
    qc_now = controller_value_1p(u, s, t, t0, conv, ctrl_mode, gain, setpoint,
                                 q0_open, rho_cp, gamma, k, dist_kind,
                                 qf_bar, qf_decay, table_t, table_v)
    prof[0, :] = u
    s_arr[0] = s
    qc_arr[0] = qc_now
    qf_arr[0] = qf_now
    e_arr[0] = energy_value_1p(u, s, rho_cp, gamma)
    bt_arr[0] = u[0]
    recorded = 1
    # step-resolution trapezoid of q_c - q_f for the energy budget
    q_cum = 0.0
    prev_t = t
    prev_net = qc_now - qf_now

    aborted = False
    for m in range(1, M):
        target = snap_times[m]
        while t < target:
            qf_now = disturbance_value(t, dist_kind, qf_bar, qf_decay,
                                       table_t, table_v)
            if ctrl_mode == CTRL_DIRICHLET:
                bc_mode = 1
                bc_value = dirichlet_delta
            else:
                bc_mode = 0
                bc_value = controller_value_1p(u, s, t, t0, conv, ctrl_mode,
                                               gain, setpoint, q0_open,
                                               rho_cp, gamma, k, dist_kind,
                                               qf_bar, qf_decay, table_t, table_v)
            if ctrl_mode == CTRL_DIRICHLET:
                net = boundary_flux_from_profile(u, s, k) - qf_now
            else:
                net = bc_value - qf_now
            if t > prev_t:
                q_cum += 0.5 * (prev_net + net) * (t - prev_t)
                prev_t = t
                prev_net = net
            dt_lim = s * s / (2.0 * alpha * N * N)
            if s_dot != 0.0:
                dt_adv = s / (N * abs(s_dot))
                if dt_adv < dt_lim:
                    dt_lim = dt_adv
            dt_lim *= safety
            if fixed_dt > 0.0:
                dt_lim = fixed_dt
            rem = target - t
            last = dt_lim >= rem
            dt = rem if last else dt_lim

            s_new, s_dot_new, flux, mn, mx, upwind = step_1p_kernel(
                u, buf, s, s_dot, bc_mode, bc_value, qf_now, dt, alpha, beta, k)
            tmp = u
            u = buf
            buf = tmp
            if ctrl_mode == CTRL_OPEN and dist_kind == DIST_TABLE:
                qf_next = disturbance_value(t + dt, dist_kind, qf_bar,
                                            qf_decay, table_t, table_v)
                edt = math.exp(-gain * dt)
                conv = conv * edt + gain * 0.5 * dt * (qf_now * edt + qf_next)
            cfl = dt * 2.0 * alpha * N * N / (s * s)
            if cfl > max_cfl:
                max_cfl = cfl
            if mn < min_u:
                min_u = mn
            s = s_new
            s_dot = s_dot_new
            t = target if last else t + dt
            n_steps += 1
            if not (math.isfinite(s) and math.isfinite(mn) and math.isfinite(mx)):
                status = STATUS_BLOWUP
                fail_time = t
                aborted = True
                break
            if s <= s_floor:
                status = STATUS_PHASE_GONE
                fail_time = t
                aborted = True
                break
        if aborted:
            break
        for i in range(N + 1):
            if not math.isfinite(u[i]):
                status = STATUS_BLOWUP
                fail_time = t
                aborted = True
                break
        if aborted:
            break
        qf_now = disturbance_value(t, dist_kind, qf_bar, qf_decay,
                                   table_t, table_v)
        qc_now = controller_value_1p(u, s, t, t0, conv, ctrl_mode, gain,
                                     setpoint, q0_open, rho_cp, gamma, k,
                                     dist_kind, qf_bar, qf_decay,
                                     table_t, table_v)
        net = qc_now - qf_now
        if t > prev_t:
            q_cum += 0.5 * (prev_net + net) * (t - prev_t)
        prev_t = t
        prev_net = net
        prof[m, :] = u
        s_arr[m] = s
        qc_arr[m] = qc_now
        qf_arr[m] = qf_now
        e_arr[m] = energy_value_1p(u, s, rho_cp, gamma)
        bt_arr[m] = u[0]
        qin_arr[m] = q_cum
        recorded = m + 1

    return (status, fail_time, recorded, n_steps, max_cfl, min_u,
            prof, s_arr, qc_arr, qf_arr, e_arr, bt_arr, qin_arr)


@njit(cache=True, nogil=True)
def controller_value_2p(u_l, u_s, s, length, t, t0, conv, ctrl_mode, gain,
                        setpoint, q0_open, rho_cp_l, rho_cp_s, gamma,
                        dist_kind, qf_bar, qf_decay, table_t, table_v):
    if ctrl_mode == CTRL_CLOSED:
        return closed_loop_value_2p(u_l, u_s, s, length, rho_cp_l, rho_cp_s,
                                    gamma, gain, setpoint)
    elapsed = t - t0
    if dist_kind == DIST_TABLE:
        return q0_open * math.exp(-gain * elapsed) + conv
    return open_loop_closed_form(elapsed, q0_open, gain, dist_kind,
                                 qf_bar, qf_decay)


@njit(cache=True, nogil=True)
def run_2p_kernel(ul0, us0, s0, length, snap_times,
                  alpha_l, k_l, rho_cp_l, alpha_s, k_s, rho_cp_s, gamma,
                  ctrl_mode, gain, setpoint, q0_open,
                  dist_kind, qf_bar, qf_decay, table_t, table_v,
                  safety, fixed_dt, s_floor, s_ceil):
    """Two-phase companion of run_1p_kernel; shared clock for both fields."""
    M = snap_times.shape[0]
    Nl = ul0.shape[0] - 1
    Ns = us0.shape[0] - 1
    t0 = snap_times[0]
    prof_l = np.zeros((M, Nl + 1))
    prof_s = np.zeros((M, Ns + 1))
    s_arr = np.zeros(M)
    qc_arr = np.zeros(M)
    qf_arr = np.zeros(M)
    e_arr = np.zeros(M)
    bt_arr = np.zeros(M)
    ft_arr = np.zeros(M)
    qin_arr = np.zeros(M)

    u_l = ul0.copy()
    buf_l = np.empty_like(u_l)
    u_s = us0.copy()
    buf_s = np.empty_like(u_s)
    s = s0
    t = t0
    s_dot = 0.0
    conv = 0.0
    min_ul = u_l[0]
    for i in range(Nl + 1):
        if u_l[i] < min_ul:
            min_ul = u_l[i]
    max_us = u_s[0]
    for j in range(Ns + 1):
        if u_s[j] > max_us:
            max_us = u_s[j]
    max_cfl = 0.0
    n_steps = 0
    status = STATUS_OK
    fail_time = t0

    qf_now = disturbance_value(t, dist_kind, qf_bar, qf_decay, table_t, table_v)
    qc_now = controller_value_2p(u_l, u_s, s, length, t, t0, conv, ctrl_mode,
                                 gain, setpoint, q0_open, rho_cp_l, rho_cp_s,
                                 gamma, dist_kind, qf_bar, qf_decay,
                                 table_t, table_v)
    prof_l[0, :] = u_l
    prof_s[0, :] = u_s
    s_arr[0] = s
    qc_arr[0] = qc_now
    qf_arr[0] = qf_now
    e_arr[0] = energy_value_2p(u_l, u_s, s, length, rho_cp_l, rho_cp_s, gamma)
    bt_arr[0] = u_l[0]
    ft_arr[0] = u_s[Ns]
    recorded = 1
    q_cum = 0.0
    prev_t = t
    prev_net = qc_now - qf_now

    aborted = False
    for m in range(1, M):
        target = snap_times[m]
        while t < target:
            qf_now = disturbance_value(t, dist_kind, qf_bar, qf_decay,
                                       table_t, table_v)
            qc_now = controller_value_2p(u_l, u_s, s, length, t, t0, conv,
                                         ctrl_mode, gain, setpoint, q0_open,
                                         rho_cp_l, rho_cp_s, gamma, dist_kind,
                                         qf_bar, qf_decay, table_t, table_v)
            net = qc_now - qf_now
            if t > prev_t:
                q_cum += 0.5 * (prev_net + net) * (t - prev_t)
                prev_t = t
                prev_net = net
            w = length - s
            dt_lim = s * s / (2.0 * alpha_l * Nl * Nl)
            dt_solid = w * w / (2.0 * alpha_s * Ns * Ns)
            if dt_solid < dt_lim:
                dt_lim = dt_solid
            if s_dot != 0.0:
                dt_adv = s / (Nl * abs(s_dot))
                if dt_adv < dt_lim:
                    dt_lim = dt_adv
                dt_adv = w / (Ns * abs(s_dot))
                if dt_adv < dt_lim:
                    dt_lim = dt_adv
            dt_lim *= safety
            if fixed_dt > 0.0:
                dt_lim = fixed_dt
            rem = target - t
            last = dt_lim >= rem
            dt = rem if last else dt_lim

            (s_new, s_dot_new, flux_l, grad_s, mn_l, mx_l, mn_s, mx_s,
             upwind) = step_2p_kernel(
                u_l, buf_l, u_s, buf_s, s, length, s_dot, qc_now, qf_now, dt,
                alpha_l, k_l, alpha_s, k_s, gamma)
            tmp = u_l
            u_l = buf_l
            buf_l = tmp
            tmp = u_s
            u_s = buf_s
            buf_s = tmp
            if ctrl_mode == CTRL_OPEN and dist_kind == DIST_TABLE:
                qf_next = disturbance_value(t + dt, dist_kind, qf_bar,
                                            qf_decay, table_t, table_v)
                edt = math.exp(-gain * dt)
                conv = conv * edt + gain * 0.5 * dt * (qf_now * edt + qf_next)
            cfl = dt * 2.0 * alpha_l * Nl * Nl / (s * s)
            cfl_s = dt * 2.0 * alpha_s * Ns * Ns / (w * w)
            if cfl_s > cfl:
                cfl = cfl_s
            if cfl > max_cfl:
                max_cfl = cfl
            if mn_l < min_ul:
                min_ul = mn_l
            if mx_s > max_us:
                max_us = mx_s
            s = s_new
            s_dot = s_dot_new
            t = target if last else t + dt
            n_steps += 1
            if not (math.isfinite(s) and math.isfinite(mn_l)
                    and math.isfinite(mx_l) and math.isfinite(mn_s)
                    and math.isfinite(mx_s)):
                status = STATUS_BLOWUP
                fail_time = t
                aborted = True
                break
            if s <= s_floor or s >= s_ceil:
                status = STATUS_PHASE_GONE
                fail_time = t
                aborted = True
                break
        if aborted:
            break
        ok = True
        for i in range(Nl + 1):
            if not math.isfinite(u_l[i]):
                ok = False
                break
        if ok:
            for j in range(Ns + 1):
                if not math.isfinite(u_s[j]):
                    ok = False
                    break
        if not ok:
            status = STATUS_BLOWUP
            fail_time = t
            break
        qf_now = disturbance_value(t, dist_kind, qf_bar, qf_decay,
                                   table_t, table_v)
        qc_now = controller_value_2p(u_l, u_s, s, length, t, t0, conv,
                                     ctrl_mode, gain, setpoint, q0_open,
                                     rho_cp_l, rho_cp_s, gamma, dist_kind,
                                     qf_bar, qf_decay, table_t, table_v)
        net = qc_now - qf_now
        if t > prev_t:
            q_cum += 0.5 * (prev_net + net) * (t - prev_t)
        prev_t = t
        prev_net = net
        prof_l[m, :] = u_l
        prof_s[m, :] = u_s
        s_arr[m] = s
        qc_arr[m] = qc_now
        qf_arr[m] = qf_now
        e_arr[m] = energy_value_2p(u_l, u_s, s, length, rho_cp_l, rho_cp_s, gamma)
        bt_arr[m] = u_l[0]
        ft_arr[m] = u_s[Ns]
        qin_arr[m] = q_cum
        recorded = m + 1

    return (status, fail_time, recorded, n_steps, max_cfl, min_ul, max_us,
            prof_l, prof_s, s_arr, qc_arr, qf_arr, e_arr, bt_arr, ft_arr,
            qin_arr)
