"""Pure-Python closed-loop simulation loop.

Reference backend for :mod:`windpitch._kernel`; both walk the same flat
layouts from :mod:`windpitch._layout` and perform the floating-point
operations in the same order.
"""
from math import exp, isfinite

import numpy as np

from ._layout import (BASELINE, COLUMNS, DIVERGED, OK, OMEGA_FLOOR, PARAM_NAMES, SINGULAR,
                      STATE_NAMES)

NCOL = len(COLUMNS)


def run_loop(par, init, wind, delta, rho, noise, mask, n_steps, ctrl_every, record_every,
             controller):
    """Simulate ``n_steps`` plant steps; returns (records, status, fail_step, final_state).

    After a singularity abort ``final_state[0]`` is the offending rotor speed.
    """
    assert len(par) == len(PARAM_NAMES) and len(init) == len(STATE_NAMES)
    (dt, kappa, J, P0, p1, p2, p3, theta_max, aero_scale,
     zeta0, wn0, rate_limit,
     omega_r0, theta0, nu0,
     k, psi, gamma, u_high, i_lim, r01, r02, r03,
     k_theta, alpha, u_low, eta_max,
     kp0, ki0, theta_k) = [float(v) for v in par]
    rho0 = (r01, r02, r03)
    m = [int(v) for v in mask]
    wind = [float(v) for v in wind]
    delta = [float(v) for v in delta]
    rho = [float(v) for v in rho]
    noise = [float(v) for v in noise]

    st = [float(v) for v in init]
    om = st[0]
    th = st[1:4]
    thd = st[4:7]
    w_int = st[7]
    eta = st[8:11]
    pi_int = st[11]

    s2 = aero_scale * aero_scale
    c_aero = kappa / J
    wn2 = wn0 * wn0
    two_zw = 2.0 * zeta0 * wn0
    dtc = dt * ctrl_every
    n_rec = n_steps // record_every + 1
    rec = np.zeros((n_rec, NCOL))

    th_r = [theta0, theta0, theta0]
    th_d = [theta0, theta0, theta0]
    z = [0.0, 0.0, 0.0]
    sigma = 0.0
    e_prev = 0.0
    pi_prev = 0.0
    status = OK
    fail = -1

    def rotor(nu, w, a, b, c):
        x = nu / w
        e = exp(-p2 * x)
        sq = s2 * (a * a + b * b + c * c)
        return (c_aero * nu * nu * nu / w * ((x - p1) - p3 * sq / 3.0) * e
                - P0 / (J * w))

    for i in range(n_steps + 1):
        d_i = delta[i] if i < n_steps else delta[n_steps - 1]
        r_i = rho[i] if i < n_steps else rho[n_steps - 1]
        dj = [d_i if m[0] else 1.0, d_i if m[1] else 1.0, d_i if m[2] else 1.0]
        rj = [r_i if m[0] else 1.0, r_i if m[1] else 1.0, r_i if m[2] else 1.0]
        nu = wind[i] if i < n_steps else wind[n_steps - 1]

        if i % ctrl_every == 0:
            w_meas = om + (noise[i] if i < n_steps else 0.0)
            e = w_meas - omega_r0
            if i > 0:
                w_int = w_int + 0.5 * dtc * (e_prev + e)
                w_int = min(max(w_int, -i_lim), i_lim)
            sigma = e + psi * w_int
            if controller == BASELINE:
                cand = pi_int + 0.5 * dtc * (pi_prev + e)
                th_mean = (th[0] + th[1] + th[2]) / 3.0
                g = 1.0 / (1.0 + th_mean / theta_k)
                raw = g * (kp0 * e + ki0 * cand)
                cmd = min(max(raw, 0.0), theta_max)
                if cmd == raw:
                    pi_int = cand
                pi_prev = e
                for j in range(3):
                    th_d[j] = cmd
                    th_r[j] = cmd
                    z[j] = thd[j] * u_low + two_zw * (th[j] * u_low - cmd * u_low)
            else:
                s = min(max(k * sigma, -theta0 * u_high), (theta_max - theta0) * u_high)
                for j in range(3):
                    th_d[j] = theta0 - rho0[j] * (s / u_high)
                    tj = th[j] * u_low
                    vj = thd[j] * u_low
                    zj = vj + two_zw * (tj - th_d[j] * u_low)
                    z[j] = zj
                    th_r[j] = (tj - k_theta * zj + eta[j] * vj) / u_low
                    eta[j] = min(max(eta[j] - alpha * zj * vj * dtc, -eta_max), eta_max)
            e_prev = e

        if i % record_every == 0:
            row = rec[i // record_every]
            nerr = nu - nu0
            row[0] = i * dt
            row[1] = nu
            row[2] = om
            row[3] = om - omega_r0
            row[4] = w_int
            row[5] = sigma
            for j in range(3):
                row[6 + j] = th_d[j]
                row[9 + j] = th[j]
                row[12 + j] = thd[j]
                row[15 + j] = th_r[j]
                row[18 + j] = z[j]
                row[21 + j] = eta[j]
                eta_true = 2.0 * (rj[j] * zeta0 * wn0 - zeta0 * wn0) / (dj[j] * wn2)
                de = eta[j] - eta_true
                row[27 + j] = 0.5 * z[j] * z[j] + dj[j] * wn2 / (2.0 * alpha) * de * de
            row[24] = d_i
            row[25] = r_i
            row[26] = 0.5 * sigma * sigma + 0.5 * psi * psi * w_int * w_int
            row[30] = gamma * gamma * nerr * nerr - sigma * sigma

        if i == n_steps:
            break

        # RK4 over [t_i, t_i + dt] with wind, command and fault held
        x0 = [om, th[0], th[1], th[2], thd[0], thd[1], thd[2]]
        ks = []
        xs = x0
        bad = False
        for stage in range(4):
            if not isfinite(xs[0]):
                status, fail = DIVERGED, i
                break
            if not xs[0] > OMEGA_FLOOR:
                om = xs[0]  # report the offending stage value
                bad = True
                break
            kx = [rotor(nu, xs[0], xs[1], xs[2], xs[3]), xs[4], xs[5], xs[6]]
            for j in range(3):
                kx.append(-2.0 * rj[j] * zeta0 * wn0 * xs[4 + j]
                          - dj[j] * wn2 * xs[1 + j] + dj[j] * wn2 * th_r[j])
            ks.append(kx)
            h = dt if stage == 2 else 0.5 * dt
            if stage < 3:
                xs = [x0[q] + h * kx[q] for q in range(7)]
        if status == DIVERGED:
            break
        if bad:
            status, fail = SINGULAR, i
            break
        k1, k2, k3, k4 = ks
        xn = [x0[q] + dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]) for q in range(7)]
        if not all(isfinite(v) for v in xn):
            status, fail = DIVERGED, i
            break
        om = xn[0]
        for j in range(3):
            t_j = xn[1 + j]
            v_j = min(max(xn[4 + j], -rate_limit), rate_limit)
            if t_j < 0.0:
                t_j = 0.0
                if v_j < 0.0:
                    v_j = 0.0
            elif t_j > theta_max:
                t_j = theta_max
                if v_j > 0.0:
                    v_j = 0.0
            th[j] = t_j
            thd[j] = v_j
        if not om > OMEGA_FLOOR:
            status, fail = SINGULAR, i + 1
            break

    final = np.array([om, *th, *thd, w_int, *eta, pi_int])
    return rec, status, fail, final
