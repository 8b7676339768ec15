# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled closed-loop simulation loop (same layouts and operation order as _pyloop)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, isfinite

from ._layout import COLUMNS, PARAM_NAMES, STATE_NAMES

cnp.import_array()

cdef enum:
    NCOL = 31
    NPAR = 30
    NSTATE = 12

assert len(COLUMNS) == NCOL and len(PARAM_NAMES) == NPAR and len(STATE_NAMES) == NSTATE

cdef int BASELINE = 1
cdef int OK = 0
cdef int SINGULAR = 1
cdef int DIVERGED = 2
cdef double OMEGA_FLOOR = 0.05


cdef inline double _clip(double x, double lo, double hi) nogil:
    if x < lo:
        x = lo
    if x > hi:
        x = hi
    return x


cdef inline double _rotor(double nu, double w, double a, double b, double c,
                          double c_aero, double P0, double J, double p1, double p2,
                          double p3, double s2) nogil:
    cdef double x = nu / w
    cdef double e = exp(-p2 * x)
    cdef double sq = s2 * (a * a + b * b + c * c)
    return (c_aero * nu * nu * nu / w * ((x - p1) - p3 * sq / 3.0) * e
            - P0 / (J * w))


def run_loop(par, init, wind, delta, rho, noise, mask, long n_steps, long ctrl_every,
             long record_every, int controller):
    """Simulate ``n_steps`` plant steps; returns (records, status, fail_step, final_state)."""
    cdef double[::1] P = np.ascontiguousarray(par, dtype=np.float64)
    cdef double[::1] S0 = np.ascontiguousarray(init, dtype=np.float64)
    cdef double[::1] W = np.ascontiguousarray(wind, dtype=np.float64)
    cdef double[::1] D = np.ascontiguousarray(delta, dtype=np.float64)
    cdef double[::1] R = np.ascontiguousarray(rho, dtype=np.float64)
    cdef double[::1] N = np.ascontiguousarray(noise, dtype=np.float64)
    cdef cnp.intp_t[::1] M = np.ascontiguousarray(mask, dtype=np.intp)
    if P.shape[0] != NPAR or S0.shape[0] != NSTATE:
        raise ValueError("parameter or state vector has the wrong length")
    if W.shape[0] < n_steps or D.shape[0] < n_steps or R.shape[0] < n_steps or N.shape[0] < n_steps:
        raise ValueError("input series shorter than n_steps")

    cdef double dt = P[0], kappa = P[1], J = P[2], P0 = P[3], p1 = P[4], p2 = P[5], p3 = P[6]
    cdef double theta_max = P[7], aero_scale = P[8], zeta0 = P[9], wn0 = P[10]
    cdef double rate_limit = P[11], omega_r0 = P[12], theta0 = P[13], nu0 = P[14]
    cdef double k = P[15], psi = P[16], gamma = P[17], u_high = P[18], i_lim = P[19]
    cdef double rho0[3]
    rho0[0] = P[20]; rho0[1] = P[21]; rho0[2] = P[22]
    cdef double k_theta = P[23], alpha = P[24], u_low = P[25], eta_max = P[26]
    cdef double kp0 = P[27], ki0 = P[28], theta_k = P[29]

    cdef double om = S0[0]
    cdef double th[3]
    cdef double thd[3]
    cdef double eta[3]
    cdef double th_r[3]
    cdef double th_d[3]
    cdef double z[3]
    cdef double dj[3]
    cdef double rj[3]
    cdef double x0[7]
    cdef double xs[7]
    cdef double ks[4][7]
    cdef double xn[7]
    cdef int j, q, stage
    for j in range(3):
        th[j] = S0[1 + j]
        thd[j] = S0[4 + j]
        eta[j] = S0[8 + j]
        th_r[j] = theta0
        th_d[j] = theta0
        z[j] = 0.0
    cdef double w_int = S0[7]
    cdef double pi_int = S0[11]

    cdef double s2 = aero_scale * aero_scale
    cdef double c_aero = kappa / J
    cdef double wn2 = wn0 * wn0
    cdef double two_zw = 2.0 * zeta0 * wn0
    cdef double dtc = dt * ctrl_every
    cdef long n_rec = n_steps // record_every + 1
    rec_arr = np.zeros((n_rec, NCOL), dtype=np.float64)
    cdef double[:, ::1] rec = rec_arr

    cdef double sigma = 0.0, e_prev = 0.0, pi_prev = 0.0
    cdef double d_i, r_i, nu, w_meas, e, cand, th_mean, g, raw, cmd, s, tj, vj, zj
    cdef double nerr, eta_true, de, h, t_j, v_j
    cdef int status = OK
    cdef long fail = -1
    cdef long i, row
    cdef bint bad

    with nogil:
        for i in range(n_steps + 1):
            if i < n_steps:
                d_i = D[i]; r_i = R[i]; nu = W[i]
            else:
                d_i = D[n_steps - 1]; r_i = R[n_steps - 1]; nu = W[n_steps - 1]
            for j in range(3):
                if M[j]:
                    dj[j] = d_i; rj[j] = r_i
                else:
                    dj[j] = 1.0; rj[j] = 1.0

            if i % ctrl_every == 0:
                if i < n_steps:
                    w_meas = om + N[i]
                else:
                    w_meas = om + 0.0
                e = w_meas - omega_r0
                if i > 0:
                    w_int = w_int + 0.5 * dtc * (e_prev + e)
                    w_int = _clip(w_int, -i_lim, i_lim)
                sigma = e + psi * w_int
                if controller == BASELINE:
                    cand = pi_int + 0.5 * dtc * (pi_prev + e)
                    th_mean = (th[0] + th[1] + th[2]) / 3.0
                    g = 1.0 / (1.0 + th_mean / theta_k)
                    raw = g * (kp0 * e + ki0 * cand)
                    cmd = _clip(raw, 0.0, theta_max)
                    if cmd == raw:
                        pi_int = cand
                    pi_prev = e
                    for j in range(3):
                        th_d[j] = cmd
                        th_r[j] = cmd
                        z[j] = thd[j] * u_low + two_zw * (th[j] * u_low - cmd * u_low)
                else:
                    s = _clip(k * sigma, -theta0 * u_high, (theta_max - theta0) * u_high)
                    for j in range(3):
                        th_d[j] = theta0 - rho0[j] * (s / u_high)
                        tj = th[j] * u_low
                        vj = thd[j] * u_low
                        zj = vj + two_zw * (tj - th_d[j] * u_low)
                        z[j] = zj
                        th_r[j] = (tj - k_theta * zj + eta[j] * vj) / u_low
                        eta[j] = _clip(eta[j] - alpha * zj * vj * dtc, -eta_max, eta_max)
                e_prev = e

            if i % record_every == 0:
                row = i // record_every
                nerr = nu - nu0
                rec[row, 0] = i * dt
                rec[row, 1] = nu
                rec[row, 2] = om
                rec[row, 3] = om - omega_r0
                rec[row, 4] = w_int
                rec[row, 5] = sigma
                for j in range(3):
                    rec[row, 6 + j] = th_d[j]
                    rec[row, 9 + j] = th[j]
                    rec[row, 12 + j] = thd[j]
                    rec[row, 15 + j] = th_r[j]
                    rec[row, 18 + j] = z[j]
                    rec[row, 21 + j] = eta[j]
                    eta_true = 2.0 * (rj[j] * zeta0 * wn0 - zeta0 * wn0) / (dj[j] * wn2)
                    de = eta[j] - eta_true
                    rec[row, 27 + j] = 0.5 * z[j] * z[j] + dj[j] * wn2 / (2.0 * alpha) * de * de
                rec[row, 24] = d_i
                rec[row, 25] = r_i
                rec[row, 26] = 0.5 * sigma * sigma + 0.5 * psi * psi * w_int * w_int
                rec[row, 30] = gamma * gamma * nerr * nerr - sigma * sigma

            if i == n_steps:
                break

            x0[0] = om
            for j in range(3):
                x0[1 + j] = th[j]
                x0[4 + j] = thd[j]
            for q in range(7):
                xs[q] = x0[q]
            bad = False
            for stage in range(4):
                if not isfinite(xs[0]):
                    status = DIVERGED
                    fail = i
                    break
                if not xs[0] > OMEGA_FLOOR:
                    om = xs[0]
                    bad = True
                    break
                ks[stage][0] = _rotor(nu, xs[0], xs[1], xs[2], xs[3],
                                      c_aero, P0, J, p1, p2, p3, s2)
                for j in range(3):
                    ks[stage][1 + j] = xs[4 + j]
                    ks[stage][4 + j] = (-2.0 * rj[j] * zeta0 * wn0 * xs[4 + j]
                                        - dj[j] * wn2 * xs[1 + j] + dj[j] * wn2 * th_r[j])
                if stage == 2:
                    h = dt
                else:
                    h = 0.5 * dt
                if stage < 3:
                    for q in range(7):
                        xs[q] = x0[q] + h * ks[stage][q]
            if status == DIVERGED:
                break
            if bad:
                status = SINGULAR
                fail = i
                break
            for q in range(7):
                xn[q] = x0[q] + dt / 6.0 * (ks[0][q] + 2.0 * ks[1][q] + 2.0 * ks[2][q] + ks[3][q])
            for q in range(7):
                if not isfinite(xn[q]):
                    bad = True
            if bad:
                status = DIVERGED
                fail = i
                break
            om = xn[0]
            for j in range(3):
                t_j = xn[1 + j]
                v_j = _clip(xn[4 + j], -rate_limit, rate_limit)
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
                status = SINGULAR
                fail = i + 1
                break

    final = np.array([om, th[0], th[1], th[2], thd[0], thd[1], thd[2],
                      w_int, eta[0], eta[1], eta[2], pi_int])
    return rec_arr, status, fail, final
