"""Flat parameter / state / trace layouts shared by both simulation backends."""

PARAM_NAMES = (
    "dt", "kappa", "J", "P0", "p1", "p2", "p3", "theta_max", "aero_scale",
    "zeta0", "omega_n0", "rate_limit",
    "omega_r0", "theta0", "nu0",
    "k", "psi", "gamma", "u_high", "integral_limit", "rho0_1", "rho0_2", "rho0_3",
    "k_theta", "alpha", "u_low", "eta_max",
    "kp0", "ki0", "theta_k",
)

STATE_NAMES = (
    "omega_r", "theta_1", "theta_2", "theta_3",
    "theta_dot_1", "theta_dot_2", "theta_dot_3",
    "omega_int", "eta_hat_1", "eta_hat_2", "eta_hat_3", "pi_integral",
)

COLUMNS = (
    "t", "nu", "omega_r", "omega_err", "omega_int", "sigma",
    "theta_d_1", "theta_d_2", "theta_d_3",
    "theta_1", "theta_2", "theta_3",
    "theta_dot_1", "theta_dot_2", "theta_dot_3",
    "theta_r_1", "theta_r_2", "theta_r_3",
    "z_1", "z_2", "z_3",
    "eta_hat_1", "eta_hat_2", "eta_hat_3",
    "delta", "rho",
    "V_high", "V_low_1", "V_low_2", "V_low_3",
    "supply",
)

PROPOSED = 0
BASELINE = 1

OK = 0
SINGULAR = 1
DIVERGED = 2

OMEGA_FLOOR = 0.05
