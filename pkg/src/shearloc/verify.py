"""Diagnostics: uniform shearing, loss of hyperbolicity, boundary compatibility,
positive invariance of the reduced-flow triangle, and tangency at M0."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .continuation import fit_kappa, tangency_slope, tangency_window
from .errors import InvarianceViolation, RangeError, TangencyFailure
from .model import (ParamSet, exponents, lambda_from_data, m0_point, m1_point, r_hat,
                    reduced_field)
from .reconstruct import boundary_values
from .spectral import spectrum_M0

SLOPE_TOL = 0.05
ANGLE_TOL = 1e-3


# --- uniform shear -----------------------------------------------------------------

@dataclass
class UniformShear:
    t: np.ndarray
    gamma_s: np.ndarray
    theta_s: np.ndarray
    sigma_s: np.ndarray
    gamma0: float
    theta0: float


def _am(params):
    if isinstance(params, ParamSet):
        return params.alpha, params.m
    return float(params[0]), float(params[1])


def uniform_shear(t, gamma0: float, theta0: float, params) -> UniformShear:
    """Closed-form spatially uniform solution; ``params`` is a ParamSet or (alpha, m)."""
    if gamma0 <= 0 or theta0 <= 0:
        raise RangeError("gamma0 and theta0 must be positive")
    al, m = _am(params)
    t = np.asarray(t, dtype=float)
    g = t + gamma0
    ratio = (1 + al) / (1 + m)
    bracket = 1 + (theta0 ** (1 + al) - ratio * gamma0 ** (1 + m)) / (ratio * g ** (m + 1))
    theta = ratio ** (1 / (1 + al)) * g ** ((1 + m) / (1 + al)) * bracket ** (1 / (1 + al))
    sigma = ratio ** (-al / (1 + al)) * g ** ((m - al) / (1 + al)) * bracket ** (-al / (1 + al))
    return UniformShear(t, g, theta, sigma, gamma0, theta0)


def uniform_shear_ode(t, gamma0: float, theta0: float, params, rtol=1e-13, atol=1e-14):
    """theta_s from direct integration of d theta / dt = theta^-alpha (t + gamma0)^m."""
    al, m = _am(params)
    t = np.asarray(t, dtype=float)
    sol = solve_ivp(lambda s, y: y ** (-al) * (s + gamma0) ** m, (0.0, float(t.max())),
                    [theta0], method="DOP853", t_eval=t, rtol=rtol, atol=atol)
    return sol.y[0]


def hyperbolicity_indicator(theta, gamma, params):
    """tau_theta tau + tau_gamma for tau = theta^-alpha gamma^m (positive: hyperbolic)."""
    al, m = _am(params)
    theta = np.asarray(theta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    return theta ** (-al) * gamma ** (m - 1) * (-al * gamma ** (m + 1) / theta ** (1 + al) + m)


def indicator_root_vs_peak(gamma0: float, theta0: float, params, t_grid) -> dict:
    """Root of the indicator along uniform shear against the numeric argmax of sigma_s."""
    us = uniform_shear(t_grid, gamma0, theta0, params)
    ind = hyperbolicity_indicator(us.theta_s, us.gamma_s, params)
    sign = np.sign(ind)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    i_max = int(np.argmax(us.sigma_s))
    if len(flips) == 0:
        # no loss of hyperbolicity inside the window: sigma_s must then be
        # monotone in the same sense as the indicator sign
        mono = (ind[0] < 0 and i_max == 0) or (ind[0] > 0 and i_max == len(t_grid) - 1)
        return {"pass": bool(mono), "root_cell": None, "argmax": i_max}
    j = int(flips[0])
    # root lies in cell [j, j+1]; the discrete argmax is one of its end nodes
    ok = i_max in (j, j + 1) and ind[0] > 0 and ind[-1] < 0
    root = us.t[j] - ind[j] * (us.t[j + 1] - us.t[j]) / (ind[j + 1] - ind[j])
    return {"pass": bool(ok), "root_cell": j, "argmax": i_max, "t_root": float(root),
            "t_argmax": float(us.t[i_max])}


# --- boundary data ---------------------------------------------------------------

def check_compatibility(Gamma0: float, U0: float, params: ParamSet, rtol: float = 1e-12):
    """(Theta0, Sigma0) from the data, after checking the implied rate."""
    P = params
    lam = lambda_from_data(U0, Gamma0, P.alpha, P.m, P.n)
    if abs(lam - P.lam) > 1e-10 * max(1.0, abs(P.lam)):
        raise RangeError(f"U0/Gamma0 implies lambda = {lam:.12g}, params carry {P.lam:.12g}")
    Theta0, Sigma0 = boundary_values(Gamma0, U0, P)
    E = exponents(P)
    checks = [
        (E.a * Gamma0, U0),
        (E.c * Theta0, Sigma0 * U0),
        (Sigma0, Theta0 ** (-P.alpha) * Gamma0 ** P.m * U0 ** P.n),
    ]
    for lhs, rhs in checks:
        if abs(lhs - rhs) > rtol * max(abs(lhs), abs(rhs)) * 10:
            raise RangeError(f"compatibility residual {abs(lhs - rhs):.3g}")
    return Theta0, Sigma0


# --- reduced flow ---------------------------------------------------------------

@dataclass
class Triangle:
    k0: float
    a: float
    r1: float
    r_low: float
    s_star: float
    lam: float

    @property
    def q_top(self) -> float:
        return self.k0 * (self.a - self.r_low)

    @property
    def p_right(self) -> float:
        return self.q_top / (self.lam * self.r_low)

    def contains(self, p, q) -> np.ndarray:
        p, q = np.asarray(p), np.asarray(q)
        return (p >= 0) & (q >= 0) & (q <= self.q_top - self.lam * self.r_low * p)

    def sample_interior(self, rng, n: int, margin: float = 1e-3):
        """Uniform points strictly inside the triangle."""
        u, v = rng.random(n), rng.random(n)
        flip = u + v > 1
        u[flip], v[flip] = 1 - u[flip], 1 - v[flip]
        w = margin + (1 - 3 * margin) * np.column_stack([u, v])
        return w[:, 0] * self.p_right, w[:, 1] * self.q_top


def triangle(P: ParamSet) -> Triangle:
    if P.n != 0:
        raise RangeError("the triangle lives in the reduced (n = 0) problem")
    E = exponents(P)
    al, m, lam = P.alpha, P.m, P.lam
    k0 = (al - m) / (lam * (1 + al))
    r1 = E.a - 1 / k0
    return Triangle(k0, E.a, r1, 0.5 * min(1.0, r1), (1 + m) / (1 + al), lam)


def check_triangle_invariance(P: ParamSet, sample_count: int = 200) -> dict:
    """Inward flux of the reduced field on the three edges of the triangle."""
    T = triangle(P)
    E = exponents(P)
    t = np.linspace(0.0, 1.0, sample_count)
    s = np.full_like(t, T.s_star)

    # p = 0 edge, inward normal (1, 0)
    q = t * T.q_top
    F = reduced_field(np.array([np.zeros_like(t), q, s]), P)
    flux_p = F[0]
    # q = 0 edge, inward normal (0, 1)
    p = t * T.p_right
    F = reduced_field(np.array([p, np.zeros_like(t), s]), P)
    flux_q = F[1]
    # hypotenuse, inward normal (-lam r_low, -1)
    p = t * T.p_right
    q = T.q_top - T.lam * T.r_low * p
    rh = r_hat(p, q, s, P)
    F = reduced_field(np.array([p, q, s]), P)
    flux_h = -T.lam * T.r_low * F[0] - F[1]
    closed = T.k0 ** 2 * (T.r_low - T.a) * (T.r_low - T.r1) + T.r_low * p * (1 - T.r_low)
    # s = s_star is invariant as well
    ds = F[2]

    rep = {
        "p_edge_max_abs": float(np.max(np.abs(flux_p))),
        "q_edge_min": float(np.min(flux_q)),
        "hyp_min": float(np.min(flux_h)),
        "hyp_closed_form_err": float(np.max(np.abs(flux_h - closed))),
        "hyp_graph_err": float(np.max(np.abs(rh - T.r_low))),
        "s_plane_max_abs": float(np.max(np.abs(ds))),
        "delta": float(T.k0 ** 2 * (T.a - T.r_low) * (T.r1 - T.r_low)),
        "b": E.b,
    }
    if rep["p_edge_max_abs"] != 0.0:
        raise InvarianceViolation("p = 0 edge is not invariant", rep)
    i = int(np.argmin(flux_q))
    if flux_q[i] < 0:
        raise InvarianceViolation("negative flux on q = 0", (t[i] * T.p_right, 0.0))
    i = int(np.argmin(flux_h))
    if flux_h[i] <= 0:
        raise InvarianceViolation("non-positive flux on the hypotenuse", (p[i], q[i]))
    rep["pass"] = True
    return rep


def triangle_convergence(P: ParamSet, count: int = 50, seed: int = 0,
                         eta_end: float = 120.0, tol: float = 1e-6) -> dict:
    """Integrate the reduced flow from random interior points of the triangle."""
    from .integrate import integrate_slow

    T = triangle(P)
    rng = np.random.default_rng(seed)
    p, q = T.sample_interior(rng, count)
    M1 = m1_point(P)
    dists = []
    for pi, qi in zip(p, q):
        y0 = np.array([pi, qi, r_hat(pi, qi, T.s_star, P), T.s_star])
        tr = integrate_slow(y0, (0.0, eta_end), P, rtol=1e-11, atol=1e-13)
        dists.append(float(np.linalg.norm(tr.end - M1)))
    dists = np.array(dists)
    return {"pass": bool(np.all(dists <= tol)), "max_distance": float(dists.max()),
            "count": count}


# --- tangency --------------------------------------------------------------------

def check_tangency(orbit, params: ParamSet | None = None, strict: bool = True,
                   slope_tol: float = SLOPE_TOL, angle_tol: float = ANGLE_TOL) -> dict:
    """Backward-window slope of log|chi - M0|, start angle to X01, and kappa."""
    P = params or orbit.params
    sel = tangency_window(orbit)
    slope = tangency_slope(orbit, sel)
    X01 = spectrum_M0(P).vectors[:, 0]
    d = orbit.states[0] - m0_point(P)
    cosang = abs(d @ X01) / (np.linalg.norm(d) * np.linalg.norm(X01))
    angle = float(math.acos(min(1.0, cosang)))
    try:
        kappa, _ = fit_kappa(orbit, window=sel)
    except TangencyFailure:
        kappa = float("nan")
    rep = {"slope": slope, "angle": angle, "kappa": kappa,
           "pass": bool(abs(slope - 2) <= slope_tol and angle <= angle_tol and kappa > 0)}
    if strict and not rep["pass"]:
        raise TangencyFailure(f"tangency check failed: {rep}")
    return rep


def end_defect(orbit) -> dict:
    """Distance of the right end from M1 in the max norm and the Euclidean norm."""
    d = orbit.end - m1_point(orbit.params)
    return {"max": float(np.max(np.abs(d))), "euclid": float(np.linalg.norm(d))}
