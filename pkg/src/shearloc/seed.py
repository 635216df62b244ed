"""Starting orbits on the invariant plane p = 0 at alpha = 0.

For ``alpha = 0`` and ``p = 0`` the (q, r) equations decouple from s.  The
q-equation is logistic, and when ``n = 1/k`` the r-equation has a closed
form; otherwise r is integrated numerically.  The s-equation is then a
non-autonomous scalar ODE driven by (q, r).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.stats import binom

from .errors import DegenerateError, RangeError
from .integrate import dopri5
from .model import ParamSet, exponents, m0_point, m1_point
from .spectral import spectrum_M0, spectrum_M1, stable_projection

ETA_MAX = 10.0
EPS0 = 1e-4


@dataclass
class BoundaryData:
    eps0: float
    nu0: np.ndarray
    eps1: float = 0.0
    nu1: np.ndarray = field(default_factory=lambda: np.zeros(4))
    eta_max: float = ETA_MAX


@dataclass
class Orbit:
    mesh: np.ndarray
    states: np.ndarray  # shape (N, 4)
    params: ParamSet
    boundary: BoundaryData
    kappa: float | None = None

    def __post_init__(self):
        self.mesh = np.asarray(self.mesh, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.shape != (len(self.mesh), 4):
            raise ValueError("states must have shape (len(mesh), 4)")
        if np.any(np.diff(self.mesh) <= 0):
            raise ValueError("mesh must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("states must be finite")

    @property
    def start(self):
        return self.states[0]

    @property
    def end(self):
        return self.states[-1]


def _check_seed_params(P: ParamSet, k: int | None = None):
    if P.alpha != 0:
        raise RangeError("the exact seed needs alpha = 0")
    if k is not None and abs(P.n * k - 1) > 1e-12:
        raise RangeError(f"n = {P.n} is not 1/{k}")


def _w0(P: ParamSet) -> float:
    r0 = exponents(P).a
    return -(P.m + P.n) * r0 / P.lam


def logistic(eta):
    return 0.5 * (1 + np.tanh(0.5 * np.asarray(eta, dtype=float)))


def exact_seed(eta, k: int, P: ParamSet):
    """Closed-form (p, q, r) on the plane p = 0 for alpha = 0, n = 1/k.

    Returns arrays ``(p, q, r, rdot)``.  The sum is evaluated as a binomial
    expectation, which avoids overflow of ``(1 + e^eta)^k`` for large eta.
    """
    _check_seed_params(P, k)
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    r0 = exponents(P).a
    kw = k * _w0(P)
    j = np.arange(k + 1)
    if np.min(np.abs(kw - j)) < 1e-12:
        raise DegenerateError("k W0 coincides with an integer in 0..k")
    w = kw / (kw - j)
    q = logistic(eta)
    pmf = binom.pmf(j[None, :], k, q[:, None])
    S = pmf @ w
    dS = (pmf * (j[None, :] - k * q[:, None])) @ w
    r = r0 / S
    rdot = -r * dS / S
    return np.zeros_like(eta), q, r, rdot


def exact_seed_mp(eta: float, k: int, P: ParamSet, dps: int = 40):
    """High-precision evaluation of the original sum formula (test oracle)."""
    import mpmath as mp

    with mp.workdps(dps):
        r0 = mp.mpf(exponents(P).a)
        kw = k * mp.mpf(_w0(P))
        e = mp.e ** mp.mpf(eta)
        S = mp.fsum(kw / (kw - j) * mp.binomial(k, j) * e ** j for j in range(k + 1))
        return float(r0 * (1 + e) ** k / S)


def seed_rhs_residual(eta, k: int, P: ParamSet):
    """Residual of the q and r equations for the closed form (alpha = p = 0)."""
    _, q, r, rdot = exact_seed(eta, k, P)
    E = exponents(P)
    kk = -(P.m + P.n) / P.lam
    qdot = q * (1 - q)
    res_q = qdot - q * (1 - q)
    res_r = rdot - (r / P.n) * (kk * (r - E.a) + q)
    return res_q, res_r


def numeric_seed_r(eta, P: ParamSet, rtol=1e-12, atol=1e-14):
    """r on the plane p = 0, alpha = 0 for any n, by backward integration.

    The r-direction repels forward in eta, so integrating from the right end
    (started on the slow nullcline) is stable.
    """
    if P.alpha != 0:
        raise RangeError("numeric_seed_r needs alpha = 0")
    E = exponents(P)
    kk = -(P.m + P.n) / P.lam
    eta = np.asarray(eta, dtype=float)
    lo, hi = float(eta.min()), float(eta.max())

    def f(t, y):
        q = logistic(t)
        return np.array([(y[0] / P.n) * (kk * (y[0] - E.a) + q)])

    tr = dopri5(f, (hi + 5.0, lo), [E.a - logistic(hi + 5.0) / kk], rtol, atol)
    order = np.argsort(tr.t)
    spl = CubicHermiteSpline(tr.t[order], tr.y[order, 0], tr.dy[order, 0])
    return spl(eta)


def seed_qr(eta, P: ParamSet, k: int | None = None):
    """(q, r) on the plane p = 0 at alpha = 0, closed form when possible."""
    if k is None:
        kk = 1.0 / P.n
        if abs(kk - round(kk)) < 1e-9:
            k = int(round(kk))
    if k is not None:
        _, q, r, _ = exact_seed(eta, k, P)
    else:
        q = logistic(eta)
        r = numeric_seed_r(eta, P)
    return q, r


def s_rhs(s, q, r, P: ParamSet):
    E = exponents(P)
    kk = -(P.m + P.n) / P.lam
    S1 = 1 + P.m + P.n
    return s * (kk * (r - E.a) + q - (r / P.lam) * (s - S1) - P.n / P.lam)


def plane_orbit(P: ParamSet, eta_max: float = ETA_MAX, eps0: float = EPS0,
                mesh=None, k: int | None = None, rtol=1e-12, atol=1e-14) -> Orbit:
    """Manufacture the starting orbit leaving M0 along X02 at distance eps0.

    The closed-form (q, r) is shifted in eta so that the start sits at
    distance eps0 from M0 along the unit X02 direction; s is then integrated
    forward from the matching s-component.
    """
    _check_seed_params(P)
    if mesh is None:
        mesh = np.linspace(-eta_max, eta_max, 801)
    mesh = np.asarray(mesh, dtype=float)
    S0 = spectrum_M0(P)
    nu0 = S0.unit_vectors()[:, 1]
    qstart = eps0 * nu0[1]
    shift = -eta_max - math.log(qstart / (1 - qstart))

    def qr(t):
        q, r = seed_qr(np.atleast_1d(t) - shift, P, k)
        return q, r

    M0 = m0_point(P)
    s_start = M0[3] + eps0 * nu0[3]

    def f(t, y):
        q, r = qr(t)
        return np.array([s_rhs(y[0], q[0], r[0], P)])

    tr = dopri5(f, (-eta_max, eta_max), [s_start], rtol, atol)
    s = CubicHermiteSpline(tr.t, tr.y[:, 0], tr.dy[:, 0])(mesh)
    q, r = qr(mesh)
    states = np.column_stack([np.zeros_like(mesh), q, r, s])
    bd = BoundaryData(eps0=eps0, nu0=nu0, eta_max=eta_max)
    orbit = Orbit(mesh, states, P, bd)
    extract_end_data(orbit)
    return orbit


def extract_end_data(orbit: Orbit):
    """Fill eps1, nu1 from the stable part of ``end - M1``; return the unstable coefficient."""
    P = orbit.params
    S1 = spectrum_M1(P)
    d = orbit.end - m1_point(P)
    c_unst, stable = stable_projection(S1, d)
    eps1 = float(np.linalg.norm(stable))
    orbit.boundary.eps1 = eps1
    orbit.boundary.nu1 = stable / eps1 if eps1 > 0 else np.zeros(4)
    return c_unst
