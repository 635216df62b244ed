"""From the heteroclinic orbit back to self-similar profiles and physical fields.

Chain: (p, q, r, s)(eta) -> tilde variables -> bar variables at xi = e^eta
-> capital profiles Gamma, V, Theta, Sigma, U -> fields at time t via the
scaling ``f(t, x) = (t + 1)^e F((t + 1)^lam x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .continuation import fit_kappa
from .errors import DomainError, ExtrapolationError, RangeError, WindowError
from .model import ParamSet, exponents
from .seed import Orbit
from .spectral import m1_case, spectrum_M1

FIELDS = ("Gamma", "V", "Theta", "Sigma", "U")


@dataclass
class ProfileTable:
    xi: np.ndarray  # xi[0] == 0 holds the analytic boundary row
    Gamma: np.ndarray
    V: np.ndarray
    Theta: np.ndarray
    Sigma: np.ndarray
    U: np.ndarray
    Gamma0: float
    U0: float
    Theta0: float
    Sigma0: float
    params: ParamSet
    kappa: float = float("nan")
    eta0: float = 0.0

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.xi] + [self.column(f) for f in FIELDS])


@dataclass
class Snapshot:
    t: float
    x: np.ndarray
    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray
    tail_used: bool = False

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.x, self.v, self.u, self.theta, self.sigma, self.gamma])


def boundary_values(Gamma0: float, U0: float, P: ParamSet, rtol: float = 1e-10):
    """(Theta0, Sigma0) from the two compatibility conditions at xi = 0."""
    if Gamma0 <= 0 or U0 <= 0:
        raise RangeError("Gamma0 and U0 must be positive")
    E = exponents(P)
    if abs(E.a * Gamma0 - U0) > rtol * abs(U0):
        raise RangeError(f"U0 = {U0:.17g} differs from a * Gamma0 = {E.a * Gamma0:.17g}")
    al, m, n, c = P.alpha, P.m, P.n, E.c
    Theta0 = c ** (-1 / (1 + al)) * Gamma0 ** (m / (1 + al)) * U0 ** ((1 + n) / (1 + al))
    Sigma0 = c ** (al / (1 + al)) * Gamma0 ** (m / (1 + al)) * U0 ** (-(al - n) / (1 + al))
    return Theta0, Sigma0


def tilde_from_pqrs(Y, P: ParamSet):
    """Inverse of the (p, q, r, s) change of variables; returns (g, v, th, sg, u)."""
    Y = np.asarray(Y, dtype=float)
    p, q, r, s = Y[..., 0], Y[..., 1], Y[..., 2], Y[..., 3]
    if np.any(p <= 0) or np.any(r <= 0) or np.any(s <= 0):
        raise DomainError("p, r and s must be positive for the inverse transform")
    E = exponents(P)
    al, m, n, D = P.alpha, P.m, P.n, E.D
    g = p ** ((1 + al) / D) * s ** (al / D) * r ** (n / D)
    th = p ** ((1 + m + n) / D) * s ** ((m + n - 1) / D) * r ** (2 * n / D)
    sg = g / p
    v = sg * q / E.b
    u = r * g
    return g, v, th, sg, u


def pqrs_from_tilde(g, v, th, sg, P: ParamSet):
    E = exponents(P)
    u = (sg / (th ** (-P.alpha) * g ** P.m)) ** (1 / P.n)
    return np.stack([g / sg, E.b * v / sg, u / g, sg * g / th], axis=-1)


def _unbar(xi, tilde, E):
    g, v, th, sg, u = tilde
    lx = np.log(xi)
    return (g * np.exp(-E.a1 * lx), v * np.exp(-E.b1 * lx), th * np.exp(-E.c1 * lx),
            sg * np.exp(-E.d1 * lx), u * np.exp(-(E.b1 + 1) * lx))


def profiles_from_orbit(orbit: Orbit, Gamma0: float, U0: float | None = None,
                        kappa: float | None = None) -> ProfileTable:
    """Profiles on xi = e^{eta - eta0} with the boundary row at xi = 0 prepended.

    The shift eta0 is fixed by the data through p ~ (Gamma0 / Sigma0) xi^2.
    """
    P = orbit.params
    E = exponents(P)
    U0 = E.a * Gamma0 if U0 is None else U0
    Theta0, Sigma0 = boundary_values(Gamma0, U0, P)
    if kappa is None:
        kappa, eta0 = fit_kappa(orbit, Gamma0, Sigma0)
    else:
        eta0 = 0.5 * math.log(Gamma0 / (Sigma0 * kappa))
    Y = orbit.states
    bad = (Y[:, 0] <= 0) | (Y[:, 2] <= 0) | (Y[:, 3] <= 0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(f"non-positive p, r or s at eta = {orbit.mesh[i]:.6g}: {Y[i]}")
    xi = np.exp(orbit.mesh - eta0)
    G, V, Th, Sg, U = _unbar(xi, tilde_from_pqrs(Y, P), E)
    cat = lambda a0, arr: np.concatenate([[a0], arr])  # noqa: E731
    return ProfileTable(cat(0.0, xi), cat(Gamma0, G), cat(0.0, V), cat(Theta0, Th),
                        cat(Sigma0, Sg), cat(U0, U), Gamma0, U0, Theta0, Sigma0, P,
                        kappa, eta0)


def orbit_from_profiles(table: ProfileTable) -> tuple:
    """Forward transform at the xi > 0 rows; returns (eta, states)."""
    E = exponents(table.params)
    xi = table.xi[1:]
    lx = np.log(xi)
    g = table.Gamma[1:] * np.exp(E.a1 * lx)
    v = table.V[1:] * np.exp(E.b1 * lx)
    th = table.Theta[1:] * np.exp(E.c1 * lx)
    sg = table.Sigma[1:] * np.exp(E.d1 * lx)
    return lx + table.eta0, pqrs_from_tilde(g, v, th, sg, table.params)


# --- asymptotics ---------------------------------------------------------------

def asymptotic_rates(P: ParamSet) -> dict:
    """Predicted tail exponents in xi and time-growth exponents at x = 0 and x != 0."""
    E = exponents(P)
    al, m, n, lam, D = P.alpha, P.m, P.n, P.lam, E.D
    amn = al - m - n
    tail = {"Gamma": -(1 + al) / amn, "U": -(1 + al) / amn, "Theta": -(1 + m + n) / amn,
            "Sigma": 1.0, "V": 0.0}
    case = m1_case(P)
    mu11 = float(spectrum_M1(P).eigenvalues[0])
    generic = not (abs(mu11 + 1) < 1e-9 and abs(E.b - lam) > 1e-9)
    log_powers = {"Gamma": (1 + al) / D, "U": (1 + al) / D, "Theta": (1 + m + n) / D,
                  "Sigma": -amn / D, "V": -amn / D}
    time_exp = {"gamma": E.a, "theta": E.c, "sigma": E.d, "u": E.b + lam, "v": E.b}
    origin = dict(time_exp)
    field_of = {"gamma": "Gamma", "theta": "Theta", "sigma": "Sigma", "u": "U", "v": "V"}
    away = {f: origin[f] + lam * tail[field_of[f]] for f in origin}
    gaps = {f: abs(origin[f] - away[f]) for f in origin}
    return {"tail": tail, "generic": generic, "m1_case": case, "mu11": mu11,
            "log_powers": None if generic else log_powers,
            "growth_origin": origin, "growth_away": away, "gap": gaps}


def tail_window(table: ProfileTable, frac: float = 0.5) -> np.ndarray:
    """Mask of the last ``frac`` of the log(xi) range."""
    lx = np.log(table.xi[1:])
    return np.concatenate([[False], lx >= lx[-1] - frac * (lx[-1] - lx[0])])


def measure_slopes(table: ProfileTable, window=None) -> dict:
    """Log-log least-squares slopes over ``window`` (mask or (xi_lo, xi_hi))."""
    if window is None:
        sel = tail_window(table, 0.25)
    elif isinstance(window, tuple):
        sel = (table.xi >= window[0]) & (table.xi <= window[1]) & (table.xi > 0)
    else:
        sel = np.asarray(window, dtype=bool)
    if sel.sum() < 10:
        raise WindowError(f"only {int(sel.sum())} nodes in the slope window")
    pred = asymptotic_rates(table.params)["tail"]
    lx = np.log(table.xi[sel])
    out = {}
    for f in FIELDS:
        k = float(np.polyfit(lx, np.log(table.column(f)[sel]), 1)[0])
        err = abs(k - pred[f]) if pred[f] == 0 else abs(k - pred[f]) / abs(pred[f])
        out[f] = {"measured": k, "predicted": pred[f], "error": err}
    return out


def curvatures_at_origin(table: ProfileTable, h: float = 0.05) -> dict:
    """Second derivatives at xi = 0 from symmetric second differences.

    With the even extension F(-h) = F(h) the three-point stencil reduces to
    D(h) = 2 (F(h) - F(0)) / h^2.  D is evaluated at the node nearest ``h``
    and at the node nearest ``2h`` and combined by one Richardson step, which
    removes the O(h^2) term.
    """
    xi = table.xi
    j1 = int(np.argmin(np.abs(xi[1:] - h))) + 1
    j2 = int(np.argmin(np.abs(xi[1:] - 2 * h))) + 1
    h1, h2 = xi[j1], xi[j2]
    out = {}
    for f in ("Gamma", "Theta", "Sigma", "U"):
        F = table.column(f)
        d1 = 2 * (F[j1] - F[0]) / h1 ** 2
        d2 = 2 * (F[j2] - F[0]) / h2 ** 2
        out[f] = float((h2 ** 2 * d1 - h1 ** 2 * d2) / (h2 ** 2 - h1 ** 2))
    out["h"] = float(h1)
    E = exponents(table.params)
    out["Sigma_pred"] = float((E.b + table.params.lam) * table.U0)
    return out


def V_infinity(table: ProfileTable, window=None) -> float:
    """Limit of V: last-node value corrected by the fitted tail slope."""
    sel = tail_window(table, 0.25) if window is None else window
    lx = np.log(table.xi[sel])
    lv = np.log(table.V[sel])
    k, c0 = np.polyfit(lx, lv, 1)
    return float(math.exp(c0 + k * lx[-1]))  # slope ~ 0 so the fit value at the end is the estimate


# --- snapshots ---------------------------------------------------------------

@dataclass
class _Interp:
    table: ProfileTable
    tail: bool
    splines: dict = field(default_factory=dict)

    def __post_init__(self):
        for f in FIELDS:
            self.splines[f] = PchipInterpolator(self.table.xi, self.table.column(f), extrapolate=False)
        self.pred = asymptotic_rates(self.table.params)["tail"]

    def __call__(self, name, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        xmax = self.table.xi[-1]
        out = self.splines[name](np.minimum(xi, xmax))
        far = xi > xmax
        if np.any(far):
            if not self.tail:
                raise ExtrapolationError(f"xi = {xi.max():.6g} beyond profile range {xmax:.6g}")
            out[far] = self.table.column(name)[-1] * (xi[far] / xmax) ** self.pred[name]
        return out


def snapshot(table: ProfileTable, t: float, x_grid, tail: bool = False,
             interp: _Interp | None = None) -> Snapshot:
    """Fields at time ``t`` on ``x_grid``; x < 0 filled by even/odd extension."""
    if t < 0:
        raise RangeError("t must be non-negative")
    P, E = table.params, exponents(table.params)
    x = np.asarray(x_grid, dtype=float)
    T = t + 1.0
    xi = T ** P.lam * np.abs(x)
    it = interp or _Interp(table, tail)
    used = bool(np.any(xi > table.xi[-1]))
    sgn = np.sign(x)
    return Snapshot(
        t=float(t), x=x,
        v=T ** E.b * sgn * it("V", xi),
        u=T ** (E.b + P.lam) * it("U", xi),
        theta=T ** E.c * it("Theta", xi),
        sigma=T ** E.d * it("Sigma", xi),
        gamma=T ** E.a * it("Gamma", xi),
        tail_used=used,
    )


def snapshots(table: ProfileTable, times, x_grid, tail: bool = False) -> list:
    it = _Interp(table, tail)
    return [snapshot(table, t, x_grid, tail, it) for t in times]


def measure_growth(table: ProfileTable, x: float, times, field_name: str = "sigma",
                   tail: bool = True) -> dict:
    """Fitted time exponents of a field at x = 0 and at ``x`` over ``times``."""
    T = np.log(np.asarray(times, dtype=float) + 1.0)
    snaps = snapshots(table, times, np.array([0.0, x]), tail)
    vals = np.array([getattr(s, field_name) for s in snaps])
    e0 = float(np.polyfit(T, np.log(np.abs(vals[:, 0])), 1)[0])
    e1 = float(np.polyfit(T, np.log(np.abs(vals[:, 1])), 1)[0])
    return {"origin": e0, "away": e1, "gap": abs(e0 - e1)}


def stress_gap(table: ProfileTable, x: float = 1.0, span: float = 3.5, count: int = 5) -> dict:
    """Difference of the sigma growth exponents at x = 0 and at ``x``.

    Times are chosen so that (t + 1)^lam x sweeps the upper tail of the
    computed profile, ending half a unit of log(xi) below its last node; no
    tail continuation is involved.
    """
    lam = table.params.lam
    hi = math.log(table.xi[-1]) - 0.5
    lx = np.linspace(hi - span, hi, count) - math.log(x)
    times = np.exp(lx / lam) - 1.0
    if np.any(times < 0):
        raise WindowError("x too large for the profile range")
    return measure_growth(table, x, times, "sigma", tail=False)
