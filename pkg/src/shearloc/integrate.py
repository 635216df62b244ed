"""ODE integration: an embedded Dormand-Prince 5(4) pair with PI step control.

A stiff fallback to an implicit Radau method (scipy) is engaged once the
stiffness estimate ``|df_r/dr| * h`` exceeds a threshold.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .errors import IntegratorError, SectorExitWarning

# Dormand-Prince coefficients
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # shape (N, dim)
    dy: np.ndarray
    method: str = "dopri5"

    def __call__(self, t):
        return CubicHermiteSpline(self.t, self.y, self.dy, axis=0, extrapolate=False)(t)

    @property
    def end(self):
        return self.y[-1]


def _step(f, t, y, h, k1):
    K = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], K))
        K.append(f(t + _C[i] * h, yi))
    y5 = y + h * sum(b * k for b, k in zip(_B5, K) if b != 0)
    err = h * sum(e * k for e, k in zip(_E, K))
    return y5, err, K[6]


def dopri5(f, t_span, y0, rtol=1e-10, atol=1e-12, h0=None, max_steps=200000,
           fixed_h=None, stiff_check=None, first_step_max=None):
    """Integrate ``y' = f(t, y)`` over ``t_span`` (either direction).

    With ``fixed_h`` the step is constant (for order studies).  ``stiff_check``
    is an optional callable ``(t, y, h) -> bool``; returning True stops the
    integration early and the trajectory so far is returned with
    ``method = "stiff"``.
    """
    t0, t1 = map(float, t_span)
    direction = 1.0 if t1 >= t0 else -1.0
    y = np.array(y0, dtype=float)
    t = t0
    k1 = np.asarray(f(t, y), dtype=float)
    ts, ys, dys = [t], [y.copy()], [k1.copy()]
    span = abs(t1 - t0)
    if span == 0:
        return Trajectory(np.array(ts), np.array(ys), np.array(dys))
    if fixed_h is not None:
        nsteps = max(1, int(round(span / fixed_h)))
        h = direction * span / nsteps
        for _ in range(nsteps):
            y, _, k1 = _step(f, t, y, h, k1)
            t += h
            ts.append(t); ys.append(y.copy()); dys.append(k1.copy())
        return Trajectory(np.array(ts), np.array(ys), np.array(dys))

    if h0 is None:
        sc = atol + rtol * np.abs(y)
        d0 = np.linalg.norm(y / sc) / np.sqrt(y.size)
        d1 = np.linalg.norm(k1 / sc) / np.sqrt(y.size)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(abs(h0), span)
    if first_step_max is not None:
        h = min(h, first_step_max)
    err_prev = 1e-4
    safety, fac_min, fac_max = 0.9, 0.2, 5.0
    beta = 0.04  # PI control
    alpha_exp = 0.2 - 0.75 * beta
    for _ in range(max_steps):
        if direction * (t1 - t) <= 0:
            break
        rest = abs(t1 - t)
        # stretch a step that would leave only a rounding-size remainder
        last = h >= rest - 1e-12 * max(1.0, abs(t1))
        h = rest if last else h
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegratorError(f"step size collapsed at t = {t:.6g}")
        hs = direction * h
        y_new, err, k_new = _step(f, t, y, hs, k1)
        if not np.all(np.isfinite(y_new)):
            h *= 0.25
            continue
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        en = np.sqrt(np.mean((err / sc) ** 2))
        if en <= 1.0:
            # land exactly on t1 so no rounding sliver is left over
            t = t1 if last else t + hs
            y, k1 = y_new, k_new
            ts.append(t); ys.append(y.copy()); dys.append(k1.copy())
            en = max(en, 1e-10)
            fac = safety * en ** (-alpha_exp) * err_prev ** beta
            err_prev = en
            h *= min(fac_max, max(fac_min, fac))
            if stiff_check is not None and stiff_check(t, y, h):
                return Trajectory(np.array(ts), np.array(ys), np.array(dys), "stiff")
        else:
            h *= max(fac_min, safety * en ** -0.2)
    else:
        raise IntegratorError("maximum number of steps exceeded")
    return Trajectory(np.array(ts), np.array(ys), np.array(dys))


def radau(f, t_span, y0, rtol=1e-10, atol=1e-12, jac=None) -> Trajectory:
    sol = solve_ivp(f, t_span, y0, method="Radau", rtol=rtol, atol=atol, jac=jac)
    if not sol.success:
        raise IntegratorError(sol.message)
    y = sol.y.T
    dy = np.array([f(t, yi) for t, yi in zip(sol.t, y)])
    return Trajectory(sol.t, y, dy, "radau")


def concat(a: Trajectory, b: Trajectory) -> Trajectory:
    if len(b.t) and len(a.t) and b.t[0] == a.t[-1]:
        b = Trajectory(b.t[1:], b.y[1:], b.dy[1:], b.method)
    method = a.method if a.method == b.method else f"{a.method}+{b.method}"
    return Trajectory(np.concatenate([a.t, b.t]), np.concatenate([a.y, b.y]),
                      np.concatenate([a.dy, b.dy]), method)


def integrate_slow(state0, eta_span, P, rtol=1e-10, atol=1e-12, stiff_ratio=3.0,
                   warn_sector=True) -> Trajectory:
    """Trajectory of the slow system from ``state0``.

    ``P.n == 0`` integrates the reduced flow in (p, q, s); r is recovered from
    the graph and the returned states are 4-vectors in both cases.
    """
    from .model import r_hat, reduced_field, slow_field, slow_jacobian

    y0 = np.asarray(state0, dtype=float)
    if P.n == 0:
        f3 = lambda t, y: reduced_field(y, P)  # noqa: E731
        tr = dopri5(f3, eta_span, y0[[0, 1, 3]], rtol, atol)
        r = r_hat(tr.y[:, 0], tr.y[:, 1], tr.y[:, 2], P)
        y4 = np.column_stack([tr.y[:, 0], tr.y[:, 1], r, tr.y[:, 2]])
        dy4 = np.column_stack([tr.dy[:, 0], tr.dy[:, 1], np.gradient(r, tr.t) if len(r) > 1 else r * 0,
                               tr.dy[:, 2]])
        out = Trajectory(tr.t, y4, dy4, "dopri5-reduced")
    else:
        f = lambda t, y: slow_field(y, P)  # noqa: E731
        jac = lambda t, y: slow_jacobian(y, P)  # noqa: E731

        def stiff(t, y, h):
            return abs(slow_jacobian(y, P)[2, 2]) * h > stiff_ratio

        tr = dopri5(f, eta_span, y0, rtol, atol, stiff_check=stiff)
        if tr.method == "stiff":
            rest = radau(f, (tr.t[-1], eta_span[1]), tr.y[-1], rtol, atol, jac)
            tr = concat(Trajectory(tr.t, tr.y, tr.dy, "dopri5"), rest)
        out = tr
    if warn_sector:
        Y = out.y
        if np.any(Y[:, 0] < -1e-12) or np.any(Y[:, 1] < -1e-12) or np.any(Y[:, 2:] <= 0):
            warnings.warn("trajectory left the positive sector", SectorExitWarning, stacklevel=2)
    return out
