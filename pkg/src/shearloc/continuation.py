"""Heteroclinic boundary-value problem M0 -> M1 and its continuation.

The orbit is discretized by Gauss collocation on [-eta_max, eta_max].  The
left end is pinned at ``M0 + eps0 * nu0`` where ``nu0`` lies in the unstable
subspace of M0; the right end must have zero component along the single
unstable eigenvector X13 of M1.  Counting: 4 ODEs, 4 + 1 boundary rows, and
one free scalar ``omega`` (the tilt of ``nu0`` towards the fast direction
X03), so the Newton system is square.  A scalar homotopy coordinate
``c in [0, 1]`` is continued by pseudo-arclength.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .collocation import Collocation
from .errors import MeshError, NewtonDivergence, StepSizeCollapse, TangencyFailure
from .model import ParamSet, lambda_max, m0_point, m1_point, slow_field, slow_jacobian, validate_params
from .seed import BoundaryData, Orbit, extract_end_data
from .spectral import spectrum_M0, spectrum_M1

log = logging.getLogger(__name__)

NODE_CAP = 4000


@dataclass
class Homotopy:
    """Maps the continuation coordinate ``c`` to parameters and boundary data."""

    params: Callable[[float], ParamSet]
    eps0: Callable[[float], float]
    psi: Callable[[float], float]
    label: str = ""


@dataclass
class SolverConfig:
    ncol: int = 4
    newton_tol: float = 1e-10
    newton_maxit: int = 25
    ds0: float = 0.02
    ds_max: float = 0.1
    ds_min: float = 1e-5
    mesh_tol: float = 1e-7
    mesh_intervals: int = 200
    node_cap: int = NODE_CAP
    fd_step: float = 1e-7


@dataclass
class BranchPoint:
    orbit: Orbit
    c: float
    omega: float
    values: dict
    arclength: float = 0.0
    iterations: int = 0
    residual: float = 0.0

    def summary(self) -> dict:
        d = {"label": self.values.get("label", ""), "c": self.c, "omega": self.omega,
             "arclength": self.arclength, "iterations": self.iterations, "residual": self.residual}
        d.update({k: v for k, v in self.values.items() if k != "label"})
        d["nodes"] = int(len(self.orbit.mesh))
        return d


# --- boundary conditions ------------------------------------------------------

def nu0_direction(S0, psi: float, omega: float):
    """Unit start direction and its omega-derivative.

    ``psi`` rotates from X02 (psi = 0) to X01 (psi = pi/2); ``omega`` tilts
    towards X03.
    """
    U = S0.unit_vectors()
    A = math.cos(psi) * U[:, 1] + math.sin(psi) * U[:, 0]
    v = math.cos(omega) * A + math.sin(omega) * U[:, 2]
    dv = -math.sin(omega) * A + math.cos(omega) * U[:, 2]
    nv = np.linalg.norm(v)
    nu = v / nv
    dnu = (dv - nu * (nu @ dv)) / nv
    return nu, dnu


def unstable_row(S1) -> np.ndarray:
    """Row vector extracting the X13 coefficient in the unit S1 basis."""
    return np.linalg.inv(S1.unit_vectors())[2]


def boundary_defect(orbit: Orbit, psi: float = None, omega: float = 0.0) -> dict:
    """Start defect, unstable end component, stable end norm defect, direction norm defect."""
    P, bd = orbit.params, orbit.boundary
    start = orbit.start - (m0_point(P) + bd.eps0 * bd.nu0)
    d = orbit.end - m1_point(P)
    S1 = spectrum_M1(P)
    row = unstable_row(S1)
    c3 = float(row @ d)
    stable = d - c3 * S1.unit_vectors()[:, 2]
    return {
        "start": start,
        "unstable": c3,
        "stable_norm": float(np.linalg.norm(stable) - bd.eps1),
        "nu0_norm": float(np.linalg.norm(bd.nu0) - 1.0),
        "end_distance": float(np.linalg.norm(d)),
    }


# --- discrete system ------------------------------------------------------------

class HeteroclinicSystem:
    def __init__(self, hom: Homotopy, colloc: Collocation, cfg: SolverConfig):
        self.hom, self.col, self.cfg = hom, colloc, cfg
        self.ny = colloc.npts * 4

    def unpack(self, U):
        return U[: self.ny].reshape(-1, 4), U[self.ny], U[self.ny + 1]

    def _data(self, c):
        P = self.hom.params(c)
        S0, S1 = spectrum_M0(P), spectrum_M1(P)
        return P, S0, S1, m0_point(P), m1_point(P)

    def residual(self, U):
        Y, omega, c = self.unpack(U)
        P, S0, S1, M0, M1 = self._data(c)
        nu, _ = nu0_direction(S0, self.hom.psi(c), omega)
        start = Y[0] - M0 - self.hom.eps0(c) * nu
        col = self.col.residual(Y, lambda X: slow_field(X, P))
        end = unstable_row(S1) @ (Y[-1] - M1)
        return np.concatenate([start, col, [end]])

    def jacobian(self, U, with_c: bool = True):
        Y, omega, c = self.unpack(U)
        P, S0, S1, M0, M1 = self._data(c)
        nu, dnu = nu0_direction(S0, self.hom.psi(c), omega)
        ny = self.ny
        Jc = self.col.jacobian(Y, lambda X: slow_jacobian(X, P))
        top = sp.hstack([sp.eye(4, ny, format="csr"), sp.csr_matrix(-self.hom.eps0(c) * dnu[:, None])])
        mid = sp.hstack([Jc, sp.csr_matrix((Jc.shape[0], 1))])
        last = np.zeros(ny + 1)
        last[ny - 4: ny] = unstable_row(S1)
        J = sp.vstack([top, mid, sp.csr_matrix(last[None, :])], format="csr")
        if not with_c:
            return J
        h = self.cfg.fd_step * max(1.0, abs(c))
        Up, Um = U.copy(), U.copy()
        Up[-1] += h
        Um[-1] -= h
        dc = (self.residual(Up) - self.residual(Um)) / (2 * h)
        return sp.hstack([J, sp.csr_matrix(dc[:, None])], format="csr")

    def weights(self):
        w = np.full(self.ny + 2, 1.0 / self.col.npts)
        w[-2:] = 1.0
        return w

    def to_point(self, U, iterations=0, residual=0.0, arclength=0.0) -> BranchPoint:
        Y, omega, c = self.unpack(U)
        P = self.hom.params(c)
        S0 = spectrum_M0(P)
        psi = self.hom.psi(c)
        nu, _ = nu0_direction(S0, psi, omega)
        bd = BoundaryData(eps0=self.hom.eps0(c), nu0=nu, eta_max=float(self.col.nodes[-1]))
        orbit = Orbit(self.col.points(), Y.copy(), P, bd)
        extract_end_data(orbit)
        vals = {"label": self.hom.label, "alpha": P.alpha, "m": P.m, "n": P.n, "lambda": P.lam,
                "eps0": bd.eps0, "psi": psi, "eps1": bd.eps1,
                "end_distance": float(np.linalg.norm(Y[-1] - m1_point(P)))}
        return BranchPoint(orbit, float(c), float(omega), vals, arclength, iterations, residual)


def _row_scale(J):
    a = abs(J).max(axis=1).toarray().ravel()
    a[a == 0] = 1.0
    return sp.diags(1.0 / a)


def newton(system: HeteroclinicSystem, U, arc=None, cfg: SolverConfig = None):
    """Damped Newton.  ``arc = (t, U_pred)`` adds the pseudo-arclength row;
    otherwise ``c`` stays fixed."""
    cfg = cfg or system.cfg
    U = U.copy()
    w = system.weights()
    history = []

    def full_residual(V):
        R = system.residual(V)
        if arc is not None:
            t, Up = arc
            R = np.concatenate([R, [np.dot(w * t, V - Up)]])
        return R

    R = full_residual(U)
    for it in range(1, cfg.newton_maxit + 1):
        if arc is None:
            J = system.jacobian(U, with_c=False)
        else:
            J = sp.vstack([system.jacobian(U), sp.csr_matrix((w * arc[0])[None, :])], format="csc")
        Dr = _row_scale(J)
        Js = (Dr @ J).tocsc()
        Rs = Dr @ R
        norm0 = float(np.max(np.abs(Rs)))
        history.append(norm0)
        try:
            lu = splu(Js)
            dx = lu.solve(-Rs)
        except RuntimeError as exc:
            raise NewtonDivergence(f"singular Newton matrix: {exc}", history) from None
        if not np.all(np.isfinite(dx)):
            raise NewtonDivergence("non-finite Newton step", history)
        step = 1.0
        while True:
            V = U.copy()
            if arc is None:
                V[:-1] += step * dx
            else:
                V += step * dx
            try:
                Rn = full_residual(V)
                ok = np.all(np.isfinite(Rn))
            except Exception:  # noqa: BLE001 -- spectra may fail far from the branch
                ok = False
            if ok and (float(np.max(np.abs(Dr @ Rn))) < max(norm0, 1e-13) or step < 1 / 32):
                break
            step *= 0.5
            if step < 1 / 64:
                raise NewtonDivergence("line search failed", history)
        U, R = V, Rn
        dxn = step * float(np.max(np.abs(dx)))
        if dxn <= cfg.newton_tol * (1.0 + float(np.max(np.abs(U)))):
            res = float(np.max(np.abs(Dr @ R)))
            history.append(res)
            return U, it, res, history
    raise NewtonDivergence("Newton did not converge", history)


def _tangent_bordered(system, U, t_old):
    w = system.weights()
    J = system.jacobian(U)
    A = sp.vstack([J, sp.csr_matrix((w * t_old)[None, :])], format="csc")
    rhs = np.zeros(A.shape[0])
    rhs[-1] = 1.0
    Dr = _row_scale(A)
    t = splu((Dr @ A).tocsc()).solve(Dr @ rhs)
    t /= math.sqrt(np.dot(w * t, t))
    return t


def _tangent_natural(system, U):
    """Tangent from dU/dc at fixed-c (used at the first point and after remeshing)."""
    w = system.weights()
    J = system.jacobian(U)
    Jy, jc = J[:, :-1], J[:, -1].toarray().ravel()
    Dr = _row_scale(Jy)
    du = splu((Dr @ Jy).tocsc()).solve(-(Dr @ jc))
    t = np.concatenate([du, [1.0]])
    t /= math.sqrt(np.dot(w * t, t))
    return t


def _adapt_mesh(system: HeteroclinicSystem, U, cfg: SolverConfig):
    """Refine when the collocation defect is too large; equidistribute otherwise."""
    Y, omega, c = system.unpack(U)
    P = system.hom.params(c)
    col = system.col
    dfc = col.defect(Y, lambda X: slow_field(X, P))
    N = col.N
    err = float(dfc.max())
    if err > cfg.mesh_tol:
        N = int(math.ceil(N * min(2.0, (err / cfg.mesh_tol) ** (1.0 / col.ncol) * 1.2)))
    elif err < 1e-3 * cfg.mesh_tol and N > 50:
        N = max(50, int(N * 0.7))
    if (N + 1) > cfg.node_cap:
        raise MeshError(f"mesh would need {N + 1} nodes (cap {cfg.node_cap})")
    new_col, Ynew = col.remesh(Y, N, monitor=_monitor(col, Y, P))
    sys2 = HeteroclinicSystem(system.hom, new_col, cfg)
    return sys2, np.concatenate([Ynew.ravel(), [omega, c]]), err


def _monitor(col: Collocation, Y, P):
    """Arclength of (p, q, r, s) plus an r-derivative term, per point gap."""
    pts = col.points()
    dY = np.diff(Y, axis=0)
    arc = np.linalg.norm(dY, axis=1)
    dr = np.abs(np.diff(col.evaluate(Y, pts, deriv=True)[:, 2]))
    return arc + 0.1 * dr + 1e-3 * np.diff(pts)


def solve_fixed(system, U, cfg=None, adapt: bool = True, max_adapt: int = 4):
    """Newton at fixed ``c`` followed by mesh adaptation until the defect is small."""
    cfg = cfg or system.cfg
    U, it, res, _ = newton(system, U, None, cfg)
    for _ in range(max_adapt if adapt else 0):
        sys2, U2, err = _adapt_mesh(system, U, cfg)
        if err <= cfg.mesh_tol and sys2.col.N == system.col.N:
            break
        system = sys2
        U, it2, res, _ = newton(system, U2, None, cfg)
        it += it2
    return system, U, it, res


def continue_homotopy(hom: Homotopy, start: BranchPoint, cfg: SolverConfig = None,
                      c0: float = 0.0, c1: float = 1.0, callback=None):
    """Pseudo-arclength continuation of ``c`` from ``c0`` to ``c1``.

    Returns the list of BranchPoints (first is the corrected start, last is
    at ``c = c1`` exactly).  Raises StepSizeCollapse carrying the last good
    point if the step falls below ``ds_min``.
    """
    cfg = cfg or SolverConfig()
    col = Collocation(_nodes_from_points(start.orbit.mesh, cfg.ncol), cfg.ncol)
    system = HeteroclinicSystem(hom, col, cfg)
    U = np.concatenate([start.orbit.states.ravel(), [start.omega, c0]])
    system, U, it, res = solve_fixed(system, U, cfg)
    bp = system.to_point(U, it, res, 0.0)
    branch = [bp]
    if callback:
        callback(bp)
    if c1 == c0:
        return branch
    sign = 1.0 if c1 > c0 else -1.0
    t = sign * _tangent_natural(system, U)
    ds = cfg.ds0
    arclength = 0.0
    w = system.weights()
    while True:
        c = U[-1]
        if t[-1] * sign <= 0:
            raise StepSizeCollapse("branch turned back before reaching the target", branch[-1])
        dc_max = cfg.ds_max
        ds_eff = min(ds, dc_max / abs(t[-1]))
        remaining = (c1 - c) / t[-1]
        final = remaining <= ds_eff * 1.05
        if final:
            Ut = U + remaining * t
            Ut[-1] = c1
            try:
                system, Ut, it, res = solve_fixed(system, Ut, cfg)
            except NewtonDivergence:
                ds = min(ds, remaining) * 0.5
                if ds < cfg.ds_min:
                    raise StepSizeCollapse("could not land on the target", branch[-1]) from None
                continue
            arclength += remaining
            bp = system.to_point(Ut, it, res, arclength)
            branch.append(bp)
            if callback:
                callback(bp)
            return branch
        Up = U + ds_eff * t
        try:
            Un, it, res, _ = newton(system, Up, (t, Up), cfg)
        except NewtonDivergence as exc:
            log.debug("step %.3g failed: %s", ds_eff, exc)
            ds = ds_eff * 0.5
            if ds < cfg.ds_min:
                raise StepSizeCollapse(f"step size below {cfg.ds_min}", branch[-1]) from None
            continue
        if abs(Un[-1] - U[-1]) < 1e-12:
            raise StepSizeCollapse("no progress in the continuation coordinate", branch[-1])
        arclength += ds_eff
        t_new = _tangent_bordered(system, Un, t)
        if np.dot(w * t_new, t) < 0:
            t_new = -t_new
        U, t = Un, t_new
        # mesh check on the accepted point
        sys2, U2, err = _adapt_mesh(system, U, cfg)
        if err > cfg.mesh_tol or sys2.col.N != system.col.N:
            system = sys2
            system, U, _, res = solve_fixed(system, U2, cfg)
            w = system.weights()
            t = sign * _tangent_natural(system, U)
        bp = system.to_point(U, it, res, arclength)
        branch.append(bp)
        if callback:
            callback(bp)
        log.info("%s c=%.5f ds=%.3g it=%d N=%d", hom.label, U[-1], ds_eff, it, system.col.N)
        if it <= 3:
            ds = min(ds_eff * 1.5, 10 * cfg.ds_max)
        elif it >= 8:
            ds = ds_eff * 0.6


def _nodes_from_points(points, ncol):
    pts = np.asarray(points)
    if (len(pts) - 1) % ncol == 0:
        return pts[::ncol]
    return pts


# --- the four-step procedure ----------------------------------------------------

@dataclass
class Target:
    alpha: float
    m: float
    n: float
    lambda_frac: float = 0.5
    m_start: float = -0.4
    eta_max: float = 10.0
    eps0_start: float = 1e-4
    eps0_final: float = 1e-8
    beta_range: tuple = (-30.0, 30.0)

    def params(self) -> ParamSet:
        return validate_params(self.alpha, self.m, self.n,
                               self.lambda_frac * lambda_max(self.alpha, self.m, self.n))


def homotopy_params(tgt: Target, c: float) -> ParamSet:
    """Straight path in (alpha, m) from (0, m_start); lambda stays a fixed fraction of lambda_max."""
    al = c * tgt.alpha
    m = (1 - c) * tgt.m_start + c * tgt.m
    lam = tgt.lambda_frac * lambda_max(al, m, tgt.n)
    if -1e-5 < c < 0:
        # finite-difference probes just below the start
        return ParamSet(al, m, tgt.n, lam)
    return validate_params(al, m, tgt.n, lam, allow_alpha_zero=True)


def parameter_homotopy(tgt: Target) -> Homotopy:
    return Homotopy(lambda c: homotopy_params(tgt, c), lambda c: tgt.eps0_start, lambda c: 0.0,
                    "parameters")


def rotation_homotopy(tgt: Target) -> Homotopy:
    P = tgt.params()
    b0, b1 = tgt.beta_range

    def psi(c):
        if c >= 1.0:
            return math.pi / 2
        return math.atan(math.exp(b0 + c * (b1 - b0)))

    return Homotopy(lambda c: P, lambda c: tgt.eps0_start, psi, "rotation")


def anchor_homotopy(tgt: Target) -> Homotopy:
    P = tgt.params()
    l0, l1 = math.log(tgt.eps0_start), math.log(tgt.eps0_final)
    return Homotopy(lambda c: P, lambda c: math.exp(l0 + c * (l1 - l0)), lambda c: math.pi / 2,
                    "anchor")


def start_point(orbit: Orbit, hom: Homotopy) -> BranchPoint:
    return BranchPoint(orbit, 0.0, 0.0, {"label": hom.label})


def continue_parameters(start: BranchPoint, tgt: Target, cfg: SolverConfig = None, callback=None):
    """Parameter homotopy: carry the p = 0 orbit from alpha = 0 to the target parameters."""
    return continue_homotopy(parameter_homotopy(tgt), start, cfg, callback=callback)


def tangency_slope(orbit: Orbit, window=None) -> float:
    """Least-squares slope of log|chi - M0| against eta on the tangency window."""
    sel = tangency_window(orbit) if window is None else window
    d = np.linalg.norm(orbit.states[sel] - m0_point(orbit.params), axis=1)
    return float(np.polyfit(orbit.mesh[sel], np.log(d), 1)[0])


def shrink_anchor(start: BranchPoint, tgt: Target, cfg: SolverConfig = None, callback=None,
                  slope_margin: float = 0.04, dlog: float = 0.25):
    """Decrease eps0 along the strong unstable connection until the backward
    window is linear, i.e. the tangency slope is within ``slope_margin`` of 2.

    Keeping eps0 as large as this allows leaves the most room for the
    approach to M1 at the right end.  Natural-parameter steps in log(eps0)
    with a secant predictor.
    """
    cfg = cfg or SolverConfig()
    hom = anchor_homotopy(tgt)
    l0, l1 = math.log(tgt.eps0_start), math.log(tgt.eps0_final)
    dc0 = dlog / abs(l1 - l0)
    col = Collocation(_nodes_from_points(start.orbit.mesh, cfg.ncol), cfg.ncol)
    system = HeteroclinicSystem(hom, col, cfg)
    U = np.concatenate([start.orbit.states.ravel(), [start.omega, 0.0]])
    system, U, it, res = solve_fixed(system, U, cfg)
    bp = system.to_point(U, it, res)
    branch = [bp]
    if callback:
        callback(bp)
    U_prev = None
    dc = dc0
    while abs(2.0 - tangency_slope(bp.orbit)) > slope_margin:
        c = U[-1]
        if c >= 1.0:
            raise TangencyFailure(f"slope still {tangency_slope(bp.orbit):.4f} at eps0 = {tgt.eps0_final:g}")
        c_new = min(1.0, c + dc)
        if U_prev is not None and len(U_prev) == len(U):
            guess = U + (U - U_prev) * (c_new - c) / max(U[-1] - U_prev[-1], 1e-300)
        else:
            guess = U.copy()
        guess[-1] = c_new
        try:
            system2, U2, it, res = solve_fixed(system, guess, cfg)
        except NewtonDivergence:
            dc *= 0.5
            if dc < cfg.ds_min:
                raise StepSizeCollapse("anchor step collapsed", branch[-1]) from None
            continue
        same_mesh = system2.col.N == system.col.N
        system, U_prev, U = system2, (U if same_mesh else None), U2
        bp = system.to_point(U, it, res, branch[-1].arclength + abs(c_new - c))
        branch.append(bp)
        if callback:
            callback(bp)
        log.info("%s eps0=%.3g slope=%.4f", hom.label, bp.values["eps0"], tangency_slope(bp.orbit))
        dc = min(dc0, dc * 1.5)
    return branch


def continue_direction(start: BranchPoint, tgt: Target, cfg: SolverConfig = None, callback=None,
                       check: bool = True):
    """Rotate nu0 from X02 to X01, then shrink eps0.  Returns (branch, final point)."""
    br_a = continue_homotopy(rotation_homotopy(tgt), start, cfg, callback=callback)
    br_b = shrink_anchor(br_a[-1], tgt, cfg, callback=callback)
    final = br_b[-1]
    if check:
        from .verify import check_tangency

        check_tangency(final.orbit, strict=True)
    return br_a + br_b, final


def heteroclinic(tgt: Target, cfg: SolverConfig = None, callback=None, mesh=None):
    """Seed, parameter homotopy, rotation and anchoring for one target.  Returns (branch, final BranchPoint)."""
    from .seed import plane_orbit

    cfg = cfg or SolverConfig()
    P0 = homotopy_params(tgt, 0.0)
    N = cfg.mesh_intervals
    if mesh is None:
        mesh = Collocation(np.linspace(-tgt.eta_max, tgt.eta_max, N + 1), cfg.ncol).points()
    orbit = plane_orbit(P0, tgt.eta_max, tgt.eps0_start, mesh=mesh)
    hom3 = parameter_homotopy(tgt)
    br3 = continue_parameters(start_point(orbit, hom3), tgt, cfg, callback)
    br4, final = continue_direction(br3[-1], tgt, cfg, callback)
    return br3 + br4, final


def newton_matrix(bp: BranchPoint, hom: Homotopy, cfg: SolverConfig = None):
    """Row-scaled square Newton matrix at a converged point (c fixed)."""
    cfg = cfg or SolverConfig()
    col = Collocation(_nodes_from_points(bp.orbit.mesh, cfg.ncol), cfg.ncol)
    system = HeteroclinicSystem(hom, col, cfg)
    U = np.concatenate([bp.orbit.states.ravel(), [bp.omega, bp.c]])
    J = system.jacobian(U, with_c=False)
    return (_row_scale(J) @ J).tocsc()


# --- kappa fit ---------------------------------------------------------------------

def tangency_window(orbit: Orbit):
    eta = orbit.mesh
    lo = eta[0]
    return (eta >= lo) & (eta <= lo + 0.25 * (eta[-1] - lo))


def fit_kappa(orbit: Orbit, Gamma0: float = 1.0, Sigma0: float = 1.0, window=None,
              order: int = 6):
    """Least-squares kappa in e^{-2 eta}(chi - M0) ~ kappa X01 and the shift eta0.

    The fit model is the expansion ``kappa X01 + sum_j e^{2 j eta} W_j`` for
    j = 1..order; the nonlinear terms of the flow would otherwise bias kappa
    over a window that reaches into the nonlinear regime.  The powers are
    taken relative to the window end so the basis stays well conditioned.  With
    xi = e^{eta - eta0} the orbit satisfies p ~ (Gamma0 / Sigma0) xi^2, which
    fixes eta0 = log(Gamma0 / (Sigma0 kappa)) / 2.
    """
    P = orbit.params
    X01 = spectrum_M0(P).vectors[:, 0]
    sel = tangency_window(orbit) if window is None else window
    eta = orbit.mesh[sel]
    Z = (orbit.states[sel] - m0_point(P)) * np.exp(-2 * eta)[:, None]
    x = np.exp(2 * (eta - eta[-1]))
    A = np.column_stack([x ** j for j in range(order + 1)])
    coef = np.linalg.lstsq(A, Z, rcond=None)[0]
    lead = coef[0]
    kappa = float(lead @ X01 / (X01 @ X01))
    resid = float(np.linalg.norm(lead - kappa * X01))
    if not np.isfinite(kappa) or resid > 0.1 * abs(kappa) * np.linalg.norm(X01):
        raise TangencyFailure(f"kappa fit residual {resid:.3g} too large (kappa={kappa:.3g})")
    if kappa <= 0:
        raise TangencyFailure(f"kappa = {kappa:.3g} not positive")
    eta0 = 0.5 * math.log(Gamma0 / (Sigma0 * kappa))
    return kappa, eta0
