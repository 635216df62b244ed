"""Pipeline stages behind the command-line interface.

Each stage reads and writes plain artifacts so that it can be run on its own:
seed.csv -> orbit.csv (+ branch.jsonl) -> profiles.csv -> snap_<t>.csv ->
report.json and plot scripts.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import io
from .collocation import Collocation
from .config import RunConfig
from .continuation import (continue_direction, continue_parameters, homotopy_params,
                           start_point, parameter_homotopy)
from .errors import MissingArtifact, ShearlocError
from .model import ParamSet, m0_point, validate_params
from .reconstruct import (ProfileTable, asymptotic_rates, curvatures_at_origin, stress_gap,
                          measure_slopes, profiles_from_orbit, snapshots)
from .seed import BoundaryData, Orbit, extract_end_data, plane_orbit
from . import verify as vf

log = logging.getLogger(__name__)

PANELS = (("v", False), ("u", True), ("theta", True), ("sigma", True))


class StageError(ShearlocError):
    """Wraps a module error with the pipeline step it came from."""

    def __init__(self, step: str, err: Exception):
        super().__init__(f"[{step}] {type(err).__name__}: {err}")
        self.step, self.cause = step, err


def _stage(step):
    def deco(fn):
        def wrapped(*a, **kw):
            try:
                return fn(*a, **kw)
            except StageError:
                raise
            except ShearlocError as exc:
                raise StageError(step, exc) from exc
        wrapped.__name__ = fn.__name__
        wrapped.__doc__ = fn.__doc__
        return wrapped
    return deco


def snap_name(t: float) -> str:
    return f"snap_{io.fmt(t)}.csv"


# --- orbit artifacts ---------------------------------------------------------------

def write_orbit(path, orbit: Orbit) -> Path:
    io.write_csv(path, io.SCHEMAS["orbit"], np.column_stack([orbit.mesh, orbit.states]))
    io.validate_csv(path, "orbit")
    return Path(path)


def read_orbit(path, P: ParamSet) -> Orbit:
    """Orbit from CSV; the start offset from M0 defines eps0 and nu0."""
    _, data = io.read_csv(path, "orbit")
    mesh, states = data[:, 0], data[:, 1:]
    d = states[0] - m0_point(P)
    eps0 = float(np.linalg.norm(d))
    nu0 = d / eps0 if eps0 > 0 else d
    orbit = Orbit(mesh, states, P, BoundaryData(eps0, nu0, eta_max=float(mesh[-1])))
    extract_end_data(orbit)
    return orbit


def _on_collocation_grid(orbit: Orbit, ncol: int, intervals: int) -> Orbit:
    if (len(orbit.mesh) - 1) % ncol == 0:
        return orbit
    col = Collocation(np.linspace(orbit.mesh[0], orbit.mesh[-1], intervals + 1), ncol)
    pts = col.points()
    states = PchipInterpolator(orbit.mesh, orbit.states, axis=0)(pts)
    return Orbit(pts, states, orbit.params, orbit.boundary)


# --- stages --------------------------------------------------------------------

@_stage("seed")
def stage_seed(cfg: RunConfig, out_dir: Path) -> Orbit:
    """Closed-form (q, r) when n = 1/k, then the s integration."""
    tgt = cfg.target()
    P0 = homotopy_params(tgt, 0.0)
    col = Collocation(np.linspace(-cfg.eta_max, cfg.eta_max, cfg.schedule.mesh_intervals + 1),
                      cfg.schedule.ncol)
    orbit = plane_orbit(P0, cfg.eta_max, tgt.eps0_start, mesh=col.points(), k=cfg.seed_k(),
                        rtol=cfg.tol.ode_tol, atol=cfg.tol.ode_tol * 1e-2)
    write_orbit(out_dir / "seed.csv", orbit)
    return orbit


@_stage("orbit")
def stage_orbit(cfg: RunConfig, seed: Orbit, out_dir: Path):
    """Parameter continuation, then direction rotation and anchoring."""
    tgt = cfg.target()
    scfg = cfg.solver()
    seed = _on_collocation_grid(seed, scfg.ncol, scfg.mesh_intervals)
    branch_path = out_dir / "branch.jsonl"
    branch_path.write_text("")

    def record(bp):
        io.append_jsonl(branch_path, bp.summary())

    br3 = continue_parameters(start_point(seed, parameter_homotopy(tgt)), tgt, scfg, record)
    _, final = continue_direction(br3[-1], tgt, scfg, record)
    start_res = float(np.linalg.norm(final.orbit.start - m0_point(final.orbit.params)
                                     - final.orbit.boundary.eps0 * final.orbit.boundary.nu0))
    if start_res > cfg.tol.bc_tol:
        raise vf.TangencyFailure(f"start boundary residual {start_res:.3g} above bc_tol")
    write_orbit(out_dir / "orbit.csv", final.orbit)
    io.validate_jsonl(branch_path)
    return final


@_stage("profiles")
def stage_profiles(orbit: Orbit, Gamma0: float, U0: float, out_dir: Path) -> ProfileTable:
    table = profiles_from_orbit(orbit, Gamma0, U0)
    path = out_dir / "profiles.csv"
    io.write_csv(path, io.SCHEMAS["profiles"], table.as_array())
    io.validate_csv(path, "profiles")
    return table


@_stage("snapshots")
def stage_snapshots(table: ProfileTable, times, x_max: float, nx: int, out_dir: Path,
                    tail: bool = True) -> list:
    x = np.linspace(-x_max, x_max, nx)
    snaps = snapshots(table, times, x, tail)

    def write(s):
        path = out_dir / snap_name(s.t)
        io.write_csv(path, io.SCHEMAS["snapshot"], s.as_array())
        io.validate_csv(path, "snapshot")
        return path

    with ThreadPoolExecutor() as ex:
        return list(ex.map(write, snaps))


def profiles_from_csv(path, P: ParamSet) -> ProfileTable:
    from .reconstruct import boundary_values

    _, d = io.read_csv(path, "profiles")
    G0, U0 = float(d[0, 1]), float(d[0, 5])
    Th0, Sg0 = boundary_values(G0, U0, P)
    return ProfileTable(d[:, 0], d[:, 1], d[:, 2], d[:, 3], d[:, 4], d[:, 5], G0, U0, Th0, Sg0, P)


# --- verification ------------------------------------------------------------------

def _check(name, passed, **info):
    return {"name": name, "status": "PASS" if passed else "FAIL", **info}


@_stage("verify")
def run_verify(cfg: RunConfig, orbit: Orbit | None, table: ProfileTable | None,
               out_dir: Path | None = None) -> dict:
    """All diagnostics; returns the report (and writes report.json if out_dir)."""
    P = cfg.params()
    checks = []
    G0, U0 = cfg.gamma_u()
    try:
        th0, sg0 = vf.check_compatibility(G0, U0, P)
        checks.append(_check("compatibility", True, Theta0=th0, Sigma0=sg0))
    except ShearlocError as exc:
        checks.append(_check("compatibility", False, error=str(exc)))

    if orbit is not None:
        rep = vf.check_tangency(orbit, strict=False)
        checks.append(_check("tangency", rep["pass"], **rep))
        ed = vf.end_defect(orbit)
        checks.append(_check("end_defect", ed["max"] <= 1e-4, **ed))
        pmin = float(orbit.states[1:-1, 0].min())
        checks.append(_check("positive_p", pmin > 0, p_min=pmin))

    if table is not None:
        sl = measure_slopes(table)
        ok = all(d["error"] <= 0.02 for d in sl.values())
        checks.append(_check("tail_slopes", ok, slopes=sl))
        cv = curvatures_at_origin(table, 0.05)
        signs = cv["Gamma"] < 0 and cv["Theta"] < 0 and cv["U"] < 0 and cv["Sigma"] > 0
        checks.append(_check("curvature_signs", signs, **cv))
        rel = abs(cv["Sigma"] - cv["Sigma_pred"]) / cv["Sigma_pred"]
        checks.append(_check("sigma_curvature", rel <= 0.05, relative_error=rel))
        rates = asymptotic_rates(P)
        g = stress_gap(table)
        rel = abs(g["gap"] - P.lam) / P.lam
        checks.append(_check("stress_gap", rel <= 0.02, measured=g, predicted=rates["gap"]["sigma"]))

    t = np.linspace(0.0, 100.0, 2001)
    us = vf.uniform_shear(t, 1.0, 1.0, P)
    th = vf.uniform_shear_ode(t, 1.0, 1.0, P)
    err = float(np.max(np.abs(th - us.theta_s) / us.theta_s))
    checks.append(_check("uniform_shear", err <= 1e-8, max_rel_error=err))
    hr = vf.indicator_root_vs_peak(0.01, 1.0, P, np.linspace(0.0, 20.0, 4001))
    checks.append(_check("hyperbolicity", hr["pass"], **hr))

    Pr = validate_params(P.alpha, P.m, 0.0, P.lam)
    try:
        tri = vf.check_triangle_invariance(Pr)
        checks.append(_check("triangle_invariance", tri["pass"], **tri))
    except vf.InvarianceViolation as exc:
        checks.append(_check("triangle_invariance", False, error=str(exc)))
    conv = vf.triangle_convergence(Pr, 50, seed=cfg.seed_rng)
    checks.append(_check("triangle_convergence", conv["pass"], **conv))

    report = {"params": P.to_dict(), "checks": checks,
              "pass": all(c["status"] == "PASS" for c in checks)}
    if out_dir is not None:
        io.write_json(out_dir / "report.json", report)
    return report


# --- plots -------------------------------------------------------------------------

def emit_plots(out_dir: Path, times) -> list:
    """One gnuplot script per panel, reading the snapshot CSVs."""
    out_dir = Path(out_dir)
    cols = {"v": 2, "u": 3, "theta": 4, "sigma": 5}
    files = [snap_name(t) for t in times]
    for f in files:
        if not (out_dir / f).exists():
            raise MissingArtifact(f"{out_dir / f} not found; run the snapshots stage first")
    written = []
    for name, logy in PANELS:
        lines = [
            "set datafile separator ','",
            f"set title '{name}(t, x)'",
            "set xlabel 'x'",
            f"set ylabel '{name}'",
            "set logscale y" if logy else "unset logscale y",
            "plot " + ", \\\n     ".join(
                f"'{f}' using 1:{cols[name]} skip 1 with lines title 't = {io.fmt(t)}'"
                for f, t in zip(files, times)),
        ]
        path = out_dir / f"plot_{name}.gp"
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def run_pipeline(cfg: RunConfig) -> dict:
    """Seed, orbit, reconstruction, snapshots, verification and plots."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "config.json", cfg.to_dict())
    seed = stage_seed(cfg, out)
    final = stage_orbit(cfg, seed, out)
    G0, U0 = cfg.gamma_u()
    table = stage_profiles(final.orbit, G0, U0, out)
    stage_snapshots(table, cfg.times, cfg.x_max, cfg.nx, out, cfg.tail)
    report = run_verify(cfg, final.orbit, table, out)
    emit_plots(out, cfg.times)
    return report
