"""Command-line entry point.

Exit codes: 0 all checks pass, 2 a verification check failed, 3 numerical
failure, 4 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig
from .errors import MissingArtifact, RangeError, ShearlocError
from .pipeline import (StageError, emit_plots, profiles_from_csv, read_orbit, run_pipeline,
                       run_verify, stage_orbit, stage_profiles, stage_seed, stage_snapshots)
from .model import exponents
from .spectral import equilibria, spectrum_M0, spectrum_M1

EXIT_OK, EXIT_VERIFY, EXIT_NUMERIC, EXIT_CONFIG = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shearloc", description=__doc__.splitlines()[0])
    ap.add_argument("--params", help="JSON config file or inline JSON object")
    ap.add_argument("--out-dir", default=None, help="output directory")
    ap.add_argument("--seed-rng", type=int, default=None, help="seed for random test starts")
    ap.add_argument("--tol-newton", type=float, default=None)
    ap.add_argument("--tol-bc", type=float, default=None)
    ap.add_argument("--tol-ode", type=float, default=None)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sub.add_parser("equilibria", help="print the equilibrium catalog as JSON")
    p = sub.add_parser("eigs", help="print the closed-form spectrum at M0 or M1")
    p.add_argument("--at", choices=("M0", "M1"), default="M0")

    p = sub.add_parser("seed", help="starting orbit at alpha = 0")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--eta-max", type=float, default=None)
    p.add_argument("--out", default="seed.csv")

    p = sub.add_parser("orbit", help="continue the seed to the heteroclinic")
    p.add_argument("--from", dest="src", default="seed.csv")
    p.add_argument("--target", default=None, help="target config (defaults to --params)")
    p.add_argument("--out", default="orbit.csv")
    p.add_argument("--branch", default="branch.jsonl")

    p = sub.add_parser("profiles", help="self-similar profiles from an orbit")
    p.add_argument("--orbit", default="orbit.csv")
    p.add_argument("--gamma0", type=float, default=None)
    p.add_argument("--u0", type=float, default=None)
    p.add_argument("--out", default="profiles.csv")

    p = sub.add_parser("snapshots", help="fields at given times")
    p.add_argument("--profiles", default="profiles.csv")
    p.add_argument("--times", default=None, help="comma separated, e.g. 0,1,10,100")
    p.add_argument("--out", default="snap_{t}.csv")
    p.add_argument("--x-max", type=float, default=None)
    p.add_argument("--nx", type=int, default=None)
    p.add_argument("--no-tail", action="store_true", help="fail instead of using the power-law tail")

    p = sub.add_parser("verify", help="run the diagnostic suite")
    p.add_argument("--orbit", default=None)
    p.add_argument("--profiles", default=None)
    p.add_argument("--report", default="report.json")
    p.add_argument("--all", action="store_true", help="also reconstruct profiles from the orbit")

    p = sub.add_parser("plots", help="emit plot scripts for the snapshot panels")
    p.add_argument("--times", default=None)

    sub.add_parser("run", help="full pipeline")
    return ap


def _config(args, source=None) -> RunConfig:
    src = source or args.params
    if src is None:
        raise RangeError("--params is required")
    cfg = RunConfig.load(src)
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    if args.seed_rng is not None:
        cfg.seed_rng = args.seed_rng
    for flag, key in (("tol_newton", "newton_tol"), ("tol_bc", "bc_tol"), ("tol_ode", "ode_tol")):
        v = getattr(args, flag)
        if v is not None:
            if not v > 0:
                raise RangeError(f"--{flag.replace('_', '-')} must be positive")
            setattr(cfg.tol, key, v)
    return cfg


def _times(text, default):
    if text is None:
        return tuple(default)
    try:
        ts = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise RangeError(f"bad --times value {text!r}") from None
    if any(t < 0 for t in ts):
        raise RangeError("times must be non-negative")
    return ts


def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.out_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _resolve(out: Path, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() or p.parent != Path(".") else out / p


def _dispatch(args) -> int:
    cfg = _config(args, getattr(args, "target", None))
    P = cfg.params()
    if args.cmd == "equilibria":
        print(io.dumps([e.to_dict() for e in equilibria(P)], indent=2))
        return EXIT_OK
    if args.cmd == "eigs":
        spec = spectrum_M0(P) if args.at == "M0" else spectrum_M1(P)
        print(io.dumps(spec.to_dict(), indent=2))
        return EXIT_OK

    out = _out(cfg)
    if args.cmd == "seed":
        if args.k is not None:
            cfg.k = args.k
        if args.eta_max is not None:
            cfg.eta_max = args.eta_max
        orbit = stage_seed(cfg, out)
        dest = _resolve(out, args.out)
        if dest != out / "seed.csv":
            (out / "seed.csv").replace(dest)
        return EXIT_OK
    if args.cmd == "orbit":
        from .continuation import homotopy_params

        P0 = homotopy_params(cfg.target(), 0.0)
        seed = read_orbit(_resolve(out, args.src), P0)
        stage_orbit(cfg, seed, out)
        for default, want in (("orbit.csv", args.out), ("branch.jsonl", args.branch)):
            dest = _resolve(out, want)
            if dest != out / default:
                (out / default).replace(dest)
        return EXIT_OK
    if args.cmd == "profiles":
        orbit = read_orbit(_resolve(out, args.orbit), P)
        G0, U0 = cfg.gamma_u()
        if args.gamma0 is not None or args.u0 is not None:
            a = exponents(P).a
            G0 = args.gamma0 if args.gamma0 is not None else args.u0 / a
            U0 = args.u0 if args.u0 is not None else a * G0
        stage_profiles(orbit, G0, U0, out)
        dest = _resolve(out, args.out)
        if dest != out / "profiles.csv":
            (out / "profiles.csv").replace(dest)
        return EXIT_OK
    if args.cmd == "snapshots":
        table = profiles_from_csv(_resolve(out, args.profiles), P)
        times = _times(args.times, cfg.times)
        paths = stage_snapshots(table, times, args.x_max or cfg.x_max, args.nx or cfg.nx, out,
                                tail=not args.no_tail and cfg.tail)
        if args.out != "snap_{t}.csv":
            for t, p in zip(times, paths):
                p.replace(_resolve(out, args.out.format(t=io.fmt(t))))
        return EXIT_OK
    if args.cmd == "verify":
        orbit = read_orbit(_resolve(out, args.orbit), P) if args.orbit else None
        table = None
        if args.profiles:
            table = profiles_from_csv(_resolve(out, args.profiles), P)
        elif args.all and orbit is not None:
            from .reconstruct import profiles_from_orbit

            table = profiles_from_orbit(orbit, *cfg.gamma_u())
        report = run_verify(cfg, orbit, table)
        io.write_json(_resolve(out, args.report), report)
        for c in report["checks"]:
            print(f"{c['status']} {c['name']}")
        return EXIT_OK if report["pass"] else EXIT_VERIFY
    if args.cmd == "plots":
        for p in emit_plots(out, _times(args.times, cfg.times)):
            print(p)
        return EXIT_OK
    if args.cmd == "run":
        report = run_pipeline(cfg)
        for c in report["checks"]:
            print(f"{c['status']} {c['name']}")
        return EXIT_OK if report["pass"] else EXIT_VERIFY
    raise RangeError(f"unknown command {args.cmd}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (RangeError, MissingArtifact, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        if isinstance(exc.cause, (RangeError, MissingArtifact)):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ShearlocError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
