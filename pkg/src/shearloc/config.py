"""Run configuration for the command-line pipeline."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .continuation import SolverConfig, Target
from .errors import RangeError
from .model import ParamSet, exponents, lambda_from_data, lambda_max, validate_params


@dataclass
class Tolerances:
    newton_tol: float = 1e-10
    bc_tol: float = 1e-8
    ode_tol: float = 1e-12

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v > 0:
                raise RangeError(f"tolerance {k} must be positive (got {v})")


@dataclass
class Schedule:
    m_start: float = -0.4
    eps0_start: float = 1e-4
    eps0_final: float = 1e-8
    beta_range: tuple = (-30.0, 30.0)
    ds0: float = 0.02
    ds_max: float = 0.1
    mesh_intervals: int = 200
    ncol: int = 4


@dataclass
class RunConfig:
    alpha: float
    m: float
    n: float
    lam: float | None = None
    lambda_frac: float | None = None
    U0: float | None = None
    Gamma0: float | None = None
    eta_max: float = 10.0
    k: int | None = None
    tol: Tolerances = field(default_factory=Tolerances)
    schedule: Schedule = field(default_factory=Schedule)
    out_dir: str = "out"
    times: tuple = (0.0, 1.0, 10.0, 100.0)
    x_max: float = 2.0
    nx: int = 401
    tail: bool = True
    seed_rng: int = 0

    def __post_init__(self):
        given = [self.lam is not None, self.lambda_frac is not None,
                 self.U0 is not None and self.Gamma0 is not None]
        if sum(given) != 1:
            raise RangeError("exactly one of lambda, lambda_frac or (U0, Gamma0) must fix the rate")
        if self.eta_max <= 0:
            raise RangeError("eta_max must be positive")
        if any(t < 0 for t in self.times):
            raise RangeError("snapshot times must be non-negative")

    def resolved_lambda(self) -> float:
        if self.lam is not None:
            return float(self.lam)
        if self.lambda_frac is not None:
            return float(self.lambda_frac) * lambda_max(self.alpha, self.m, self.n)
        return lambda_from_data(self.U0, self.Gamma0, self.alpha, self.m, self.n)

    def params(self) -> ParamSet:
        return validate_params(self.alpha, self.m, self.n, self.resolved_lambda())

    def gamma_u(self) -> tuple:
        """Boundary data (Gamma0, U0); U0 follows from Gamma0 when not given."""
        P = self.params()
        a = exponents(P).a
        if self.Gamma0 is None:
            G0 = 1.0 if self.U0 is None else float(self.U0) / a
        else:
            G0 = float(self.Gamma0)
        U0 = a * G0 if self.U0 is None else float(self.U0)
        return G0, U0

    def target(self) -> Target:
        sc = self.schedule
        frac = self.resolved_lambda() / lambda_max(self.alpha, self.m, self.n)
        return Target(self.alpha, self.m, self.n, frac, sc.m_start, self.eta_max,
                      sc.eps0_start, sc.eps0_final, tuple(sc.beta_range))

    def solver(self) -> SolverConfig:
        sc = self.schedule
        return SolverConfig(ncol=sc.ncol, newton_tol=self.tol.newton_tol, ds0=sc.ds0,
                            ds_max=sc.ds_max, mesh_intervals=sc.mesh_intervals)

    def seed_k(self) -> int | None:
        if self.k is not None:
            if abs(self.k * self.n - 1) > 1e-12:
                raise RangeError(f"k = {self.k} does not match n = {self.n}")
            return int(self.k)
        kk = 1.0 / self.n if self.n > 0 else 0.0
        return int(round(kk)) if kk and abs(kk - round(kk)) < 1e-9 else None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        try:
            base = {k: float(d.pop(k)) for k in ("alpha", "m", "n")}
        except KeyError as exc:
            raise RangeError(f"missing parameter {exc.args[0]!r}") from None
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        tol = Tolerances(**d.pop("tolerances", {}))
        sched = Schedule(**d.pop("schedule", {}))
        if "times" in d:
            d["times"] = tuple(float(t) for t in d["times"])
        known = set(cls.__dataclass_fields__) - {"alpha", "m", "n", "tol", "schedule"}
        extra = set(d) - known
        if extra:
            raise RangeError(f"unknown config keys: {sorted(extra)}")
        return cls(**base, tol=tol, schedule=sched, **d)

    @classmethod
    def load(cls, source) -> "RunConfig":
        """From a JSON file path or an inline JSON string."""
        text = str(source)
        if not text.lstrip().startswith("{"):
            p = Path(text)
            if not p.exists():
                raise RangeError(f"config file {p} not found")
            text = p.read_text()
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise RangeError(f"invalid JSON config: {exc}") from None
        except TypeError as exc:
            raise RangeError(f"invalid config: {exc}") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d["tolerances"] = d.pop("tol")
        return d
