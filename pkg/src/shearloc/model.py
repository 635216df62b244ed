"""Parameters, scaling exponents and the vector fields of the (p, q, r, s) system.

All field functions accept a state of shape ``(4,)`` or ``(4, N)`` and
broadcast over trailing axes.  The r-component of the slow field is returned
already divided by ``n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateError, RangeError, SingularGraphError

GRAPH_FLOOR = 1e-10


def lambda_max(alpha: float, m: float, n: float) -> float:
    """Upper end of the admissible rate interval."""
    return 2.0 * (alpha - m - n) * (1.0 + m) / (1.0 + m + n) ** 2


@dataclass(frozen=True)
class ParamSet:
    alpha: float
    m: float
    n: float
    lam: float

    @property
    def L_p(self) -> float:
        return -self.alpha + self.m + self.n

    @property
    def lambda_max(self) -> float:
        return lambda_max(self.alpha, self.m, self.n)

    def with_n(self, n: float) -> "ParamSet":
        return replace(self, n=n)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "m": self.m, "n": self.n, "lambda": self.lam}

    @classmethod
    def from_dict(cls, d: dict, allow_alpha_zero: bool = False) -> "ParamSet":
        """Build from ``{"alpha", "m", "n", "lambda"}`` or with ``"lambda_frac"``."""
        try:
            alpha, m, n = float(d["alpha"]), float(d["m"]), float(d["n"])
        except KeyError as exc:
            raise RangeError(f"missing parameter {exc.args[0]!r}") from None
        if "lambda" in d and d["lambda"] is not None:
            lam = float(d["lambda"])
        elif "lambda_frac" in d:
            lam = float(d["lambda_frac"]) * lambda_max(alpha, m, n)
        else:
            raise RangeError("one of 'lambda' or 'lambda_frac' is required")
        return validate_params(alpha, m, n, lam, allow_alpha_zero=allow_alpha_zero)


def validate_params(alpha, m, n, lam, allow_alpha_zero: bool = False) -> ParamSet:
    """Check the admissible parameter region and return a ParamSet.

    ``n = 0`` is accepted (reduced-system use).  ``alpha = 0`` is accepted only
    with ``allow_alpha_zero``; it is the starting point of the homotopy.
    """
    vals = [float(alpha), float(m), float(n), float(lam)]
    if not all(math.isfinite(v) for v in vals):
        raise RangeError("parameters must be finite")
    alpha, m, n, lam = vals
    if alpha < 0 or (alpha == 0 and not allow_alpha_zero):
        raise RangeError(f"alpha > 0 violated (alpha={alpha})")
    if m <= -1:
        raise RangeError(f"m > -1 violated (m={m})")
    if n < 0:
        raise RangeError(f"n >= 0 violated (n={n})")
    if -alpha + m + n >= 0:
        raise RangeError(f"-alpha + m + n < 0 violated (value {-alpha + m + n:.6g})")
    lmax = lambda_max(alpha, m, n)
    if not 0 < lam < lmax:
        raise RangeError(f"0 < lambda < lambda_max violated (lambda={lam}, lambda_max={lmax})")
    return ParamSet(alpha, m, n, lam)


@dataclass(frozen=True)
class Exponents:
    D: float
    a0: float
    a1: float
    b0: float
    b1: float
    c0: float
    c1: float
    d0: float
    d1: float
    a: float = field(init=False)
    b: float = field(init=False)
    c: float = field(init=False)
    d: float = field(init=False)
    lam: float = 0.0

    def __post_init__(self):
        lam = self.lam
        object.__setattr__(self, "a", self.a0 + self.a1 * lam)
        object.__setattr__(self, "b", self.b0 + self.b1 * lam)
        object.__setattr__(self, "c", self.c0 + self.c1 * lam)
        object.__setattr__(self, "d", self.d0 + self.d1 * lam)


def exponents(P: ParamSet) -> Exponents:
    al, m, n = P.alpha, P.m, P.n
    D = 1 + 2 * al - m - n
    return Exponents(
        D=D,
        a0=(2 + 2 * al - n) / D,
        a1=2 * (1 + al) / D,
        b0=(1 + m) / D,
        b1=(1 + m + n) / D,
        c0=2 * (1 + m) / D,
        c1=2 * (1 + m + n) / D,
        d0=(-2 * al + 2 * m + n) / D,
        d1=2 * (-al + m + n) / D,
        lam=P.lam,
    )


def lambda_from_data(U0, Gamma0, alpha, m, n) -> float:
    """Rate implied by the boundary data through ``U0 = a * Gamma0``."""
    if U0 <= 0 or Gamma0 <= 0:
        raise RangeError("U0 and Gamma0 must be positive")
    D = 1 + 2 * alpha - m - n
    a0 = (2 + 2 * alpha - n) / D
    lam = (U0 / Gamma0 - a0) * D / (2 * (1 + alpha))
    lmax = lambda_max(alpha, m, n)
    if not 0 < lam < lmax:
        hi = a0 + 2 * (1 + alpha) * lmax / D
        raise RangeError(f"U0/Gamma0 = {U0 / Gamma0:.6g} outside ({a0:.6g}, {hi:.6g})")
    return lam


# equilibria on the invariant line p = 0

def m0_point(P: ParamSet) -> np.ndarray:
    E = exponents(P)
    r0 = E.a
    s0 = (1 + P.m + P.n) / (1 + P.alpha) - P.n / ((1 + P.alpha) * r0)
    return np.array([0.0, 0.0, r0, s0])


def m1_point(P: ParamSet) -> np.ndarray:
    E = exponents(P)
    r1 = E.a - (1 + P.alpha) * P.lam / (P.alpha - P.m - P.n)
    s1 = (1 + P.m + P.n) / (1 + P.alpha) - P.n / ((1 + P.alpha) * r1)
    return np.array([0.0, 1.0, r1, s1])


# slow system

def _coeffs(P: ParamSet):
    E = exponents(P)
    al, m, n, lam = P.alpha, P.m, P.n, P.lam
    k = (al - m - n) / (lam * (1 + al))
    S1 = (1 + m + n) / (1 + al)
    return E, k, S1


def slow_field(y, P: ParamSet) -> np.ndarray:
    """Right-hand side of the slow system; r-component divided by n."""
    if P.n == 0:
        raise DegenerateError("slow_field needs n > 0; use reduced_field or layer_field")
    p, q, r, s = np.asarray(y, dtype=float)
    E, k, S1 = _coeffs(P)
    al, n, lam = P.alpha, P.n, P.lam
    a, b = E.a, E.b
    lpr = lam * p * r
    G = k * (r - a) + lpr + q
    ds = s - S1
    return np.array([
        p * ((r - a) / lam + 2 - lpr - q),
        q * (1 - lpr - q) + b * p * r,
        (r / n) * (G + (al / lam) * r * ds + n * al / (lam * (1 + al))),
        s * (G - r * ds / lam - n / (lam * (1 + al))),
    ])


def slow_jacobian(y, P: ParamSet) -> np.ndarray:
    """Exact Jacobian of :func:`slow_field`, shape ``(4, 4, ...)``."""
    if P.n == 0:
        raise DegenerateError("slow_jacobian needs n > 0")
    p, q, r, s = np.asarray(y, dtype=float)
    E, k, S1 = _coeffs(P)
    al, n, lam = P.alpha, P.n, P.lam
    a, b = E.a, E.b
    lpr = lam * p * r
    G = k * (r - a) + lpr + q
    ds = s - S1
    HR = G + (al / lam) * r * ds + n * al / (lam * (1 + al))
    HS = G - r * ds / lam - n / (lam * (1 + al))
    zero = np.zeros_like(p)
    one = np.ones_like(p)
    J = np.array([
        [(r - a) / lam + 2 - lpr - q - lpr, -p, p * (1 / lam - lam * p), zero],
        [-lam * r * q + b * r, 1 - lpr - 2 * q, -lam * p * q + b * p, zero],
        [(r / n) * lam * r, (r / n) * one,
         HR / n + (r / n) * (k + lam * p + (al / lam) * ds), (r / n) * (al / lam) * r],
        [s * lam * r, s * one, s * (k + lam * p - ds / lam), HS - s * r / lam],
    ])
    return J


# reduced (n -> 0) system

def _reduced_coeffs(P: ParamSet):
    P0 = P.with_n(0.0)
    E0 = exponents(P0)
    al, m, lam = P.alpha, P.m, P.lam
    k0 = (al - m) / (lam * (1 + al))
    sstar = (1 + m) / (1 + al)
    return E0, k0, sstar


def r_hat(p, q, s, P: ParamSet, floor: float = GRAPH_FLOOR):
    """Graph of the critical manifold, evaluated with n = 0 coefficients."""
    E0, k0, sstar = _reduced_coeffs(P)
    p, q, s = (np.asarray(v, dtype=float) for v in (p, q, s))
    den = k0 + P.lam * p + (P.alpha / P.lam) * (s - sstar)
    if np.any(np.abs(den) < floor):
        raise SingularGraphError(f"r_hat denominator below {floor}")
    return (k0 * E0.a - q) / den


def implicit_residual(p, q, r, s, P: ParamSet):
    """Left-hand side of the implicit graph relation (zero on the graph)."""
    E0, k0, sstar = _reduced_coeffs(P)
    return k0 * (r - E0.a) + P.lam * p * r + q + (P.alpha / P.lam) * r * (s - sstar)


def reduced_field(y, P: ParamSet, floor: float = GRAPH_FLOOR) -> np.ndarray:
    """Restricted reduced flow in (p, q, s) with r = r_hat(p, q, s)."""
    p, q, s = np.asarray(y, dtype=float)
    E0, k0, sstar = _reduced_coeffs(P)
    al, lam = P.alpha, P.lam
    rh = r_hat(p, q, s, P, floor)
    ds = s - sstar
    return np.array([
        p * (E0.D / (lam * (1 + al)) * (rh - E0.a0) + (al / lam) * rh * ds),
        q * (1 - lam * p * rh - q) + E0.b * p * rh,
        -((1 + al) / lam) * rh * s * ds,
    ])


def reduced_full_field(y, P: ParamSet) -> np.ndarray:
    """The unreduced n = 0 slow equations for (p, q, s) at an arbitrary r."""
    p, q, r, s = np.asarray(y, dtype=float)
    E0, k0, sstar = _reduced_coeffs(P)
    lam = P.lam
    return np.array([
        p * ((r - E0.a) / lam + 2 - lam * p * r - q),
        q * (1 - lam * p * r - q) + E0.b * p * r,
        s * (k0 * (r - E0.a) + lam * p * r + q - r * (s - sstar) / lam),
    ])


def layer_field(y, P: ParamSet):
    """Fast r-equation g(p, q, r, s) of the layer problem (n = 0 coefficients)."""
    p, q, r, s = np.asarray(y, dtype=float)
    return r * implicit_residual(p, q, r, s, P)


def layer_dgdr(y, P: ParamSet):
    p, q, r, s = np.asarray(y, dtype=float)
    E0, k0, sstar = _reduced_coeffs(P)
    lin = k0 + P.lam * p + (P.alpha / P.lam) * (s - sstar)
    return implicit_residual(p, q, r, s, P) + r * lin


def layer_dgdr_bound(P: ParamSet, eps: float) -> float:
    """Lower bound for dg/dr on the critical manifold K."""
    r1 = m1_point(P.with_n(0.0))[2]
    return 0.5 * min(1.0, r1) * ((P.alpha - P.m) / (2 * P.lam * (1 + P.alpha)) - P.lam * eps)


def in_sector(y) -> bool:
    p, q, r, s = y
    return bool(p >= 0 and q >= 0 and r > 0 and s > 0)
