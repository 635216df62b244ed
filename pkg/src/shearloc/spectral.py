"""Equilibria of the slow system and closed-form linear stability data at M0, M1."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import subspace_angles

from .errors import ConvergenceError, DegenerateError
from .model import ParamSet, exponents, m0_point, m1_point, slow_field, slow_jacobian

DELTA_TOL = 1e-12
CASE_TOL = 1e-9
CONDITION_TOL = 1e-12


@dataclass
class Equilibrium:
    point: np.ndarray
    label: str
    in_sector: bool
    validity_condition: Optional[str] = None
    violating: tuple = ()

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "point": [float(v) for v in self.point],
            "in_sector": self.in_sector,
            "validity_condition": self.validity_condition,
            "violating": list(self.violating),
        }


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    generalized: bool = False
    case_tag: str = "M0"
    point: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def to_dict(self) -> dict:
        return {
            "case_tag": self.case_tag,
            "generalized": self.generalized,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            # column-major flattening
            "vectors": [float(v) for v in self.vectors.T.ravel()],
        }

    def unit_vectors(self) -> np.ndarray:
        return self.vectors / np.linalg.norm(self.vectors, axis=0)


# --- equilibria catalog -----------------------------------------------------

def _sector_violations(pt) -> tuple:
    names = "pqrs"
    bad = []
    for i, v in enumerate(pt):
        if (i < 2 and v < 0) or (i >= 2 and v <= 0):
            bad.append(names[i])
    return tuple(bad)


def equilibria(P: ParamSet, t: float = 1.0) -> list:
    """M0, M1 and every remaining equilibrium that exists for these parameters.

    Families with a free coordinate are represented by the member at ``t``.
    Conditional entries are included only when their condition holds to 1e-12.
    """
    al, m, n, lam = P.alpha, P.m, P.n, P.lam
    E = exponents(P)
    D, a, b = E.D, E.a, E.b
    out = [
        Equilibrium(m0_point(P), "M0", True),
        Equilibrium(m1_point(P), "M1", True),
    ]

    def add(label, pt, cond=None, holds=True):
        if not holds:
            return
        pt = np.array(pt, dtype=float)
        bad = _sector_violations(pt)
        out.append(Equilibrium(pt, label, not bad, cond, bad))

    def close(x, y):
        return abs(x - y) <= CONDITION_TOL * max(1.0, abs(y))

    add("B1", (0, 0, 0, 0))
    lam2 = (-2 * al + 2 * m + n) / (2 * (al - m - n))
    add("B2", (0, 0, 0, t), f"lambda = {lam2:.17g}", close(lam, lam2))
    mn = m + n
    if mn != 0:
        r3 = (n * al - a * (al - m - n)) / ((1 + al) * mn)
        add("B3", (0, 0, r3, 0))
    add("B4", (0, 1, 0, 0))
    lam5 = (2 * al - 2 * m - n) / (1 + m + n)
    add("B5", (0, 1, 0, t), f"lambda = {lam5:.17g}", close(lam, lam5))
    if mn != 0:
        add("B6", (0, 1, r3 + lam / mn, 0))
    lam7 = (2 + 2 * al - n) / (2 * (al - m - n))
    add("B7", (t, 0, 0, 0), f"lambda = {lam7:.17g}", close(lam, lam7))
    lam8 = (-2 - 2 * al + n) / (1 + m + n)
    add("B8", (t, 1, 0, 0), f"lambda = {lam8:.17g}", close(lam, lam8))
    lam9 = (-1 - m) / (1 + m + n)
    cond9 = abs(D) <= CONDITION_TOL and close(lam, lam9)
    add("B9", (t, 0, 0, t), f"D = 0 and lambda = {lam9:.17g}", cond9)
    add("B10", (t, 1, 0, t), f"D = 0 and lambda = {lam9:.17g}", cond9)
    # interior point off the invariant plane (p < 0)
    A0 = 2 + 2 * al - n
    add("B11", (
        -2 * (al - m - n) * (1 + m + n) / ((1 + m) * A0),
        2 * (al - m - n) * b / (1 + m),
        A0 / D,
        2 * (1 + m) / A0,
    ))
    if abs(1 - m - n) > 1e-14:
        A = 2 * al * (1 + m) / (D * (1 - m - n))
        f1 = A + 2 * (al - m - n) / D * lam
        g = (1 - m - n) / (lam * (1 + m))
        add("B12", (
            f1 * (A - (1 + m + n) / D * lam) * (1 - m - n) / (lam * (2 - n)) * g,
            f1 * b * g,
            (2 - n) / (1 - m - n),
            0,
        ))
    return out


# --- closed-form spectra -----------------------------------------------------

def _fast_block(r, s, P: ParamSet):
    lam, al, n = P.lam, P.alpha, P.n
    return np.array([
        [(r / n) * (1 - s - n / r) / lam, (r / n) * al * r / lam],
        [s * (1 - s) / lam, -s * r / lam],
    ])


def _quadratic_roots(B):
    """Roots of det(B - mu I) = 0, larger first, without cancellation."""
    T = B[0, 0] + B[1, 1]
    det = B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
    disc = T * T - 4 * det
    if disc < 0:
        raise DegenerateError("complex pair in the fast block")
    big = 0.5 * (T + np.copysign(np.sqrt(disc), T))
    if big == 0:
        return 0.0, 0.0
    other = det / big
    return max(big, other), min(big, other)


def _delta(mu, r, s, P: ParamSet):
    lam, al, n = P.lam, P.alpha, P.n
    return ((1 - s) / lam) * ((1 + al) * r / lam + mu / s) - (n / r) * (1 / lam + mu) * (r / lam + mu / s)


def _slow_column(mu, coef, r, s, P: ParamSet, name):
    """(y, z) completing a slow eigenvector whose (p, q) part gives ``coef = lam r w + x``."""
    lam, al, n = P.lam, P.alpha, P.n
    dl = _delta(mu, r, s, P)
    if abs(dl) < DELTA_TOL:
        raise DegenerateError(f"{name} vanishes (mu = {mu:.6g})")
    return -coef * ((1 + al) * r / lam + mu / s) / dl, -coef * (n / r) * (1 / lam + mu) / dl


def _fast_columns(mu_p, mu_m, r, s, P: ParamSet):
    lam = P.lam
    if abs((1 - s) / lam) < DELTA_TOL:
        raise DegenerateError("s = 1 decouples the fast block")
    den = r / lam + mu_p / s
    if abs(den) < DELTA_TOL:
        raise DegenerateError("fast eigenvector normalization vanishes")
    z3 = ((1 - s) / lam) / den
    y4 = (r / lam + mu_m / s) / ((1 - s) / lam)
    return z3, y4


def spectrum_M0(P: ParamSet) -> Spectrum:
    if P.n <= 0:
        raise DegenerateError("spectrum_M0 needs n > 0")
    E = exponents(P)
    pt = m0_point(P)
    r0, s0 = pt[2], pt[3]
    lam, b = P.lam, E.b
    mu_p, mu_m = _quadratic_roots(_fast_block(r0, s0, P))
    y1, z1 = _slow_column(2.0, (lam + b) * r0, r0, s0, P, "Delta1")
    y2, z2 = _slow_column(1.0, 1.0, r0, s0, P, "Delta2")
    z3, y4 = _fast_columns(mu_p, mu_m, r0, s0, P)
    S = np.array([
        [1.0, 0.0, 0.0, 0.0],
        [b * r0, 1.0, 0.0, 0.0],
        [y1, y2, 1.0, y4],
        [z1, z2, z3, 1.0],
    ])
    return Spectrum(np.array([2.0, 1.0, mu_p, mu_m]), S, False, "M0", pt)


def m1_case(P: ParamSet, tol: float = CASE_TOL) -> str:
    mu11 = -(1 + P.m + P.n) / (P.alpha - P.m - P.n)
    b = exponents(P).b
    if abs(mu11 + 1) <= tol and abs(b - P.lam) > tol:
        return "M1-case2"
    return "M1-case1"


def spectrum_M1(P: ParamSet, tol: float = CASE_TOL) -> Spectrum:
    if P.n <= 0:
        raise DegenerateError("spectrum_M1 needs n > 0")
    E = exponents(P)
    pt = m1_point(P)
    r1, s1 = pt[2], pt[3]
    lam, b = P.lam, E.b
    mu11 = -(1 + P.m + P.n) / (P.alpha - P.m - P.n)
    mu_p, mu_m = _quadratic_roots(_fast_block(r1, s1, P))
    tag = m1_case(P, tol)
    y2, z2 = _slow_column(-1.0, 1.0, r1, s1, P, "Delta4")
    z3, y4 = _fast_columns(mu_p, mu_m, r1, s1, P)
    if tag == "M1-case1":
        x1 = (b - lam) * r1 / (1 + mu11) if abs(mu11 + 1) > tol else 0.0
        y1, z1 = _slow_column(mu11, lam * r1 + x1, r1, s1, P, "Delta3")
        first = [1.0, x1, y1, z1]
        mu_first = mu11
    else:
        # (J + I) X = X12 with X = (w, 0, y, z)
        mu_first = -1.0
        w = 1.0 / ((b - lam) * r1)
        B = _fast_block(r1, s1, P) + np.eye(2)
        rhs = np.array([y2, z2]) - lam * r1 * w * np.array([r1 / P.n, s1])
        dB = B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
        if abs(_delta(-1.0, r1, s1, P)) < DELTA_TOL:
            raise DegenerateError("Delta3 vanishes in the defective case")
        y1 = (B[1, 1] * rhs[0] - B[0, 1] * rhs[1]) / dB
        z1 = (B[0, 0] * rhs[1] - B[1, 0] * rhs[0]) / dB
        first = [w, 0.0, y1, z1]
    S = np.array([
        [first[0], 0.0, 0.0, 0.0],
        [first[1], 1.0, 0.0, 0.0],
        [first[2], y2, 1.0, y4],
        [first[3], z2, z3, 1.0],
    ])
    return Spectrum(np.array([mu_first, -1.0, mu_p, mu_m]), S, tag == "M1-case2", tag, pt)


def column_residuals(spec: Spectrum, J: np.ndarray) -> np.ndarray:
    """Relative residual of each column: (J - mu) X, or (J - mu) X - X12 if generalized."""
    res = []
    scale = np.linalg.norm(J, 2)
    for j in range(4):
        X = spec.vectors[:, j]
        R = J @ X - spec.eigenvalues[j] * X
        if spec.generalized and j == 0:
            R = R - spec.vectors[:, 1]
        res.append(np.linalg.norm(R) / (scale * np.linalg.norm(X)))
    return np.array(res)


# --- numeric oracle ------------------------------------------------------------

def numeric_spectrum(J, cluster_tol: float = 1e-6):
    """Eigenvalues and invariant subspaces of a small dense matrix.

    Eigenvalues within ``cluster_tol`` (relative) are merged into one cluster
    represented by their mean.  Returns ``(eigenvalues, clusters)`` where each
    cluster is ``(mu, multiplicity, basis)`` with an orthonormal basis of the
    generalized eigenspace ``null((J - mu I)^k)``.
    """
    J = np.asarray(J, dtype=float)
    try:
        w = np.linalg.eigvals(J)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    order = np.argsort(-w.real)
    w = w[order]
    clusters = []
    used = np.zeros(len(w), bool)
    for i in range(len(w)):
        if used[i]:
            continue
        near = np.abs(w - w[i]) <= cluster_tol * max(1.0, abs(w[i]))
        near &= ~used
        used |= near
        mu = w[near].mean()
        k = int(near.sum())
        M = np.linalg.matrix_power(J - mu * np.eye(len(J)), k)
        try:
            _, _, Vh = np.linalg.svd(M)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(str(exc)) from exc
        basis = Vh[-k:].conj().T
        clusters.append((mu, k, basis))
    return w, clusters


def compare_with_oracle(spec: Spectrum, J) -> tuple:
    """Max relative eigenvalue error and max subspace angle against the oracle."""
    w, clusters = numeric_spectrum(J)
    closed = np.sort(spec.eigenvalues)[::-1]
    num = np.sort(w.real)[::-1]
    if np.max(np.abs(w.imag)) > 1e-8 * np.max(np.abs(w)):
        return np.inf, np.inf
    ev_err = np.max(np.abs(closed - num) / np.maximum(1.0, np.abs(closed)))
    ang = 0.0
    for mu, k, basis in clusters:
        cols = np.abs(spec.eigenvalues - mu.real) <= 1e-6 * max(1.0, abs(mu))
        if cols.sum() != k:
            return ev_err, np.inf
        ang = max(ang, float(np.max(subspace_angles(spec.vectors[:, cols], basis.real))))
    return ev_err, ang


def stable_projection(spec1: Spectrum, d: np.ndarray):
    """Split ``d`` in the S1 basis.  Returns (unstable coefficient, stable part)."""
    U = spec1.unit_vectors()
    c = np.linalg.solve(U, d)
    stable = d - c[2] * U[:, 2]
    return c[2], stable


def check_equilibria(P: ParamSet) -> float:
    """Largest field residual over the catalog (n > 0)."""
    return max(float(np.max(np.abs(slow_field(e.point, P)))) for e in equilibria(P))


def jacobians(P: ParamSet):
    return slow_jacobian(m0_point(P), P), slow_jacobian(m1_point(P), P)
