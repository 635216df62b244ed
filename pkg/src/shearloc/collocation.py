"""Piecewise-polynomial collocation on a non-uniform mesh.

Each mesh interval carries a degree-``ncol`` polynomial represented by its
values at ``ncol + 1`` equispaced points (shared at interval ends), and the
ODE is imposed at the ``ncol`` Gauss-Legendre points.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp


@lru_cache(maxsize=16)
def _tables(ncol: int):
    tau = np.linspace(0.0, 1.0, ncol + 1)
    g, _ = np.polynomial.legendre.leggauss(ncol)
    g = 0.5 * (g + 1.0)
    L = _lagrange(tau, g)
    Ld = _lagrange_deriv(tau, g)
    return tau, g, L, Ld


def _lagrange(tau, x):
    x = np.atleast_1d(x)
    out = np.ones((len(x), len(tau)))
    for j, tj in enumerate(tau):
        for k, tk in enumerate(tau):
            if k != j:
                out[:, j] *= (x - tk) / (tj - tk)
    return out


def _lagrange_deriv(tau, x):
    x = np.atleast_1d(x)
    out = np.zeros((len(x), len(tau)))
    for j, tj in enumerate(tau):
        for i, ti in enumerate(tau):
            if i == j:
                continue
            term = np.full(len(x), 1.0 / (tj - ti))
            for k, tk in enumerate(tau):
                if k != j and k != i:
                    term *= (x - tk) / (tj - tk)
            out[:, j] += term
    return out


@dataclass
class Collocation:
    nodes: np.ndarray  # mesh nodes, N + 1
    ncol: int = 4

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("mesh nodes must increase")
        self.tau, self.g, self.L, self.Ld = _tables(self.ncol)

    @property
    def N(self) -> int:
        return len(self.nodes) - 1

    @property
    def npts(self) -> int:
        return self.N * self.ncol + 1

    @property
    def h(self):
        return np.diff(self.nodes)

    def points(self) -> np.ndarray:
        """Locations of the representation points."""
        h = self.h
        inner = self.nodes[:-1, None] + h[:, None] * self.tau[None, :-1]
        return np.concatenate([inner.ravel(), self.nodes[-1:]])

    def gauss_points(self) -> np.ndarray:
        return (self.nodes[:-1, None] + self.h[:, None] * self.g[None, :]).ravel()

    def _blocks(self, Y):
        idx = np.arange(self.N)[:, None] * self.ncol + np.arange(self.ncol + 1)[None, :]
        return Y[idx]  # (N, ncol+1, dim)

    def evaluate(self, Y, x, deriv: bool = False):
        """Evaluate the piecewise polynomial (or its derivative) at ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        i = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, self.N - 1)
        t = (x - self.nodes[i]) / self.h[i]
        blocks = self._blocks(Y)[i]  # (M, ncol+1, dim)
        if deriv:
            W = _lagrange_deriv(self.tau, t) / self.h[i][:, None]
        else:
            W = _lagrange(self.tau, t)
        return np.einsum("mj,mjd->md", W, blocks)

    def residual(self, Y, f):
        """Collocation residual, shape (N * ncol * dim,).

        ``f`` maps an array of states of shape (dim, M) to derivatives (dim, M).
        """
        B = self._blocks(Y)
        X = np.einsum("gj,ijd->igd", self.L, B)
        dX = np.einsum("gj,ijd->igd", self.Ld, B) / self.h[:, None, None]
        dim = Y.shape[1]
        F = f(X.reshape(-1, dim).T).T.reshape(X.shape)
        return (dX - F).ravel()

    def jacobian(self, Y, jac):
        """Sparse derivative of :meth:`residual` with respect to ``Y``.

        ``jac`` maps states (dim, M) to Jacobians (dim, dim, M).
        """
        N, nc = self.N, self.ncol
        dim = Y.shape[1]
        B = self._blocks(Y)
        X = np.einsum("gj,ijd->igd", self.L, B)
        Jf = jac(X.reshape(-1, dim).T)  # (dim, dim, N*nc)
        Jf = np.moveaxis(Jf, -1, 0).reshape(N, nc, dim, dim)
        # dres[i,g,a]/dY[i*nc+j, b] = Ld[g,j]/h_i delta_ab - L[g,j] Jf[i,g,a,b]
        eye = np.eye(dim)
        vals = (self.Ld[None, :, :, None, None] / self.h[:, None, None, None, None]) * eye[None, None, None]
        vals = vals - self.L[None, :, :, None, None] * Jf[:, :, None, :, :]
        # vals shape (N, nc, nc+1, dim, dim)
        i, g, j, a, b = np.meshgrid(np.arange(N), np.arange(nc), np.arange(nc + 1),
                                    np.arange(dim), np.arange(dim), indexing="ij")
        rows = ((i * nc + g) * dim + a).ravel()
        cols = ((i * nc + j) * dim + b).ravel()
        shape = (N * nc * dim, self.npts * dim)
        return sp.csr_matrix((vals.ravel(), (rows, cols)), shape=shape)

    def defect(self, Y, f, samples: int = 3):
        """Scaled ODE defect at non-collocation points, per interval."""
        t = np.linspace(0.1, 0.9, samples)
        L = _lagrange(self.tau, t)
        Ld = _lagrange_deriv(self.tau, t)
        B = self._blocks(Y)
        X = np.einsum("gj,ijd->igd", L, B)
        dX = np.einsum("gj,ijd->igd", Ld, B) / self.h[:, None, None]
        dim = Y.shape[1]
        F = f(X.reshape(-1, dim).T).T.reshape(X.shape)
        scale = 1.0 + np.abs(F)
        return np.max(np.abs(dX - F) / scale, axis=(1, 2)) * self.h

    def remesh(self, Y, N_new: int | None = None, monitor=None):
        """Equidistribute ``monitor`` (default: arclength) over ``N_new`` intervals."""
        N_new = N_new or self.N
        pts = self.points()
        if monitor is None:
            d = np.linalg.norm(np.diff(Y, axis=0), axis=1)
            dens = np.concatenate([[0.0], np.cumsum(d + 1e-3 * np.diff(pts))])
        else:
            dens = np.concatenate([[0.0], np.cumsum(monitor)])
            if len(dens) != len(pts):
                raise ValueError("monitor must have one entry per point gap")
        target = np.linspace(0.0, dens[-1], N_new + 1)
        new_nodes = np.interp(target, dens, pts)
        new_nodes[0], new_nodes[-1] = self.nodes[0], self.nodes[-1]
        new = Collocation(new_nodes, self.ncol)
        return new, self.evaluate(Y, new.points())
