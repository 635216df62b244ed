import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shearloc.collocation import Collocation


@pytest.mark.parametrize("ncol", [2, 3, 4, 5])
def test_polynomials_are_reproduced(ncol):
    col = Collocation(np.array([0.0, 0.3, 1.0, 1.7]), ncol)
    x = col.points()
    Y = np.column_stack([x ** ncol, 1 + x])
    xs = np.linspace(0, 1.7, 23)
    np.testing.assert_allclose(col.evaluate(Y, xs)[:, 0], xs ** ncol, atol=1e-12)
    np.testing.assert_allclose(col.evaluate(Y, xs, deriv=True)[:, 0], ncol * xs ** (ncol - 1), atol=1e-10)


def test_exact_solution_has_small_residual():
    col = Collocation(np.linspace(0, 1, 41), 4)
    x = col.points()
    Y = np.exp(-x)[:, None]
    res = col.residual(Y, lambda Z: -Z)
    assert np.max(np.abs(res)) < 1e-6


def test_residual_error_order():
    errs = []
    for N in (10, 20):
        col = Collocation(np.linspace(0, 1, N + 1), 4)
        Y = np.exp(-col.points())[:, None]
        errs.append(np.max(np.abs(col.residual(Y, lambda Z: -Z))))
    assert np.log2(errs[0] / errs[1]) > 3.5


@given(st.integers(2, 5), st.integers(0, 2 ** 31 - 1))
def test_jacobian_matches_finite_differences(ncol, seed):
    rng = np.random.default_rng(seed)
    col = Collocation(np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0.05, 0.95, 3)])), ncol)
    Y = rng.normal(size=(col.npts, 2))
    f = lambda Z: np.array([Z[0] * Z[1], np.sin(Z[0])])  # noqa: E731
    jac = lambda Z: np.array([[Z[1], Z[0]], [np.cos(Z[0]), 0 * Z[0]]])  # noqa: E731
    J = col.jacobian(Y, jac).toarray()
    h = 1e-6
    for i in rng.choice(Y.size, 6, replace=False):
        E = np.zeros(Y.size)
        E[i] = h
        E = E.reshape(Y.shape)
        fd = (col.residual(Y + E, f) - col.residual(Y - E, f)) / (2 * h)
        np.testing.assert_allclose(J[:, i], fd, atol=1e-6 * (1 + np.abs(fd).max()))


def test_nodes_must_increase():
    with pytest.raises(ValueError):
        Collocation(np.array([0.0, 1.0, 0.5]))


def test_remesh_keeps_ends():
    col = Collocation(np.linspace(-3, 3, 31), 4)
    Y = np.tanh(4 * col.points())[:, None]
    out = col.remesh(Y, 20)
    new = out[0] if isinstance(out, tuple) else out
    nodes = new.nodes if hasattr(new, "nodes") else np.asarray(new)
    assert nodes[0] == -3 and nodes[-1] == 3
