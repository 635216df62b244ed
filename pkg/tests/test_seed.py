import numpy as np
import pytest

from shearloc.errors import RangeError
from shearloc.model import lambda_max, m0_point, m1_point, slow_field, validate_params
from shearloc.seed import (exact_seed, exact_seed_mp, extract_end_data, numeric_seed_r, seed_qr,
                           seed_rhs_residual, plane_orbit)
from shearloc.spectral import spectrum_M0


def seed_params(n, m=-0.4):
    return validate_params(0.0, m, n, 0.5 * lambda_max(0.0, m, n), allow_alpha_zero=True)


@pytest.mark.parametrize("k", [40, 80, 100])
def test_closed_form_residual(k):
    P = seed_params(1.0 / k)
    eta = np.linspace(-10, 10, 2001)
    rq, rr = seed_rhs_residual(eta, k, P)
    assert np.max(np.abs(rq)) < 1e-12
    assert np.max(np.abs(rr)) < 1e-10


@pytest.mark.parametrize("k", [40, 100])
@pytest.mark.parametrize("eta", [-8.0, -1.0, 0.0, 3.0, 9.5])
def test_binomial_form_matches_sum(k, eta):
    P = seed_params(1.0 / k)
    _, _, r, _ = exact_seed(np.array([eta]), k, P)
    assert r[0] == pytest.approx(exact_seed_mp(eta, k, P), rel=1e-12)


@pytest.mark.parametrize("k", [40, 80])
def test_numeric_r_agrees_with_closed_form(k):
    P = seed_params(1.0 / k)
    eta = np.linspace(-10, 10, 101)
    _, _, r, _ = exact_seed(eta, k, P)
    np.testing.assert_allclose(numeric_seed_r(eta, P), r, rtol=1e-8)


def test_seed_limits():
    P = seed_params(0.025)
    _, q, r, _ = exact_seed(np.array([-40.0, 40.0]), 40, P)
    assert r[0] == pytest.approx(m0_point(P)[2], rel=1e-12)
    assert r[1] == pytest.approx(m1_point(P)[2], rel=1e-10)
    assert q[0] < 1e-15 and q[1] == pytest.approx(1.0)


def test_seed_needs_alpha_zero():
    P = validate_params(1.0, 0.1, 0.025, 0.3)
    with pytest.raises(RangeError):
        exact_seed(np.zeros(1), 40, P)
    with pytest.raises(RangeError):
        exact_seed(np.zeros(1), 41, seed_params(0.025))


def test_seed_qr_without_integer_k():
    P = seed_params(0.03)
    q, r = seed_qr(np.array([0.0]), P)
    assert 0 < q[0] < 1 and r[0] > 0


def test_plane_orbit_boundary_data():
    P = seed_params(0.025)
    o = plane_orbit(P, 10.0, 1e-4)
    X02 = spectrum_M0(P).unit_vectors()[:, 1]
    # the seed sits on the curved manifold: agreement with the chord is O(eps0^2)
    np.testing.assert_allclose(o.start - m0_point(P), 1e-4 * X02, atol=1e-8)
    assert np.max(np.abs(o.end - m1_point(P))) < 1e-3
    assert np.all(o.states[:, 0] == 0.0)
    # the orbit solves the slow system
    d = np.gradient(o.states, o.mesh, axis=0, edge_order=2)
    F = slow_field(o.states.T, P).T
    assert np.max(np.abs(d[5:-5] - F[5:-5])) < 1e-3
    c = extract_end_data(o)
    assert abs(c) < 1e-3 and o.boundary.eps1 > 0
