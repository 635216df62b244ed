import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SETS, param_sets
from shearloc.errors import DomainError, ExtrapolationError, RangeError, WindowError
from shearloc.model import exponents, lambda_max, validate_params
from shearloc.reconstruct import (FIELDS, asymptotic_rates, boundary_values, curvatures_at_origin,
                                  measure_growth, measure_slopes, orbit_from_profiles,
                                  pqrs_from_tilde, profiles_from_orbit, snapshot, snapshots,
                                  tail_window, tilde_from_pqrs)
from shearloc.seed import plane_orbit

pos = st.floats(1e-3, 10.0)


@given(param_sets(), pos, pos, pos, pos)
def test_tilde_round_trip(P, p, q, r, s):
    Y = np.array([p, q, r, s])
    g, v, th, sg, u = tilde_from_pqrs(Y, P)
    np.testing.assert_allclose(pqrs_from_tilde(g, v, th, sg, P), Y, rtol=1e-9)
    # the constitutive relation holds identically in the tilde variables
    assert sg == pytest.approx(th ** -P.alpha * g ** P.m * u ** P.n, rel=1e-10)
    assert p == pytest.approx(g / sg, rel=1e-12)


def test_tilde_domain():
    P = validate_params(1.572, 0.02246, 0.025, 1.0)
    with pytest.raises(DomainError):
        tilde_from_pqrs(np.array([0.0, 0.5, 1.0, 0.5]), P)


@given(param_sets(), st.floats(0.1, 10.0))
def test_boundary_compatibility(P, G0):
    E = exponents(P)
    U0 = E.a * G0
    Th0, Sg0 = boundary_values(G0, U0, P)
    assert E.c * Th0 == pytest.approx(Sg0 * U0, rel=1e-12)
    assert Sg0 == pytest.approx(Th0 ** -P.alpha * G0 ** P.m * U0 ** P.n, rel=1e-12)


def test_boundary_rejects_mismatch():
    P = validate_params(1.572, 0.02246, 0.025, 1.0)
    with pytest.raises(RangeError):
        boundary_values(1.0, 1.0, P)


@given(param_sets())
def test_growth_gap_equals_rate(P):
    R = asymptotic_rates(P)
    assert R["gap"]["sigma"] == pytest.approx(P.lam, rel=1e-12)
    assert R["tail"]["Gamma"] == R["tail"]["U"] < 0
    assert R["tail"]["Sigma"] == 1.0


def test_seed_orbit_is_outside_domain():
    P0 = validate_params(0.0, -0.4, 0.025, 0.5 * lambda_max(0.0, -0.4, 0.025), allow_alpha_zero=True)
    with pytest.raises(DomainError):
        profiles_from_orbit(plane_orbit(P0), 1.0, kappa=1.0)


@pytest.fixture(scope="module")
def tables(heteroclinic_runs):
    return {k: profiles_from_orbit(r["final"].orbit, 1.0) for k, r in heteroclinic_runs.items()}


@pytest.mark.slow
def test_profiles_start_at_boundary_data(tables):
    for T in tables.values():
        for f in ("Gamma", "Theta", "Sigma", "U"):
            F = T.column(f)
            assert F[1] == pytest.approx(F[0], rel=1e-4)
        # V is odd, so it leaves the origin linearly
        slope = T.V[1:6] / T.xi[1:6]
        assert np.ptp(slope) < 1e-2 * slope[0]
        assert np.all(np.diff(T.xi) > 0)


@pytest.mark.slow
def test_profiles_round_trip(tables, heteroclinic_runs):
    for k, T in tables.items():
        o = heteroclinic_runs[k]["final"].orbit
        eta, states = orbit_from_profiles(T)
        np.testing.assert_allclose(eta, o.mesh, atol=1e-12)
        np.testing.assert_allclose(states, o.states, rtol=1e-10, atol=1e-300)


@pytest.mark.slow
def test_profiles_satisfy_constitutive_law(tables):
    for T in tables.values():
        lhs = T.Sigma[1:]
        rhs = T.Theta[1:] ** -T.params.alpha * T.Gamma[1:] ** T.params.m * T.U[1:] ** T.params.n
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10)


@pytest.mark.slow
def test_profile_shapes(tables):
    for T in tables.values():
        # Gamma, Theta, U peak at the origin and decay; Sigma has its minimum there
        assert np.argmax(T.Gamma) == 0 and np.argmax(T.U) == 0 and np.argmax(T.Theta) == 0
        assert np.argmin(T.Sigma) == 0
        # V rises to its plateau; the tail carries collocation-level ripple
        assert np.all(np.diff(T.V) >= -1e-6 * T.V.max())


@pytest.mark.slow
@pytest.mark.parametrize("h", [0.02, 0.05, 0.1, 0.2])
def test_curvature_signs_across_steps(tables, h):
    for T in tables.values():
        cv = curvatures_at_origin(T, h)
        assert cv["Gamma"] < 0 and cv["Theta"] < 0 and cv["U"] < 0 and cv["Sigma"] > 0


@pytest.mark.slow
def test_slope_window_errors(tables):
    T = tables[1]
    with pytest.raises(WindowError):
        measure_slopes(T, (1.0, 1.0001))
    sl = measure_slopes(T, tail_window(T, 0.25))
    assert set(sl) == set(FIELDS)


@pytest.mark.slow
def test_snapshot_symmetry_and_scaling(tables):
    T = tables[2]
    x = np.linspace(-1, 1, 41)
    s0 = snapshot(T, 0.0, x)
    np.testing.assert_allclose(s0.v, -s0.v[::-1], atol=1e-14)
    for f in ("u", "theta", "sigma", "gamma"):
        np.testing.assert_allclose(getattr(s0, f), getattr(s0, f)[::-1], rtol=1e-14)
    assert s0.gamma[20] == pytest.approx(T.Gamma0)
    E, lam = exponents(T.params), T.params.lam
    s = snapshot(T, 3.0, np.array([0.0]))
    assert s.u[0] == pytest.approx(4.0 ** (E.b + lam) * T.U0)
    assert s.sigma[0] == pytest.approx(4.0 ** E.d * T.Sigma0)


@pytest.mark.slow
def test_snapshot_tail_policy(tables):
    T = tables[1]
    far = np.array([0.0, 2.0 * T.xi[-1]])
    with pytest.raises(ExtrapolationError):
        snapshot(T, 0.0, far, tail=False)
    assert snapshot(T, 0.0, far, tail=True).tail_used
    with pytest.raises(RangeError):
        snapshot(T, -1.0, far)
    assert len(snapshots(T, (0.0, 1.0), np.linspace(-1, 1, 5))) == 2


@pytest.mark.slow
def test_stress_collapses_at_the_origin(tables):
    for T in tables.values():
        g = measure_growth(T, 1.0, np.exp(np.linspace(5, 8, 4) / T.params.lam) - 1, tail=False)
        assert g["origin"] < g["away"]
        assert g["origin"] == pytest.approx(exponents(T.params).d, rel=1e-10)
