import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import param_sets
from shearloc.errors import DegenerateError, RangeError, SingularGraphError
from shearloc.model import (ParamSet, exponents, implicit_residual, in_sector, lambda_from_data,
                            lambda_max, layer_dgdr, layer_field, m0_point, m1_point, r_hat,
                            reduced_field, reduced_full_field, slow_field, slow_jacobian,
                            validate_params)

SET1 = validate_params(1.572, 0.02246, 0.025, 0.5 * lambda_max(1.572, 0.02246, 0.025))


def test_lambda_max_value():
    # frozen from an independent hand evaluation of 2 (alpha - m - n)(1 + m) / (1 + m + n)^2
    assert lambda_max(1.572, 0.02246, 0.025) == pytest.approx(2.841451525923458, rel=1e-14)


@given(param_sets())
def test_exponent_identities(P):
    E = exponents(P)
    assert E.a == pytest.approx(E.b + P.lam + 1, rel=1e-13)
    assert E.c == pytest.approx(2 * E.b, rel=1e-13)
    assert E.d == pytest.approx(E.b - 1 - P.lam, rel=1e-12, abs=1e-13)
    assert E.d == pytest.approx(-P.alpha * E.c + P.m * E.a + P.n * (E.a - 1), rel=1e-12, abs=1e-13)


@given(param_sets())
def test_equilibria_are_zeros(P):
    for pt in (m0_point(P), m1_point(P)):
        F = slow_field(pt, P) * np.array([1, 1, P.n, 1])
        assert np.max(np.abs(F)) < 1e-12
        assert in_sector(pt)


@given(param_sets())
def test_m0_product(P):
    r0, s0 = m0_point(P)[2:]
    assert r0 * s0 == pytest.approx(exponents(P).c, rel=1e-13)


@given(param_sets(), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.5, 5.0), st.floats(0.1, 1.0))
@settings(max_examples=50)
def test_jacobian_matches_finite_differences(P, p, q, r, s):
    y = np.array([p, q, r, s])
    J = slow_jacobian(y, P)
    h = 1e-6
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        fd = (slow_field(y + e, P) - slow_field(y - e, P)) / (2 * h)
        scale = 1.0 + np.abs(J[:, j]) + np.abs(slow_field(y, P))
        assert np.all(np.abs(fd - J[:, j]) <= 1e-6 * scale)


def test_field_broadcasts():
    Y = np.random.default_rng(0).uniform(0.1, 1.0, (4, 7))
    F = slow_field(Y, SET1)
    assert F.shape == (4, 7)
    np.testing.assert_allclose(F[:, 3], slow_field(Y[:, 3], SET1))
    assert slow_jacobian(Y, SET1).shape == (4, 4, 7)


@pytest.mark.parametrize("args", [
    (0.0, 0.1, 0.01, 0.1),      # alpha = 0
    (1.0, -1.0, 0.01, 0.1),     # m <= -1
    (1.0, 0.1, -0.01, 0.1),     # n < 0
    (0.1, 0.1, 0.01, 0.1),      # -alpha + m + n >= 0
    (1.0, 0.1, 0.01, 0.0),      # lambda = 0
    (1.0, 0.1, 0.01, 10.0),     # lambda >= lambda_max
    (float("nan"), 0.1, 0.01, 0.1),
])
def test_validate_rejects(args):
    with pytest.raises(RangeError):
        validate_params(*args)


def test_alpha_zero_opt_in():
    P = validate_params(0.0, -0.4, 0.025, 0.1, allow_alpha_zero=True)
    assert P.alpha == 0.0


def test_from_dict():
    P = ParamSet.from_dict({"alpha": 1.572, "m": 0.02246, "n": 0.025, "lambda_frac": 0.5})
    assert P == SET1
    with pytest.raises(RangeError):
        ParamSet.from_dict({"alpha": 1.0, "m": 0.1})
    with pytest.raises(RangeError):
        ParamSet.from_dict({"alpha": 1.0, "m": 0.1, "n": 0.01})


@given(param_sets())
def test_lambda_from_data_round_trip(P):
    a = exponents(P).a
    assert lambda_from_data(a * 2.0, 2.0, P.alpha, P.m, P.n) == pytest.approx(P.lam, rel=1e-11)


def test_lambda_from_data_range():
    with pytest.raises(RangeError):
        lambda_from_data(1.0, 1.0, 1.572, 0.02246, 0.025)
    with pytest.raises(RangeError):
        lambda_from_data(-1.0, 1.0, 1.572, 0.02246, 0.025)


def test_slow_field_needs_n():
    with pytest.raises(DegenerateError):
        slow_field(np.ones(4), SET1.with_n(0.0))


@given(st.floats(0.0, 0.5), st.floats(0.0, 1.0), st.floats(0.3, 0.9))
def test_r_hat_lies_on_graph(p, q, s):
    P = SET1.with_n(0.0)
    try:
        r = r_hat(p, q, s, P)
    except SingularGraphError:
        return
    assert abs(implicit_residual(p, q, r, s, P)) < 1e-9 * (1 + abs(r))
    assert abs(layer_field(np.array([p, q, r, s]), P)) < 1e-9 * (1 + r * r)


def test_reduced_field_is_restriction():
    P = SET1.with_n(0.0)
    rng = np.random.default_rng(3)
    for _ in range(20):
        p, q, s = rng.uniform(0, 0.3), rng.uniform(0, 1), rng.uniform(0.4, 0.8)
        r = r_hat(p, q, s, P)
        np.testing.assert_allclose(reduced_field(np.array([p, q, s]), P),
                                   reduced_full_field(np.array([p, q, r, s]), P), rtol=1e-10, atol=1e-12)


def test_layer_stability_at_m1():
    pt = m1_point(SET1.with_n(0.0))
    assert layer_dgdr(pt, SET1.with_n(0.0)) > 0


def test_singular_graph():
    P = SET1.with_n(0.0)
    E0 = exponents(P)
    k0 = (P.alpha - P.m) / (P.lam * (1 + P.alpha))
    s_bad = (1 + P.m) / (1 + P.alpha) - k0 * P.lam / P.alpha
    with pytest.raises(SingularGraphError):
        r_hat(0.0, 0.5, s_bad, P)
    assert E0.a > 0
