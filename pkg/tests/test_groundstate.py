import math

import numpy as np
import pytest
from scipy.integrate import quad

from yamabe2.errors import ConfigurationError, ValidationError
from yamabe2.groundstate import (
    GNConfig,
    classify_shot,
    closed_form_alpha_n1,
    gn_alpha,
    gn_exponent,
    sech_profile,
    shoot_ground_state,
)


@pytest.fixture(scope="module")
def gs22():
    return shoot_ground_state(2, 2)


@pytest.fixture(scope="module")
def gs33():
    return shoot_ground_state(3, 3)


def test_alpha_22(gs22):
    assert gs22.alpha == pytest.approx(0.41343, abs=5e-4)
    # frozen reference from this solver at default settings
    assert gs22.alpha == pytest.approx(0.4134332757, abs=1e-8)


def test_alpha_33(gs33):
    assert gs33.alpha == pytest.approx(0.31257, abs=5e-4)
    assert gs33.alpha == pytest.approx(0.3125725844, abs=1e-8)


@pytest.mark.parametrize("gs_name", ["gs22", "gs33"])
def test_pohozaev_identities(gs_name, request):
    gs = request.getfixturevalue(gs_name)
    n, p = gs.n, gs.p
    D, Q, P = gs.dirichlet, gs.mass, gs.pnorm
    # energy identity from testing the equation with u
    assert D + Q == pytest.approx(P, rel=1e-7)
    # dilation identity
    assert (n - 2) / 2 * D + n / 2 * Q == pytest.approx(n / p * P, rel=1e-7)


def test_profile_is_positive_decreasing(gs22):
    assert np.all(gs22.u > 0)
    assert np.all(np.diff(gs22.u) < 0)
    assert gs22.max_residual <= 1e-8


@pytest.mark.parametrize("m", [2, 3, 4])
def test_n1_matches_closed_form(m):
    assert shoot_ground_state(m, 1).alpha == pytest.approx(closed_form_alpha_n1(m), abs=1e-10)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_closed_form_against_quadrature(m):
    # independent oracle: integrate the sech profile numerically
    p = gn_exponent(m, 1)
    u, du, _ = sech_profile(p)
    D = 2 * quad(lambda x: du(x) ** 2, 0, np.inf, epsabs=0, epsrel=1e-13)[0]
    Q = 2 * quad(lambda x: u(x) ** 2, 0, np.inf, epsabs=0, epsrel=1e-13)[0]
    P = 2 * quad(lambda x: u(x) ** p, 0, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert closed_form_alpha_n1(m) == pytest.approx(gn_alpha(D, Q, P, m, 1), rel=1e-11)


@pytest.mark.parametrize("p", [3.0, 4.0, 6.0, 10 / 3])
def test_sech_profile_solves_ode(p):
    u, _, d2u = sech_profile(p)
    x = np.linspace(-6, 6, 101)
    assert np.max(np.abs(d2u(x) - u(x) + u(x) ** (p - 1))) < 1e-12


def test_shot_classification_directions(gs22):
    # above the ground-state value the trajectory crosses zero, below it turns around
    assert classify_shot(gs22.u0 * 1.01, 2, 4.0)[0] == 1
    assert classify_shot(gs22.u0 * 0.99, 2, 4.0)[0] == -1


def test_gn_alpha_scale_invariance():
    # u -> c u(sigma x) in R^n scales D, Q, P so that the quotient is fixed
    m, n = 3, 2
    k = m + n
    p = 2 * k / (k - 2)
    D, Q, P = 1.3, 2.1, 0.7
    c, s = 1.9, 0.6
    D2 = c**2 * s ** (2 - n) * D
    Q2 = c**2 * s ** (-n) * Q
    P2 = c**p * s ** (-n) * P
    assert gn_alpha(D2, Q2, P2, m, n) == pytest.approx(gn_alpha(D, Q, P, m, n), rel=1e-13)


def test_to_dict(gs22):
    d = gs22.to_dict()
    assert set(d) >= {"alpha", "u0", "integrals", "config"}
    assert "profile" not in d
    assert len(gs22.to_dict(include_profile=True)["profile"]) == gs22.r.size


def test_validation():
    with pytest.raises(ValidationError):
        GNConfig(ode_tol=-1.0)
    with pytest.raises(ValidationError):
        gn_exponent(0, 2)
    with pytest.raises(ValidationError):
        closed_form_alpha_n1(1)
    with pytest.raises(ValidationError):
        shoot_ground_state(1, 1)


def test_short_integration_range_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        shoot_ground_state(2, 2, GNConfig(r_max=0.05))


def test_alpha_ordering_matches_dimension_trend():
    # the n = 1 constants increase with m
    vals = [closed_form_alpha_n1(m) for m in range(2, 7)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert math.isfinite(vals[-1])


def test_short_r_max_is_extended_automatically():
    assert shoot_ground_state(2, 2, GNConfig(r_max=3.0)).alpha == pytest.approx(0.41343, abs=5e-4)
