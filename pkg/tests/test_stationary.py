import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dufresne import laws
from dufresne.errors import DomainError, UnsupportedError
from dufresne.laws import Law
from dufresne.stationary import ChainSpec, StationaryModel, ode_spec, phi_taylor, rho_roots, solve_stationary
from oracles import chain_moments_exact

alpha = st.floats(0.2, 5.0)


def test_chainspec_validation():
    with pytest.raises(DomainError):
        ChainSpec((), 1)
    with pytest.raises(DomainError):
        ChainSpec((1.0, -1.0), 1)
    with pytest.raises(DomainError):
        ChainSpec((1.0,), 0)
    spec = ChainSpec([1, 2], 1)
    assert spec.alphas == (1.0, 2.0) and spec.k == 2
    assert spec.mean_log_a == pytest.approx(-1.5)
    assert spec.a_moment(2) == pytest.approx(1 / 3 * 2 / 4)
    assert ChainSpec.from_dict(spec.to_dict()) == spec


@given(alpha, alpha)
def test_rho_is_root(a, b):
    rho, rho_plus = rho_roots(a, b)
    assert abs(rho * rho - rho - a * b) <= 1e-14 * max(1.0, a * b)
    assert rho < 0 < 1 < rho_plus
    assert rho + rho_plus == pytest.approx(1.0, abs=1e-14)


def test_k1_u1_is_gamma():
    model = solve_stationary(ChainSpec((2.5,), 1))
    assert model.law == Law((2.5,), ())


def test_k2_u1_law():
    model = solve_stationary(ChainSpec((1, 1), 1))
    assert model.law == Law((1, 1), (3,))
    exact = chain_moments_exact((1, 1), 1, 4)
    for n in range(1, 5):
        assert laws.moment(model.law, n) == pytest.approx(float(exact[n]), rel=1e-14)


def test_k4_u1_complex_law():
    model = solve_stationary(ChainSpec((1, 1, 1, 1), 1))
    exact = [Fraction(1, 15), Fraction(2, 75), Fraction(54, 2125), Fraction(1152, 27625)]
    for n, m in enumerate(exact, 1):
        assert laws.moment(model.law, n) == pytest.approx(float(m), rel=1e-13)
    assert "validity" in model.extras


@settings(max_examples=40, deadline=None)
@given(st.lists(alpha, min_size=1, max_size=6))
def test_u1_law_matches_exact_moments(alphas):
    model = solve_stationary(ChainSpec(alphas, 1), diagnostics=False)
    exact = chain_moments_exact([Fraction(a) for a in alphas], 1, 12)
    for n in range(1, 13):
        assert laws.moment(model.law, n) == pytest.approx(float(exact[n]), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(alpha, alpha)
def test_u2_law_matches_exact_moments(a, b):
    model = solve_stationary(ChainSpec((a, b), 2), diagnostics=False)
    exact = chain_moments_exact([Fraction(a), Fraction(b)], 2, 12)
    for n in range(1, 13):
        assert laws.moment(model.law, n) == pytest.approx(float(exact[n]), rel=1e-9)
    if abs(min(a, b) + 1 - max(a, b)) > 1e-9:
        assert model.extras["samplable"] == (min(a, b) + 1 > max(a, b))


def test_u2_samplable_flag():
    assert solve_stationary(ChainSpec((1.0, 1.5), 2)).extras["samplable"]
    model = solve_stationary(ChainSpec((0.3, 4.0), 2))
    assert not model.extras["samplable"] and not model.extras["proper"]
    assert model.diagnostics[0].status == "pass"


def test_no_closed_form_case():
    model = solve_stationary(ChainSpec((1.0, 2.0), 3))
    assert model.law is None
    exact = chain_moments_exact((1, 2), 3, 45)
    assert model.moments[5] == pytest.approx(float(exact[5]), rel=1e-13)
    # Phi falls back to the moment series
    series = math.fsum((-0.3) ** n * float(exact[n]) / math.factorial(n) for n in range(46))
    assert model.laplace(0.3) == pytest.approx(series, rel=1e-12)


def test_phi_taylor_matches_law():
    model = solve_stationary(ChainSpec((1.3, 0.8), 1))
    s = np.array([0.05, 0.2, 0.45])
    val, err = phi_taylor(model.moments, s)
    np.testing.assert_allclose(val, laws.laplace(model.law, s), rtol=1e-12)
    assert np.all(err < 1e-12)


def test_phi_taylor_guards():
    m = [1.0] * 40
    with pytest.raises(DomainError):
        phi_taylor(m[:10], 0.1)
    with pytest.raises(DomainError):
        phi_taylor(m, 0.6)


def test_model_round_trip():
    model = solve_stationary(ChainSpec((1.2, 0.7, 1.5), 1))
    back = StationaryModel.from_dict(model.to_dict())
    assert back.spec == model.spec and back.law == model.law
    assert back.moments == model.moments


def test_ode_spec_scope():
    assert ode_spec(ChainSpec((1, 2), 3.5)).order == 2
    assert ode_spec(ChainSpec((1, 1, 1, 1), 2)).order == 4
    with pytest.raises(UnsupportedError):
        ode_spec(ChainSpec((1, 1, 1), 3))


def test_ode_k1_is_gamma_equation():
    # Phi = (1+s)^-a solves (1+s) Phi' + a Phi = 0
    ode = ode_spec(ChainSpec((2.5,), 1))
    s = 0.3
    phi = (1 + s) ** -2.5
    dphi = -2.5 * (1 + s) ** -3.5
    assert ode.residual([phi, dphi], s) < 1e-15
