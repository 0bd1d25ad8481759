import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import ml_reference

from fracmix import special
from fracmix.errors import (
    BelowThresholdError,
    ConvergenceError,
    GammaPoleError,
    ParameterDomainError,
)

rhos = st.floats(0.2, 1.9)
mus = st.floats(0.5, 2.0)


def test_gamma_and_poles():
    assert special.gamma(5.0) == pytest.approx(24.0, rel=1e-15)
    assert special.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    with pytest.raises(GammaPoleError):
        special.gamma(-2.0)
    assert special.rgamma(-2.0) == 0.0


def test_digamma_values():
    assert special.digamma(1.0) == pytest.approx(-special.EULER_GAMMA, rel=1e-14)
    assert special.digamma(2.0) - special.digamma(1.0) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ParameterDomainError):
        special.digamma(0.0)


@given(rhos, mus)
def test_value_at_zero(rho, mu):
    assert special.mittag_leffler(rho, mu, 0.0) == pytest.approx(special.rgamma(mu), abs=1e-14)


def test_scalar_and_array_agree():
    xs = np.linspace(-30.0, 0.0, 41)
    arr = special.mittag_leffler(0.6, 1.2, xs)
    assert np.array_equal(arr, [special.mittag_leffler(0.6, 1.2, x) for x in xs])


@pytest.mark.parametrize("rho,mu,x", [(0.1, 1.0, -3.0), (0.5, 0.3, -40.0), (1.5, 2.0, -1e4), (1.95, 1.0, -200.0)])
def test_against_oracle(rho, mu, x):
    ref, _ = ml_reference(rho, mu, x)
    assert special.mittag_leffler(rho, mu, x) == pytest.approx(float(ref), abs=1e-12)


def test_rejects_bad_arguments():
    with pytest.raises(ParameterDomainError):
        special.mittag_leffler(0.0, 1.0, -1.0)
    with pytest.raises(ParameterDomainError):
        special.mittag_leffler(2.5, 1.0, -1.0)
    with pytest.raises(ParameterDomainError):
        special.mittag_leffler(0.5, 1.0, 1.0)
    with pytest.raises(ParameterDomainError):
        special.MLParams(0.5, float("nan"), -1.0)
    assert issubclass(ConvergenceError, Exception)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 1.0), mus, st.floats(1.0, 1e4))
def test_completely_monotone_range_decays(rho, mu, y):
    # for 0 < rho <= 1, mu >= rho, E(-y) is positive and bounded by C / (1 + y)
    if mu < rho:
        return
    v = special.ml_neg(rho, mu, y)
    assert v >= 0.0
    assert abs(v) * (1.0 + y) <= special.ml_decay_constant(rho, mu) * (1 + 1e-9)


def test_decay_envelope_is_nonincreasing():
    ys = np.logspace(-2, 8, 50)
    env = special.ml_decay_envelope(1.7, 2.0, ys)
    assert np.all(np.diff(env) <= 1e-15)


@pytest.mark.parametrize("kind,p", [("e2", 1.3), ("e1", 1.6), ("e3", 0.4)])
def test_asymptotic_leading_terms(kind, p):
    f = getattr(special, f"ml_asymptotic_{kind}")
    mu = 2.0 if kind == "e2" else 1.0
    y = 1e5
    exp = f(p, y)
    assert abs(special.ml_neg(p, mu, y) - exp.leading) <= exp.remainder_bound / y**2


def test_below_threshold_raises():
    thr = special.certified_threshold(1.9, 1.0)
    assert thr > 100.0
    with pytest.raises(BelowThresholdError):
        special.ml_asymptotic_e1(1.9, thr / 10)
    special.ml_asymptotic_e1(1.9, thr / 10, check=False)


def test_asymptotic_coefficients_match_gamma_form():
    # c = 1/Gamma(mu - rho), written without the pole at beta -> 2
    for b in (1.2, 1.5, 1.8):
        assert special.ml_asymptotic_e2(b, 1e6).coefficient == pytest.approx(special.rgamma(2 - b), rel=1e-13)
        assert special.ml_asymptotic_e1(b, 1e6).coefficient == pytest.approx(special.rgamma(1 - b), rel=1e-13)


@pytest.mark.parametrize("kind,p,mu", [("e2", 1.4, 2.0), ("e1", 1.4, 1.0), ("e3", 0.6, 1.0)])
def test_derivative_leading_terms_match_finite_differences(kind, p, mu):
    lam, t, h = 1.0, 1e5, 1e-5
    lead = getattr(special, f"{kind}_param_derivative_leading")(p, lam, t)
    fd = (special.ml_neg(p + h, mu, lam * t ** (p + h)) - special.ml_neg(p - h, mu, lam * t ** (p - h))) / (2 * h)
    assert fd == pytest.approx(lead, rel=2e-3)


def test_monotonicity_time_unknown_kind():
    with pytest.raises(ParameterDomainError):
        special.monotonicity_time("e9", [1.5])
