import math

import numpy as np
import pytest

from fracmix.errors import (
    AuditError,
    DegenerateDataError,
    ParameterDomainError,
    SolvabilityError,
)
from fracmix.forward import FractionalOrders, OrderBox, build_setup
from fracmix.inverse import (
    ObservationPair,
    audit_ratio_P,
    monotonicity_audit,
    observe,
    recover,
    recover_beta,
    select_k0,
    swapped_mode_recovery,
)
from fracmix.spectral import (
    DomainSpec,
    build_basis,
    from_coefficients,
    named_initial_data,
)


@pytest.fixture(scope="module")
def setup():
    basis = build_basis(DomainSpec.interval(1.0), 3)
    return build_setup(basis, from_coefficients(basis, [1.0, 0.5, 0.25]), 50.0, OrderBox(0.1, 1.1, 1.9))


def test_observation_validation(setup):
    with pytest.raises(ParameterDomainError):
        ObservationPair(-1.0, 1.0, 25.0, 1, 1.0)
    with pytest.raises(ParameterDomainError):
        ObservationPair(10.0, math.nan, 25.0, 1, 1.0)
    with pytest.raises(ParameterDomainError):
        ObservationPair(10.0, 1.0, 60.0, 1, 1.0).validate(setup)
    basis = build_basis(DomainSpec.interval(1.0), 2)
    s2 = build_setup(basis, from_coefficients(basis, [0.0, 1.0]), 50.0, OrderBox(0.1, 1.1, 1.9))
    assert select_k0(s2) == 2
    with pytest.raises(DegenerateDataError):
        ObservationPair(10.0, 1.0, 25.0, 1, 1.0).validate(s2)


def test_monotonicity_audit_detects_bump():
    grid = np.linspace(0.0, 1.0, 50)
    assert monotonicity_audit(np.exp(grid), grid).direction == "increasing"
    rep = monotonicity_audit(np.sin(3 * grid), grid)
    assert not rep.passed and rep.offending is not None
    assert not monotonicity_audit(np.exp(grid), grid, expected="decreasing").passed


@pytest.mark.parametrize("alpha,beta", [(0.2, 1.1), (0.5, 1.5), (0.95, 1.9), (0.1, 1.3)])
@pytest.mark.parametrize("swapped", [False, True])
def test_round_trip(setup, alpha, beta, swapped):
    obs = observe(setup, FractionalOrders(alpha, beta), 10.0, 25.0, swapped=swapped)
    res = recover(setup, obs)
    assert res.beta_hat == pytest.approx(beta, abs=1e-9)
    assert res.alpha_hat == pytest.approx(alpha, abs=1e-9)
    assert res.residuals_ok
    assert res.audits["beta_stage_direction"] in ("increasing", "decreasing")
    d = res.as_dict()
    assert isinstance(d["beta_hat"], float) and isinstance(d["audit_residuals_ok"], bool)


def test_recovery_is_deterministic(setup):
    obs = observe(setup, FractionalOrders(0.4, 1.6), 10.0, 25.0)
    a, b = recover(setup, obs), recover(setup, obs)
    assert (a.alpha_hat, a.beta_hat, a.trials) == (b.alpha_hat, b.beta_hat, b.trials)


def test_swapped_helper_requires_swapped_record(setup):
    obs = observe(setup, FractionalOrders(0.4, 1.6), 10.0, 25.0)
    with pytest.raises(ParameterDomainError):
        swapped_mode_recovery(setup, obs)


def test_non_monotone_P_is_refused():
    # lambda_1 = 1: P is not monotone near beta = 1.67 for T = 50, t2 = 25
    basis = build_basis(DomainSpec.interval(math.pi), 3)
    s = build_setup(basis, from_coefficients(basis, [1.0, 0.5, 0.25]), 50.0, OrderBox(0.1, 1.1, 1.8))
    assert not audit_ratio_P(s, 25.0, 1, s.box.beta_grid(81)).passed
    obs = observe(s, FractionalOrders(0.7, 1.5), 10.0, 25.0)
    with pytest.raises(AuditError):
        recover_beta(s, obs)


def test_recovery_on_pi_interval_with_narrow_box():
    basis = build_basis(DomainSpec.interval(math.pi), 3)
    s = build_setup(basis, from_coefficients(basis, [1.0, 0.5, 0.25]), 50.0, OrderBox(0.1, 1.1, 1.6))
    res = recover(s, observe(s, FractionalOrders(0.7, 1.5), 10.0, 25.0))
    assert res.beta_hat == pytest.approx(1.5, abs=1e-9)
    assert res.alpha_hat == pytest.approx(0.7, abs=1e-9)


def test_solvability_report_carries_bracket(setup):
    obs = observe(setup, FractionalOrders(0.5, 1.5), 10.0, 25.0)
    bad = ObservationPair(obs.t1, obs.d1, obs.t2, obs.k0, 100.0)
    with pytest.raises(SolvabilityError) as exc:
        recover(setup, bad)
    assert exc.value.code in ("beta_above", "beta_below")
    assert exc.value.report.as_dict()["target"] == pytest.approx(100.0)


def test_quadrature_data_round_trip():
    basis = build_basis(DomainSpec.interval(1.0), 64)
    s = build_setup(basis, named_initial_data(basis, "parabola"), 50.0, OrderBox(0.1, 1.1, 1.9), tolerance=1e-6)
    res = recover(s, observe(s, FractionalOrders(0.35, 1.45), 10.0, 25.0))
    assert res.alpha_hat == pytest.approx(0.35, abs=1e-8)
    assert res.beta_hat == pytest.approx(1.45, abs=1e-8)
