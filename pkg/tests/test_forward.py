import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import delta_mp

from fracmix.errors import NonUniquenessError, ParameterDomainError
from fracmix.forward import (
    FractionalOrders,
    OrderBox,
    build_setup,
    delta0,
    delta_k,
    evaluate_solution,
    hyperbolic_norm,
    mode_coefficients_at,
    mode_trajectory,
    norm_functional_W,
    parabolic_coefficient,
    ratio_P,
    solution_grid,
    solve_gluing,
    solve_mode,
    tail_bound,
    wronskian_test_V,
)
from fracmix.spectral import (
    DomainSpec,
    build_basis,
    from_coefficients,
    named_initial_data,
)

BOX = OrderBox(0.1, 1.1, 1.9)


@pytest.fixture(scope="module")
def setup3():
    basis = build_basis(DomainSpec.interval(1.0), 3)
    return build_setup(basis, from_coefficients(basis, [1.0, 0.5, 0.25]), 50.0, BOX)


@pytest.fixture(scope="module")
def parabola_setup():
    basis = build_basis(DomainSpec.interval(1.0), 64)
    return build_setup(basis, named_initial_data(basis, "parabola"), 50.0, BOX, tolerance=1e-6)


def test_order_validation():
    with pytest.raises(ParameterDomainError):
        FractionalOrders(1.0, 1.5)
    with pytest.raises(ParameterDomainError):
        FractionalOrders(0.5, 2.0)
    with pytest.raises(ParameterDomainError):
        FractionalOrders(0.05, 1.5, box=BOX)
    with pytest.raises(ParameterDomainError):
        OrderBox(0.1, 1.8, 1.2)


def test_delta_closed_form_at_beta_two():
    # E_{2,1}(-y) = cos sqrt(y), E_{2,2}(-y) = sin sqrt(y) / sqrt(y)
    lam, T = 3.0, 1.7
    w = math.sqrt(lam) * T
    assert delta_k(lam, T, 2.0) == pytest.approx(math.sqrt(lam) * math.sin(w) - math.cos(w), abs=1e-12)


@pytest.mark.parametrize("lam,T,beta", [(1.0, 50.0, 1.3), (9.87, 50.0, 1.9), (40.0, 2.0, 1.5), (1.0, 0.1, 1.5)])
def test_delta_against_oracle(lam, T, beta):
    assert delta_k(lam, T, beta) == pytest.approx(delta_mp(lam, T, beta), abs=1e-12)


def test_delta0_formula():
    assert delta0(50.0, 1.5) == pytest.approx(1.0 / (2.0 * math.sqrt(50.0) * math.gamma(0.5)))


def test_nonuniqueness_is_refused():
    basis = build_basis(DomainSpec.interval(math.pi), 4)
    data = from_coefficients(basis, [1.0, 0.0, 0.0, 0.0])
    with pytest.raises(NonUniquenessError) as exc:
        build_setup(basis, data, 0.1, BOX)
    assert exc.value.report.min_delta < 0
    setup = build_setup(basis, data, 0.1, BOX, audit=False)
    assert not setup.audit.passed


@settings(max_examples=25, deadline=None)
@given(st.floats(0.15, 0.95), st.floats(1.1, 1.9))
def test_mode_system_and_initial_condition(alpha, beta):
    m = solve_mode(2, 5.0, 0.7, 3.0, beta)
    assert m.w_plus0 == m.w_minus0
    assert m.lam * m.w_minus0 + m.w_prime_minus0 == pytest.approx(0.0, abs=1e-12)
    assert mode_trajectory(m, alpha, beta, -3.0) == pytest.approx(0.7, abs=1e-12)
    # continuity across t = 0
    left = mode_trajectory(m, alpha, beta, -1e-12)
    right = mode_trajectory(m, alpha, beta, 1e-60)
    assert left == pytest.approx(m.w_minus0, rel=1e-6)
    assert right == pytest.approx(m.w_plus0, rel=1e-6)


def test_mode_coefficients_match_trajectories(setup3):
    orders = FractionalOrders(0.6, 1.4)
    modes = solve_gluing(setup3, orders)
    for t in (-50.0, -20.0, -0.3, 0.0, 0.4, 10.0):
        vec = mode_coefficients_at(setup3, 0.6, 1.4, t)
        assert np.allclose(vec, [mode_trajectory(m, orders, None, t) for m in modes], atol=1e-13)
    with pytest.raises(ParameterDomainError):
        mode_coefficients_at(setup3, 0.6, 1.4, -51.0)


def test_finite_expansion_has_no_tail(setup3):
    assert setup3.K == 3
    assert tail_bound(setup3, 0.5, 1.5, 2.0) == 0.0
    x = np.linspace(0, 1, 17)
    sol = evaluate_solution(setup3, FractionalOrders(0.5, 1.5), x, -50.0)
    assert np.allclose(sol.value, setup3.data.phi(x), atol=1e-13)


def test_tail_bound_covers_truncation(parabola_setup):
    s = parabola_setup
    basis_full = build_basis(DomainSpec.interval(1.0), 512)
    full = build_setup(basis_full, named_initial_data(basis_full, "parabola"), 50.0, BOX, K=512, audit=False)
    x = np.linspace(0, 1, 65)
    orders = FractionalOrders(0.5, 1.5)
    for t in (-50.0, -10.0, 0.5, 10.0):
        a = evaluate_solution(s, orders, x, t)
        b = evaluate_solution(full, orders, x, t)
        assert np.max(np.abs(a.value - b.value)) <= a.tail_bound


def test_solution_grid_boundary_exact(setup3):
    rows = solution_grid(setup3, FractionalOrders(0.5, 1.5), [-10.0, 1.0], n_points=9)
    assert len(rows) == 18
    assert all(r[2] == 0.0 for r in rows if r[0] in (0.0, 1.0))


def test_observables_consistent_with_solution(setup3):
    a, b = 0.55, 1.35
    coeffs = mode_coefficients_at(setup3, a, b, 10.0)
    assert norm_functional_W(setup3, a, b, 10.0) == pytest.approx(np.sum(coeffs**2), rel=1e-13)
    assert parabolic_coefficient(setup3, a, b, 10.0, 2) == pytest.approx(coeffs[1], rel=1e-13)
    back = mode_coefficients_at(setup3, a, b, -25.0)
    assert hyperbolic_norm(setup3, b, 25.0) == pytest.approx(np.sum(back**2), rel=1e-13)
    assert ratio_P(setup3, b, 25.0, 1) * setup3.coefficients[0] == pytest.approx(back[0], rel=1e-13)


def test_wronskian_sign():
    assert wronskian_test_V(1.0, 2.0, 3.0, 0.5) == pytest.approx(5.5)
