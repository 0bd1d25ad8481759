"""Acceptance suite: one printed PASS/FAIL line per criterion.

Tolerances are pinned here and never adjusted to make a check pass.
"""

import math
import time

import numpy as np
import pytest
from oracles import delta_mp, load_oracle

from fracmix import special
from fracmix.caputo import branch_grid, convergence_order, ode_residual
from fracmix.errors import SolvabilityError
from fracmix.forward import (
    FractionalOrders,
    OrderBox,
    build_setup,
    delta0,
    delta_k,
    delta_positivity_audit,
    mode_coefficients_at,
    mode_trajectory,
    norm_functional_W,
    ratio_P,
    solution_grid,
    solve_gluing,
    solve_mode,
    tail_bound,
)
from fracmix.inverse import ObservationPair, observe, recover
from fracmix.spectral import DomainSpec, build_basis, from_coefficients

# criterion 1
CLOSED_FORM_TOL = 1e-10
CLOSED_FORM_POINTS = 200
CLOSED_FORM_SECONDS = 5.0
# criterion 2
ORACLE_TOL = 1e-10
ORACLE_SAMPLES = 500
ORACLE_SECONDS = 60.0
# criterion 3
EXPANSION_SAMPLES = 50
EXPANSION_Y = np.logspace(3.0, 6.0, 31)
# criterion 4
MONOTONE_POINTS = 101
# criterion 5
C5_T = 50.0
C5_L = math.pi
C5_K = 64
# criterion 6
GLUING_TOL = 1e-12
IC_TOL = 1e-8
# criterion 7
RESIDUAL_TOL = 1e-4
ORDER_TOL = 0.3
CAPUTO_STEPS = (512, 1024, 2048, 4096)
CAPUTO_SECONDS = 30.0
# criterion 8
ROUND_TRIP_TOL = 1e-7
ROUND_TRIP_PAIRS = 20
ROUND_TRIP_SECONDS = 120.0
T, T1, T2 = 50.0, 10.0, 25.0


@pytest.fixture(scope="module")
def unit_interval_setup():
    basis = build_basis(DomainSpec.interval(1.0), 3)
    data = from_coefficients(basis, [1.0, 0.5, 0.25])
    return build_setup(basis, data, T, OrderBox(0.1, 1.1, 1.9))


def test_criterion_1_closed_forms(acceptance_line):
    start = time.perf_counter()
    x = np.linspace(-50.0, 0.0, CLOSED_FORM_POINTS)
    ml = special.mittag_leffler
    s = np.sqrt(-x)
    safe_s = np.where(s > 0.0, s, 1.0)
    safe_x = np.where(x < 0.0, x, 1.0)
    cases = {
        "E11=exp": (ml(1.0, 1.0, x), np.exp(x)),
        "E21=cos": (ml(2.0, 1.0, x), np.cos(s)),
        "E22=sin/s": (ml(2.0, 2.0, x), np.where(s > 0.0, np.sin(s) / safe_s, 1.0)),
        "E12=expm1/x": (ml(1.0, 2.0, x), np.where(x < 0.0, np.expm1(x) / safe_x, 1.0)),
    }
    errs = {k: float(np.max(np.abs(a - b))) for k, (a, b) in cases.items()}
    elapsed = time.perf_counter() - start
    worst = max(errs.values())
    ok = worst <= CLOSED_FORM_TOL and elapsed < CLOSED_FORM_SECONDS
    acceptance_line(1, ok, f"max closed-form error {worst:.2e} (tol {CLOSED_FORM_TOL:g}), {elapsed:.2f}s")
    assert ok, errs


def test_criterion_2_oracle_agreement(acceptance_line):
    rows = load_oracle()
    assert len(rows) == ORACLE_SAMPLES
    start = time.perf_counter()
    errs = [abs(float(special.mittag_leffler(r, m, x)) - float(v)) for r, m, x, v, _ in rows]
    elapsed = time.perf_counter() - start
    worst = max(errs)
    methods = {m: sum(1 for *_, mm in rows if mm == m) for m in ("taylor", "branchcut")}
    ok = worst <= ORACLE_TOL and elapsed < ORACLE_SECONDS
    acceptance_line(
        2, ok,
        f"max error {worst:.2e} over {len(rows)} samples "
        f"({methods['taylor']} Taylor, {methods['branchcut']} integral oracle), {elapsed:.2f}s",
    )
    assert ok


def test_criterion_3_asymptotic_expansions(acceptance_line):
    rng = np.random.default_rng(20240612)
    expansions = {
        "e2": (special.ml_asymptotic_e2, 2.0, 1.1, 1.9),
        "e1": (special.ml_asymptotic_e1, 1.0, 1.1, 1.9),
        "e3": (special.ml_asymptotic_e3, 1.0, 0.1, 0.9),
    }
    details = []
    ok = True
    for name, (expansion, mu, lo, hi) in expansions.items():
        worst_ratio = 0.0
        for p in rng.uniform(lo, hi, EXPANSION_SAMPLES):
            # a-priori constant, fixed before looking at E
            bound = special.remainder_bound(p, mu, EXPANSION_Y[0])
            lead = np.array([expansion(p, y, check=False).leading for y in EXPANSION_Y])
            scaled = np.abs(special.ml_neg(p, mu, EXPANSION_Y) - lead) * EXPANSION_Y**2
            worst_ratio = max(worst_ratio, float(np.max(scaled)) / bound)
        ok &= worst_ratio <= 1.0
        details.append(f"{name} max |E-lead|y^2/C = {worst_ratio:.3f}")
    acceptance_line(3, ok, "; ".join(details) + f" ({EXPANSION_SAMPLES} samples each)")
    assert ok


def test_criterion_4_monotonicity(acceptance_line):
    suites = {
        "E_beta,2 decreasing": ("e2", 2.0, np.linspace(1.1, 1.9, MONOTONE_POINTS), -1),
        "E_beta,1 increasing": ("e1", 1.0, np.linspace(1.1, 1.9, MONOTONE_POINTS), +1),
        "E_alpha,1 decreasing": ("e3", 1.0, np.linspace(0.1, 0.99, MONOTONE_POINTS), -1),
    }
    details = []
    total = 0
    for label, (kind, mu, grid, sign) in suites.items():
        t = special.monotonicity_time(kind, grid)
        assert math.isfinite(t)
        vals = np.array([float(special.mittag_leffler(p, mu, -(t**p))) for p in grid])
        bad = int(np.sum(sign * np.diff(vals) <= 0.0))
        total += bad
        details.append(f"{label} at t={t:.4g}: {bad} violations")
    ok = total == 0
    acceptance_line(4, ok, "; ".join(details))
    assert ok


def test_criterion_5_delta_positivity(acceptance_line):
    basis = build_basis(DomainSpec.interval(C5_L), C5_K)
    betas = np.linspace(1.1, 1.9, 161)
    report = delta_positivity_audit(basis.eigenvalues, C5_T, betas)
    # independent check of the worst entry
    k, b = report.argmin
    ref = delta_mp(float(basis.eigenvalues[k - 1]), C5_T, b)
    assert abs(ref - report.min_delta) <= 1e-10
    negative_regime = delta_k(1.0, 0.1, 1.5) < 0.0
    ok = report.above_floor and negative_regime
    acceptance_line(
        5, ok,
        f"T={C5_T:g}, L=pi, K={C5_K}: min_k,beta (Delta_k - delta0) = {report.min_margin:.3e} "
        f"(worst Delta_{k}={report.min_delta:.4e} at beta={b:.4g}, delta0={delta0(C5_T, b):.4e}); "
        f"Delta_1(T=0.1) < 0: {negative_regime}",
    )
    assert ok


def test_criterion_6_forward_structure(acceptance_line, unit_interval_setup):
    setup = unit_interval_setup
    orders = FractionalOrders(0.7, 1.5)
    rows = solution_grid(setup, orders, [-T, -T2, 0.0, 1.0, T1], n_points=33)
    boundary = [r[-1] for r in rows if r[0] in (0.0, 1.0)]
    boundary_ok = all(v == 0.0 for v in boundary)
    x = setup.basis.domain.grid(129)
    u_minus_T = np.tensordot(mode_coefficients_at(setup, 0.7, 1.5, -T), setup.basis.evaluate_all(x), axes=1)
    ic_err = float(np.max(np.abs(u_minus_T - setup.data.phi(x))))
    ic_ok = ic_err <= tail_bound(setup, 0.7, 1.5, -T) + IC_TOL
    glue = 0.0
    for m in solve_gluing(setup, orders):
        glue = max(
            glue,
            abs(m.w_plus0 - m.w_minus0),
            abs(-m.lam * m.w_plus0 - m.w_prime_minus0),  # D^alpha w(+0) = -lambda w(+0)
            abs(mode_trajectory(m, orders, None, -T) - m.phi_k),
        )
    ok = boundary_ok and ic_ok and glue <= GLUING_TOL
    acceptance_line(
        6, ok,
        f"boundary exactly 0: {boundary_ok}; |u(-T)-phi| = {ic_err:.2e}; gluing defect {glue:.2e}",
    )
    assert ok


def test_criterion_7_caputo_residuals(acceptance_line):
    alpha, beta = 0.7, 1.5
    # unit datum on the first mode; the hyperbolic branch spans all of [-T, 0]
    m = solve_mode(1, 1.0, 1.0, 5.0, beta)
    start = time.perf_counter()
    details = []
    ok = True
    for branch, target in (("parabolic", 2.0 - alpha), ("hyperbolic", 3.0 - beta)):
        errs = [
            ode_residual(m, alpha, beta, 1.0, branch, branch_grid(m, alpha, beta, branch, 5.0, n), t_min=1.0)
            for n in CAPUTO_STEPS
        ]
        rate = float(convergence_order(errs, CAPUTO_STEPS)[-1])
        ok &= errs[-1] <= RESIDUAL_TOL and abs(rate - target) <= ORDER_TOL
        details.append(f"{branch} residual {errs[-1]:.2e}, order {rate:.3f} (target {target:.2f})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < CAPUTO_SECONDS
    acceptance_line(7, ok, "; ".join(details) + f"; {elapsed:.2f}s")
    assert ok


def test_criterion_8_round_trip(acceptance_line, unit_interval_setup):
    setup = unit_interval_setup
    rng = np.random.default_rng(20240613)
    pairs = np.column_stack([rng.uniform(0.2, 0.95, ROUND_TRIP_PAIRS), rng.uniform(1.1, 1.9, ROUND_TRIP_PAIRS)])
    start = time.perf_counter()
    worst = 0.0
    worst_swap_gap = 0.0
    for a, b in pairs:
        orders = FractionalOrders(float(a), float(b))
        r = recover(setup, observe(setup, orders, T1, T2))
        rs = recover(setup, observe(setup, orders, T1, T2, swapped=True))
        worst = max(worst, abs(r.alpha_hat - a), abs(r.beta_hat - b), abs(rs.alpha_hat - a), abs(rs.beta_hat - b))
        worst_swap_gap = max(worst_swap_gap, abs(r.alpha_hat - rs.alpha_hat), abs(r.beta_hat - rs.beta_hat))
    elapsed = time.perf_counter() - start
    ok = worst <= ROUND_TRIP_TOL and worst_swap_gap <= ROUND_TRIP_TOL and elapsed < ROUND_TRIP_SECONDS
    acceptance_line(
        8, ok,
        f"{ROUND_TRIP_PAIRS} pairs, max |error| {worst:.2e} (both modes), "
        f"default vs swapped gap {worst_swap_gap:.2e}, {elapsed:.2f}s",
    )
    assert ok


def test_criterion_9_solvability_gates(acceptance_line, unit_interval_setup):
    setup = unit_interval_setup
    box = setup.box
    k0 = 1
    phi0 = float(setup.coefficients[0])
    p1 = ratio_P(setup, box.beta1, T2, k0) * phi0
    p2 = ratio_P(setup, box.beta2, T2, k0) * phi0
    lo, hi = min(p1, p2), max(p1, p2)
    beta_star = 1.5
    d2_ok = ratio_P(setup, beta_star, T2, k0) * phi0
    w1 = norm_functional_W(setup, 1.0, beta_star, T1)
    wa = norm_functional_W(setup, box.alpha1, beta_star, T1)

    def code(d1, d2):
        try:
            recover(setup, ObservationPair(T1, d1, T2, k0, d2))
        except SolvabilityError as exc:
            return exc.code
        return "accepted"

    mid = 0.5 * (w1 + wa)
    got = {
        "d2 below": code(mid, lo - 1e-6 * abs(lo)),
        "d2 above": code(mid, hi + 1e-6 * abs(hi)),
        "d1 = W(1)": code(w1, d2_ok),
        "d1 < W(1)": code(w1 * (1 - 1e-6), d2_ok),
        "d1 > W(alpha1)": code(wa * (1 + 1e-6), d2_ok),
    }
    increasing = p2 > p1
    expected = {
        "d2 below": "beta_below" if increasing else "beta_above",
        "d2 above": "beta_above" if increasing else "beta_below",
        "d1 = W(1)": "alpha_below",
        "d1 < W(1)": "alpha_below",
        "d1 > W(alpha1)": "alpha_above",
    }
    # the closed end alpha1 is admissible
    accepted_end = code(wa, d2_ok) == "accepted"
    ok = got == expected and accepted_end
    acceptance_line(
        9, ok,
        ", ".join(f"{k} -> {v}" for k, v in got.items()) + f"; d1 = W(alpha1) accepted: {accepted_end}",
    )
    assert ok, got
