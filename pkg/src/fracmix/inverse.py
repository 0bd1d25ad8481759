"""Two-stage recovery of (alpha, beta) from two scalar observations.

Stage one uses an observation on the hyperbolic side (t = -t2), which depends
on beta alone, and solves for beta. Stage two uses an observation at t1 > 0,
which depends on both orders, and solves for alpha with beta fixed. Default
observations are the k0-th Fourier coefficient of u(., -t2) and the squared
L2 norm of u(., t1); in swapped mode the two kinds trade places.

Every stage first audits strict monotonicity of its scalar function on a grid
and checks that the data lie in the solvability bracket.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import (
    AuditError,
    DegenerateDataError,
    ParameterDomainError,
    SolvabilityError,
)
from .forward import (
    FractionalOrders,
    ProblemSetup,
    delta_k,
    hyperbolic_norm,
    norm_functional_W,
    parabolic_coefficient,
    ratio_P,
    wronskian_test_V,
)
from .special import mittag_leffler

log = logging.getLogger(__name__)

MIN_AUDIT_POINTS = 32
K0_THRESHOLD = 1e-8
XTOL = 1e-13
RESIDUAL_RTOL = 1e-8
FD_STEP = 1e-6
# rounding slack at the closed bracket ends (beta1, beta2, alpha1)
CLOSED_END_RTOL = 1e-12


# --- observations ----------------------------------------------------------

@dataclass(frozen=True)
class ObservationPair:
    """Observation record.

    Default mode: d1 = int |u(x, t1)|^2 dx and d2 = int u(x, -t2) v_k0 dx.
    Swapped mode: d1 = int u(x, t1) v_k0 dx and d2 = int |u(x, -t2)|^2 dx.
    """

    t1: float
    d1: float
    t2: float
    k0: int
    d2: float
    swapped: bool = False

    def __post_init__(self):
        if not self.t1 > 0.0:
            raise ParameterDomainError(f"t1 must be positive, got {self.t1}")
        if not self.t2 > 0.0:
            raise ParameterDomainError(f"t2 must be positive, got {self.t2}")
        if int(self.k0) != self.k0 or self.k0 < 1:
            raise ParameterDomainError(f"k0 must be a positive integer, got {self.k0}")
        if not (math.isfinite(self.d1) and math.isfinite(self.d2)):
            raise ParameterDomainError("observations must be finite")

    def validate(self, setup: ProblemSetup) -> None:
        if not self.t2 < setup.T:
            raise ParameterDomainError(f"t2 = {self.t2} must be smaller than T = {setup.T}")
        if self.k0 > setup.K:
            raise ParameterDomainError(f"k0 = {self.k0} exceeds the {setup.K} retained modes")
        if abs(setup.coefficients[self.k0 - 1]) <= 0.0:
            raise DegenerateDataError(f"phi_{self.k0} = 0; choose a mode present in the datum")

    def as_dict(self) -> dict:
        return {
            "t1": self.t1, "d1": self.d1, "t2": self.t2,
            "k0": self.k0, "d2": self.d2, "swapped": self.swapped,
        }


def select_k0(setup: ProblemSetup, threshold: float = K0_THRESHOLD) -> int:
    """Smallest k with |phi_k| above ``threshold``."""
    idx = np.nonzero(np.abs(setup.coefficients) > threshold)[0]
    if idx.size == 0:
        raise DegenerateDataError(f"no retained coefficient exceeds {threshold:g}")
    return int(idx[0]) + 1


def observe(
    setup: ProblemSetup,
    orders: FractionalOrders,
    t1: float,
    t2: float,
    k0: int | None = None,
    swapped: bool = False,
) -> ObservationPair:
    """Synthesize exact observations from the forward solution."""
    k0 = select_k0(setup) if k0 is None else int(k0)
    a, b = orders.alpha, orders.beta
    if swapped:
        d1 = parabolic_coefficient(setup, a, b, t1, k0)
        d2 = hyperbolic_norm(setup, b, t2)
    else:
        d1 = norm_functional_W(setup, a, b, t1)
        d2 = ratio_P(setup, b, t2, k0) * setup.coefficients[k0 - 1]
    obs = ObservationPair(float(t1), float(d1), float(t2), k0, float(d2), swapped)
    obs.validate(setup)
    return obs


# --- monotonicity ----------------------------------------------------------

@dataclass(frozen=True)
class MonotonicityReport:
    grid: np.ndarray
    values: np.ndarray
    direction: str | None  # "increasing", "decreasing" or None
    offending: tuple[float, float] | None
    min_abs_slope: float
    wronskian_consistent: bool | None = None

    @property
    def passed(self) -> bool:
        return self.direction is not None and self.wronskian_consistent is not False

    def summary(self) -> str:
        if self.passed:
            return f"strictly {self.direction} on {len(self.grid)} points, min |slope| {self.min_abs_slope:.3e}"
        if self.direction is not None:
            return f"{self.direction} but the Wronskian sign test disagrees"
        a, b = self.offending
        return f"not strictly monotone on [{a:.6g}, {b:.6g}]"


def monotonicity_audit(
    f: Callable[[float], float] | np.ndarray,
    grid,
    expected: str | None = None,
) -> MonotonicityReport:
    """Detect a strict monotone direction of ``f`` on a sorted grid (>= 32 points).

    ``f`` may also be the precomputed array of values. On failure the report
    names the first grid interval that breaks the majority direction (or the
    expected one).
    """
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < MIN_AUDIT_POINTS:
        raise ParameterDomainError(f"audit grid needs at least {MIN_AUDIT_POINTS} points")
    if np.any(np.diff(x) <= 0.0):
        raise ParameterDomainError("audit grid must be strictly increasing")
    vals = np.asarray(f, dtype=float) if isinstance(f, np.ndarray) else np.array([f(v) for v in x])
    d = np.diff(vals)
    slope = np.abs(d / np.diff(x))
    if expected is None:
        expected = "increasing" if np.sum(d > 0) >= np.sum(d < 0) else "decreasing"
    if expected not in ("increasing", "decreasing"):
        raise ParameterDomainError(f"unknown direction {expected!r}")
    bad = d <= 0.0 if expected == "increasing" else d >= 0.0
    if np.any(bad) or not np.all(np.isfinite(vals)):
        i = int(np.argmax(bad | ~np.isfinite(d)))
        return MonotonicityReport(x, vals, None, (float(x[i]), float(x[i + 1])), float(np.min(slope)))
    return MonotonicityReport(x, vals, expected, None, float(np.min(slope)))


def _fd(f: Callable[[float], float], x: float, lo: float, hi: float, h: float = FD_STEP) -> float:
    """Central difference kept inside [lo, hi]."""
    a, b = max(lo, x - h), min(hi, x + h)
    return (f(b) - f(a)) / (b - a)


def audit_ratio_P(setup: ProblemSetup, t2: float, k0: int, grid) -> MonotonicityReport:
    """Monotonicity of P on the beta grid, cross-checked by the Wronskian test.

    With p = Delta_k0(t2, .) and q = Delta_k0(T, .) > 0, sign V(p, q) = sign P'.
    """
    x = np.asarray(grid, dtype=float)
    lam = float(setup.eigenvalues[k0 - 1])
    lo, hi = float(x[0]), float(x[-1])

    def p(b):
        return delta_k(lam, t2, b)

    def q(b):
        return delta_k(lam, setup.T, b)

    rep = monotonicity_audit(lambda b: ratio_P(setup, b, t2, k0), x)
    V = np.array([wronskian_test_V(p(b), _fd(p, b, lo, hi), q(b), _fd(q, b, lo, hi)) for b in x])
    dP = np.array([_fd(lambda s: ratio_P(setup, s, t2, k0), b, lo, hi) for b in x])
    # the sign test is only meaningful where both quantities clear rounding
    scale = np.max(np.abs(V)) * 1e-8
    meaningful = (np.abs(V) > scale) & (np.abs(dP) > 1e-12)
    consistent = bool(np.all(np.sign(V[meaningful]) == np.sign(dP[meaningful])))
    return MonotonicityReport(
        rep.grid, rep.values, rep.direction, rep.offending, rep.min_abs_slope, consistent
    )


# --- solvability -----------------------------------------------------------

@dataclass(frozen=True)
class Bracket:
    """Values of the stage function at the box ends and the data target."""

    lower_end: float
    upper_end: float
    value_at_lower: float
    value_at_upper: float
    target: float

    def as_dict(self) -> dict:
        return {
            "lower_end": self.lower_end, "upper_end": self.upper_end,
            "value_at_lower": self.value_at_lower, "value_at_upper": self.value_at_upper,
            "target": self.target,
        }


def _beta_stage(setup: ProblemSetup, obs: ObservationPair):
    """(function of beta, target) for the beta-only observation."""
    if obs.swapped:
        return (lambda b: hyperbolic_norm(setup, b, obs.t2)), obs.d2
    phi0 = setup.coefficients[obs.k0 - 1]
    return (lambda b: ratio_P(setup, b, obs.t2, obs.k0)), obs.d2 / phi0


def check_beta_solvability(setup: ProblemSetup, obs: ObservationPair) -> Bracket:
    """Confirm the beta-stage target lies between its values at beta1 and beta2 (closed)."""
    obs.validate(setup)
    box = setup.box
    f, target = _beta_stage(setup, obs)
    f1, f2 = f(box.beta1), f(box.beta2)
    br = Bracket(box.beta1, box.beta2, f1, f2, target)
    lo, hi = min(f1, f2), max(f1, f2)
    slack = CLOSED_END_RTOL * max(abs(lo), abs(hi))
    increasing = f2 >= f1
    if lo - slack <= target < lo:
        target = lo
    elif hi < target <= hi + slack:
        target = hi
    if target < lo:
        code = "beta_below" if increasing else "beta_above"
    elif target > hi:
        code = "beta_above" if increasing else "beta_below"
    else:
        return br
    raise SolvabilityError(
        f"beta-stage target {target:.12g} lies outside [{lo:.12g}, {hi:.12g}]", code, br
    )


def _alpha_stage(setup: ProblemSetup, obs: ObservationPair, beta: float):
    """(function of alpha on (0, 1], target, strict-end value at alpha = 1)."""
    if obs.swapped:
        # normalize the coefficient to E_{alpha,1}(-lambda t1^alpha), decreasing in alpha
        k0 = obs.k0
        lam = float(setup.eigenvalues[k0 - 1])
        scale = -setup.coefficients[k0 - 1] / delta_k(lam, setup.T, beta)

        def g(a):
            if a == 1.0:
                return math.exp(-lam * obs.t1)
            return float(mittag_leffler(a, 1.0, -lam * obs.t1**a))

        return g, obs.d1 / scale
    return (lambda a: norm_functional_W(setup, a, beta, obs.t1)), obs.d1


def check_alpha_solvability(setup: ProblemSetup, obs: ObservationPair, beta_star: float) -> Bracket:
    """Confirm G(1) < target <= G(alpha1), G the decreasing alpha-stage function."""
    obs.validate(setup)
    box = setup.box
    g, target = _alpha_stage(setup, obs, beta_star)
    g1, ga = g(1.0), g(box.alpha1)
    br = Bracket(box.alpha1, 1.0, ga, g1, target)
    if not target > g1:
        raise SolvabilityError(
            f"alpha-stage target {target:.12g} is not above its alpha -> 1 limit {g1:.12g}",
            "alpha_below", br,
        )
    if target > ga + CLOSED_END_RTOL * abs(ga):
        raise SolvabilityError(
            f"alpha-stage target {target:.12g} exceeds its value {ga:.12g} at alpha1",
            "alpha_above", br,
        )
    return br


# --- root finding ----------------------------------------------------------

def _solve_monotone(fun, target: float, a: float, b: float, fa: float, fb: float, trials: list):
    """Brent's method (bisection safeguarded secant/inverse quadratic steps)
    for fun(x) = target on [a, b]; endpoint values are reused, not recomputed.
    """
    ga, gb = fa - target, fb - target
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if (ga > 0.0) == (gb > 0.0):
        # target within rounding slack outside a closed end; the solvability check bounds it
        return a if abs(ga) <= abs(gb) else b

    def g(x):
        if x == a:
            return ga
        if x == b:
            return gb
        trials.append(x)
        return fun(x) - target

    return optimize.brentq(g, a, b, xtol=XTOL, rtol=4.0 * np.finfo(float).eps, maxiter=200)


def recover_beta(
    setup: ProblemSetup,
    obs: ObservationPair,
    audit_points: int = 65,
    trials: list | None = None,
) -> tuple[float, MonotonicityReport, Bracket]:
    """Solve the beta-stage equation after auditing monotonicity and the bracket."""
    obs.validate(setup)
    box = setup.box
    grid = box.beta_grid(max(audit_points, MIN_AUDIT_POINTS))
    if obs.swapped:
        f, _ = _beta_stage(setup, obs)
        audit = monotonicity_audit(f, grid)
    else:
        audit = audit_ratio_P(setup, obs.t2, obs.k0, grid)
    if not audit.passed:
        raise AuditError(f"beta-stage function failed its monotonicity audit: {audit.summary()}", audit)
    br = check_beta_solvability(setup, obs)
    f, target = _beta_stage(setup, obs)
    trials = [] if trials is None else trials
    beta = _solve_monotone(f, target, box.beta1, box.beta2, br.value_at_lower, br.value_at_upper, trials)
    return float(beta), audit, br


def recover_alpha(
    setup: ProblemSetup,
    obs: ObservationPair,
    beta_star: float,
    audit_points: int = 65,
    trials: list | None = None,
) -> tuple[float, MonotonicityReport, Bracket]:
    """Solve the alpha-stage equation on [alpha1, 1) with beta fixed."""
    obs.validate(setup)
    box = setup.box
    g, target = _alpha_stage(setup, obs, beta_star)
    grid = box.alpha_grid(max(audit_points, MIN_AUDIT_POINTS))
    audit = monotonicity_audit(g, grid, expected="decreasing")
    if not audit.passed:
        raise AuditError(f"alpha-stage function failed its monotonicity audit: {audit.summary()}", audit)
    br = check_alpha_solvability(setup, obs, beta_star)
    trials = [] if trials is None else trials
    alpha = _solve_monotone(g, target, box.alpha1, 1.0, br.value_at_lower, br.value_at_upper, trials)
    if alpha >= 1.0:
        # unreachable with a strict bracket; kept as a guard
        raise SolvabilityError("alpha-stage root sits at the excluded end alpha = 1", "alpha_below", br)
    return float(alpha), audit, br


@dataclass(frozen=True)
class RecoveryResult:
    beta_hat: float
    alpha_hat: float
    residuals: tuple[float, float]
    audits: dict
    sensitivity: dict = field(default_factory=dict)
    swapped: bool = False
    trials: tuple[float, ...] = ()

    @property
    def residuals_ok(self) -> bool:
        return bool(self.audits.get("residuals_ok", False))

    def as_dict(self) -> dict:
        return {
            "beta_hat": self.beta_hat,
            "alpha_hat": self.alpha_hat,
            "residual_beta_stage": self.residuals[0],
            "residual_alpha_stage": self.residuals[1],
            "swapped": self.swapped,
            **{f"sensitivity_{k}": v for k, v in self.sensitivity.items()},
            **{f"audit_{k}": v for k, v in self.audits.items() if not isinstance(v, (dict, list))},
        }


def _observed(setup: ProblemSetup, obs: ObservationPair, alpha: float, beta: float) -> tuple[float, float]:
    """Forward values of (d1, d2) at the given orders, in the record's mode."""
    if obs.swapped:
        return (
            parabolic_coefficient(setup, alpha, beta, obs.t1, obs.k0),
            hyperbolic_norm(setup, beta, obs.t2),
        )
    return (
        norm_functional_W(setup, alpha, beta, obs.t1),
        ratio_P(setup, beta, obs.t2, obs.k0) * setup.coefficients[obs.k0 - 1],
    )


def recover(setup: ProblemSetup, obs: ObservationPair, audit_points: int = 65) -> RecoveryResult:
    """Full two-stage recovery; beta first, then alpha."""
    obs.validate(setup)
    trials: list[float] = []
    beta, audit_b, br_b = recover_beta(setup, obs, audit_points, trials)
    n_beta = len(trials)
    alpha, audit_a, br_a = recover_alpha(setup, obs, beta, audit_points, trials)
    d1, d2 = _observed(setup, obs, alpha, beta)
    res = (float(abs(d2 - obs.d2)), float(abs(d1 - obs.d1)))
    ok = bool(res[0] <= RESIDUAL_RTOL * abs(obs.d2) + 1e-14 and res[1] <= RESIDUAL_RTOL * abs(obs.d1) + 1e-14)
    box = setup.box
    f_b, target_b = _beta_stage(setup, obs)
    g_a, target_a = _alpha_stage(setup, obs, beta)
    dfb = _fd(f_b, beta, box.beta1, box.beta2)
    dga = _fd(g_a, alpha, box.alpha1, 1.0 - FD_STEP)
    min_slope = audit_b.min_abs_slope
    sensitivity = {
        "dF_dbeta": float(dfb),
        "dG_dalpha": float(dga),
        # shift of beta under a 1e-6 relative perturbation of the beta-stage datum
        "beta_shift_per_1e-6": float(1e-6 * abs(target_b) / min_slope) if min_slope > 0 else math.inf,
        "alpha_shift_per_1e-6": float(1e-6 * abs(target_a) / abs(dga)) if dga != 0 else math.inf,
    }
    audits = {
        "delta_min": setup.audit.min_delta,
        "beta_stage": audit_b.summary(),
        "beta_stage_direction": audit_b.direction,
        "alpha_stage": audit_a.summary(),
        "beta_bracket": br_b.as_dict(),
        "alpha_bracket": br_a.as_dict(),
        "beta_evaluations": n_beta,
        "alpha_evaluations": len(trials) - n_beta,
        "residuals_ok": ok,
    }
    return RecoveryResult(beta, alpha, res, audits, sensitivity, obs.swapped, tuple(trials))


def swapped_mode_recovery(setup: ProblemSetup, obs_swapped: ObservationPair, audit_points: int = 65) -> RecoveryResult:
    """Recovery from a swapped record (norm at -t2, Fourier coefficient at t1)."""
    if not obs_swapped.swapped:
        raise ParameterDomainError("expected a swapped observation record")
    return recover(setup, obs_swapped, audit_points)
