"""Gamma, digamma and the two-parameter Mittag-Leffler function on the
non-positive real axis, plus the large-argument expansions used by the
monotonicity audits.

``E_{rho,mu}(x) = sum_n x^n / Gamma(rho n + mu)`` is evaluated by a compensated
Taylor sum when that is free of cancellation (|x| <= 5 and every term below
100 in magnitude) and otherwise by trapezoidal inversion of its Laplace
transform on a parabolic contour, with the pole contributions added back
explicitly when 1 < rho <= 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from . import kernels
from .errors import (
    BelowThresholdError,
    ConvergenceError,
    GammaPoleError,
    ParameterDomainError,
)

EULER_GAMMA = 0.5772156649015329

# sweep used to certify asymptotic thresholds
_THRESHOLD_GRID = np.logspace(0.0, 12.0, 241)
# ratio |E - leading| / |leading| accepted as "leading term dominates"
_DOMINANCE = 0.5


def gamma(x: float) -> float:
    """Euler's Gamma function; raises :class:`GammaPoleError` at 0, -1, -2, ..."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise GammaPoleError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def rgamma(x: float) -> float:
    """1/Gamma(x), zero at the poles."""
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    return 1.0 / math.gamma(x)


def digamma(x: float) -> float:
    """Logarithmic derivative of Gamma for x > 0."""
    x = float(x)
    if not x > 0.0:
        raise ParameterDomainError(f"digamma is only supported for x > 0, got {x}")
    return float(_sp.digamma(x))


@dataclass(frozen=True)
class MLParams:
    """Arguments of E_{rho,mu}(x); validated on construction."""

    rho: float
    mu: float
    x: float

    def __post_init__(self):
        _check_params(self.rho, self.mu)
        if not (self.x <= 0.0):
            raise ParameterDomainError(f"only x <= 0 is supported, got x={self.x}")

    def evaluate(self) -> float:
        return mittag_leffler(self.rho, self.mu, self.x)


def _check_params(rho: float, mu: float) -> None:
    if not (0.0 < rho <= 2.0):
        raise ParameterDomainError(f"rho must lie in (0, 2], got {rho}")
    if not math.isfinite(mu):
        raise ParameterDomainError(f"mu must be finite, got {mu}")


def mittag_leffler(rho: float, mu: float, x):
    """E_{rho,mu}(x) for x <= 0.

    ``x`` may be a scalar or an array. Absolute accuracy is better than 1e-10
    for rho in [0.1, 2], mu in [0, 2], x in [-1e6, 0].
    """
    rho = float(rho)
    mu = float(mu)
    _check_params(rho, mu)
    if np.ndim(x) == 0:
        xf = float(x)
        if not (xf <= 0.0):
            raise ParameterDomainError(f"only x <= 0 is supported, got x={xf}")
        val, status = kernels.ml_eval(rho, mu, xf)
        if status != 0 or not math.isfinite(val):
            raise ConvergenceError(
                f"E_{{{rho},{mu}}}({xf}) did not reach its accuracy target (status {status})"
            )
        return val
    xs = np.asarray(x, dtype=float)
    if np.any(~(xs <= 0.0)):
        raise ParameterDomainError("only x <= 0 is supported")
    vals, status = kernels.ml_eval_array(rho, mu, xs)
    if status != 0 or not np.all(np.isfinite(vals)):
        raise ConvergenceError(f"E_{{{rho},{mu}}} failed on part of the input (status {status})")
    return vals


def ml_neg(rho: float, mu: float, y):
    """E_{rho,mu}(-y) for y >= 0; shorthand used throughout."""
    return mittag_leffler(rho, mu, -np.asarray(y, dtype=float) if np.ndim(y) else -float(y))


_ENVELOPE_GRID = np.concatenate(([0.0], np.logspace(-3.0, 9.0, 1201)))


@lru_cache(maxsize=256)
def _envelope_table(rho: float, mu: float) -> np.ndarray:
    vals = (1.0 + _ENVELOPE_GRID) * np.abs(ml_neg(rho, mu, _ENVELOPE_GRID))
    # running sup from the right; past the grid the leading 1/y term rules
    return np.maximum.accumulate(vals[::-1])[::-1]


def ml_decay_envelope(rho: float, mu: float, y):
    """sup over y' >= y of (1 + y')|E_{rho,mu}(-y')|, calibrated on a log grid to 1e9.

    This is the constant C of |E(-y')| <= C/(1 + y') restricted to y' >= y.
    """
    table = _envelope_table(float(rho), float(mu))
    idx = np.searchsorted(_ENVELOPE_GRID, np.asarray(y, dtype=float), side="right") - 1
    idx = np.clip(idx, 0, len(table) - 1)
    out = table[idx]
    return float(out) if np.ndim(y) == 0 else out


def ml_decay_constant(rho: float, mu: float) -> float:
    """Numerically calibrated C with |E_{rho,mu}(-y)| <= C / (1 + y) for y >= 0."""
    return ml_decay_envelope(rho, mu, 0.0)


# --- large-argument expansions ---------------------------------------------

@dataclass(frozen=True)
class AsymptoticExpansion:
    """Leading 1/y term of E(-y) with a bound on the O(1/y^2) remainder.

    ``|E(-y) - leading| <= remainder_bound / y**2`` for every y' >= y.
    """

    leading: float
    remainder_bound: float
    threshold: float
    y: float
    coefficient: float


def _coefficient(rho: float, mu: float) -> float:
    return rgamma(mu - rho)


def _remainder_profile(rho: float, mu: float, y: np.ndarray) -> np.ndarray:
    """Pointwise estimate of y^2 |E(-y) - c_1/y|.

    Algebraic part: |c_2| + |c_3|/y + ... from the negative-axis expansion
    E(-y) ~ -sum_n (-y)^-n / Gamma(mu - rho n), doubled to cover truncation.
    For rho > 1 the exponentially small pole pair
    (2/rho) y^((1-mu)/rho) exp(y^(1/rho) cos(pi/rho)) is added.
    """
    y = np.asarray(y, dtype=float)
    alg = np.zeros_like(y)
    for n in range(2, 7):
        alg += abs(rgamma(mu - rho * n)) * y ** (2.0 - n)
    out = 2.0 * alg
    if rho > 1.0:
        r = y ** (1.0 / rho)
        pole = (2.0 / rho) * np.exp((1.0 - mu) / rho * np.log(y) + r * math.cos(math.pi / rho))
        out += 2.0 * y**2 * pole
    return out


def remainder_bound(rho: float, mu: float, y: float) -> float:
    """sup over y' >= y of the remainder profile (log-grid sweep to 1e14)."""
    grid = np.logspace(math.log10(y), 14.0, 600) if y < 1e14 else np.array([y])
    return float(np.max(_remainder_profile(rho, mu, grid)))


@lru_cache(maxsize=1024)
def certified_threshold(rho: float, mu: float) -> float:
    """Smallest y on a log grid from which the leading term dominates E(-y).

    Found by sweeping :func:`mittag_leffler`: every grid point y' >= threshold
    satisfies |E(-y') - c/y'| <= 0.5 |c/y'| with c = 1/Gamma(mu - rho).
    Returns ``inf`` when no such point exists up to 1e12.
    """
    c = _coefficient(rho, mu)
    if c == 0.0:
        return math.inf
    ys = _THRESHOLD_GRID
    vals = ml_neg(rho, mu, ys)
    lead = c / ys
    ok = np.abs(vals - lead) <= _DOMINANCE * np.abs(lead)
    if not ok[-1]:
        return math.inf
    bad = np.nonzero(~ok)[0]
    first = 0 if bad.size == 0 else bad[-1] + 1
    return float(ys[first])


def _expansion(rho: float, mu: float, y: float, check: bool) -> AsymptoticExpansion:
    if not y > 0.0:
        raise ParameterDomainError(f"the argument y = lambda t^rho must be positive, got {y}")
    c = _coefficient(rho, mu)
    thr = certified_threshold(rho, mu)
    if check and y < thr:
        raise BelowThresholdError(
            f"y={y:g} is below the certified threshold {thr:g} for (rho={rho}, mu={mu})"
        )
    return AsymptoticExpansion(
        leading=c / y,
        remainder_bound=remainder_bound(rho, mu, y),
        threshold=thr,
        y=y,
        coefficient=c,
    )


def ml_asymptotic_e2(beta: float, y: float, check: bool = True) -> AsymptoticExpansion:
    """E_{beta,2}(-y) ~ (2 - beta) / (Gamma(3 - beta) y), 1 < beta < 2."""
    if not 1.0 < beta < 2.0:
        raise ParameterDomainError(f"beta must lie in (1, 2), got {beta}")
    exp = _expansion(beta, 2.0, y, check)
    # same coefficient written without the 1/Gamma(2 - beta) singularity at beta -> 2
    c = (2.0 - beta) / math.gamma(3.0 - beta)
    return AsymptoticExpansion(c / y, exp.remainder_bound, exp.threshold, y, c)


def ml_asymptotic_e1(beta: float, y: float, check: bool = True) -> AsymptoticExpansion:
    """E_{beta,1}(-y) ~ -(beta - 1)(2 - beta) / (Gamma(3 - beta) y), 1 < beta < 2."""
    if not 1.0 < beta < 2.0:
        raise ParameterDomainError(f"beta must lie in (1, 2), got {beta}")
    exp = _expansion(beta, 1.0, y, check)
    c = -(beta - 1.0) * (2.0 - beta) / math.gamma(3.0 - beta)
    return AsymptoticExpansion(c / y, exp.remainder_bound, exp.threshold, y, c)


def ml_asymptotic_e3(alpha: float, y: float, check: bool = True) -> AsymptoticExpansion:
    """E_{alpha,1}(-y) ~ (1 - alpha) / (Gamma(2 - alpha) y), 0 < alpha < 1."""
    if not 0.0 < alpha < 1.0:
        raise ParameterDomainError(f"alpha must lie in (0, 1), got {alpha}")
    exp = _expansion(alpha, 1.0, y, check)
    c = (1.0 - alpha) / math.gamma(2.0 - alpha)
    return AsymptoticExpansion(c / y, exp.remainder_bound, exp.threshold, y, c)


# Leading terms of the parameter derivatives of E(-lambda t^rho). They carry
# an O(log t / (lambda t^rho)^2) remainder and are used only as a sign
# diagnostic next to finite differences.

def e2_param_derivative_leading(beta: float, lam: float, t: float) -> float:
    """d/dbeta E_{beta,2}(-lam t^beta), leading 1/(lam t^beta) term."""
    y = lam * t**beta
    # from -(ln t - psi(2 - beta)) / Gamma(2 - beta) with psi(2 - b) = psi(3 - b) - 1/(2 - b)
    return -((2.0 - beta) * (math.log(t) - digamma(3.0 - beta)) + 1.0) / (
        math.gamma(3.0 - beta) * y
    )


def e1_param_derivative_leading(beta: float, lam: float, t: float) -> float:
    """d/dbeta E_{beta,1}(-lam t^beta), leading term."""
    y = lam * t**beta
    return (
        (beta - 1.0) * (2.0 - beta) * (math.log(t) - digamma(3.0 - beta)) + 2.0 * beta - 3.0
    ) / (math.gamma(3.0 - beta) * y)


def e3_param_derivative_leading(alpha: float, lam: float, t: float) -> float:
    """d/dalpha E_{alpha,1}(-lam t^alpha), leading term."""
    y = lam * t**alpha
    return -((1.0 - alpha) * (math.log(t) - digamma(2.0 - alpha)) + 1.0) / (
        math.gamma(2.0 - alpha) * y
    )


def _drgamma(x: float, h: float = 1e-6) -> float:
    return (rgamma(x + h) - rgamma(x - h)) / (2.0 * h)


def derivative_remainder_bound(rho: float, mu: float, lam: float, t: float) -> float:
    """Estimate of |d/drho E_{rho,mu}(-lam t^rho) - leading derivative term|.

    Differentiates the terms n = 2..6 of the negative-axis expansion (and, for
    rho > 1, the pole pair) in rho with y = lam t^rho, bounds each term by
    its modulus and doubles the sum.
    """
    y = lam * t**rho
    lt = abs(math.log(t))
    alg = 0.0
    for n in range(2, 7):
        x = mu - rho * n
        alg += n * (lt * abs(rgamma(x)) + abs(_drgamma(x))) * y ** (-n)
    out = 2.0 * alg
    if rho > 1.0:
        r = y ** (1.0 / rho)
        amp = (2.0 / rho) * math.exp((1.0 - mu) / rho * math.log(y) + r * math.cos(math.pi / rho))
        ll = abs(math.log(lam)) if lam > 0 else 0.0
        rate = 1.0 / rho + abs(1.0 - mu) * ll / rho**2 + 2.0 * r * (ll + math.pi) / rho**2
        out += 2.0 * amp * rate
    return out


# --- certified regime for the parameter-monotonicity properties ------------

_MONOTONE_KINDS = {
    # kind: (mu, derivative diagnostic, expected sign of the parameter derivative)
    "e2": (2.0, e2_param_derivative_leading, -1.0),
    "e1": (1.0, e1_param_derivative_leading, +1.0),
    "e3": (1.0, e3_param_derivative_leading, -1.0),
}


def monotonicity_time(kind: str, params, lam: float = 1.0, t_max: float = 1e8) -> float:
    """Smallest t on a log grid (1 .. t_max) at which, for every parameter in
    ``params``, lam t^rho clears the certified threshold and the leading term
    of the parameter derivative has the needed sign with a modulus above
    :func:`derivative_remainder_bound`.

    Returns ``inf`` if no such t exists. The property itself is then checked
    by sweeping :func:`mittag_leffler`; this only selects where to look.
    """
    if kind not in _MONOTONE_KINDS:
        raise ParameterDomainError(f"kind must be one of {sorted(_MONOTONE_KINDS)}")
    mu, diag, sign = _MONOTONE_KINDS[kind]
    ps = [float(p) for p in params]
    thr = [certified_threshold(p, mu) for p in ps]
    for t in np.logspace(0.0, math.log10(t_max), 161):
        if all(lam * t**p >= th for p, th in zip(ps, thr)) and all(
            sign * diag(p, lam, t) > derivative_remainder_bound(p, mu, lam, t) for p in ps
        ):
            return float(t)
    return math.inf
