"""Spectral solution of the mixed problem.

For t > 0 each Fourier mode solves D^alpha w + lambda w = 0, for -T < t < 0 it
solves D^beta w + lambda w = 0 (derivative taken from the right endpoint 0),
with u(-T) = phi and the two gluing conditions at t = 0. Per mode this gives

    w(t) = w(+0) E_{alpha,1}(-lambda t^alpha),                     t > 0
    w(t) = w(-0) E_{beta,1}(-lambda|t|^beta)
           + w'(-0) |t| E_{beta,2}(-lambda|t|^beta),                t < 0

with w(+0) = w(-0) = -phi_k / Delta_k and w'(-0) = lambda phi_k / Delta_k,
where Delta_k = lambda T E_{beta,2}(-lambda T^beta) - E_{beta,1}(-lambda T^beta).
Equivalently w(-s) = phi_k Delta_k(s, beta) / Delta_k(T, beta) for 0 < s <= T.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDataError,
    NonUniquenessError,
    ParameterDomainError,
    SingularSystemError,
)
from .special import gamma, mittag_leffler, ml_decay_constant, ml_decay_envelope
from .spectral import EigenBasis, InitialData

log = logging.getLogger(__name__)

# |Delta_k| below this is treated as a singular gluing system
SINGULAR_FLOOR = 1e-14
DEFAULT_TOLERANCE = 1e-8
DEFAULT_T_MIN = 1e-3
AUDIT_POINTS = 33
COEFF_NOISE = 1e-11


# --- parameters ------------------------------------------------------------

@dataclass(frozen=True)
class OrderBox:
    """Admissible orders [alpha1, 1) x [beta1, beta2]."""

    alpha1: float
    beta1: float
    beta2: float

    def __post_init__(self):
        if not 0.0 < self.alpha1 < 1.0:
            raise ParameterDomainError(f"alpha1 must lie in (0, 1), got {self.alpha1}")
        if not 1.0 < self.beta1 <= self.beta2 < 2.0:
            raise ParameterDomainError(
                f"need 1 < beta1 <= beta2 < 2, got ({self.beta1}, {self.beta2})"
            )

    def beta_grid(self, n: int = AUDIT_POINTS) -> np.ndarray:
        return np.linspace(self.beta1, self.beta2, n)

    def alpha_grid(self, n: int = AUDIT_POINTS, upper: float = 0.999) -> np.ndarray:
        return np.linspace(self.alpha1, max(upper, self.alpha1), n)

    def contains(self, alpha: float, beta: float) -> bool:
        return self.alpha1 <= alpha < 1.0 and self.beta1 <= beta <= self.beta2


@dataclass(frozen=True)
class FractionalOrders:
    alpha: float
    beta: float
    box: OrderBox | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterDomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 1.0 < self.beta < 2.0:
            raise ParameterDomainError(f"beta must lie in (1, 2), got {self.beta}")
        if self.box is not None and not self.box.contains(self.alpha, self.beta):
            raise ParameterDomainError(
                f"orders ({self.alpha}, {self.beta}) lie outside the admissible box {self.box}"
            )


# --- Delta_k ---------------------------------------------------------------

def _check_beta(beta: float) -> None:
    # beta = 2 is accepted as a closed-form test hook
    if not 1.0 < beta <= 2.0:
        raise ParameterDomainError(f"beta must lie in (1, 2], got {beta}")


def delta_k(lam, T: float, beta: float):
    """lambda T E_{beta,2}(-lambda T^beta) - E_{beta,1}(-lambda T^beta).

    ``lam`` may be an array of eigenvalues.
    """
    _check_beta(beta)
    if not T > 0.0:
        raise ParameterDomainError(f"T must be positive, got {T}")
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0.0):
        raise ParameterDomainError("eigenvalues must be positive")
    x = -lam_arr * T**beta
    out = lam_arr * T * mittag_leffler(beta, 2.0, x) - mittag_leffler(beta, 1.0, x)
    return float(out) if np.ndim(lam) == 0 else out


def delta0(T: float, beta: float) -> float:
    """Lower bound 1/(2 T^(beta-1) Gamma(2-beta)) reached by Delta_k for large lambda T^beta."""
    return 1.0 / (2.0 * T ** (beta - 1.0) * gamma(2.0 - beta))


@dataclass(frozen=True)
class DeltaAuditReport:
    T: float
    betas: np.ndarray
    min_delta: float
    argmin: tuple[int, float]
    min_per_beta: np.ndarray
    floor_per_beta: np.ndarray
    negative: tuple[tuple[int, float], ...]

    @property
    def passed(self) -> bool:
        return self.min_delta > 0.0

    @property
    def min_margin(self) -> float:
        """min over beta of (min_k Delta_k - delta0(T, beta))."""
        return float(np.min(self.min_per_beta - self.floor_per_beta))

    @property
    def above_floor(self) -> bool:
        return self.min_margin >= 0.0

    def summary(self) -> str:
        k, b = self.argmin
        return (
            f"min Delta_k(T={self.T:g}) = {self.min_delta:.6e} at k={k}, beta={b:.6g}; "
            f"margin over delta0 = {self.min_margin:.3e}"
        )


def delta_positivity_audit(eigenvalues, T: float, beta_grid) -> DeltaAuditReport:
    """Evaluate Delta_k(T, beta) for every eigenvalue and grid beta."""
    lam = np.asarray(eigenvalues, dtype=float)
    betas = np.asarray(beta_grid, dtype=float)
    table = np.array([delta_k(lam, T, b) for b in betas])  # (n_beta, K)
    i, j = np.unravel_index(int(np.argmin(table)), table.shape)
    neg = tuple((int(k) + 1, float(betas[b])) for b, k in zip(*np.nonzero(table <= 0.0)))
    return DeltaAuditReport(
        T=float(T),
        betas=betas,
        min_delta=float(table[i, j]),
        argmin=(int(j) + 1, float(betas[i])),
        min_per_beta=table.min(axis=1),
        floor_per_beta=np.array([delta0(T, b) for b in betas]),
        negative=neg,
    )


# --- truncation ------------------------------------------------------------

@dataclass(frozen=True)
class SeriesTruncation:
    """Retained modes and the data needed to bound the discarded tail.

    ``probe`` holds (lambda_k, |phi_k|, sup|v_k|) for modes beyond K whose
    coefficients were computed; ``decay`` is a fitted envelope
    |phi_k| <= A k^-p for the modes past the probe, or None when the datum is
    a finite expansion.
    """

    K: int
    tail_bound: float
    tolerance: float = DEFAULT_TOLERANCE
    t_min: float = DEFAULT_T_MIN
    probe: tuple[tuple[float, float, float], ...] = ()
    decay: tuple[float, float] | None = None
    probe_end: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise ParameterDomainError("K must be positive")
        if not self.tail_bound >= 0.0:
            raise ParameterDomainError("tail_bound must be non-negative")


def _sup_norms(basis: EigenBasis) -> np.ndarray:
    c = math.sqrt(2.0 / basis.domain.lengths[0]) if basis.domain.dim == 1 else 2.0 / math.sqrt(
        basis.domain.measure
    )
    return np.full(basis.K, c)


def _fit_decay(abs_coeffs: np.ndarray, start: int) -> tuple[float, float] | None:
    """Power-law envelope A k^-p for the trailing coefficients (k >= start)."""
    k = np.arange(start, len(abs_coeffs) + 1)
    c = abs_coeffs[start - 1 :]
    # coefficients at quadrature-noise level are treated as zero
    mask = c > COEFF_NOISE
    if mask.sum() < 2:
        return None
    # upper envelope: the fitted line is shifted to sit above every sample
    lk, lc = np.log(k[mask]), np.log(c[mask])
    slope = np.polyfit(lk, lc, 1)[0]
    p = max(-slope, 0.0)
    A = float(np.max(c[mask] * k[mask] ** p))
    return A, p


def _power_tail(A: float, p: float, n0: int) -> float:
    """Upper bound on sum_{k > n0} A k^-p."""
    if p <= 1.0:
        return math.inf
    return A * n0 ** (1.0 - p) / (p - 1.0)


def coefficient_tail(data: InitialData, basis: EigenBasis, K: int, finite: bool) -> float:
    """sup-norm bound on sum_{k > K} phi_k v_k, i.e. the tail at t = -T."""
    sup = _sup_norms(basis)
    c = np.abs(data.coefficients)
    tail = float(np.sum(c[K:] * sup[K:]))
    if not finite:
        fit = _fit_decay(c, max(1, len(c) // 2))
        if fit is not None:
            tail += sup[0] * _power_tail(fit[0], fit[1], len(c))
        elif np.any(c[len(c) // 2 :] > COEFF_NOISE):
            # too few trailing coefficients to fit an envelope
            tail = math.inf
    return tail


def choose_truncation(
    data: InitialData,
    basis: EigenBasis,
    *,
    K: int | None = None,
    finite: bool = False,
    tolerance: float = DEFAULT_TOLERANCE,
    t_min: float = DEFAULT_T_MIN,
) -> SeriesTruncation:
    """Pick K (smallest with tail <= tolerance unless fixed) from probe coefficients."""
    n = min(basis.K, data.K)
    c = np.abs(data.coefficients[:n])
    if K is None:
        K = n
        for cand in range(1, n + 1):
            if coefficient_tail(data, basis, cand, finite) <= tolerance:
                K = cand
                break
    if not 1 <= K <= n:
        raise ParameterDomainError(f"K must lie in 1..{n}, got {K}")
    tail = coefficient_tail(data, basis, K, finite)
    if tail > tolerance:
        log.warning("truncation tail %.3e exceeds tolerance %.1e with K=%d", tail, tolerance, K)
    sup = _sup_norms(basis)
    probe = tuple((float(basis.eigenvalues[i]), float(c[i]), float(sup[i])) for i in range(K, n))
    decay = None if finite else _fit_decay(c, max(1, n // 2))
    if not finite and decay is None and math.isinf(tail):
        decay = (math.inf, 0.0)
    return SeriesTruncation(K, tail, tolerance, t_min, probe, decay, n)


# --- problem setup ---------------------------------------------------------

@dataclass(frozen=True)
class ProblemSetup:
    """Audited problem data. Build with :func:`build_setup`."""

    basis: EigenBasis
    data: InitialData
    T: float
    truncation: SeriesTruncation
    box: OrderBox
    audit: DeltaAuditReport
    ml_constants: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.truncation.K

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.basis.eigenvalues

    @property
    def coefficients(self) -> np.ndarray:
        return self.data.coefficients

    def deltas(self, beta: float, T: float | None = None) -> np.ndarray:
        return delta_k(self.eigenvalues, self.T if T is None else T, beta)


def build_setup(
    basis: EigenBasis,
    data: InitialData,
    T: float,
    box: OrderBox,
    *,
    K: int | None = None,
    finite: bool | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    t_min: float = DEFAULT_T_MIN,
    audit_points: int = AUDIT_POINTS,
    audit: bool = True,
) -> ProblemSetup:
    """Truncate, then audit Delta_k(T, beta) > 0 over the beta box.

    ``basis``/``data`` may carry more modes than will be retained; the extra
    ones feed the tail bound. ``finite`` marks data given as a finite
    expansion (default: inferred from a missing ``phi`` quadrature error).

    Raises :class:`NonUniquenessError` when some retained Delta_k <= 0.
    """
    if not T > 0.0:
        raise ParameterDomainError(f"T must be positive, got {T}")
    if not np.any(np.abs(data.coefficients) > 0.0):
        raise DegenerateDataError("initial datum vanishes identically")
    if finite is None:
        finite = data.label in ("coefficients", "sine")
    trunc = choose_truncation(data, basis, K=K, finite=finite, tolerance=tolerance, t_min=t_min)
    kept_basis = basis.restrict(trunc.K)
    kept_data = InitialData(
        data.coefficients[: trunc.K].copy(), data.phi, data.label, data.quadrature_error, data.meta
    )
    report = delta_positivity_audit(kept_basis.eigenvalues, T, box.beta_grid(audit_points))
    if audit and not report.passed:
        k, b = report.argmin
        raise NonUniquenessError(
            f"Delta_{k}(T={T:g}, beta={b:.4g}) = {report.min_delta:.3e} <= 0: "
            "the forward problem may have more than one solution; increase T",
            report,
        )
    constants = {
        "C_beta1": max(ml_decay_constant(float(b), 1.0) for b in (box.beta1, box.beta2)),
        "C_beta2": max(ml_decay_constant(float(b), 2.0) for b in (box.beta1, box.beta2)),
        "C_alpha1": max(ml_decay_constant(float(a), 1.0) for a in (box.alpha1, 0.999)),
    }
    return ProblemSetup(kept_basis, kept_data, float(T), trunc, box, report, constants)


# --- per-mode solution -----------------------------------------------------

@dataclass(frozen=True)
class ModeState:
    k: int
    lam: float
    phi_k: float
    delta_k: float
    w_minus0: float
    w_prime_minus0: float
    w_plus0: float
    T: float


def solve_mode(k: int, lam: float, phi_k: float, T: float, beta: float) -> ModeState:
    """Solve {lam w + w' = 0; E1 w + T E2 w' = phi_k} by Cramer's rule."""
    y = lam * T**beta
    e1 = mittag_leffler(beta, 1.0, -y)
    e2 = mittag_leffler(beta, 2.0, -y)
    det = lam * T * e2 - e1
    if abs(det) < SINGULAR_FLOOR:
        raise SingularSystemError(f"gluing system for mode {k} is singular (Delta = {det:.3e})")
    w = -phi_k / det
    wp = lam * phi_k / det
    return ModeState(k, lam, phi_k, det, w, wp, w, T)


def solve_gluing(setup: ProblemSetup, orders: FractionalOrders) -> list[ModeState]:
    lam = setup.eigenvalues
    phi = setup.coefficients
    return [
        solve_mode(k + 1, float(lam[k]), float(phi[k]), setup.T, orders.beta)
        for k in range(setup.K)
    ]


def _alpha_branch(alpha: float, y):
    # alpha = 1 test hook: E_{1,1}(-y) = exp(-y)
    if alpha == 1.0:
        return np.exp(-np.asarray(y, dtype=float))
    return mittag_leffler(alpha, 1.0, -np.asarray(y, dtype=float))


def mode_trajectory(m: ModeState, alpha: float, beta: float, t):
    """w_k(t) for t >= -T (scalar or array)."""
    if isinstance(alpha, FractionalOrders):
        alpha, beta = alpha.alpha, alpha.beta
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < -m.T * (1.0 + 1e-14)):
        raise ParameterDomainError(f"t must be >= -T = {-m.T}")
    out = np.full(t_arr.shape, m.w_minus0)
    pos = t_arr > 0.0
    neg = t_arr < 0.0
    if np.any(pos):
        out[pos] = m.w_plus0 * _alpha_branch(alpha, m.lam * t_arr[pos] ** alpha)
    if np.any(neg):
        s = -t_arr[neg]
        y = m.lam * s**beta
        out[neg] = m.w_minus0 * mittag_leffler(beta, 1.0, -y) + m.w_prime_minus0 * s * mittag_leffler(
            beta, 2.0, -y
        )
    return float(out[0]) if np.ndim(t) == 0 else out


def mode_coefficients_at(setup: ProblemSetup, alpha: float, beta: float, t: float) -> np.ndarray:
    """Vector of w_k(t), k = 1..K, evaluated without building ModeState objects."""
    lam = setup.eigenvalues
    phi = setup.coefficients
    den = delta_k(lam, setup.T, beta)
    if np.any(np.abs(den) < SINGULAR_FLOOR):
        raise SingularSystemError("singular gluing system")
    if t > 0.0:
        return -phi / den * _alpha_branch(alpha, lam * t**alpha)
    if t == 0.0:
        return -phi / den
    if -t > setup.T * (1.0 + 1e-14):
        raise ParameterDomainError(f"t must be >= -T = {-setup.T}")
    if -t >= setup.T:
        return phi.copy()
    return phi * delta_k(lam, -t, beta) / den


# --- solution and tail bound -----------------------------------------------

@dataclass(frozen=True)
class SolutionValue:
    value: np.ndarray | float
    tail_bound: float
    near_gluing_line: bool = False


def tail_bound(setup: ProblemSetup, alpha: float, beta: float, t: float) -> float:
    """Uniform-norm bound on the modes discarded beyond K at time t.

    Per mode |w_k(t)| <= |phi_k| G_k(t) / |Delta_k(T)| with G_k built from
    |E_{rho,mu}(-y')| <= C(y)/(1+y') for y' >= y (calibrated envelope).
    Probe modes use their exact Delta_k; past them the floor
    min(delta0(T), probe Delta) and the fitted coefficient envelope are used.
    """
    tr = setup.truncation
    if not tr.probe and tr.decay is None:
        return 0.0
    T = setup.T
    if t <= -T:
        return tr.tail_bound
    lam = np.array([p[0] for p in tr.probe])
    amp = np.array([p[1] for p in tr.probe])
    sup = np.array([p[2] for p in tr.probe])

    def gain(lv):
        lv = np.asarray(lv, dtype=float)
        if t > 0.0:
            if alpha == 1.0:
                return np.exp(-lv * t)
            y = lv * t**alpha
            return ml_decay_envelope(alpha, 1.0, y) / (1.0 + y)
        if t == 0.0:
            return np.ones_like(lv)
        s = -t
        y = lv * s**beta
        return (ml_decay_envelope(beta, 2.0, y) * lv * s + ml_decay_envelope(beta, 1.0, y)) / (1.0 + y)

    floor = delta0(T, beta)
    total = 0.0
    lam_last = float(setup.eigenvalues[-1])
    if lam.size:
        d = delta_k(lam, T, beta)
        total += float(np.sum(amp * sup * gain(lam) / np.abs(d)))
        floor = min(floor, float(np.min(np.abs(d))))
        lam_last = float(lam[-1])
    if tr.decay is not None:
        A, p = tr.decay
        sup0 = _sup_norms(setup.basis)[0]
        if t < 0.0:
            # lambda s / (1 + lambda s^beta) <= s^(1 - beta) for every later mode
            s = -t
            y = lam_last * s**beta
            g = ml_decay_envelope(beta, 2.0, y) * s ** (1.0 - beta) + ml_decay_envelope(beta, 1.0, y) / (1.0 + y)
        else:
            g = float(gain(lam_last))
        total += sup0 * g / floor * _power_tail(A, p, tr.probe_end)
    return total


def evaluate_solution(setup: ProblemSetup, orders: FractionalOrders, x, t: float) -> SolutionValue:
    """Truncated series sum_k w_k(t) v_k(x) with its tail bound."""
    w = mode_coefficients_at(setup, orders.alpha, orders.beta, t)
    V = setup.basis.evaluate_all(x)
    value = np.tensordot(w, V, axes=1)
    near = 0.0 < abs(t) < setup.truncation.t_min
    if near:
        log.warning("evaluation at |t| = %.3g < t_min: tail bound degrades near t = 0", abs(t))
    out = float(value) if np.ndim(value) == 0 else value
    return SolutionValue(out, tail_bound(setup, orders.alpha, orders.beta, t), near)


def solution_grid(setup: ProblemSetup, orders: FractionalOrders, times, n_points: int = 65):
    """Long-format rows (x..., t, u) over a uniform spatial grid."""
    pts = setup.basis.domain.grid(n_points)
    V = setup.basis.evaluate_all(pts)
    on_boundary = _boundary_mask(setup, pts)
    rows = []
    for t in times:
        w = mode_coefficients_at(setup, orders.alpha, orders.beta, float(t))
        u = np.tensordot(w, V, axes=1)
        u[on_boundary] = 0.0
        for p, val in zip(pts, u):
            rows.append((*np.atleast_1d(p), float(t), float(val)))
    return rows


def _boundary_mask(setup: ProblemSetup, pts: np.ndarray) -> np.ndarray:
    L = setup.basis.domain.lengths
    if setup.basis.domain.dim == 1:
        return (pts == 0.0) | (pts == L[0])
    return (pts[:, 0] == 0.0) | (pts[:, 0] == L[0]) | (pts[:, 1] == 0.0) | (pts[:, 1] == L[1])


# --- observables -----------------------------------------------------------

def norm_functional_W(setup: ProblemSetup, alpha: float, beta: float, t1: float) -> float:
    """W(alpha, beta) = int |u(x, t1)|^2 dx = sum_k [E_{alpha,1}(-lambda_k t1^alpha) phi_k / Delta_k]^2.

    ``alpha = 1`` is accepted and uses exp(-lambda t1).
    """
    if not t1 > 0.0:
        raise ParameterDomainError(f"t1 must be positive, got {t1}")
    if not 0.0 < alpha <= 1.0:
        raise ParameterDomainError(f"alpha must lie in (0, 1], got {alpha}")
    lam = setup.eigenvalues
    e = _alpha_branch(alpha, lam * t1**alpha)
    r = setup.coefficients / delta_k(lam, setup.T, beta)
    return float(np.sum((e * r) ** 2))


def hyperbolic_norm(setup: ProblemSetup, beta: float, t2: float) -> float:
    """int |u(x, -t2)|^2 dx = sum_k [phi_k Delta_k(t2) / Delta_k(T)]^2; depends on beta only."""
    _check_t2(setup, t2)
    lam = setup.eigenvalues
    w = setup.coefficients * delta_k(lam, t2, beta) / delta_k(lam, setup.T, beta)
    return float(np.sum(w**2))


def parabolic_coefficient(setup: ProblemSetup, alpha: float, beta: float, t1: float, k0: int) -> float:
    """int u(x, t1) v_k0(x) dx = -phi_k0 E_{alpha,1}(-lambda t1^alpha) / Delta_k0(T)."""
    if not t1 > 0.0:
        raise ParameterDomainError(f"t1 must be positive, got {t1}")
    lam = float(setup.eigenvalues[k0 - 1])
    e = float(_alpha_branch(alpha, lam * t1**alpha))
    return -setup.coefficients[k0 - 1] * e / delta_k(lam, setup.T, beta)


def _check_t2(setup: ProblemSetup, t2: float) -> None:
    if not 0.0 < t2 <= setup.T:
        raise ParameterDomainError(f"t2 must lie in (0, T], got {t2}")


def ratio_P(setup: ProblemSetup, beta: float, t2: float, k0: int) -> float:
    """Delta_k0(t2, beta) / Delta_k0(T, beta); P phi_k0 is the k0-th coefficient of u(., -t2)."""
    _check_t2(setup, t2)
    if not 1 <= k0 <= setup.K:
        raise ParameterDomainError(f"k0 must lie in 1..{setup.K}, got {k0}")
    lam = float(setup.eigenvalues[k0 - 1])
    den = delta_k(lam, setup.T, beta)
    if abs(den) < SINGULAR_FLOOR:
        raise SingularSystemError(f"Delta_{k0}(T, {beta}) = {den:.3e} is below the division floor")
    return delta_k(lam, t2, beta) / den


def wronskian_test_V(p, p_prime, q, q_prime):
    """V(p, q) = p' q - p q'. For q > 0, sign V = sign (p/q)'."""
    return np.asarray(p_prime) * np.asarray(q) - np.asarray(p) * np.asarray(q_prime)
