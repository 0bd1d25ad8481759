"""L1 finite-difference Caputo derivatives.

Used only to check that the mode trajectories of the forward solver satisfy
their fractional ODEs; never part of the solution path.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ParameterDomainError
from .forward import ModeState
from .special import mittag_leffler

log = logging.getLogger(__name__)

RICHARDSON_TOL = 1e-4
DEFAULT_T_MIN = 1e-3


class CoarseGridWarning(UserWarning):
    """The Richardson error estimate of an L1 derivative exceeds tolerance."""


@dataclass(frozen=True)
class CaputoGrid:
    t0: float
    t_end: float
    n_steps: int
    samples: np.ndarray

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ParameterDomainError("n_steps must be a positive integer")
        if not self.t_end > self.t0:
            raise ParameterDomainError("need t_end > t0")
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.n_steps + 1,):
            raise ParameterDomainError(f"expected {self.n_steps + 1} samples, got {s.shape}")
        object.__setattr__(self, "samples", s)

    @property
    def h(self) -> float:
        return (self.t_end - self.t0) / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    @classmethod
    def sample(cls, f, t0: float, t_end: float, n_steps: int) -> "CaputoGrid":
        t = t0 + (t_end - t0) / n_steps * np.arange(n_steps + 1)
        return cls(t0, t_end, n_steps, np.asarray(f(t), dtype=float))

    def coarsen(self) -> "CaputoGrid":
        if self.n_steps % 2:
            raise ParameterDomainError("cannot coarsen an odd grid")
        return CaputoGrid(self.t0, self.t_end, self.n_steps // 2, self.samples[::2])


def _l1(samples: np.ndarray, order: float, h: float) -> np.ndarray:
    return np.asarray(kernels.caputo_l1(np.diff(samples), order, h))


def caputo_alpha(g: CaputoGrid, alpha: float) -> np.ndarray:
    """L1 approximation of D^alpha f at t_1..t_n, 0 < alpha < 1.

    Consistency O(h^(2-alpha)) for smooth f.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterDomainError(f"alpha must lie in (0, 1), got {alpha}")
    return _l1(g.samples, alpha, g.h)


def caputo_beta(g: CaputoGrid, beta: float, f_prime0: float | None = None) -> np.ndarray:
    """D^beta f at t_1..t_n, 1 < beta < 2.

    L1 of order beta - 1 applied to f', sampled at the nodes by central
    differences (one-sided second order at the last node). Exact for
    quadratics; consistency O(h^(3-beta)) for smooth f. Without ``f_prime0``
    a one-sided second-order difference is used at t0.
    """
    if not 1.0 < beta < 2.0:
        raise ParameterDomainError(f"beta must lie in (1, 2), got {beta}")
    f = g.samples
    h = g.h
    if g.n_steps < 2:
        raise ParameterDomainError("need at least two steps")
    if f_prime0 is None:
        f_prime0 = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    d = np.empty_like(f)
    d[0] = f_prime0
    d[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    d[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return _l1(d, beta - 1.0, h)


def richardson_estimate(g: CaputoGrid, order: float, derivative) -> float:
    """Max difference between the fine and the coarsened result at shared nodes."""
    if g.n_steps % 2:
        return math.nan
    fine = derivative(g)
    coarse = derivative(g.coarsen())
    return float(np.max(np.abs(fine[1::2] - coarse)))


def checked_caputo(g: CaputoGrid, order: float, tol: float = RICHARDSON_TOL, **kw) -> np.ndarray:
    """Caputo derivative of either kind with a coarse-grid warning."""
    if order < 1.0:
        def derivative(grid):
            return caputo_alpha(grid, order)
    else:
        def derivative(grid):
            return caputo_beta(grid, order, **kw)
    est = richardson_estimate(g, order, derivative)
    if est > tol:
        warnings.warn(
            f"Richardson estimate {est:.2e} exceeds {tol:.1e}; refine the grid",
            CoarseGridWarning,
            stacklevel=2,
        )
    return derivative(g)


# --- mode ODE residuals ----------------------------------------------------

def branch_grid(m: ModeState, alpha: float, beta: float, branch: str, t_end: float, n_steps: int) -> CaputoGrid:
    """Sample a mode on [0, t_end] in the branch's own time variable.

    ``parabolic``: w(t), t >= 0. ``hyperbolic``: W(s) = w(-s), 0 <= s <= t_end <= T,
    so the right-endpoint derivative on (-T, 0) becomes an ordinary Caputo
    derivative in s.
    """
    s = t_end / n_steps * np.arange(n_steps + 1)
    if branch == "parabolic":
        if alpha == 1.0:
            vals = m.w_plus0 * np.exp(-m.lam * s)
        else:
            vals = m.w_plus0 * mittag_leffler(alpha, 1.0, -m.lam * s**alpha)
    elif branch == "hyperbolic":
        if t_end > m.T * (1.0 + 1e-14):
            raise ParameterDomainError("hyperbolic grid must stay within [-T, 0]")
        y = -m.lam * s**beta
        vals = m.w_minus0 * mittag_leffler(beta, 1.0, y) + m.w_prime_minus0 * s * mittag_leffler(beta, 2.0, y)
    else:
        raise ParameterDomainError(f"unknown branch {branch!r}")
    return CaputoGrid(0.0, t_end, n_steps, vals)


def ode_residual(
    m: ModeState,
    alpha: float,
    beta: float,
    lam: float,
    branch: str,
    grid: CaputoGrid,
    t_min: float = DEFAULT_T_MIN,
) -> float:
    """max |D w + lam w| over grid nodes with time >= t_min.

    On the hyperbolic branch W'(0) = w'(-0) is supplied to the scheme exactly.
    """
    if branch == "parabolic":
        d = caputo_alpha(grid, alpha)
    elif branch == "hyperbolic":
        d = caputo_beta(grid, beta, f_prime0=m.w_prime_minus0)
    else:
        raise ParameterDomainError(f"unknown branch {branch!r}")
    t = grid.times[1:]
    r = np.abs(d + lam * grid.samples[1:])
    mask = t >= t_min
    return float(np.max(r[mask])) if np.any(mask) else 0.0


def convergence_order(errors, ns) -> np.ndarray:
    """Observed rates log2(e_i / e_{i+1}) / log2(n_{i+1} / n_i)."""
    e = np.asarray(errors, dtype=float)
    n = np.asarray(ns, dtype=float)
    return np.log(e[:-1] / e[1:]) / np.log(n[1:] / n[:-1])
