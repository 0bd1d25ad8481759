"""Pure-Python kernels.

Reference implementation of the hot loops; ``fracmix._kernels`` (Cython) mirrors
these functions one for one and is preferred when it has been compiled.

Status codes returned by :func:`ml_eval`:

* ``0`` converged
* ``1`` series did not converge within the term budget
* ``2`` no admissible contour found
"""

from __future__ import annotations

import cmath
import math

import numpy as np

TWO_PI = 2.0 * math.pi

# target log-accuracy of the contour quadrature
LOG_TOL = math.log(1e-15)
# largest parabola parameter; rounding error grows like eps * exp(m)
M_MAX = 6.0
M_MIN = 1e-2
N_M = 32
N_MAX = 2000

SERIES_MAX_ARG = 5.0
SERIES_MAX_TERM = 1e2
SERIES_MAX_N = 2000


def ml_series(rho: float, mu: float, x: float) -> tuple[float, int]:
    """Compensated Taylor sum of E_{rho,mu}(x) for x <= 0.

    Returns ``(value, status)``; status 1 means the terms grew past
    ``SERIES_MAX_TERM`` or the term budget ran out.
    """
    ax = -x
    if ax == 0.0:
        return (1.0 / math.gamma(mu) if mu > 0.0 else 0.0), 0
    lax = math.log(ax)
    s = 0.0
    comp = 0.0
    peaked = False
    prev = math.inf
    for n in range(SERIES_MAX_N):
        arg = rho * n + mu
        if arg <= 0.0 and arg == math.floor(arg):
            mag = 0.0
        else:
            lt = n * lax - math.lgamma(arg)
            if lt > math.log(SERIES_MAX_TERM):
                return math.nan, 1
            mag = math.exp(lt)
            if arg < 0.0 and math.floor(arg) % 2 != 0:
                mag = -mag
        term = -mag if n % 2 else mag
        # Neumaier summation
        t = s + term
        if abs(s) >= abs(term):
            comp += (s - t) + term
        else:
            comp += (term - t) + s
        s = t
        a = abs(term)
        if n > 0 and a < prev:
            peaked = True
        prev = a
        if peaked and a < 1e-18 * max(1.0, abs(s)):
            return s + comp, 0
    return math.nan, 1


def pole_phi(rho: float, ax: float) -> float:
    """(Re sqrt(s*))^2 for the pole pair s* of the Laplace transform, rho > 1."""
    r = ax ** (1.0 / rho)
    return 0.5 * r * (1.0 + math.cos(math.pi / rho))


def _left_rate(m: float, c_l: float, p: float) -> float:
    # smallest 2*pi/h keeping the error from the inner (narrow) side below LOG_TOL
    best = math.inf
    for frac in (0.5, 0.65, 0.8, 0.9):
        c = frac * c_l
        w = m * (1.0 - c) ** 2
        sing = p * max(0.0, -math.log(max(w, 1e-300)))
        a = (w + sing - LOG_TOL) / c
        if a < best:
            best = a
    return best


def _right_rate(m: float, c_r: float) -> float:
    c = min(c_r, math.sqrt(1.0 - LOG_TOL / m))
    return (m * (1.0 + c) ** 2 - LOG_TOL) / c


def contour_params(rho: float, mu: float, ax: float) -> tuple[float, float, int, int]:
    """Choose the parabola ``z(u) = m (1 + iu)^2``, step and node count.

    Returns ``(m, h, N, with_residues)``; ``N < 0`` when nothing is admissible.
    """
    p = max(0.0, mu - rho)
    phi_p = pole_phi(rho, ax) if rho > 1.0 else 0.0
    best_n = N_MAX + 1
    best = (0.0, 0.0, -1, 0)
    ratio = M_MAX / M_MIN
    for i in range(N_M):
        m = M_MIN * ratio ** (i / (N_M - 1))
        u_max = math.sqrt(1.0 - (LOG_TOL - 2.0) / m)
        # poles enclosed by the parabola
        if phi_p < m:
            c_l = 1.0 - math.sqrt(phi_p / m)
            if c_l >= 0.05:
                a = max(_left_rate(m, c_l, p), _right_rate(m, math.inf))
                n = int(math.ceil(u_max * a / TWO_PI))
                if n < best_n:
                    best_n = n
                    best = (m, TWO_PI / a, n, 0)
        # poles to the right of the parabola, added back as residues
        if phi_p > m:
            c_r = 0.9 * (math.sqrt(phi_p / m) - 1.0)
            if c_r >= 0.05:
                a = max(_left_rate(m, 1.0, p), _right_rate(m, c_r))
                n = int(math.ceil(u_max * a / TWO_PI))
                if n < best_n:
                    best_n = n
                    best = (m, TWO_PI / a, n, 1)
    return best


def ml_contour(rho: float, mu: float, x: float) -> tuple[float, int]:
    """E_{rho,mu}(x), x < 0, by trapezoidal inversion of the Laplace transform
    s^(rho-mu) / (s^rho - x) along a parabolic contour."""
    ax = -x
    m, h, n_nodes, with_res = contour_params(rho, mu, ax)
    if n_nodes < 0:
        return math.nan, 2
    e = rho - mu
    acc = 0.0
    for k in range(n_nodes + 1):
        u = k * h
        w = complex(1.0, u)
        z = m * w * w
        dz = 2j * m * w
        lz = cmath.log(z)
        g = cmath.exp(z + e * lz) / (cmath.exp(rho * lz) + ax) * dz
        acc += g.imag if k == 0 else 2.0 * g.imag
    val = h * acc / TWO_PI
    if with_res:
        r = ax ** (1.0 / rho)
        s = cmath.rect(r, math.pi / rho)
        val += (2.0 / rho) * (cmath.exp((1.0 - mu) * cmath.log(s) + s)).real
    return val, 0


def ml_eval(rho: float, mu: float, x: float) -> tuple[float, int]:
    """Scalar E_{rho,mu}(x) for x <= 0, no argument checking."""
    if x == 0.0:
        return (1.0 / math.gamma(mu) if mu > 0.0 else 0.0), 0
    if -x <= SERIES_MAX_ARG:
        val, status = ml_series(rho, mu, x)
        if status == 0:
            return val, 0
    return ml_contour(rho, mu, x)


def ml_eval_array(rho: float, mu: float, x: np.ndarray) -> tuple[np.ndarray, int]:
    out = np.empty(x.shape, dtype=float)
    worst = 0
    flat = out.reshape(-1)
    for i, xi in enumerate(np.asarray(x, dtype=float).reshape(-1)):
        flat[i], st = ml_eval(rho, mu, float(xi))
        worst = max(worst, st)
    return out, worst


def l1_weights(order: float, n: int) -> np.ndarray:
    """b_j = (j+1)^(1-order) - j^(1-order), j = 0..n-1."""
    j = np.arange(n + 1, dtype=float)
    p = j ** (1.0 - order)
    return p[1:] - p[:-1]


def caputo_l1(increments: np.ndarray, order: float, h: float) -> np.ndarray:
    """L1 sum D_n = h^-order / Gamma(2-order) * sum_{j<n} b_j d_{n-j}.

    ``increments[i]`` is f(t_{i+1}) - f(t_i); returns D at t_1..t_n.
    """
    d = np.asarray(increments, dtype=float)
    n = d.size
    b = l1_weights(order, n)
    conv = np.convolve(b, d)[:n]
    return conv * h ** (-order) / math.gamma(2.0 - order)
