"""Dirichlet eigenpairs of the Laplacian on an interval or a rectangle, and
Fourier coefficients of the initial datum in that basis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    BoundaryCompatibilityError,
    DegenerateDataError,
    ParameterDomainError,
    QuadratureError,
)

QUAD_TOL = 1e-12
BOUNDARY_TOL = 1e-10
DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    lengths: tuple[float, ...]

    def __post_init__(self):
        lengths = tuple(float(v) for v in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        if self.kind == "interval":
            if len(lengths) != 1:
                raise ParameterDomainError("an interval takes one length")
        elif self.kind == "rectangle":
            if len(lengths) != 2:
                raise ParameterDomainError("a rectangle takes two lengths")
        else:
            raise ParameterDomainError(f"unknown domain kind {self.kind!r}")
        if not all(v > 0.0 and math.isfinite(v) for v in lengths):
            raise ParameterDomainError(f"domain lengths must be positive, got {lengths}")

    @property
    def dim(self) -> int:
        return len(self.lengths)

    @property
    def measure(self) -> float:
        return float(np.prod(self.lengths))

    @classmethod
    def interval(cls, L: float) -> "DomainSpec":
        return cls("interval", (L,))

    @classmethod
    def rectangle(cls, Lx: float, Ly: float) -> "DomainSpec":
        return cls("rectangle", (Lx, Ly))

    def boundary_points(self, n: int = 64) -> np.ndarray:
        if self.kind == "interval":
            return np.array([0.0, self.lengths[0]])
        Lx, Ly = self.lengths
        s = np.linspace(0.0, 1.0, n)
        edges = [
            np.column_stack([s * Lx, np.zeros(n)]),
            np.column_stack([s * Lx, np.full(n, Ly)]),
            np.column_stack([np.zeros(n), s * Ly]),
            np.column_stack([np.full(n, Lx), s * Ly]),
        ]
        return np.vstack(edges)

    def grid(self, n: int) -> np.ndarray:
        """Uniform closed grid: shape (n,) for an interval, (n*n, 2) for a rectangle."""
        if self.kind == "interval":
            return np.linspace(0.0, self.lengths[0], n)
        gx = np.linspace(0.0, self.lengths[0], n)
        gy = np.linspace(0.0, self.lengths[1], n)
        X, Y = np.meshgrid(gx, gy, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])


@dataclass(frozen=True)
class EigenBasis:
    """First K Dirichlet eigenpairs, eigenvalues sorted ascending.

    ``indices[k]`` is the wave-number tuple of mode k+1: ``(m,)`` on an
    interval, ``(m, n)`` on a rectangle.
    """

    domain: DomainSpec
    eigenvalues: np.ndarray
    indices: tuple[tuple[int, ...], ...]

    @property
    def K(self) -> int:
        return len(self.eigenvalues)

    def _check_k(self, k: int) -> None:
        if not 1 <= k <= self.K:
            raise ParameterDomainError(f"mode index must lie in 1..{self.K}, got {k}")

    def evaluate(self, k: int, x) -> np.ndarray:
        """v_k(x); ``x`` is a scalar/array on an interval or (..., 2) points on a rectangle."""
        self._check_k(k)
        return self._eval(self.indices[k - 1], np.asarray(x, dtype=float))

    def evaluate_all(self, x) -> np.ndarray:
        """Matrix V with V[k-1, j] = v_k(x_j)."""
        x = np.asarray(x, dtype=float)
        return np.array([self._eval(idx, x) for idx in self.indices])

    def _eval(self, idx: tuple[int, ...], x: np.ndarray) -> np.ndarray:
        if self.domain.kind == "interval":
            L = self.domain.lengths[0]
            return math.sqrt(2.0 / L) * np.sin(idx[0] * math.pi * x / L)
        Lx, Ly = self.domain.lengths
        m, n = idx
        return (
            2.0
            / math.sqrt(Lx * Ly)
            * np.sin(m * math.pi * x[..., 0] / Lx)
            * np.sin(n * math.pi * x[..., 1] / Ly)
        )

    def restrict(self, K: int) -> "EigenBasis":
        if not 1 <= K <= self.K:
            raise ParameterDomainError(f"cannot restrict {self.K} modes to {K}")
        return EigenBasis(self.domain, self.eigenvalues[:K].copy(), self.indices[:K])


def build_basis(domain: DomainSpec, K: int) -> EigenBasis:
    if int(K) != K or K < 1:
        raise ParameterDomainError(f"K must be a positive integer, got {K}")
    K = int(K)
    if domain.kind == "interval":
        L = domain.lengths[0]
        ks = np.arange(1, K + 1)
        lam = (ks * math.pi / L) ** 2
        return EigenBasis(domain, lam, tuple((int(k),) for k in ks))
    Lx, Ly = domain.lengths
    # every one of the K smallest eigenvalues has m <= K and n <= K
    pairs = [(m, n) for m in range(1, K + 1) for n in range(1, K + 1)]
    lam = [(m * math.pi / Lx) ** 2 + (n * math.pi / Ly) ** 2 for m, n in pairs]
    order = sorted(range(len(pairs)), key=lambda i: (lam[i], pairs[i]))[:K]
    return EigenBasis(
        domain,
        np.array([lam[i] for i in order]),
        tuple(pairs[i] for i in order),
    )


@dataclass(frozen=True)
class InitialData:
    """Initial datum phi and its coefficients phi_k = (phi, v_k), k = 1..K."""

    coefficients: np.ndarray
    phi: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = ""
    quadrature_error: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.coefficients)

    def coefficient(self, k: int) -> float:
        return float(self.coefficients[k - 1])


def _vectorized(phi: Callable, dim: int) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap ``phi`` so it maps an array of points to an array of values."""

    def f(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape if dim == 1 else x.shape[:-1]
        try:
            out = np.asarray(phi(x), dtype=float)
            if out.shape == shape:
                return out
        except (TypeError, ValueError):
            pass
        pts = x.reshape(-1) if dim == 1 else x.reshape(-1, dim)
        return np.array([float(phi(p)) for p in pts]).reshape(shape)

    return f


def check_boundary(domain: DomainSpec, phi: Callable, tol: float = BOUNDARY_TOL) -> float:
    """Max |phi| on the boundary; raises when it exceeds ``tol`` times max |phi|."""
    f = _vectorized(phi, domain.dim)
    bvals = np.abs(f(domain.boundary_points()))
    scale = max(1.0, float(np.max(np.abs(f(domain.grid(65))))))
    worst = float(np.max(bvals))
    if worst > tol * scale:
        raise BoundaryCompatibilityError(
            f"initial datum does not vanish on the boundary (max |phi| = {worst:.3e})"
        )
    return worst


def _interval_coefficients(basis: EigenBasis, phi: Callable) -> tuple[np.ndarray, float]:
    L = basis.domain.lengths[0]
    scalar = lambda s: float(np.asarray(phi(np.float64(s))))  # noqa: E731
    out = np.empty(basis.K)
    worst = 0.0
    for i, (k,) in enumerate(basis.indices):
        val, err = integrate.quad(
            scalar, 0.0, L, weight="sin", wvar=k * math.pi / L,
            epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200,
        )
        if not math.isfinite(val) or err > 1e-10:
            raise QuadratureError(f"quadrature for mode {k} did not converge (error {err:.2e})")
        out[i] = math.sqrt(2.0 / L) * val
        worst = max(worst, err)
    return out, worst


def _rectangle_coefficients(basis: EigenBasis, phi: Callable) -> tuple[np.ndarray, float]:
    """Tensor Gauss-Legendre panels, doubled until successive results agree."""
    f = _vectorized(phi, 2)
    Lx, Ly = basis.domain.lengths
    mmax = max(idx[0] for idx in basis.indices)
    nmax = max(idx[1] for idx in basis.indices)
    nodes, weights = np.polynomial.legendre.leggauss(16)

    def rule(length, panels):
        edges = np.linspace(0.0, length, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        w = (half[:, None] * weights[None, :]).ravel()
        return x, w

    prev = None
    px, py = max(2, mmax), max(2, nmax)
    for _ in range(8):
        x, wx = rule(Lx, px)
        y, wy = rule(Ly, py)
        X, Y = np.meshgrid(x, y, indexing="ij")
        F = f(np.stack([X, Y], axis=-1)) * np.outer(wx, wy)
        sx = {m: np.sin(m * math.pi * x / Lx) for m in range(1, mmax + 1)}
        sy = {n: np.sin(n * math.pi * y / Ly) for n in range(1, nmax + 1)}
        c = 2.0 / math.sqrt(Lx * Ly)
        cur = np.array([c * sx[m] @ F @ sy[n] for m, n in basis.indices])
        if prev is not None:
            err = float(np.max(np.abs(cur - prev)))
            if err <= 1e-11:
                return cur, err
        prev = cur
        px, py = 2 * px, 2 * py
    raise QuadratureError("rectangle quadrature did not converge")


def fourier_coefficients(basis: EigenBasis, phi: Callable, *, check: bool = True, label: str = "") -> InitialData:
    """Project ``phi`` onto the basis.

    ``phi`` takes a point (scalar on an interval, length-2 array on a
    rectangle) and ideally accepts numpy arrays as well.
    """
    if check:
        check_boundary(basis.domain, phi)
    if basis.domain.kind == "interval":
        coeffs, err = _interval_coefficients(basis, phi)
    else:
        coeffs, err = _rectangle_coefficients(basis, phi)
    if check and np.max(np.abs(coeffs)) <= DEGENERATE_TOL:
        samples = _vectorized(phi, basis.domain.dim)(basis.domain.grid(65))
        if np.max(np.abs(samples)) <= DEGENERATE_TOL:
            raise DegenerateDataError("initial datum vanishes identically")
    return InitialData(coeffs, phi, label, err)


def from_coefficients(basis: EigenBasis, coefficients: Sequence[float], label: str = "coefficients") -> InitialData:
    """Initial datum given as a finite eigen-expansion; padded with zeros to K."""
    c = np.asarray(coefficients, dtype=float).ravel()
    if c.size > basis.K:
        raise ParameterDomainError(f"{c.size} coefficients given but only {basis.K} modes retained")
    if not np.all(np.isfinite(c)):
        raise ParameterDomainError("coefficients must be finite")
    if np.max(np.abs(c), initial=0.0) <= DEGENERATE_TOL:
        raise DegenerateDataError("initial datum vanishes identically")
    full = np.zeros(basis.K)
    full[: c.size] = c

    def phi(x):
        x = np.asarray(x, dtype=float)
        V = basis.evaluate_all(x)
        return np.tensordot(full, V, axes=1)

    return InitialData(full, phi, label)


# --- named data ------------------------------------------------------------

def _parabola(domain: DomainSpec, scale: float = 1.0):
    if domain.kind == "interval":
        L = domain.lengths[0]
        return lambda x: scale * np.asarray(x) * (L - np.asarray(x))
    Lx, Ly = domain.lengths
    return lambda p: scale * np.asarray(p)[..., 0] * (Lx - np.asarray(p)[..., 0]) * np.asarray(p)[..., 1] * (Ly - np.asarray(p)[..., 1])


def _quartic(domain: DomainSpec, scale: float = 1.0):
    base = _parabola(domain, 1.0)
    return lambda x: scale * base(x) ** 2


def _sine(domain: DomainSpec, modes=(1,), amplitudes=None):
    basis = build_basis(domain, max(int(m) for m in modes))
    amps = [1.0] * len(modes) if amplitudes is None else [float(a) for a in amplitudes]
    if len(amps) != len(modes):
        raise ParameterDomainError("modes and amplitudes differ in length")

    def phi(x):
        x = np.asarray(x, dtype=float)
        return sum(a * basis.evaluate(int(m), x) for m, a in zip(modes, amps))

    return phi


NAMED_DATA = {"parabola": _parabola, "quartic": _quartic, "sine": _sine}


def named_initial_data(basis: EigenBasis, name: str, **params) -> InitialData:
    """Built-in data: ``parabola`` x(L-x), ``quartic`` [x(L-x)]^2, ``sine``
    (sum of ``amplitudes`` times v_m over ``modes``, indices into the sorted basis).

    ``sine`` data are projected exactly instead of by quadrature.
    """
    if name not in NAMED_DATA:
        raise ParameterDomainError(f"unknown initial datum {name!r}; choose from {sorted(NAMED_DATA)}")
    if name == "sine":
        modes = [int(m) for m in params.get("modes", (1,))]
        amps = params.get("amplitudes")
        amps = [1.0] * len(modes) if amps is None else [float(a) for a in amps]
        if len(amps) != len(modes):
            raise ParameterDomainError("modes and amplitudes differ in length")
        if any(m < 1 or m > basis.K for m in modes):
            raise ParameterDomainError(f"sine modes must lie in 1..{basis.K}")
        c = np.zeros(basis.K)
        for m, a in zip(modes, amps):
            c[m - 1] += a
        return from_coefficients(basis, c, label="sine")
    phi = NAMED_DATA[name](basis.domain, **params)
    return fourier_coefficients(basis, phi, label=name)


# --- smoothness proxy ------------------------------------------------------

@dataclass(frozen=True)
class DecayReport:
    value: float
    terms: np.ndarray
    tail_decreasing: bool

    @property
    def flag(self) -> bool:
        """True when the weighted terms are not decreasing at the tail."""
        return not self.tail_decreasing

    def __float__(self) -> float:
        return self.value


def decay_report(data: InitialData, basis: EigenBasis, tau: float, tail: int = 8) -> DecayReport:
    """Partial sum of lambda_k^(2(tau+1)) phi_k^2 over the retained modes."""
    N = basis.domain.dim
    if not tau > N / 4.0:
        raise ParameterDomainError(f"tau must exceed N/4 = {N / 4}, got {tau}")
    K = min(basis.K, data.K)
    lam = basis.eigenvalues[:K]
    c = data.coefficients[:K]
    terms = lam ** (2.0 * (tau + 1.0)) * c**2
    nz = terms[np.abs(c) > DEGENERATE_TOL]
    tail_terms = nz[-tail:]
    decreasing = bool(tail_terms.size < 2 or np.all(np.diff(tail_terms) < 0.0))
    return DecayReport(float(np.sum(terms)), terms, decreasing)
