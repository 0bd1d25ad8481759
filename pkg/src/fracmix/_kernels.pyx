# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contract as ``fracmix._kernels_py``."""

import numpy as np
cimport numpy as cnp
from scipy.linalg.cython_blas cimport ddot
from libc.math cimport (exp, log, lgamma, tgamma, sqrt, cos, sin, atan2,
                        fabs, floor, ceil, pow, M_PI, INFINITY, NAN)

cnp.import_array()

cdef double TWO_PI = 2.0 * M_PI
cdef double LOG_TOL = log(1e-15)
cdef double M_MAX = 6.0
cdef double M_MIN = 1e-2
cdef int N_M = 32
cdef int N_MAX = 2000
cdef double SERIES_MAX_ARG = 5.0
cdef double SERIES_MAX_TERM = 1e2
cdef int SERIES_MAX_N = 2000

SERIES_MAX_ARG_PY = SERIES_MAX_ARG


cdef double _inv_gamma(double mu) nogil:
    if mu <= 0.0 and mu == floor(mu):
        return 0.0
    return 1.0 / tgamma(mu)


cdef int _series(double rho, double mu, double x, double* out) nogil:
    cdef double ax = -x
    cdef double lax, s = 0.0, comp = 0.0, prev = INFINITY
    cdef double arg, lt, mag, term, t, a
    cdef double log_cap = log(SERIES_MAX_TERM)
    cdef bint peaked = False
    cdef int n
    if ax == 0.0:
        out[0] = _inv_gamma(mu)
        return 0
    lax = log(ax)
    for n in range(SERIES_MAX_N):
        arg = rho * n + mu
        if arg <= 0.0 and arg == floor(arg):
            mag = 0.0
        else:
            lt = n * lax - lgamma(arg)
            if lt > log_cap:
                out[0] = NAN
                return 1
            mag = exp(lt)
            if arg < 0.0 and (<long>floor(arg)) % 2 != 0:
                mag = -mag
        term = -mag if n % 2 else mag
        t = s + term
        if fabs(s) >= fabs(term):
            comp += (s - t) + term
        else:
            comp += (term - t) + s
        s = t
        a = fabs(term)
        if n > 0 and a < prev:
            peaked = True
        prev = a
        if peaked and a < 1e-18 * (fabs(s) if fabs(s) > 1.0 else 1.0):
            out[0] = s + comp
            return 0
    out[0] = NAN
    return 1


cdef double _left_rate(double m, double c_l, double p) nogil:
    cdef double best = INFINITY, c, w, sing, a
    cdef double fracs[4]
    cdef int i
    fracs[0] = 0.5; fracs[1] = 0.65; fracs[2] = 0.8; fracs[3] = 0.9
    for i in range(4):
        c = fracs[i] * c_l
        w = m * (1.0 - c) * (1.0 - c)
        sing = p * (-log(w) if w < 1.0 else 0.0)
        a = (w + sing - LOG_TOL) / c
        if a < best:
            best = a
    return best


cdef double _right_rate(double m, double c_r) nogil:
    cdef double c = sqrt(1.0 - LOG_TOL / m)
    if c_r < c:
        c = c_r
    return (m * (1.0 + c) * (1.0 + c) - LOG_TOL) / c


cdef int _params(double rho, double mu, double ax,
                 double* m_out, double* h_out, int* res_out) nogil:
    cdef double p = mu - rho
    cdef double phi_p = 0.0, ratio = M_MAX / M_MIN
    cdef double m, u_max, c_l, c_r, a
    cdef int i, n, best_n = N_MAX + 1
    if p < 0.0:
        p = 0.0
    if rho > 1.0:
        phi_p = 0.5 * pow(ax, 1.0 / rho) * (1.0 + cos(M_PI / rho))
    best_n = N_MAX + 1
    m_out[0] = 0.0; h_out[0] = 0.0; res_out[0] = 0
    for i in range(N_M):
        m = M_MIN * pow(ratio, i / (N_M - 1.0))
        u_max = sqrt(1.0 - (LOG_TOL - 2.0) / m)
        if phi_p < m:
            c_l = 1.0 - sqrt(phi_p / m)
            if c_l >= 0.05:
                a = _left_rate(m, c_l, p)
                if _right_rate(m, INFINITY) > a:
                    a = _right_rate(m, INFINITY)
                n = <int>ceil(u_max * a / TWO_PI)
                if n < best_n:
                    best_n = n
                    m_out[0] = m; h_out[0] = TWO_PI / a; res_out[0] = 0
        if phi_p > m:
            c_r = 0.9 * (sqrt(phi_p / m) - 1.0)
            if c_r >= 0.05:
                a = _left_rate(m, 1.0, p)
                if _right_rate(m, c_r) > a:
                    a = _right_rate(m, c_r)
                n = <int>ceil(u_max * a / TWO_PI)
                if n < best_n:
                    best_n = n
                    m_out[0] = m; h_out[0] = TWO_PI / a; res_out[0] = 1
    if best_n > N_MAX:
        return -1
    return best_n


cdef int _contour(double rho, double mu, double x, double* out) nogil:
    cdef double ax = -x
    cdef double m, h, u, e = rho - mu, acc = 0.0
    cdef double zr, zi, lr, li, er, ei, mag, dr, di, nr, ni, gr, gi, den
    cdef double r, sr, si, ang
    cdef int k, n_nodes, with_res
    n_nodes = _params(rho, mu, ax, &m, &h, &with_res)
    if n_nodes < 0:
        out[0] = NAN
        return 2
    for k in range(n_nodes + 1):
        u = k * h
        # z = m (1 + iu)^2, dz = 2im(1 + iu)
        zr = m * (1.0 - u * u)
        zi = 2.0 * m * u
        lr = 0.5 * log(zr * zr + zi * zi)
        li = atan2(zi, zr)
        # numerator exp(z + e log z) * dz
        er = zr + e * lr
        ei = zi + e * li
        mag = exp(er)
        nr = mag * cos(ei)
        ni = mag * sin(ei)
        dr = -2.0 * m * u
        di = 2.0 * m
        gr = nr * dr - ni * di
        gi = nr * di + ni * dr
        # denominator exp(rho log z) + ax
        mag = exp(rho * lr)
        dr = mag * cos(rho * li) + ax
        di = mag * sin(rho * li)
        den = dr * dr + di * di
        # imaginary part of g / (dr + i di)
        nr = (gi * dr - gr * di) / den
        acc += nr if k == 0 else 2.0 * nr
    out[0] = h * acc / TWO_PI
    if with_res:
        r = pow(ax, 1.0 / rho)
        ang = M_PI / rho
        sr = r * cos(ang)
        si = r * sin(ang)
        # s^(1-mu) e^s
        er = (1.0 - mu) * log(r) + sr
        ei = (1.0 - mu) * ang + si
        out[0] += (2.0 / rho) * exp(er) * cos(ei)
    return 0


cdef int _eval(double rho, double mu, double x, double* out) nogil:
    cdef int st
    if x == 0.0:
        out[0] = _inv_gamma(mu)
        return 0
    if -x <= SERIES_MAX_ARG:
        st = _series(rho, mu, x, out)
        if st == 0:
            return 0
    return _contour(rho, mu, x, out)


def ml_series(double rho, double mu, double x):
    cdef double v
    cdef int st = _series(rho, mu, x, &v)
    return v, st


def ml_contour(double rho, double mu, double x):
    cdef double v
    cdef int st = _contour(rho, mu, x, &v)
    return v, st


def contour_params(double rho, double mu, double ax):
    cdef double m, h
    cdef int res
    cdef int n = _params(rho, mu, ax, &m, &h, &res)
    return m, h, n, res


def ml_eval(double rho, double mu, double x):
    cdef double v
    cdef int st = _eval(rho, mu, x, &v)
    return v, st


def ml_eval_array(double rho, double mu, x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(xs.shape[0], dtype=np.float64)
    cdef Py_ssize_t i, n = xs.shape[0]
    cdef int st, worst = 0
    cdef double v
    with nogil:
        for i in range(n):
            st = _eval(rho, mu, xs[i], &v)
            out[i] = v
            if st > worst:
                worst = st
    return out.reshape(np.shape(x)), worst


def pole_phi(double rho, double ax):
    return 0.5 * pow(ax, 1.0 / rho) * (1.0 + cos(M_PI / rho))


def l1_weights(double order, Py_ssize_t n):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t j
    cdef double e = 1.0 - order, lo = 0.0, hi
    for j in range(n):
        hi = pow(j + 1.0, e)
        b[j] = hi - lo
        lo = hi
    return b


def caputo_l1(increments, double order, double h):
    cdef double[::1] d = np.ascontiguousarray(increments, dtype=np.float64)
    cdef int n = <int>d.shape[0], i, m, one = 1
    cdef double[::1] b = l1_weights(order, n)
    # r[k] = d[n-1-k], so sum_j b[j] d[i-j] is a unit-stride dot starting at r[n-1-i]
    cdef double[::1] r = np.ascontiguousarray(np.asarray(d)[::-1])
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double scale = pow(h, -order) / tgamma(2.0 - order)
    if n == 0:
        return out_arr
    with nogil:
        for i in range(n):
            m = i + 1
            out[i] = ddot(&m, &b[0], &one, &r[n - 1 - i], &one) * scale
    return out_arr
    with nogil:
        for i in range(n):
            # sum_j b[j] d[i - j]: BLAS walks d backwards for a negative stride
            m = i + 1
            out[i] = ddot(&m, &b[0], &one, &d[0], &back) * scale
    return out_arr
