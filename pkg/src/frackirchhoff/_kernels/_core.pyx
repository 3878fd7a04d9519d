# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_fallback.py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, exp, log, floor

cnp.import_array()


def power_sums(const double[::1] u, const double[::1] weights, double q, double p):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double a, la, sq = 0.0, sp = 0.0
    for i in range(n):
        a = fabs(u[i])
        if a != 0.0:
            # one log shared by both powers is cheaper than two pow calls
            la = log(a)
            sq += weights[i] * exp(q * la)
            sp += weights[i] * exp(p * la)
    return sq, sp


def power_terms(const double[::1] u, double mu, double q, double p):
    cdef Py_ssize_t i, n = u.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double a, la, v
    for i in range(n):
        v = u[i]
        a = fabs(v)
        if a == 0.0:
            o[i] = 0.0
        else:
            la = log(a)
            o[i] = (mu * exp((q - 2.0) * la) + exp((p - 2.0) * la)) * v
    return out


def lagrange4(const double[::1] ext, double dr, const double[::1] x):
    cdef Py_ssize_t i, m = x.shape[0], next_ = ext.shape[0]
    cdef long j
    cdef double xi, t, lm1, l0, l1, l2
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(m):
        xi = x[i] / dr
        j = <long>floor(xi)
        if j < -1 or j + 4 >= next_:
            continue
        t = xi - j
        lm1 = -t * (t - 1.0) * (t - 2.0) / 6.0
        l0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
        l1 = -(t + 1.0) * t * (t - 2.0) / 2.0
        l2 = (t + 1.0) * t * (t - 1.0) / 6.0
        o[i] = lm1 * ext[j + 1] + l0 * ext[j + 2] + l1 * ext[j + 3] + l2 * ext[j + 4]
    return out


cdef double _eval(const double[::1] coef, const double[::1] expo, int order, double tau) nogil:
    cdef Py_ssize_t j
    cdef double total = 0.0, e, f
    cdef int k
    for j in range(coef.shape[0]):
        if coef[j] != 0.0:
            e = expo[j]
            f = 1.0
            for k in range(order):
                f *= e
            total += coef[j] * f * exp(e * tau)
    return total


def fiber_eval(coef, expo, int order, double tau):
    # called once per scalar evaluation, so skip the array conversion
    cdef double total = 0.0, c, e, f
    cdef int k
    for c, e in zip(coef, expo):
        if c != 0.0:
            f = 1.0
            for k in range(order):
                f *= e
            total += c * f * exp(e * tau)
    return total


def fiber_root(coef, expo, int order, double lo, double hi, double tol, int maxiter):
    cdef const double[::1] c = np.ascontiguousarray(coef, dtype=np.float64)
    cdef const double[::1] e = np.ascontiguousarray(expo, dtype=np.float64)
    cdef double flo = _eval(c, e, order, lo)
    cdef double fhi = _eval(c, e, order, hi)
    cdef double x, fx, dfx, xn
    cdef int it
    cdef bint step_ok
    if flo == 0.0:
        return lo, 0
    if fhi == 0.0:
        return hi, 0
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError("interval does not bracket a sign change")
    x = 0.5 * (lo + hi)
    for it in range(1, maxiter + 1):
        fx = _eval(c, e, order, x)
        if fx == 0.0:
            return x, it
        if (fx > 0.0) == (flo > 0.0):
            lo = x
            flo = fx
        else:
            hi = x
        dfx = _eval(c, e, order + 1, x)
        step_ok = False
        if dfx != 0.0:
            xn = x - fx / dfx
            if lo < xn < hi:
                step_ok = True
        if not step_ok:
            xn = 0.5 * (lo + hi)
        if fabs(xn - x) < tol or (hi - lo) < tol:
            return xn, it
        x = xn
    return x, maxiter
