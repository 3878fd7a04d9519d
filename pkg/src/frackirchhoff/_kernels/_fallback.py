"""Pure-Python/numpy implementations of the hot kernels.

Every function here has a twin in ``_core.pyx`` with the same signature and
the same results up to round-off. The package picks one at import time.
"""
import math

import numpy as np


def power_sums(u, weights, q, p):
    """Return ``(sum w|u|^q, sum w|u|^p)``."""
    a = np.abs(u)
    return float(np.dot(weights, a**q)), float(np.dot(weights, a**p))


def power_terms(u, mu, q, p):
    """Return ``mu |u|^(q-2) u + |u|^(p-2) u`` elementwise."""
    a = np.abs(u)
    return mu * a ** (q - 2.0) * u + a ** (p - 2.0) * u


def lagrange4(ext, dr, x):
    """4-point Lagrange interpolation on a uniform grid.

    ``ext[j]`` holds the sample at ``(j - 2) * dr``. Points whose stencil
    leaves the array evaluate to zero (zero extension on the right).
    """
    ext = np.asarray(ext, dtype=float)
    x = np.asarray(x, dtype=float)
    xi = x / dr
    j = np.floor(xi).astype(np.int64)
    t = xi - j
    out = np.zeros_like(x)
    ok = (j >= -1) & (j + 4 < ext.shape[0])
    jj = j[ok] + 2
    tt = t[ok]
    lm1 = -tt * (tt - 1.0) * (tt - 2.0) / 6.0
    l0 = (tt + 1.0) * (tt - 1.0) * (tt - 2.0) / 2.0
    l1 = -(tt + 1.0) * tt * (tt - 2.0) / 2.0
    l2 = (tt + 1.0) * tt * (tt - 1.0) / 6.0
    out[ok] = lm1 * ext[jj - 1] + l0 * ext[jj] + l1 * ext[jj + 1] + l2 * ext[jj + 2]
    return out


def fiber_eval(coef, expo, order, tau):
    """k-th derivative of ``sum_j coef_j exp(expo_j tau)``."""
    total = 0.0
    for c, e in zip(coef, expo):
        if c != 0.0:
            total += c * e**order * math.exp(e * tau)
    return total


def fiber_root(coef, expo, order, lo, hi, tol, maxiter):
    """Safeguarded Newton-bisection for a root of the ``order``-th derivative.

    ``[lo, hi]`` must bracket a sign change. Returns ``(root, iterations)``.
    """
    flo = fiber_eval(coef, expo, order, lo)
    fhi = fiber_eval(coef, expo, order, hi)
    if flo == 0.0:
        return lo, 0
    if fhi == 0.0:
        return hi, 0
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError("interval does not bracket a sign change")
    x = 0.5 * (lo + hi)
    for it in range(1, maxiter + 1):
        fx = fiber_eval(coef, expo, order, x)
        if fx == 0.0:
            return x, it
        if (fx > 0.0) == (flo > 0.0):
            lo, flo = x, fx
        else:
            hi = x
        dfx = fiber_eval(coef, expo, order + 1, x)
        step_ok = False
        if dfx != 0.0:
            xn = x - fx / dfx
            if lo < xn < hi:
                step_ok = True
        if not step_ok:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) < tol or (hi - lo) < tol:
            return xn, it
        x = xn
    return x, maxiter
