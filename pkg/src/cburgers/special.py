"""Normal-integral kernels: F, its inverse, and the heat kernel with x-derivatives.

F(y) = (2 pi)^(-1/2) * int_0^y exp(-s^2/2) ds, so F(+-inf) = +-1/2, and
F(x / sqrt(2t)) is the heat flow of sign(x)/2.
"""
import math

import numpy as np
from scipy.special import erf, erfc

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def F(y):
    y = np.asarray(y, dtype=float)
    return 0.5 * erf(y / SQRT2)


def F_prime(y):
    y = np.asarray(y, dtype=float)
    return INV_SQRT_2PI * np.exp(-0.5 * y * y)


def upper_tail(y):
    """1/2 - F(y), accurate in relative terms for large positive y."""
    y = np.asarray(y, dtype=float)
    return 0.5 * erfc(y / SQRT2)


def F_inv(alpha, bracket=None, tol=1e-14, maxiter=200):
    """Solve F(y) = alpha for |alpha| < 1/2 by safeguarded Newton.

    Newton steps that leave the current bracket are replaced by bisection.
    For |alpha| close to 1/2 the residual is taken on the upper tail so the
    root keeps full relative accuracy.
    """
    alpha = float(alpha)
    if not abs(alpha) < 0.5:
        raise ValueError(f"F_inv needs |alpha| < 1/2, got {alpha!r}")
    if alpha == 0.0:
        return 0.0
    sign = 1.0 if alpha > 0 else -1.0
    a = abs(alpha)
    q = 0.5 - a
    use_tail = a > 0.25

    def resid(y):
        if use_tail:
            return q - float(upper_tail(y))
        return float(F(y)) - a

    lo, hi = (0.0, 40.0) if bracket is None else (abs(bracket[0]), abs(bracket[1]))
    lo, hi = min(lo, hi), max(lo, hi)
    r_lo, r_hi = resid(lo), resid(hi)
    if r_lo > 0 or r_hi < 0:
        raise ValueError(f"bracket [{lo}, {hi}] does not contain the root of F(y) = {a}")
    y = 0.5 * (lo + hi) if bracket is not None else min(a * 2.5, 8.0)
    for _ in range(maxiter):
        r = resid(y)
        if r == 0.0:
            break
        if r < 0:
            lo = y
        else:
            hi = y
        d = float(F_prime(y))
        y_new = y - r / d if d > 0 else 0.5 * (lo + hi)
        if not (lo < y_new < hi):
            y_new = 0.5 * (lo + hi)
        if abs(y_new - y) <= tol * max(1.0, abs(y)) or hi - lo <= tol * max(1.0, abs(y)):
            y = y_new
            break
        y = y_new
    return sign * y


def heat_kernel(z, t):
    """Gamma(z, t) = (4 pi t)^(-1/2) exp(-z^2 / 4t)."""
    z = np.asarray(z, dtype=float)
    return np.exp(-z * z / (4.0 * t)) / np.sqrt(4.0 * np.pi * t)


def heat_kernel_x(z, t):
    return -z / (2.0 * t) * heat_kernel(z, t)


def heat_kernel_xx(z, t):
    return (z * z / (4.0 * t * t) - 1.0 / (2.0 * t)) * heat_kernel(z, t)
