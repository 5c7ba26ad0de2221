"""Large-time profile in the boundary case |J| = int|Im u0| = 2 pi.

u(x, t) ~ -2 / ((x - y_a sqrt(2t)) + beta) with an O(1/sqrt t) error, where
alpha = b/a, beta = -c/a and F(y_a) = alpha = tanh(I/4)/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifier import GLOBAL_BOUNDARY, classify
from .colehopf import NearSingularity, backward, forward
from .heatfield import HeatField
from .scenario import Scenario
from .special import F_inv


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class AsymptoticProfile:
    y_alpha: float
    alpha: float
    beta: complex
    a: float
    b: float
    c: complex
    I: float

    def pole(self, t):
        """Real part of the pole of the profile at time t."""
        return self.y_alpha * math.sqrt(2.0 * t) - self.beta.real


def constants(I, c):
    e = math.exp(-0.5 * I)
    a = 1.0 + e
    b = 0.5 * (1.0 - e)
    alpha = b / a
    return a, b, alpha, -complex(c) / a


def profile(s: Scenario, hf: HeatField | None = None) -> AsymptoticProfile:
    cl = classify(s)
    if cl.verdict != GLOBAL_BOUNDARY:
        raise ProfileError(f"scenario is {cl.verdict}, the profile needs the boundary case")
    dec = hf.dec if hf is not None else forward(s)
    I = cl.evidence.I
    a, b, alpha, beta = constants(I, dec.c)
    if abs(complex(dec.c).imag) <= 1e-12:
        raise ProfileError("Im c vanishes: Im beta = 0, the profile is singular")
    y = F_inv(alpha, tol=1e-15)
    return AsymptoticProfile(y_alpha=y, alpha=alpha, beta=beta, a=a, b=b, c=complex(dec.c), I=I)


def profile_value(p: AsymptoticProfile, x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    out = -2.0 / ((x - p.y_alpha * np.sqrt(2.0 * t)) + p.beta)
    return out[()] if out.ndim == 0 else out


def sample_grid(p: AsymptoticProfile, t, L, n_inner=4096, n_far=64, window=6.0):
    """Self-similar window |x|/sqrt(2t) <= window plus log-spaced far field per side."""
    r = math.sqrt(2.0 * t)
    inner = np.linspace(-window * r, window * r, n_inner)
    inner = np.union1d(inner, [p.pole(t)])
    start = window * r
    far = np.geomspace(start * 1.01, max(start * 1e4, 1e3 * (L + 1)), n_far)
    return np.concatenate([-far[::-1], inner, far])


@dataclass(frozen=True)
class ConvergenceRow:
    t: float
    sup_error: float
    sqrt_t_times_error: float
    argmax_x: float


def convergence_report(s: Scenario, times, hf: HeatField | None = None):
    if hf is None:
        hf = HeatField(forward(s))
    p = profile(s, hf)
    rows = []
    for t in times:
        t = float(t)
        x = sample_grid(p, t, s.L)
        v, vx, _ = hf.eval(x, t)
        try:
            u = backward(v, vx)
        except NearSingularity as exc:
            raise ProfileError(f"v vanishes on the sampling grid at t = {t}") from exc
        err = np.abs(u - profile_value(p, x, t))
        k = int(np.argmax(err))
        rows.append(ConvergenceRow(t, float(err[k]), float(err[k] * math.sqrt(t)), float(x[k])))
    return rows


def fitted_pole(hf: HeatField, t, center, width, n=4001):
    """x minimising |1/u(x, t)| on a grid around ``center``, polished by golden search."""
    from scipy.optimize import minimize_scalar

    x = np.linspace(center - width, center + width, n)
    v, vx, _ = hf.eval(x, t)
    inv = np.abs(v / vx)
    k = int(np.argmin(inv))
    lo, hi = x[max(k - 1, 0)], x[min(k + 1, n - 1)]

    def f(xx):
        v1, vx1, _ = hf.eval(xx, t)
        return abs(complex(v1) / complex(vx1))

    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    return float(res.x)
