"""Forward/backward Cole-Hopf transforms and the step-plus-compact split of v0.

v0 = exp(-U0/2) is written as -a*sign(x)/2 + b + w0(x) with w0 supported in
[-L, L]; the heat flow of the step part is known in closed form.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .quadrature import integrate
from .scenario import Scenario

NEAR_ZERO = 1e-300


class NearSingularity(ZeroDivisionError):
    """|v| fell below the near-zero threshold: the query point sits on a singularity of u."""


@dataclass(frozen=True)
class Segment:
    """A piece [lo, hi] of supp w0 with no interior breakpoints.

    ``value`` is set when w0 is constant on the piece; otherwise ``scale`` is
    the length over which w0 varies appreciably.
    """
    lo: float
    hi: float
    scale: float
    value: Optional[complex] = None


@dataclass(frozen=True)
class StepDecomposition:
    B: complex
    w0: Callable
    L: float
    segments: tuple
    c: complex = field(default=None)
    A: complex = 1.0 + 0j
    v0: Optional[Callable] = None

    def __post_init__(self):
        if self.c is None:
            object.__setattr__(self, "c", remainder_mass(self.w0, self.segments))

    @property
    def a(self):
        return self.A - self.B

    @property
    def b(self):
        return 0.5 * (self.A + self.B)


def remainder_mass(w0, segments, tol=1e-13):
    total = 0j
    for seg in segments:
        if seg.value is not None:
            total += seg.value * (seg.hi - seg.lo)
        else:
            val, _ = integrate(w0, seg.lo, seg.hi, tol=tol, initial=8)
            total += val
    return total


def _scenario_segments(s: Scenario, w0):
    L = s.L
    if L == 0.0:
        return ()
    pts = {-L, 0.0, L}
    for p in s.primitives:
        for q in (p.center - p.radius, p.center, p.center + p.radius):
            if -L <= q <= L:
                pts.add(q)
    pts = sorted(pts)
    segs = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo <= 0:
            continue
        mid = 0.5 * (lo + hi)
        radii = [p.radius for p in s.primitives if p.center - p.radius < mid < p.center + p.radius]
        if radii:
            segs.append(Segment(lo, hi, min(radii)))
        else:
            segs.append(Segment(lo, hi, hi - lo, complex(w0(np.array([mid]))[0])))
    return tuple(segs)


def forward(s: Scenario) -> StepDecomposition:
    s.require_compact()
    L = s.L
    B = cmath.exp(-0.5 * s.total_mass)
    a = 1.0 - B
    b = 0.5 * (1.0 + B)

    def v0(x):
        return np.exp(-0.5 * s.U0(x))

    def w0(x):
        x = np.asarray(x, dtype=float)
        out = v0(x) + 0.5 * a * np.sign(x) - b
        out[np.abs(x) > L] = 0.0
        return out

    return StepDecomposition(B=B, w0=w0, L=L, segments=_scenario_segments(s, w0), v0=v0)


def backward(v, v_x):
    """u = -2 v_x / v; raises NearSingularity where |v| < 1e-300."""
    v = np.asarray(v, dtype=complex)
    if np.any(np.abs(v) < NEAR_ZERO):
        raise NearSingularity("v vanishes to within 1e-300")
    out = -2.0 * np.asarray(v_x, dtype=complex) / v
    return out[()] if out.ndim == 0 else out


def u_evaluator(field):
    """Return u(x, t) = -2 v_x / v for any object with eval(x, t) -> (v, v_x, v_xx)."""
    def u(x, t):
        v, vx, _ = field.eval(x, t)
        return backward(v, vx)
    return u


def burgers_residual(u, x, t, h, singularities=()):
    """Centred-difference estimate of u_t + u u_x - u_xx at (x, t)."""
    if h <= 0:
        raise ValueError("step h must be positive")
    if t - h <= 0:
        raise ValueError("stencil reaches t <= 0")
    for xs, ts in singularities:
        if np.hypot(x - xs, t - ts) <= 3 * h:
            raise NearSingularity(f"stencil at ({x}, {t}) within 3h of singularity ({xs}, {ts})")
    xs = np.array([x - h, x, x + h, x, x])
    ts = np.array([t, t, t, t - h, t + h])
    vals = np.asarray(u(xs, ts), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise NearSingularity("stencil touches a singular point")
    um, u0, up, ud, uu = vals
    u_t = (uu - ud) / (2 * h)
    u_x = (up - um) / (2 * h)
    u_xx = (up - 2 * u0 + um) / (h * h)
    return complex(u_t + u0 * u_x - u_xx)


@dataclass(frozen=True)
class SteadyState:
    beta: complex

    def __post_init__(self):
        if complex(self.beta).imag == 0:
            raise ValueError("steady state -2/(x+beta) needs Im(beta) != 0")

    def __call__(self, x, t=None):
        return -2.0 / (np.asarray(x, dtype=float) + self.beta)
