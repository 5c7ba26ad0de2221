"""Distributional residual of u = -2 v_x / v across a simple zero of v.

I(tau) integrates h(t) = int (-u phi_t - u^2 phi_x / 2 - u phi_xx) dx over t
outside (t0 - tau, t0 + tau). Integrating by parts turns I(tau) into the
boundary form int [u phi](x, t0 + tau) - [u phi](x, t0 - tau) dx, which is
computed separately as a cross-check. As tau -> 0 both tend to
+-4 pi i phi(x0, t0), with the sign of Im(conj(a) b).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .quadrature import QuadratureError, integrate
from .zerofinder import ZeroRecord, find_zeros

TAUS = (1e-2, 1e-3, 1e-4)


class ResidualError(ValueError):
    pass


@dataclass(frozen=True)
class _Bump:
    xc: float
    tc: float
    r: float
    amp: float = 1.0


class TestFunction:
    """Sum of radial bumps amp * exp(-1/(1 - rho^2)), rho = |(x, t) - center| / r."""

    __test__ = False  # not a pytest class

    def __init__(self, parts):
        self.parts = tuple(parts)
        if not self.parts:
            raise ValueError("empty test function")

    @classmethod
    def bump(cls, center, radius, amp=1.0):
        if not radius > 0:
            raise ValueError("radius must be positive")
        return cls([_Bump(float(center[0]), float(center[1]), float(radius), float(amp))])

    def __add__(self, other):
        return TestFunction(self.parts + other.parts)

    def scaled(self, lam):
        return TestFunction([_Bump(p.xc, p.tc, p.r, p.amp * lam) for p in self.parts])

    @property
    def t_range(self):
        return min(p.tc - p.r for p in self.parts), max(p.tc + p.r for p in self.parts)

    def x_range(self, t):
        """Union hull of the x-sections of the support at time t (None if empty)."""
        lo, hi = math.inf, -math.inf
        for p in self.parts:
            d = 1.0 - ((t - p.tc) / p.r) ** 2
            if d > 0:
                w = p.r * math.sqrt(d)
                lo, hi = min(lo, p.xc - w), max(hi, p.xc + w)
        return None if lo >= hi else (lo, hi)

    def eval(self, x, t):
        """(phi, phi_x, phi_t, phi_xx)."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        out = [np.zeros(np.broadcast(x, t).shape) for _ in range(4)]
        for p in self.parts:
            dx, dt = x - p.xc, t - p.tc
            s = (dx * dx + dt * dt) / (p.r * p.r)
            inside = s < 1.0
            q = np.where(inside, 1.0 - s, 1.0)
            phi = np.where(inside, p.amp * np.exp(-1.0 / q), 0.0)
            d1 = -phi / q ** 2
            d2 = phi * (2.0 * s - 1.0) / q ** 4
            g = 2.0 / (p.r * p.r)
            out[0] += phi
            out[1] += d1 * g * dx
            out[2] += d1 * g * dt
            out[3] += d2 * (g * dx) ** 2 + d1 * g
        return tuple(o[()] if o.ndim == 0 else o for o in out)

    def __call__(self, x, t):
        return self.eval(x, t)[0]


def _u(fld, x, t):
    v, vx, _ = fld.eval(x, t)
    return -2.0 * np.asarray(vx) / np.asarray(v)


def _pole_points(zero, t):
    """Breakpoints around the pole of u near a simple zero: x0 - (b/a)(t - t0), graded by its offset."""
    if zero is None:
        return ()
    r = -(zero.b_lin / zero.a_lin) * (t - zero.t0)
    xp, w = zero.x0 + r.real, abs(r.imag)
    pts = [xp]
    for k in range(5):
        pts += [xp - w * 10 ** k, xp + w * 10 ** k]
    return tuple(pts)


def h_of_t(fld, phi: TestFunction, t, x_peak=None, t0=None, tol=1e-9, zero=None, max_intervals=200000):
    """h(t) by adaptive quadrature over the x-section of supp phi.

    ``zero`` (a ZeroRecord) adds breakpoints at the moving pole of u.
    """
    if t0 is not None and abs(t - t0) < 1e-12:
        raise ResidualError("h is not defined at the singular time")
    span = phi.x_range(t)
    if span is None:
        return 0j
    pts = ((x_peak,) if x_peak is not None else ()) + _pole_points(zero, t)
    pts = tuple(p for p in pts if span[0] < p < span[1])
    tv = float(t)

    def f(x):
        u = _u(fld, x, tv)
        p, px, pt, pxx = phi.eval(x, tv)
        return -u * pt - 0.5 * u * u * px - u * pxx

    val, _ = integrate(f, span[0], span[1], tol=tol, points=pts, initial=4, max_intervals=max_intervals)
    return complex(val)


def boundary_form(fld, phi: TestFunction, t0, tau, x_peak=None, tol=1e-10, zero=None):
    """int (u phi)(x, t0 + tau) - (u phi)(x, t0 - tau) dx."""
    total = 0j
    for t, sgn in ((t0 + tau, 1.0), (t0 - tau, -1.0)):
        span = phi.x_range(t)
        if span is None:
            continue
        f = lambda x, t=t: _u(fld, x, t) * phi(x, t)
        pts = ((x_peak,) if x_peak is not None else ()) + _pole_points(zero, t)
        pts = tuple(p for p in pts if span[0] < p < span[1])
        val, _ = integrate(f, span[0], span[1], tol=tol, points=pts, initial=4, max_intervals=200000)
        total += sgn * val
    return complex(total)


def _slab_integral(fld, phi, t0, tau, x_peak, tol_x, tol_t, zero=None):
    """int h dt over supp phi minus (t0 - tau, t0 + tau)."""
    t_lo, t_hi = phi.t_range

    def H(ts):
        return np.array([h_of_t(fld, phi, float(t), x_peak, tol=tol_x, zero=zero) for t in ts])

    total = 0j
    for a, b, pk in ((t_lo, t0 - tau, t0 - tau), (t0 + tau, t_hi, t0 + tau)):
        if b > a:
            val, _ = integrate(H, a, b, tol=tol_t, points=(), initial=4, max_intervals=4000)
            total += val
    return complex(total)


@dataclass
class ResidualResult:
    I_value: complex
    predicted: complex
    sign: int
    h_trace: list
    taus: tuple = TAUS
    I_tau: list = dc_field(default_factory=list)
    boundary_tau: list = dc_field(default_factory=list)
    boundary_value: complex = 0j
    tau_orders: list = dc_field(default_factory=list)

    @property
    def relative_error(self):
        return abs(self.I_value - self.predicted) / abs(self.predicted)

    @property
    def route_agreement(self):
        return abs(self.I_value - self.boundary_value) / max(abs(self.boundary_value), 1e-300)

    def to_json(self):
        return {
            "I_re": self.I_value.real, "I_im": self.I_value.imag,
            "predicted_re": self.predicted.real, "predicted_im": self.predicted.imag,
            "sign": self.sign, "tau_orders": list(self.tau_orders),
        }


def _richardson(vals, taus):
    """Limit of vals(tau) assuming first-order convergence; also observed orders."""
    v1, v2, v3 = vals
    ratio = taus[1] / taus[2]
    limit = v3 + (v3 - v2) / (ratio - 1.0)
    orders = []
    d12, d23 = abs(v1 - v2), abs(v2 - v3)
    if d12 > 0 and d23 > 0:
        orders.append(math.log(d12 / d23) / math.log(taus[0] / taus[1]))
    return limit, orders


def residual(fld, zero: ZeroRecord, phi: TestFunction, taus=TAUS, check_zeros=True,
             tol_x=1e-9, tol_t=1e-8):
    if not zero.simple:
        raise ResidualError("the residual formula needs a simple zero")
    x0, t0 = zero.x0, zero.t0
    if check_zeros:
        t_lo, t_hi = phi.t_range
        xs = [p.xc - p.r for p in phi.parts] + [p.xc + p.r for p in phi.parts]
        rect = (min(xs), max(xs), max(t_lo, 1e-9), t_hi)
        size = min(p.r for p in phi.parts) / 4
        found = find_zeros(fld, rect, cell=size, subdiv=1)
        inside = [z for z in found if phi(z.x0, z.t0) > 0]
        others = [z for z in inside if math.hypot(z.x0 - x0, z.t0 - t0) > 1e-6]
        if others:
            raise ResidualError(f"second zero in supp phi at ({others[0].x0}, {others[0].t0})")
    cross = (zero.a_lin.conjugate() * zero.b_lin).imag
    sign = 1 if cross > 0 else -1
    predicted = sign * 4j * math.pi * float(phi(x0, t0))
    I_tau = [_slab_integral(fld, phi, t0, tau, x0, tol_x, tol_t, zero) for tau in taus]
    B_tau = [boundary_form(fld, phi, t0, tau, x0, zero=zero) for tau in taus]
    I_lim, orders = _richardson(I_tau, taus)
    B_lim, _ = _richardson(B_tau, taus)
    trace = []
    for k in range(2, 7):
        for s in (-1, 1):
            t = t0 + s * 10.0 ** (-k)
            try:
                trace.append((t, h_of_t(fld, phi, t, x0, tol=tol_x, zero=zero, max_intervals=5000)))
            except QuadratureError:
                # |v| near the pole is at the evaluator's noise level
                trace.append((t, complex(math.nan, math.nan)))
    return ResidualResult(I_value=I_lim, predicted=predicted, sign=sign, h_trace=trace,
                          taus=tuple(taus), I_tau=I_tau, boundary_tau=B_tau,
                          boundary_value=B_lim, tau_orders=orders)


def off_singularity_integral(fld, phi: TestFunction, tol_x=1e-9, tol_t=1e-8):
    """int h dt over supp phi when no zero of v lies in it (should vanish)."""
    t_lo, t_hi = phi.t_range

    def H(ts):
        return np.array([h_of_t(fld, phi, float(t), tol=tol_x) for t in ts])

    val, _ = integrate(H, t_lo, t_hi, tol=tol_t, initial=4, max_intervals=4000)
    return complex(val)
